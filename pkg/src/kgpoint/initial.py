"""Initial data builders and the deterministic counter-based generator.

Random streams are produced by SplitMix64 evaluated at (seed, counter), so
any run is reproducible from its config alone and independent of library
RNG state:

    x      = (seed + (counter + 1) * 0x9E3779B97F4A7C15) mod 2^64
    x      = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9   mod 2^64
    x      = (x ^ (x >> 27)) * 0x94D049BB133111EB   mod 2^64
    value  = (x ^ (x >> 31)) >> 11, scaled by 2^-53 into [0, 1)

Gaussian deviates come from the Box-Muller transform of consecutive pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import FieldState, Grid
from .model import OscillatorModel
from .solitary import SolitaryWave, sample_profile, waves_from_amplitude

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def uniform_stream(seed: int, counter0: int, n: int) -> np.ndarray:
    """n doubles in [0, 1) at counters counter0 .. counter0 + n - 1."""
    counters = np.arange(counter0 + 1, counter0 + n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = np.uint64(seed) + counters * _GOLDEN
        x = (x ^ (x >> np.uint64(30))) * _MIX1
        x = (x ^ (x >> np.uint64(27))) * _MIX2
        x = x ^ (x >> np.uint64(31))
    return (x >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def normal_stream(seed: int, counter0: int, n: int) -> np.ndarray:
    """n standard normals (Box-Muller on consecutive uniform pairs)."""
    u = uniform_stream(seed, counter0, 2 * n)
    u1 = np.maximum(u[0::2], 2.0 ** -53)
    u2 = u[1::2]
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


@dataclass(frozen=True)
class GaussianSpec:
    amplitude: complex = 0.5
    width: float = 2.0
    center: float = 0.0
    momentum: float = 0.0
    omega_bar: float = 0.0


def gaussian_state(grid: Grid, spec: GaussianSpec) -> FieldState:
    """psi0 = A exp(-(x-c)^2/(2 w^2)) e^{i p x}, pi0 = -i omega_bar psi0."""
    x = grid.x
    env = np.exp(-((x - spec.center) ** 2) / (2.0 * spec.width ** 2))
    psi = spec.amplitude * env * np.exp(1j * spec.momentum * x)
    return FieldState(grid, psi, -1j * spec.omega_bar * psi, 0.0)


def solitary_state(model: OscillatorModel, grid: Grid, C: float,
                   theta: float = 0.0, branch: str = "plus") -> FieldState:
    waves = waves_from_amplitude(model, C)
    if not waves:
        raise ValueError(f"no solitary wave exists at amplitude C={C}")
    want_minus = branch == "minus"
    for w in waves:
        if (w.omega < 0) == want_minus:
            wave = SolitaryWave(w.amplitude, theta, w.kappa, w.omega)
            return sample_profile(wave, grid, 0.0)
    raise ValueError(f"no {branch}-branch wave at amplitude C={C}")


def seeded_gaussian_spec(seed: int) -> GaussianSpec:
    """Deterministic random Gaussian data for sweeps and attraction runs.

    Ranges keep the oscillator solidly in its nonlinear regime while the
    data stay compact: |A| in [0.4, 0.9], width in [1.5, 3], center in
    [-2, 2], momentum in [-0.5, 0.5], omega_bar in [-0.6, 0.6].
    """
    u = uniform_stream(seed, 0, 6)
    return GaussianSpec(
        amplitude=(0.4 + 0.5 * u[0]) * np.exp(2j * np.pi * u[1]),
        width=1.5 + 1.5 * u[2],
        center=-2.0 + 4.0 * u[3],
        momentum=-0.5 + 1.0 * u[4],
        omega_bar=-0.6 + 1.2 * u[5],
    )


def data_radius_gaussian(spec: GaussianSpec, tail: float = 1e-13) -> float:
    return abs(spec.center) + spec.width * float(np.sqrt(-2.0 * np.log(tail)))


def data_radius_exponential(kappa: float, tail: float = 1e-13) -> float:
    return float(-np.log(tail) / kappa)
