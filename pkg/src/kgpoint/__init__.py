"""kgpoint: 1D Klein-Gordon field coupled to a point nonlinear oscillator.

Simulation (Volterra trace solver plus Duhamel reconstruction), the
solitary-wave manifold, and the spectral diagnostics used to observe the
global attraction of finite-energy solutions to that manifold.
"""

from .fields import FieldState, Grid, zero_state
from .kernel import bessel_j0, free_evolve, free_trace, green_g, spectral_energy_norm
from .model import ModelKind, OscillatorModel, alpha, check_bound_below, force, potential
from .observables import ac_weight, charge, energy, k_of_omega, kappa_of_omega, norm_e
from .solitary import (Branch, LinearSpanFit, LinearWaveFamily, ManifoldDistance,
                       SolitaryWave, ZeroWave, distance_to_manifold, sample_profile,
                       waves_at_omega, waves_from_amplitude)
from .spectral import (OmegaLimitReport, SpectrumEstimate, TitchmarshResult, Window,
                       dominant_frequency, gap_mass_fraction, late_window,
                       modulus_variation, omega_limit_report, titchmarsh_check,
                       windowed_spectrum)
from .volterra import (SolveReport, SolveStatus, TraceSeries, reconstruct_field,
                       solve_full, solve_trace)

__all__ = [
    "Branch", "FieldState", "Grid", "LinearSpanFit", "LinearWaveFamily",
    "ManifoldDistance", "ModelKind", "OmegaLimitReport", "OscillatorModel",
    "SolitaryWave", "SolveReport", "SolveStatus", "SpectrumEstimate",
    "TitchmarshResult", "TraceSeries", "Window", "ZeroWave", "ac_weight",
    "alpha", "bessel_j0", "charge", "check_bound_below", "distance_to_manifold",
    "dominant_frequency", "energy", "force", "free_evolve", "free_trace",
    "gap_mass_fraction", "green_g", "k_of_omega", "kappa_of_omega",
    "late_window", "modulus_variation", "norm_e", "omega_limit_report",
    "potential", "reconstruct_field", "sample_profile", "solve_full",
    "solve_trace", "spectral_energy_norm", "titchmarsh_check",
    "waves_at_omega", "waves_from_amplitude", "windowed_spectrum", "zero_state",
]

__version__ = "0.1.0"
