import numpy as np
import pytest

from kgpoint import (FieldState, Grid, OscillatorModel, ac_weight, charge, energy,
                     k_of_omega, kappa_of_omega, norm_e)
from kgpoint.fields import zero_state
from kgpoint.initial import GaussianSpec, gaussian_state
from kgpoint.solitary import profile_norm_e_sq, sample_profile


class TestEnergy:
    def test_zero_state_gives_u0(self, small_grid):
        model = OscillatorModel.polynomial(1.0, (0.2, -1.0, 1.0))
        assert energy(model, zero_state(small_grid)) == pytest.approx(0.2)

    def test_solitary_closed_form(self, cubic_model, half_wave):
        # H = |C|^2 (kappa^2 + m^2 + omega^2)/(2 kappa) + U(C), sampled to O(h^2)
        w = half_wave
        closed = 0.5 * profile_norm_e_sq(w, 1.0) + (-(0.5 ** 2) + 0.5 ** 4)
        for n in (2049, 4097):
            grid = Grid(40.0, n)
            st = sample_profile(w, grid, 0.0)
            h = grid.spacing
            assert energy(cubic_model, st) == pytest.approx(closed, abs=5.0 * h * h)
        # and the error actually shrinks like h^2
        e1 = abs(energy(cubic_model, sample_profile(w, Grid(40.0, 2049), 0.0)) - closed)
        e2 = abs(energy(cubic_model, sample_profile(w, Grid(40.0, 4097), 0.0)) - closed)
        assert e1 > 3.0 * e2

    def test_gauge_invariance(self, cubic_model, half_wave, small_grid):
        st = sample_profile(half_wave, small_grid, 0.0)
        rot = FieldState(small_grid, np.exp(1.1j) * st.psi, np.exp(1.1j) * st.pi)
        assert energy(cubic_model, rot) == pytest.approx(energy(cubic_model, st), rel=1e-13)


class TestCharge:
    def test_rotating_pair(self, small_grid):
        om = 0.8
        st = gaussian_state(small_grid, GaussianSpec(amplitude=1.0, width=1.5, omega_bar=om))
        l2 = np.trapezoid(np.abs(st.psi) ** 2, dx=small_grid.spacing)
        assert charge(st) == pytest.approx(om * l2, rel=1e-12)

    def test_real_pair_is_neutral(self, small_grid):
        x = small_grid.x
        psi = np.exp(-x ** 2).astype(complex)
        pi = (0.3 * np.exp(-0.5 * x ** 2)).astype(complex)
        assert charge(FieldState(small_grid, psi, pi)) == pytest.approx(0.0, abs=1e-13)

    def test_gauge_invariance(self, half_wave, small_grid):
        st = sample_profile(half_wave, small_grid, 0.0)
        rot = FieldState(small_grid, np.exp(0.7j) * st.psi, np.exp(0.7j) * st.pi)
        assert charge(rot) == pytest.approx(charge(st), rel=1e-12)


class TestNormE:
    def test_zero(self, small_grid):
        assert norm_e(zero_state(small_grid), 1.0) == 0.0

    def test_solitary_closed_form(self, half_wave):
        grid = Grid(40.0, 8193)
        st = sample_profile(half_wave, grid, 0.0)
        want = np.sqrt(profile_norm_e_sq(half_wave, 1.0))
        assert norm_e(st, 1.0) == pytest.approx(want, abs=5 * grid.spacing ** 2)

    def test_monotone_in_R(self, half_wave, small_grid):
        st = sample_profile(half_wave, small_grid, 0.0)
        vals = [norm_e(st, 1.0, R=r) for r in (1.0, 2.0, 5.0, 10.0)]
        assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))

    def test_R_beyond_grid_rejected(self, half_wave, small_grid):
        st = sample_profile(half_wave, small_grid, 0.0)
        with pytest.raises(ValueError):
            norm_e(st, 1.0, R=100.0)


class TestSpectralParameters:
    def test_gap_center(self):
        assert k_of_omega(0.0, 1.0) == pytest.approx(1j)
        assert kappa_of_omega(0.0, 1.0) == pytest.approx(1.0)
        assert ac_weight(0.0, 1.0) == 0.0

    def test_branch_point(self):
        assert k_of_omega(1.0, 1.0) == 0.0
        assert kappa_of_omega(1.0, 1.0) == 0.0
        assert ac_weight(1.0, 1.0) == 0.0

    def test_above_gap(self):
        m = 1.0
        om = np.sqrt(2.0) * m
        assert k_of_omega(om, m) == pytest.approx(m)
        assert ac_weight(om, m) == pytest.approx(np.sqrt(2.0) * m * m)

    def test_identities_dense(self):
        m = 1.3
        om = np.concatenate([np.linspace(-4, 4, 4001), [-m, m]])
        k = k_of_omega(om, m)
        kap = kappa_of_omega(om, m)
        assert np.max(np.abs(k * k - (om ** 2 - m * m))) < 1e-13
        assert np.max(np.abs(kap - (-1j) * k)) < 1e-14

    def test_weight_positive_on_continuous_spectrum(self):
        m = 1.0
        om = np.concatenate([np.linspace(-9, -1.0001, 800), np.linspace(1.0001, 9, 800)])
        n = ac_weight(om, m)
        assert np.all(n > 0)
        # matches omega * k(omega) there
        assert np.max(np.abs(n - np.real(om * k_of_omega(om, m)))) < 1e-12
