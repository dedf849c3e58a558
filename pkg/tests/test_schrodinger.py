import cmath
import math

import numpy as np
import pytest

from conftest import random_measure
from weylshift.errors import AtomAtEndpointError
from weylshift.measures import SignedMeasure
from weylshift.schrodinger import (SolverConfig, solution_trace, solve_ivp,
                                   transfer_matrix)


def free_matrix(z, dx):
    """Closed-form free transfer matrix over a step dx."""
    k = cmath.sqrt(z)
    if abs(k) < 1e-12:
        return np.array([[1.0, dx], [0.0, 1.0]], dtype=complex)
    return np.array([[cmath.cos(k * dx), cmath.sin(k * dx) / k],
                     [-k * cmath.sin(k * dx), cmath.cos(k * dx)]])


def jump_matrix(alpha):
    return np.array([[1.0, 0.0], [alpha, 1.0]], dtype=complex)


class TestClosedForms:
    def test_free_decaying_exponential(self):
        st = solve_ivp(SignedMeasure.zero(), -1.0, 0.0, (1.0, -1.0), 3.0)
        assert abs(st.f - math.exp(-3.0)) < 1e-8
        assert abs(st.df + math.exp(-3.0)) < 1e-8

    def test_free_sine(self):
        st = solve_ivp(SignedMeasure.zero(), 1.0, 0.0, (0.0, 1.0), math.pi / 2)
        assert abs(st.f - 1.0) < 1e-8
        assert abs(st.df) < 1e-8

    def test_single_atom_matches_hand_composed_matrices(self):
        mu = SignedMeasure.from_atoms([(1.0, 2.0)])
        z = -1.0
        composed = free_matrix(z, 1.0) @ jump_matrix(2.0) @ free_matrix(z, 1.0)
        expected = composed @ np.array([1.0, -1.0], dtype=complex)
        st = solve_ivp(mu, z, 0.0, (1.0, -1.0), 2.0)
        assert abs(st.f - expected[0]) < 1e-8
        assert abs(st.df - expected[1]) < 1e-8

    def test_free_transfer_matrix_formula(self):
        for z in (1.0 + 0.0j, -2.0 + 0.0j, 0.7 + 1.3j):
            T = transfer_matrix(SignedMeasure.zero(), z, -0.5, 1.7)
            assert np.max(np.abs(T.matrix - free_matrix(z, 2.2))) < 1e-10

    def test_atom_limit_of_short_interval(self):
        mu = SignedMeasure.from_atoms([(0.0, 1.5)])
        T = transfer_matrix(mu, 1.0 + 0.5j, -1e-8, 1e-8)
        assert np.max(np.abs(T.matrix - jump_matrix(1.5))) < 1e-6


class TestWronskian:
    def test_unit_determinant_random_cases(self):
        # energy/length draws keep entries O(100) so the determinant check
        # is meaningful in double precision
        rng = np.random.default_rng(101)
        checked = 0
        while checked < 25:
            mu = random_measure(rng, n_breaks=int(rng.integers(5, 30)),
                                amp=2.0)
            z = complex(rng.uniform(-4, 4), rng.uniform(0.0, 3.0))
            x0, x1 = sorted(rng.uniform(-5, 5, 2))
            if x1 - x0 < 1e-3 or mu.has_atom_at(x0) or mu.has_atom_at(x1):
                continue
            if math.sqrt(abs(z) + 2.0) * (x1 - x0) > 4.5:
                continue
            T = transfer_matrix(mu, z, x0, x1)
            assert abs(T.det - 1.0) < 1e-10
            checked += 1

    def test_composition_property(self):
        rng = np.random.default_rng(103)
        checked = 0
        while checked < 8:
            mu = random_measure(rng, amp=1.5)
            z = complex(rng.uniform(-2, 2), rng.uniform(0.1, 2.0))
            x0, x1, x2 = sorted(rng.uniform(-4, 4, 3))
            if math.sqrt(abs(z) + 1.5) * (x2 - x0) > 4.5:
                continue
            full = transfer_matrix(mu, z, x0, x2).matrix
            left = transfer_matrix(mu, z, x0, x1).matrix
            right = transfer_matrix(mu, z, x1, x2).matrix
            assert np.max(np.abs(full - right @ left)) < 1e-8
            checked += 1

    def test_reverse_propagation_inverts(self):
        rng = np.random.default_rng(107)
        mu = random_measure(rng)
        z = 0.5 + 1.0j
        fwd = transfer_matrix(mu, z, -2.0, 2.5).matrix
        back = transfer_matrix(mu, z, 2.5, -2.0).matrix
        assert np.max(np.abs(back @ fwd - np.eye(2))) < 1e-10


class TestAtomHandling:
    def test_f_continuous_derivative_jumps(self):
        alpha, c = 1.7, 0.5
        mu = SignedMeasure(atom_positions=[c], atom_weights=[alpha],
                           density_breaks=[-1.0, 1.0], density_values=[0.4, -0.2])
        z = 1.0 + 0.8j
        eps = 1e-9
        left = solve_ivp(mu, z, -1.5, (1.0, 0.3j), c - eps)
        right = solve_ivp(mu, z, -1.5, (1.0, 0.3j), c + eps)
        assert abs(right.f - left.f) < 1e-6
        assert abs((right.df - left.df) - alpha * left.f) < 1e-6

    def test_quasi_derivative_value_for_delta(self):
        # Af(2) = f'(2) - alpha * f(1) with f(1) = e^{-1} on the free leg
        mu = SignedMeasure.from_atoms([(1.0, 2.0)])
        st = solve_ivp(mu, -1.0, 0.0, (1.0, -1.0), 2.0)
        assert abs(st.af - (1.0 - 2.0 * math.exp(-1.0))) < 1e-8

    def test_quasi_derivative_against_trace_quadrature(self):
        rng = np.random.default_rng(109)
        mu = random_measure(rng, n_atoms=0, amp=1.0)
        z = 0.3 + 0.9j
        st = solve_ivp(mu, z, -3.0, (1.0, 0.2), 3.0)
        xs, fs, _ = solution_trace(mu, z, -3.0, (1.0, 0.2), 3.0, n_points=4001)
        g = mu.density_at(xs) * fs
        integral = np.sum(0.5 * (g[1:] + g[:-1]) * np.diff(xs))
        assert abs((st.df - st.af) - integral) < 1e-5

    def test_endpoint_atom_rejected(self):
        mu = SignedMeasure.from_atoms([(0.0, 1.0)])
        with pytest.raises(AtomAtEndpointError):
            solve_ivp(mu, 1.0, 0.0, (1.0, 0.0), 2.0)
        with pytest.raises(AtomAtEndpointError):
            transfer_matrix(mu, 1.0, -1.0, 0.0)


class TestAnalyticity:
    def test_cauchy_riemann_residual(self, soliton_measure):
        h = 1e-3
        z0 = 0.8 + 1.1j

        def value(z):
            return solve_ivp(soliton_measure, z, -1.0, (1.0, 0.5), 1.5).f

        d_re = (value(z0 + h) - value(z0 - h)) / (2 * h)
        d_im = (value(z0 + 1j * h) - value(z0 - 1j * h)) / (2 * h)
        assert abs(0.5 * (d_re + 1j * d_im)) < 1e-6


class TestWeylDecay:
    def test_free_weyl_solution_decays(self):
        z = 1.0 + 1.0j
        k = 1j * cmath.sqrt(-z)
        st = solve_ivp(SignedMeasure.zero(), z, 0.0, (1.0, 1j * k), 20.0)
        assert abs(st.f) == pytest.approx(abs(cmath.exp(1j * k * 20.0)), rel=1e-8)
        assert abs(st.f) < 1e-3

    def test_soliton_weyl_solution_decays(self, soliton_measure):
        # forward-shooting a decaying solution amplifies any init error by
        # e^{Im k R}, so the init must be the sampled potential's own Weyl
        # direction, not the closed form of the unsampled well
        from weylshift.weyl import m_halfline
        z = 1.0 + 1.0j
        k = cmath.sqrt(z)
        m_plus = m_halfline(soliton_measure, 0.0, z, side="plus").value
        st = solve_ivp(soliton_measure, z, 0.0, (1.0, m_plus), 20.0)
        assert abs(st.f) < math.exp(-0.9 * k.imag * 20.0)


class TestTrace:
    def test_trace_grid_and_endpoints(self):
        mu = SignedMeasure.from_density([0.0, 1.0], [1.0, 1.0])
        xs, fs, dfs = solution_trace(mu, -1.0, -0.5, (1.0, 0.0), 1.5, n_points=41)
        assert xs.size == 41 and fs.size == 41 and dfs.size == 41
        assert xs[0] == -0.5 and xs[-1] == 1.5
        assert fs[0] == 1.0 and dfs[0] == 0.0

    def test_trace_matches_pointwise_solves(self):
        rng = np.random.default_rng(113)
        mu = random_measure(rng, n_atoms=1)
        z = 0.4 + 0.6j
        xs, fs, _ = solution_trace(mu, z, -3.2, (0.3, 1.0), 3.2, n_points=9)
        for x, f in zip(xs[1:-1], fs[1:-1]):
            st = solve_ivp(mu, z, -3.2, (0.3, 1.0), float(x))
            assert abs(st.f - f) < 1e-9

    def test_reverse_trace_order(self):
        mu = SignedMeasure.zero()
        xs, fs, _ = solution_trace(mu, 1.0, 2.0, (1.0, 0.0), -2.0, n_points=11)
        assert xs[0] == -2.0 and xs[-1] == 2.0
        assert np.all(np.diff(xs) > 0)


class TestConfig:
    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError):
            SolverConfig(rtol=0.0)

    def test_trivial_initial_state_rejected(self):
        with pytest.raises(ValueError):
            solve_ivp(SignedMeasure.zero(), 1.0, 0.0, (0.0, 0.0), 1.0)

    def test_zero_length_propagation(self):
        st = solve_ivp(SignedMeasure.zero(), 1.0, 0.5, (0.7, 0.1), 0.5)
        assert st.f == 0.7 and st.df == 0.1
