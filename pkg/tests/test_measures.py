import json
import math

import numpy as np
import pytest
import scipy.integrate

from conftest import random_measure
from weylshift.measures import (DEFAULT_METRIC, MetricConfig, SignedMeasure,
                                Tent, basis_function, basis_integrals,
                                linear_combination, metric_d, restrict, shift,
                                test_integral, vc_membership)


def quad_oracle(mu, tent):
    """Adaptive quadrature of tent * density plus direct atom evaluation."""
    total = sum(w * float(tent(np.array([p]))[0])
                for p, w in zip(mu.atom_positions, mu.atom_weights))
    brk = mu.density_breaks
    if brk.size:
        lo = max(tent.support[0], brk[0])
        hi = min(tent.support[1], brk[-1])
        pts = np.unique(np.concatenate(([lo, hi], brk[(brk > lo) & (brk < hi)],
                                        [b for b in tent.breakpoints if lo < b < hi])))
        for a, b in zip(pts[:-1], pts[1:]):
            val, _ = scipy.integrate.quad(
                lambda x: float(tent(np.array([x]))[0]) * float(mu.density_at(np.array([x]))[0]),
                a, b, epsabs=1e-14, epsrel=1e-13)
            total += val
    return total


class TestTestIntegral:
    def test_unit_atom_against_tent(self):
        mu = SignedMeasure.from_atoms([(0.0, 1.0)])
        assert test_integral(mu, Tent(0.0, 1.0)) == 1.0

    def test_box_density_against_tent_is_triangle_overlap(self):
        mu = SignedMeasure.from_density([0.0, 1.0], [1.0, 1.0])
        assert test_integral(mu, Tent(0.5, 0.5)) == pytest.approx(0.5, abs=1e-15)

    def test_cosine_density_matches_adaptive_quadrature(self):
        mu = SignedMeasure.from_function(np.cos, 0.0, 2.0 * math.pi,
                                         max_spacing=2.0 * math.pi / 240)
        tent = Tent(math.pi, math.pi)
        assert test_integral(mu, tent) == pytest.approx(quad_oracle(mu, tent),
                                                        abs=1e-12)

    def test_random_measures_match_quadrature(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            mu = random_measure(rng)
            tent = Tent(float(rng.uniform(-2, 2)), float(rng.uniform(0.3, 2.0)),
                        float(rng.uniform(0.2, 2.0)))
            assert test_integral(mu, tent) == pytest.approx(
                quad_oracle(mu, tent), abs=1e-11)


class TestVCMembership:
    def test_zero_measure_is_in_every_class(self):
        assert vc_membership(SignedMeasure.zero(), 1.0).passed

    def test_tall_box_fails_with_witness_inside(self):
        C = 1.0
        mu = SignedMeasure.from_density([0.0, 1.0], [2 * C, 2 * C])
        res = vc_membership(mu, C)
        assert not res.passed
        lo, hi = res.worst_interval
        assert 0.0 - 1.0 <= lo <= hi <= 2.0
        assert res.worst_mass > res.worst_bound

    def test_single_atom_of_weight_c_passes(self):
        assert vc_membership(SignedMeasure.from_atoms([(0.0, 1.0)]), 1.0).passed

    def test_agrees_with_brute_force(self):
        rng = np.random.default_rng(5)
        for _ in range(8):
            mu = random_measure(rng, n_breaks=15, span=2.0, amp=1.5)
            C = float(rng.uniform(0.4, 2.0))
            res = vc_membership(mu, C)
            fine = np.linspace(-3.5, 3.5, 14001)
            dens = np.abs(mu.density_at(fine))
            cum = np.concatenate(([0.0], np.cumsum(
                0.5 * (dens[1:] + dens[:-1]) * np.diff(fine))))
            stride = 50
            grid = fine[::stride]
            def brute_mass(i, j):
                m = cum[j * stride] - cum[i * stride]
                a, b = grid[i], grid[j]
                sel = (mu.atom_positions >= a) & (mu.atom_positions <= b)
                return m + np.sum(np.abs(mu.atom_weights[sel]))
            worst = max(brute_mass(i, j) - C * max(grid[j] - grid[i], 1.0)
                        for i in range(len(grid)) for j in range(i, len(grid)))
            if worst > 1e-3:
                assert not res.passed
            elif worst < -1e-3:
                assert res.passed

    def test_dual_bound_on_members(self):
        rng = np.random.default_rng(7)
        for _ in range(6):
            mu = random_measure(rng, amp=0.5)
            C = 4.0
            assert vc_membership(mu, C).passed
            for _ in range(20):
                tent = Tent(float(rng.uniform(-4, 4)), float(rng.uniform(0.1, 3.0)),
                            float(rng.uniform(0.1, 2.0)))
                bound = C * max(2 * tent.half_width, 1.0) * tent.height
                assert abs(test_integral(mu, tent)) <= bound + 1e-9


class TestShiftRestrict:
    def test_shift_zero_is_identity(self):
        rng = np.random.default_rng(3)
        mu = random_measure(rng)
        sh = shift(mu, 0.0)
        assert np.array_equal(sh.atom_positions, mu.atom_positions)
        assert np.array_equal(sh.density_breaks, mu.density_breaks)

    def test_shift_moves_atom(self):
        mu = SignedMeasure.from_atoms([(5.0, 1.0)])
        assert shift(mu, 2.0).atom_positions[0] == 3.0

    def test_shift_pairing_property(self):
        rng = np.random.default_rng(4)
        mu = random_measure(rng)
        for x in (0.7, -1.3):
            tent = Tent(0.4, 1.1, 0.8)
            moved = Tent(tent.center + x, tent.half_width, tent.height)
            assert test_integral(shift(mu, x), tent) == pytest.approx(
                test_integral(mu, moved), abs=1e-12)

    def test_shift_flow_property_exact(self):
        rng = np.random.default_rng(9)
        mu = random_measure(rng)
        ab = shift(shift(mu, 0.3), 1.1)
        once = shift(mu, 1.4)
        assert np.allclose(ab.atom_positions, once.atom_positions, atol=1e-15)
        assert np.allclose(ab.density_breaks, once.density_breaks, atol=1e-15)

    def test_restrict_drops_endpoint_atom(self):
        mu = SignedMeasure(atom_positions=[0.0], atom_weights=[1.0],
                           density_breaks=[-1.0, 1.0], density_values=[1.0, 1.0])
        res = restrict(mu, (0.0, math.inf))
        assert res.atom_positions.size == 0
        assert res.density_breaks[0] == 0.0 and res.density_breaks[-1] == 1.0
        assert test_integral(res, Tent(0.5, 0.5)) == pytest.approx(0.5)

    def test_restrict_to_full_line_is_identity(self):
        rng = np.random.default_rng(12)
        mu = random_measure(rng)
        res = restrict(mu, (-math.inf, math.inf))
        assert np.array_equal(res.atom_positions, mu.atom_positions)
        assert np.array_equal(res.density_breaks, mu.density_breaks)
        assert np.array_equal(res.density_values, mu.density_values)

    def test_restriction_preserves_class_membership(self):
        rng = np.random.default_rng(15)
        for _ in range(5):
            mu = random_measure(rng, amp=0.6)
            C = 3.0
            assert vc_membership(mu, C).passed
            assert vc_membership(restrict(mu, (-0.8, 1.7)), C).passed


class TestBasis:
    def test_first_tent_convention(self):
        f = basis_function(1)
        assert (f.center, f.half_width, f.height) == (0.0, 1.0, 1.0)

    def test_enumeration_injective(self):
        from weylshift.measures import _tent_enumeration
        import itertools
        seen = set()
        for f in itertools.islice(_tent_enumeration((-math.inf, math.inf)), 10000):
            key = (f.center, f.half_width)
            assert key not in seen
            seen.add(key)

    def test_enumeration_covers_small_scales(self):
        from weylshift.measures import _tent_enumeration
        import itertools
        bound = sum(2 * 4 ** j + 1 for j in range(4))  # scales j <= 3
        got = {(f.center, f.half_width)
               for f in itertools.islice(_tent_enumeration((-math.inf, math.inf)), bound)}
        for j in range(4):
            h = 2.0 ** -j
            for k in range(-4 ** j, 4 ** j + 1):
                assert (k * h, h) in got

    def test_interval_basis_fits_inside(self):
        cfg = MetricConfig(n_terms=25, interval=(0.0, 1.0))
        for f in cfg.tents:
            lo, hi = f.support
            assert lo >= 0.0 and hi <= 1.0


class TestMetric:
    def test_distance_to_self_is_zero(self):
        rng = np.random.default_rng(21)
        mu = random_measure(rng)
        assert metric_d(mu, mu) == 0.0

    def test_bounded_by_one(self):
        mu = SignedMeasure.from_atoms([(0.0, 100.0)])
        nu = SignedMeasure.from_density([-1.0, 1.0], [-50.0, 50.0])
        assert metric_d(mu, nu) < 1.0

    def test_atom_against_zero_matches_direct_enumeration(self):
        mu = SignedMeasure.from_atoms([(0.0, 1.0)])
        d = metric_d(mu, SignedMeasure.zero())
        expected = 0.0
        for n in range(1, DEFAULT_METRIC.n_terms + 1):
            f = basis_function(n)
            rho = abs(float(f(np.array([0.0]))[0]))
            expected += 2.0 ** -n * rho / (1.0 + rho)
        assert d == pytest.approx(expected, abs=1e-15)

    def test_symmetry_exact(self):
        rng = np.random.default_rng(31)
        mu, nu = random_measure(rng), random_measure(rng)
        assert metric_d(mu, nu) == metric_d(nu, mu)

    def test_triangle_inequality(self):
        rng = np.random.default_rng(33)
        for _ in range(10):
            a, b, c = (random_measure(rng) for _ in range(3))
            assert metric_d(a, c) <= metric_d(a, b) + metric_d(b, c) + 1e-12

    def test_weak_star_convergent_and_divergent_sequences(self):
        target = SignedMeasure.from_atoms([(0.0, 1.0)])
        conv = [metric_d(SignedMeasure.from_atoms([(1.0 / n, 1.0)]), target)
                for n in (1, 4, 16, 64, 256)]
        assert all(b < a for a, b in zip(conv, conv[1:]))
        assert conv[-1] < 5e-3
        div = [metric_d(SignedMeasure.from_atoms([(float(n), 1.0)]), target)
               for n in (1, 2, 4, 8)]
        assert min(div) > 0.1

    def test_shift_does_not_act_isometrically(self):
        mu = SignedMeasure.from_atoms([(0.0, 1.0)])
        nu = SignedMeasure.from_atoms([(0.25, 1.0)])
        d0 = metric_d(mu, nu)
        d5 = metric_d(shift(mu, -5.0), shift(nu, -5.0))
        assert abs(d0 - d5) > 1e-3

    def test_tail_bound_reported(self):
        cfg = MetricConfig(n_terms=10)
        assert cfg.tail_bound == 2.0 ** -10


class TestCombination:
    def test_linearity_exact_on_shared_grid(self):
        rng = np.random.default_rng(41)
        mu, nu = random_measure(rng, n_atoms=0), random_measure(rng, n_atoms=0)
        combo = linear_combination([mu, nu], [0.3, 0.7])
        tent = Tent(0.2, 1.5)
        assert test_integral(combo, tent) == pytest.approx(
            0.3 * test_integral(mu, tent) + 0.7 * test_integral(nu, tent),
            abs=1e-13)

    def test_disjoint_supports_keep_their_mass(self):
        mu = SignedMeasure.from_density([0.0, 1.0], [1.0, 1.0])
        nu = SignedMeasure.from_density([2.0, 3.0], [1.0, 1.0])
        combo = linear_combination([mu, nu], [0.5, 0.5])
        assert test_integral(combo, Tent(0.5, 0.5)) == pytest.approx(0.25, abs=1e-9)
        assert test_integral(combo, Tent(1.5, 0.4)) == pytest.approx(0.0, abs=1e-9)

    def test_atoms_at_equal_positions_coalesce(self):
        mu = SignedMeasure.from_atoms([(0.0, 1.0), (1.0, 2.0)])
        nu = SignedMeasure.from_atoms([(0.0, 3.0)])
        combo = linear_combination([mu, nu], [1.0, 1.0])
        assert combo.atom_positions.tolist() == [0.0, 1.0]
        assert combo.atom_weights.tolist() == [4.0, 2.0]


class TestJsonRoundTrip:
    def test_round_trip_is_identical(self, tmp_path):
        rng = np.random.default_rng(51)
        mu = random_measure(rng)
        path = tmp_path / "mu.json"
        mu.save(path)
        back = SignedMeasure.load(path)
        assert np.array_equal(back.atom_positions, mu.atom_positions)
        assert np.array_equal(back.atom_weights, mu.atom_weights)
        assert np.array_equal(back.density_breaks, mu.density_breaks)
        assert np.array_equal(back.density_values, mu.density_values)
        back.save(tmp_path / "mu2.json")
        assert (tmp_path / "mu.json").read_text() == (tmp_path / "mu2.json").read_text()

    def test_schema_shape(self):
        mu = SignedMeasure.from_atoms([(1.0, -2.0)])
        d = mu.to_json_dict()
        assert d == {"atoms": [[1.0, -2.0]], "density": {"breaks": [], "values": []}}


class TestValidation:
    def test_duplicate_atom_positions_rejected(self):
        with pytest.raises(ValueError):
            SignedMeasure(atom_positions=[0.0, 0.0], atom_weights=[1.0, 1.0])

    def test_non_monotone_breaks_rejected(self):
        with pytest.raises(ValueError):
            SignedMeasure.from_density([0.0, 1.0, 0.5], [1.0, 1.0, 1.0])

    def test_single_break_rejected(self):
        with pytest.raises(ValueError):
            SignedMeasure.from_density([0.0], [1.0])

    def test_tent_needs_positive_half_width(self):
        with pytest.raises(ValueError):
            Tent(0.0, 0.0)
