"""Signed Borel measures on the line with finite data.

A measure here is a finite list of atoms plus a compactly supported
piecewise-linear density.  This class is closed under the operations the
rest of the package needs (shifts, restrictions, convex combinations) and
all integrals against piecewise-linear test functions are evaluated in
closed form, so there is no quadrature error anywhere in the metric layer.

The weak-* metric is built from a fixed enumeration of tent functions with
dyadic centers and half-widths; see `basis_function` for the convention.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

_FULL_LINE = (-math.inf, math.inf)


def _as_readonly(a, dtype=float):
    out = np.asarray(a, dtype=dtype).copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SignedMeasure:
    """Finite atoms plus a piecewise-linear density, zero outside its breaks.

    atom_positions must be strictly increasing; density_breaks strictly
    increasing with one value per break.  The density is interpolated
    linearly between breaks and vanishes outside [breaks[0], breaks[-1]]
    (possibly with a jump at those two edges).
    """

    atom_positions: np.ndarray = field(default_factory=lambda: np.empty(0))
    atom_weights: np.ndarray = field(default_factory=lambda: np.empty(0))
    density_breaks: np.ndarray = field(default_factory=lambda: np.empty(0))
    density_values: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        pos = _as_readonly(self.atom_positions)
        wts = _as_readonly(self.atom_weights)
        brk = _as_readonly(self.density_breaks)
        val = _as_readonly(self.density_values)
        if pos.ndim != 1 or wts.ndim != 1 or pos.shape != wts.shape:
            raise ValueError("atom positions/weights must be 1d arrays of equal length")
        if brk.ndim != 1 or val.ndim != 1 or brk.shape != val.shape:
            raise ValueError("density breaks/values must be 1d arrays of equal length")
        if pos.size and not np.all(np.diff(pos) > 0):
            raise ValueError("atom positions must be strictly increasing")
        if brk.size == 1:
            raise ValueError("a density needs at least two breaks")
        if brk.size and not np.all(np.diff(brk) > 0):
            raise ValueError("density breaks must be strictly increasing")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(wts))
                and np.all(np.isfinite(brk)) and np.all(np.isfinite(val))):
            raise ValueError("measure data must be finite")
        object.__setattr__(self, "atom_positions", pos)
        object.__setattr__(self, "atom_weights", wts)
        object.__setattr__(self, "density_breaks", brk)
        object.__setattr__(self, "density_values", val)

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def from_atoms(cls, pairs):
        pairs = sorted((float(p), float(w)) for p, w in pairs)
        return cls(atom_positions=[p for p, _ in pairs],
                   atom_weights=[w for _, w in pairs])

    @classmethod
    def from_density(cls, breaks, values):
        return cls(density_breaks=breaks, density_values=values)

    @classmethod
    def from_function(cls, fn, lo, hi, max_spacing=1e-2):
        """Sample a function onto a uniform piecewise-linear density."""
        n = max(2, int(math.ceil((hi - lo) / max_spacing)) + 1)
        breaks = np.linspace(lo, hi, n)
        return cls(density_breaks=breaks, density_values=fn(breaks))

    # -- basic queries -------------------------------------------------

    @property
    def is_zero(self):
        return self.atom_positions.size == 0 and self.density_breaks.size == 0

    @property
    def support(self):
        """Smallest closed interval carrying all atoms and density, or None."""
        pts = []
        if self.atom_positions.size:
            pts += [self.atom_positions[0], self.atom_positions[-1]]
        if self.density_breaks.size:
            pts += [self.density_breaks[0], self.density_breaks[-1]]
        if not pts:
            return None
        return (min(pts), max(pts))

    def density_at(self, x):
        """Density values at x (array ok); zero outside the break range."""
        x = np.asarray(x, dtype=float)
        if self.density_breaks.size == 0:
            return np.zeros_like(x)
        out = np.interp(x, self.density_breaks, self.density_values)
        inside = (x >= self.density_breaks[0]) & (x <= self.density_breaks[-1])
        return np.where(inside, out, 0.0)

    def has_atom_at(self, x):
        if not self.atom_positions.size:
            return False
        i = np.searchsorted(self.atom_positions, x)
        return i < self.atom_positions.size and self.atom_positions[i] == x

    # -- serialization ---------------------------------------------------

    def to_json_dict(self):
        return {
            "atoms": [[float(p), float(w)] for p, w in
                      zip(self.atom_positions, self.atom_weights)],
            "density": {
                "breaks": [float(b) for b in self.density_breaks],
                "values": [float(v) for v in self.density_values],
            },
        }

    @classmethod
    def from_json_dict(cls, d):
        atoms = d.get("atoms", [])
        dens = d.get("density", {}) or {}
        return cls(atom_positions=[a[0] for a in atoms],
                   atom_weights=[a[1] for a in atoms],
                   density_breaks=dens.get("breaks", []),
                   density_values=dens.get("values", []))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass(frozen=True)
class Tent:
    """Piecewise-linear bump: height at center, zero beyond half_width."""

    center: float
    half_width: float
    height: float = 1.0

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.height * np.maximum(0.0, 1.0 - np.abs(x - self.center) / self.half_width)

    @property
    def support(self):
        return (self.center - self.half_width, self.center + self.half_width)

    @property
    def breakpoints(self):
        return (self.center - self.half_width, self.center, self.center + self.half_width)


def test_integral(mu, tent):
    """Exact integral of a tent (test) function against the measure.

    Atoms contribute weight * tent(position); the density part is a
    piecewise-quadratic integrand handled exactly by Simpson's rule on the
    merged breakpoint grid.
    """
    total = 0.0
    if mu.atom_positions.size:
        total += float(np.dot(mu.atom_weights, tent(mu.atom_positions)))
    brk = mu.density_breaks
    if brk.size:
        lo = max(tent.support[0], brk[0])
        hi = min(tent.support[1], brk[-1])
        if lo < hi:
            i0 = np.searchsorted(brk, lo, side="right")
            i1 = np.searchsorted(brk, hi, side="left")
            pts = np.unique(np.concatenate((
                [lo, hi],
                brk[i0:i1],
                [b for b in tent.breakpoints if lo < b < hi],
            )))
            mids = 0.5 * (pts[:-1] + pts[1:])
            g_pts = tent(pts) * mu.density_at(pts)
            g_mid = tent(mids) * mu.density_at(mids)
            widths = np.diff(pts)
            total += float(np.sum(widths / 6.0 * (g_pts[:-1] + 4.0 * g_mid + g_pts[1:])))
    return total


test_integral.__test__ = False  # not a pytest case despite the name


def shift(mu, x):
    """Shifted measure: integrating f against it equals integrating f(.-x)
    against the original, i.e. atoms move from p to p - x and a density V
    becomes V(x + .)."""
    x = float(x)
    return SignedMeasure(atom_positions=mu.atom_positions - x,
                         atom_weights=mu.atom_weights,
                         density_breaks=mu.density_breaks - x,
                         density_values=mu.density_values)


def restrict(mu, interval):
    """Restriction to an open interval; atoms at the endpoints are dropped."""
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError("interval must satisfy lo < hi")
    keep = (mu.atom_positions > lo) & (mu.atom_positions < hi)
    pos = mu.atom_positions[keep]
    wts = mu.atom_weights[keep]
    brk = mu.density_breaks
    if brk.size and brk[0] < hi and brk[-1] > lo:
        a = max(lo, float(brk[0]))
        b = min(hi, float(brk[-1]))
        if a < b:
            inner = (brk > a) & (brk < b)
            new_brk = np.concatenate(([a], brk[inner], [b]))
            new_val = mu.density_at(new_brk)
            return SignedMeasure(pos, wts, new_brk, new_val)
    return SignedMeasure(pos, wts)


def linear_combination(measures, weights):
    """Weighted sum of measures, exact on the merged breakpoint grid.

    Atoms at identical positions coalesce; densities are combined pointwise.
    When the density supports differ, interior jumps at a summand's support
    edge are represented by a ramp of width ~1e-12 (relative), so integrals
    are preserved to machine precision.
    """
    measures = list(measures)
    weights = [float(w) for w in weights]
    if len(measures) != len(weights):
        raise ValueError("need one weight per measure")
    if not measures:
        return SignedMeasure.zero()

    atom_acc = {}
    for mu, w in zip(measures, weights):
        for p, a in zip(mu.atom_positions, mu.atom_weights):
            key = float(p)
            atom_acc[key] = atom_acc.get(key, 0.0) + w * float(a)
    atoms = sorted((p, a) for p, a in atom_acc.items() if a != 0.0)

    with_density = [(mu, w) for mu, w in zip(measures, weights)
                    if mu.density_breaks.size]
    if not with_density:
        return SignedMeasure(atom_positions=[p for p, _ in atoms],
                             atom_weights=[a for _, a in atoms])

    edges = {(float(mu.density_breaks[0]), float(mu.density_breaks[-1]))
             for mu, _ in with_density}
    grids = [mu.density_breaks for mu, _ in with_density]
    merged = np.unique(np.concatenate(grids))
    if len(edges) > 1:
        # mismatched supports: bracket each nonzero interior edge with a ramp
        hull_lo = min(e[0] for e in edges)
        hull_hi = max(e[1] for e in edges)
        ramps = []
        for mu, _ in with_density:
            for e, v in ((float(mu.density_breaks[0]), mu.density_values[0]),
                         (float(mu.density_breaks[-1]), mu.density_values[-1])):
                if v != 0.0 and hull_lo < e < hull_hi:
                    eps = 2.0 ** -40 * max(1.0, abs(e))
                    ramps += [e - eps, e + eps]
        if ramps:
            merged = np.unique(np.concatenate((merged, ramps)))
    vals = np.zeros_like(merged)
    for mu, w in with_density:
        vals += w * mu.density_at(merged)
    return SignedMeasure(atom_positions=[p for p, _ in atoms],
                         atom_weights=[a for _, a in atoms],
                         density_breaks=merged, density_values=vals)


# -- membership in the norm-bounded classes -----------------------------


@dataclass(frozen=True)
class VCCheck:
    passed: bool
    worst_interval: tuple
    worst_mass: float
    worst_bound: float

    @property
    def worst_excess(self):
        return self.worst_mass - self.worst_bound


def _tv_prefix(mu):
    """Setup for evaluating F(x) = |mu|((-inf, x]).

    Returns (atom_pos, atom_absw_cumsum, breaks, absvals, cum) where breaks
    include the zero crossings of the density so |V| is linear between them.
    """
    pos = mu.atom_positions
    absw = np.abs(mu.atom_weights)
    cum_atoms = np.concatenate(([0.0], np.cumsum(absw)))
    brk = mu.density_breaks
    val = mu.density_values
    if brk.size:
        cross = []
        for i in range(len(brk) - 1):
            v0, v1 = val[i], val[i + 1]
            if v0 * v1 < 0:
                cross.append(brk[i] + (brk[i + 1] - brk[i]) * v0 / (v0 - v1))
        brk = np.unique(np.concatenate((brk, cross))) if cross else brk
        absval = np.abs(np.interp(brk, mu.density_breaks, mu.density_values))
        seg = 0.5 * (absval[:-1] + absval[1:]) * np.diff(brk)
        cum = np.concatenate(([0.0], np.cumsum(seg)))
    else:
        absval = np.empty(0)
        cum = np.empty(0)
    return pos, cum_atoms, brk, absval, cum


def _tv_eval(setup, x, include_atom_at_x):
    """F(x) with or without an atom exactly at x."""
    pos, cum_atoms, brk, absval, cum = setup
    side = "right" if include_atom_at_x else "left"
    total = cum_atoms[np.searchsorted(pos, x, side=side)]
    if brk.size:
        if x <= brk[0]:
            return float(total)
        if x >= brk[-1]:
            return float(total + cum[-1])
        i = int(np.searchsorted(brk, x, side="right")) - 1
        v = np.interp(x, brk, absval)
        total += cum[i] + 0.5 * (absval[i] + v) * (x - brk[i])
    return float(total)


def vc_membership(mu, C):
    """Check |mu|(I) <= C * max(|I|, 1) over all intervals I.

    The supremum is attained on a finite candidate family: interval
    endpoints at atoms, density breaks (refined by zero crossings and the
    |density| = C crossings) and sliding unit windows anchored there.
    Returns the check result with the worst interval found.
    """
    C = float(C)
    if not C > 0:
        raise ValueError("class bound must be positive")
    setup = _tv_prefix(mu)
    pos, cum_atoms, brk, absval, cum = setup

    crit = set(float(p) for p in pos)
    crit.update(float(b) for b in brk)
    for i in range(len(brk) - 1):
        a0, a1 = absval[i], absval[i + 1]
        if (a0 - C) * (a1 - C) < 0:
            crit.add(float(brk[i] + (brk[i + 1] - brk[i]) * (a0 - C) / (a0 - a1)))
    if not crit:
        return VCCheck(True, (0.0, 0.0), 0.0, C)
    crit = np.array(sorted(crit))

    worst = VCCheck(True, (crit[0], crit[0]), 0.0, C)

    def consider(p, q):
        nonlocal worst
        mass = _tv_eval(setup, q, True) - _tv_eval(setup, p, False)
        bound = C * max(q - p, 1.0)
        if mass - bound > worst.worst_mass - worst.worst_bound:
            worst = VCCheck(mass <= bound + 1e-12, (float(p), float(q)), mass, bound)

    # unit windows [t, t+1] anchored at all critical points and their
    # predecessors, plus per-segment interior stationary points of the
    # window mass (where |V|(t+1) = |V|(t)).
    anchors = np.unique(np.concatenate((crit, crit - 1.0)))
    for t in anchors:
        consider(t, t + 1.0)
    dens = lambda x: float(np.interp(x, brk, absval)) if brk.size and brk[0] <= x <= brk[-1] else 0.0
    for i in range(len(anchors) - 1):
        a, b = anchors[i], anchors[i + 1]
        da = dens(a + 1.0) - dens(a)
        db = dens(b + 1.0) - dens(b)
        if da * db < 0:
            t = a + (b - a) * da / (da - db)
            consider(t, t + 1.0)

    # intervals longer than 1: the excess F(q) - F(p-) - C(q - p) is
    # piecewise monotone in each endpoint between critical points (the
    # |density| = C crossings are critical), so for each right endpoint q
    # it suffices to try the best critical left endpoint <= q - 1 and
    # q - 1 itself.
    gminus = np.array([_tv_eval(setup, p, False) - C * p for p in crit])
    prefix_argmin = np.zeros(len(crit), dtype=int)
    for idx in range(1, len(crit)):
        prefix_argmin[idx] = idx if gminus[idx] < gminus[prefix_argmin[idx - 1]] \
            else prefix_argmin[idx - 1]
    for q in crit:
        i = int(np.searchsorted(crit, q - 1.0, side="right")) - 1
        if i >= 0:
            consider(crit[prefix_argmin[i]], q)
        consider(q - 1.0, q)
    # degenerate intervals (single atoms) are covered by unit windows

    if worst.worst_mass <= worst.worst_bound + 1e-12:
        return VCCheck(True, worst.worst_interval, worst.worst_mass, worst.worst_bound)
    return worst


# -- weak-* metric -------------------------------------------------------


def _tent_enumeration(interval):
    """Tents with dyadic centers k*2^-j, |center| <= 2^j, half-width 2^-j,
    support inside the closed interval; scales ascending, then |center|,
    positive center before negative."""
    lo, hi = interval
    for j in itertools.count():
        h = 2.0 ** -j
        scale = 2 ** j
        kmin = -(4 ** j) if lo == -math.inf else int(math.ceil(lo * scale + 1 - 1e-12))
        kmax = 4 ** j if hi == math.inf else int(math.floor(hi * scale - 1 + 1e-12))
        kmin = max(kmin, -(4 ** j))
        kmax = min(kmax, 4 ** j)
        ks = sorted(range(kmin, kmax + 1), key=lambda k: (abs(k), k < 0))
        for k in ks:
            yield Tent(center=k * h, half_width=h, height=1.0)
        if j > 60:  # pragma: no cover - enumeration is always consumed lazily
            return


def basis_function(n, interval=_FULL_LINE):
    """n-th tent of the metric basis (n >= 1)."""
    if n < 1:
        raise ValueError("basis index starts at 1")
    return next(itertools.islice(_tent_enumeration(interval), n - 1, None))


@dataclass(frozen=True)
class MetricConfig:
    """Truncation order and interval for the weak-* metric.

    The reported distance omits the tail beyond n_terms, which is bounded
    by 2^-n_terms (`tail_bound`).
    """

    n_terms: int = 40
    interval: tuple = _FULL_LINE

    def __post_init__(self):
        if self.n_terms < 1:
            raise ValueError("n_terms must be at least 1")
        lo, hi = self.interval
        if not lo < hi:
            raise ValueError("interval must satisfy lo < hi")

    @cached_property
    def tents(self):
        return list(itertools.islice(_tent_enumeration(self.interval), self.n_terms))

    @cached_property
    def weights(self):
        return 0.5 ** np.arange(1, self.n_terms + 1)

    @property
    def tail_bound(self):
        return 2.0 ** -self.n_terms

    @property
    def convention_id(self):
        lo, hi = self.interval
        fmt = lambda v: "-inf" if v == -math.inf else ("inf" if v == math.inf else repr(float(v)))
        return f"dyadic-tents-v1;N={self.n_terms};J={fmt(lo)}:{fmt(hi)}"


DEFAULT_METRIC = MetricConfig()


def basis_integrals(mu, cfg=DEFAULT_METRIC):
    """Integrals of the measure against every basis tent of the config."""
    return np.array([test_integral(mu, f) for f in cfg.tents])


def metric_from_integrals(a, b, cfg=DEFAULT_METRIC):
    rho = np.abs(np.asarray(a) - np.asarray(b))
    return float(np.sum(cfg.weights * rho / (1.0 + rho)))


def metric_d(mu, nu, cfg=DEFAULT_METRIC):
    """Truncated weak-* distance sum_n 2^-n rho_n / (1 + rho_n) with
    rho_n the absolute basis-tent pairing of mu - nu.  Underestimates the
    untruncated metric by at most cfg.tail_bound."""
    return metric_from_integrals(basis_integrals(mu, cfg),
                                 basis_integrals(nu, cfg), cfg)
