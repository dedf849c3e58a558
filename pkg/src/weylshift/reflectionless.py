"""Reflectionless diagnostics on energy windows.

A potential is reflectionless on a Borel set when the two half-line
m-functions satisfy m_plus(x, t) = -conj(m_minus(x, t)) at almost every
energy t in the set.  Only grid evidence is computable: windows are finite
unions of intervals with explicit sample energies, and every report keeps
the per-energy data alongside the aggregates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UndefinedLimitError
from .schrodinger import DEFAULT_SOLVER
from .weyl import DEFAULT_Y_SCHEDULE, boundary_value

VERDICT_MAX_DEFECT = 5e-2  # reporting convention, not a mathematical claim


@dataclass(frozen=True)
class BorelWindow:
    """Finite union of disjoint open energy intervals with a sample grid."""

    intervals: tuple
    grid: np.ndarray

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        if not ivs:
            raise ValueError("window needs at least one interval")
        for a, b in ivs:
            if not a < b:
                raise ValueError("intervals must satisfy lo < hi")
        for (_, b0), (a1, _) in zip(ivs, ivs[1:]):
            if not b0 <= a1:
                raise ValueError("intervals must be disjoint and sorted")
        grid = np.asarray(self.grid, dtype=float).copy()
        if grid.size == 0:
            raise ValueError("window grid must be nonempty")
        inside = np.zeros(grid.shape, dtype=bool)
        for a, b in ivs:
            inside |= (grid > a) & (grid < b)
        if not np.all(inside):
            raise ValueError("grid points must lie inside the window intervals")
        grid.setflags(write=False)
        object.__setattr__(self, "intervals", ivs)
        object.__setattr__(self, "grid", grid)

    @classmethod
    def from_interval(cls, lo, hi, n_grid=20):
        grid = np.linspace(lo, hi, n_grid + 2)[1:-1]
        return cls(intervals=((lo, hi),), grid=grid)


@dataclass(frozen=True)
class ReflectionlessReport:
    """Per-energy defect |m_plus + conj(m_minus)| and companions.

    Aggregates run over converged grid points only; unconverged points are
    counted, never silently dropped.  All statements are grid evidence.
    """

    x: float
    window: BorelWindow
    y_schedule: tuple
    energies: np.ndarray
    defects: np.ndarray
    re_H: np.ndarray
    g_plus: np.ndarray
    g_minus: np.ndarray
    converged: np.ndarray
    max_defect: float
    mean_defect: float
    n_unconverged: int
    verdict: bool


def reflectionless_defect(mu, x, window, y_schedule=DEFAULT_Y_SCHEDULE,
                          cfg=DEFAULT_SOLVER, verdict_threshold=VERDICT_MAX_DEFECT):
    """Defect report for the window; boundary values via the y-schedule."""
    if mu.has_atom_at(x):
        raise UndefinedLimitError(f"x={x} is an atom of the potential")
    energies = window.grid
    defects = np.empty(energies.size)
    re_H = np.empty(energies.size)
    g_plus = np.empty(energies.size)
    g_minus = np.empty(energies.size)
    converged = np.empty(energies.size, dtype=bool)
    for i, t in enumerate(energies):
        bp = boundary_value(mu, x, t, side="plus", y_schedule=y_schedule, cfg=cfg)
        bm = boundary_value(mu, x, t, side="minus", y_schedule=y_schedule, cfg=cfg)
        mp, mm = bp.value, bm.value
        H = mp + mm
        defects[i] = abs(mp + np.conj(mm))
        re_H[i] = H.real
        if H.imag > 1e-14 * (1.0 + abs(H)):
            g_plus[i] = mp.imag / H.imag
            g_minus[i] = mm.imag / H.imag
        else:
            g_plus[i] = math.nan
            g_minus[i] = math.nan
        converged[i] = bp.converged and bm.converged
    ok = converged
    max_defect = float(np.max(defects[ok])) if np.any(ok) else math.nan
    mean_defect = float(np.mean(defects[ok])) if np.any(ok) else math.nan
    verdict = bool(np.any(ok)) and max_defect < verdict_threshold
    return ReflectionlessReport(
        x=float(x), window=window, y_schedule=tuple(y_schedule),
        energies=energies, defects=defects, re_H=re_H,
        g_plus=g_plus, g_minus=g_minus, converged=converged,
        max_defect=max_defect, mean_defect=mean_defect,
        n_unconverged=int(np.sum(~ok)), verdict=verdict)


@dataclass(frozen=True)
class XIndependenceReport:
    x_list: tuple
    reports: tuple
    max_defects: np.ndarray
    spread: float


def x_independence_check(mu, x_list, window, y_schedule=DEFAULT_Y_SCHEDULE,
                         cfg=DEFAULT_SOLVER):
    """Defect aggregates across several base points; reflectionless behavior
    (and its failure) is independent of the base point, so the spread of the
    aggregates should be small."""
    reports = tuple(reflectionless_defect(mu, x, window, y_schedule, cfg)
                    for x in x_list)
    max_defects = np.array([r.max_defect for r in reports])
    spread = float(np.nanmax(max_defects) - np.nanmin(max_defects))
    return XIndependenceReport(x_list=tuple(float(x) for x in x_list),
                               reports=reports, max_defects=max_defects,
                               spread=spread)


def g_decomposition(mu, x, t, y_schedule=DEFAULT_Y_SCHEDULE, cfg=DEFAULT_SOLVER):
    """Spectral weight split (g_plus, g_minus) at one energy.

    g_side = Im m_side(t + i0) / Im H(t + i0); the pair sums to one by
    construction.  Undefined when Im H vanishes (outside the a.c. region).
    """
    bp = boundary_value(mu, x, t, side="plus", y_schedule=y_schedule, cfg=cfg)
    bm = boundary_value(mu, x, t, side="minus", y_schedule=y_schedule, cfg=cfg)
    H = bp.value + bm.value
    if not H.imag > 1e-14 * (1.0 + abs(H)):
        raise UndefinedLimitError(
            f"Im H(t + i0) ~ {H.imag:.3e} at t={t}: decomposition undefined")
    return bp.value.imag / H.imag, bm.value.imag / H.imag


@dataclass(frozen=True)
class PhaseCheckReport:
    x: float
    energies: np.ndarray
    re_H: np.ndarray
    im_H: np.ndarray
    converged: np.ndarray


def phase_check(mu, x, window, y_schedule=DEFAULT_Y_SCHEDULE, cfg=DEFAULT_SOLVER):
    """Re H(t + i0) per grid energy; small values are the phase signature of
    reflectionless behavior at that energy."""
    energies = window.grid
    re_H = np.empty(energies.size)
    im_H = np.empty(energies.size)
    converged = np.empty(energies.size, dtype=bool)
    for i, t in enumerate(energies):
        bp = boundary_value(mu, x, t, side="plus", y_schedule=y_schedule, cfg=cfg)
        bm = boundary_value(mu, x, t, side="minus", y_schedule=y_schedule, cfg=cfg)
        H = bp.value + bm.value
        re_H[i] = H.real
        im_H[i] = H.imag
        converged[i] = bp.converged and bm.converged
    return PhaseCheckReport(x=float(x), energies=energies, re_H=re_H,
                            im_H=im_H, converged=converged)
