"""Shift-flow exploration: distance traces, omega-limit clustering and
weak-* decay checks.

All omega-limit computations work on window restrictions of the shifted
potential; finite sample grids can miss limit points, so cluster sets are
estimates, never claimed equalities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ClusterCapError
from .measures import (DEFAULT_METRIC, SignedMeasure, basis_integrals,
                       metric_from_integrals, restrict, shift)
from .reflectionless import reflectionless_defect
from .schrodinger import DEFAULT_SOLVER
from .weyl import DEFAULT_Y_SCHEDULE


@dataclass(frozen=True)
class ShiftTrace:
    x_samples: np.ndarray
    distances: np.ndarray
    metric_id: str


def shift_trace(mu, x_samples, reference=None, metric_cfg=DEFAULT_METRIC):
    """Distances d(S_x mu, reference) along increasing shift amounts."""
    x_samples = np.asarray(sorted(float(x) for x in x_samples))
    if x_samples.size and np.any(np.diff(x_samples) <= 0):
        raise ValueError("x_samples must be strictly increasing")
    if reference is None:
        reference = SignedMeasure.zero()
    ref_ints = basis_integrals(reference, metric_cfg)
    distances = np.array([
        metric_from_integrals(basis_integrals(shift(mu, x), metric_cfg),
                              ref_ints, metric_cfg)
        for x in x_samples])
    return ShiftTrace(x_samples=x_samples, distances=distances,
                      metric_id=metric_cfg.convention_id)


def _pairwise_metric(int_matrix, metric_cfg):
    diff = np.abs(int_matrix[:, None, :] - int_matrix[None, :, :])
    w = metric_cfg.weights
    return np.sum(w * diff / (1.0 + diff), axis=2)


@dataclass(frozen=True)
class OmegaEstimate:
    representatives: tuple
    representative_x: np.ndarray
    assignments: np.ndarray
    x_grid: np.ndarray
    window_half_width: float
    cluster_tol: float
    metric_id: str


def omega_limit_estimate(mu, x_grid, window_half_width=16.0, cluster_tol=5e-2,
                         metric_cfg=DEFAULT_METRIC, max_clusters=64):
    """Greedy farthest-point clustering of windowed shifts of the potential.

    The first sample seeds the clustering (deterministic); new centers are
    added while some sample is farther than cluster_tol from every center,
    so representatives are pairwise more than cluster_tol apart.
    """
    W = float(window_half_width)
    for tent in metric_cfg.tents:
        lo, hi = tent.support
        if lo < -W or hi > W:
            raise ValueError("window_half_width must cover every metric tent; "
                             f"tent at {tent.center} +/- {tent.half_width} does not fit")
    x_grid = np.asarray(sorted(float(x) for x in x_grid))
    if x_grid.size == 0:
        raise ValueError("x_grid must be nonempty")
    samples = [restrict(shift(mu, x), (-W, W)) for x in x_grid]
    ints = np.array([basis_integrals(s, metric_cfg) for s in samples])
    D = _pairwise_metric(ints, metric_cfg)

    centers = [0]
    min_dist = D[0].copy()
    while True:
        j = int(np.argmax(min_dist))
        if min_dist[j] <= cluster_tol:
            break
        centers.append(j)
        if len(centers) > max_clusters:
            raise ClusterCapError(
                f"more than {max_clusters} clusters at tol={cluster_tol}; "
                "sampling looks non-convergent")
        min_dist = np.minimum(min_dist, D[j])
    assignments = np.argmin(D[:, centers], axis=1)
    return OmegaEstimate(
        representatives=tuple(samples[j] for j in centers),
        representative_x=x_grid[centers],
        assignments=assignments, x_grid=x_grid,
        window_half_width=W, cluster_tol=float(cluster_tol),
        metric_id=metric_cfg.convention_id)


@dataclass(frozen=True)
class OmegaReflectionlessScan:
    x_grid: np.ndarray
    max_defects: np.ndarray
    mean_defects: np.ndarray
    n_unconverged: np.ndarray
    window_half_width: float


def omega_reflectionless_scan(mu, window, x_grid, window_half_width=16.0,
                              y_schedule=DEFAULT_Y_SCHEDULE, cfg=DEFAULT_SOLVER):
    """Reflectionless defect of the windowed shift, as a function of shift.

    For each x the potential restrict(S_x mu, (-W, W)) is treated as a whole
    line potential and its defect at the window center is computed over the
    given energy window.  Under the hypothesis that the energies lie in the
    a.c. region, the trend decreases as the shift grows.
    """
    W = float(window_half_width)
    x_grid = np.asarray(sorted(float(x) for x in x_grid))
    max_defects = np.empty(x_grid.size)
    mean_defects = np.empty(x_grid.size)
    n_unconv = np.empty(x_grid.size, dtype=int)
    for i, x in enumerate(x_grid):
        windowed = restrict(shift(mu, x), (-W, W))
        report = reflectionless_defect(windowed, 0.0, window,
                                       y_schedule=y_schedule, cfg=cfg)
        max_defects[i] = report.max_defect
        mean_defects[i] = report.mean_defect
        n_unconv[i] = report.n_unconverged
    return OmegaReflectionlessScan(x_grid=x_grid, max_defects=max_defects,
                                   mean_defects=mean_defects,
                                   n_unconverged=n_unconv,
                                   window_half_width=W)


@dataclass(frozen=True)
class DenisovRakhmanovCheck:
    trace: ShiftTrace
    tail_mean: float
    threshold: float
    consistent: bool


def denisov_rakhmanov_check(mu, x_max, n_samples=41, threshold=1e-2,
                            metric_cfg=DEFAULT_METRIC):
    """Weak-* decay check: trace d(S_x mu, 0) up to x_max.

    The verdict 'consistent with convergence' holds when the mean distance
    over the trailing half of the trace is below the threshold; this is a
    reporting convention, not a proof of convergence.
    """
    if not x_max > 0:
        raise ValueError("x_max must be positive")
    xs = np.linspace(0.0, float(x_max), int(n_samples))
    trace = shift_trace(mu, xs, reference=None, metric_cfg=metric_cfg)
    tail = trace.distances[trace.x_samples >= x_max / 2.0]
    tail_mean = float(np.mean(tail))
    return DenisovRakhmanovCheck(trace=trace, tail_mean=tail_mean,
                                 threshold=float(threshold),
                                 consistent=tail_mean < threshold)
