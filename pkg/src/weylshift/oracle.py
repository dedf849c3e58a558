"""Past-to-future prediction by covering nets in the weak-* metric.

A model stores pairs (past restriction, future restriction) of training
potentials, thinned to a greedy 2-delta net of the pasts.  Prediction is a
convex blend of the stored futures with weights (3 delta - distance),
restricted to inputs within 3 delta of some center; anything farther is
refused rather than extrapolated.

The guarantee such a predictor aims at holds uniformly over whole classes
of potentials with prescribed absolutely continuous spectrum; those classes
are not enumerable, so this artifact trains on a user-supplied family (for
instance a sampled shift orbit) and its accuracy statements extend only to
inputs covered by that family.  This gap is inherent and is stated in the
README as well.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError, OutOfCoverageError
from .measures import (MetricConfig, SignedMeasure, basis_integrals,
                       linear_combination, metric_from_integrals, restrict)

MODEL_FORMAT = "weylshift-oracle-v1"

DEFAULT_PAST_GRID = (2.0, 4.0, 8.0, 16.0, 32.0)
DEFAULT_DELTA_GRID = (0.1, 0.05, 0.02, 0.01)


@dataclass(frozen=True)
class OracleModel:
    past_length: float
    future_window: tuple
    delta: float
    class_bound: float
    centers: tuple  # pairs (past restriction, future restriction)
    metric_minus: MetricConfig
    metric_plus: MetricConfig

    @property
    def past_interval(self):
        return (-self.past_length, 0.0)

    @property
    def n_centers(self):
        return len(self.centers)


@dataclass(frozen=True)
class BlendWeights:
    indices: np.ndarray
    weights: np.ndarray
    distances: np.ndarray
    min_distance: float
    extrapolating: bool  # min distance beyond 2*delta (still inside 3*delta)


def _restriction_pair(mu, past_interval, future_window):
    return restrict(mu, past_interval), restrict(mu, future_window)


def build_oracle(training, past_length, future_window, delta, class_bound,
                 n_terms=40):
    """Greedy 2-delta net over the past restrictions of the training family.

    A training potential becomes a center iff its past restriction is at
    least 2*delta away from all existing centers; each center stores its own
    future restriction as the prediction target.
    """
    training = list(training)
    if not training:
        raise ValueError("training family must be nonempty")
    if not delta > 0:
        raise ValueError("delta must be positive")
    past_length = float(past_length)
    a, b = float(future_window[0]), float(future_window[1])
    if not (past_length > 0 and a < b):
        raise ValueError("invalid windows: need past_length > 0 and a < b")
    dm = MetricConfig(n_terms=n_terms, interval=(-past_length, 0.0))
    dp = MetricConfig(n_terms=n_terms, interval=(a, b))
    centers = []
    center_ints = []
    for mu in training:
        past, fut = _restriction_pair(mu, (-past_length, 0.0), (a, b))
        ints = basis_integrals(past, dm)
        if all(metric_from_integrals(ints, cj, dm) >= 2.0 * delta
               for cj in center_ints):
            centers.append((past, fut))
            center_ints.append(ints)
    return OracleModel(past_length=past_length, future_window=(a, b),
                       delta=float(delta), class_bound=float(class_bound),
                       centers=tuple(centers), metric_minus=dm, metric_plus=dp)


def blend_weights(model, sigma):
    """Step-3 weights for a past-window input.

    Raises OutOfCoverageError when every center is at least 3*delta away;
    inputs between 2*delta and 3*delta are served but flagged.
    """
    sigma = restrict(sigma, model.past_interval)
    ints = basis_integrals(sigma, model.metric_minus)
    dists = np.array([
        metric_from_integrals(ints, basis_integrals(past, model.metric_minus),
                              model.metric_minus)
        for past, _ in model.centers])
    min_distance = float(np.min(dists))
    sel = np.nonzero(dists < 3.0 * model.delta)[0]
    if sel.size == 0:
        raise OutOfCoverageError(
            f"input is {min_distance:.4f} away from the nearest center, "
            f"beyond coverage 3*delta = {3 * model.delta:.4f}",
            min_distance=min_distance)
    raw = 3.0 * model.delta - dists[sel]
    weights = raw / np.sum(raw)
    return BlendWeights(indices=sel, weights=weights, distances=dists[sel],
                        min_distance=min_distance,
                        extrapolating=min_distance > 2.0 * model.delta)


def blend(measures, weights):
    """Convex combination of measures on a common window.

    Atoms blend as weight-scaled atoms at their own positions; densities
    combine pointwise.  Integrals against test functions are linear in the
    blend, exactly.
    """
    weights = np.asarray([float(w) for w in weights])
    if weights.size == 0 or np.any(weights < 0):
        raise ValueError("weights must be nonnegative")
    if abs(float(np.sum(weights)) - 1.0) > 1e-9:
        raise ValueError("weights must sum to one")
    return linear_combination(measures, weights)


def predict(model, sigma):
    """Blend of stored futures for a covered past-window input."""
    bw = blend_weights(model, sigma)
    futures = [model.centers[j][1] for j in bw.indices]
    return blend(futures, bw.weights)


@dataclass(frozen=True)
class CalibrationResult:
    past_length: float
    delta: float
    achieved_error: float
    model: OracleModel


def calibrate(family, epsilon, future_window, class_bound,
              past_grid=DEFAULT_PAST_GRID, delta_grid=DEFAULT_DELTA_GRID,
              n_terms=40):
    """Search (past length, delta) so the family predicts itself within epsilon.

    For each candidate pair the net is built on the whole family and every
    member's past is fed back through the model; the pair is accepted when
    the maximal future-window error stays below epsilon.  Past lengths are
    tried in increasing order and deltas in decreasing order, so the first
    accepted pair has the shortest window and coarsest net that works.
    """
    family = list(family)
    if not family:
        raise ValueError("family must be nonempty")
    a, b = float(future_window[0]), float(future_window[1])
    dp = MetricConfig(n_terms=n_terms, interval=(a, b))
    fut_ints = np.array([basis_integrals(restrict(mu, (a, b)), dp)
                         for mu in family])
    best = None
    for L in past_grid:
        dm = MetricConfig(n_terms=n_terms, interval=(-float(L), 0.0))
        past_ints = np.array([basis_integrals(restrict(mu, (-float(L), 0.0)), dm)
                              for mu in family])
        diff = np.abs(past_ints[:, None, :] - past_ints[None, :, :])
        D = np.sum(dm.weights * diff / (1.0 + diff), axis=2)
        for delta in delta_grid:
            centers = []
            for i in range(len(family)):
                if all(D[i, j] >= 2.0 * delta for j in centers):
                    centers.append(i)
            worst = 0.0
            for i in range(len(family)):
                dists = D[i, centers]
                sel = dists < 3.0 * delta
                if not np.any(sel):
                    worst = math.inf
                    break
                raw = 3.0 * delta - dists[sel]
                w = raw / np.sum(raw)
                pred_ints = w @ fut_ints[np.asarray(centers)[sel]]
                err = metric_from_integrals(pred_ints, fut_ints[i], dp)
                worst = max(worst, err)
            if best is None or worst < best[2]:
                best = (float(L), float(delta), worst)
            if worst < epsilon:
                model = build_oracle(family, L, (a, b), delta, class_bound,
                                     n_terms=n_terms)
                return CalibrationResult(past_length=float(L), delta=float(delta),
                                         achieved_error=float(worst), model=model)
    raise CalibrationError(
        f"no (L, delta) pair reached epsilon={epsilon}; best error "
        f"{best[2]:.4f} at L={best[0]}, delta={best[1]}", best=best)


# -- persistence ---------------------------------------------------------


def model_to_json_dict(model):
    return {
        "format": MODEL_FORMAT,
        "past_length": model.past_length,
        "future_window": [model.future_window[0], model.future_window[1]],
        "delta": model.delta,
        "class_bound": model.class_bound,
        "metric_minus": {"n_terms": model.metric_minus.n_terms,
                         "id": model.metric_minus.convention_id},
        "metric_plus": {"n_terms": model.metric_plus.n_terms,
                        "id": model.metric_plus.convention_id},
        "centers": [{"past": past.to_json_dict(), "future": fut.to_json_dict()}
                    for past, fut in model.centers],
    }


def model_from_json_dict(d):
    if d.get("format") != MODEL_FORMAT:
        raise ValueError(f"unsupported model format: {d.get('format')!r}")
    L = float(d["past_length"])
    a, b = (float(v) for v in d["future_window"])
    dm = MetricConfig(n_terms=int(d["metric_minus"]["n_terms"]), interval=(-L, 0.0))
    dp = MetricConfig(n_terms=int(d["metric_plus"]["n_terms"]), interval=(a, b))
    if dm.convention_id != d["metric_minus"]["id"] or \
            dp.convention_id != d["metric_plus"]["id"]:
        raise ValueError("model was built with a different metric convention")
    centers = tuple((SignedMeasure.from_json_dict(c["past"]),
                     SignedMeasure.from_json_dict(c["future"]))
                    for c in d["centers"])
    return OracleModel(past_length=L, future_window=(a, b),
                       delta=float(d["delta"]), class_bound=float(d["class_bound"]),
                       centers=centers, metric_minus=dm, metric_plus=dp)


def save_model(model, path):
    with open(path, "w") as fh:
        json.dump(model_to_json_dict(model), fh, indent=2)
        fh.write("\n")


def load_model(path):
    with open(path) as fh:
        return model_from_json_dict(json.load(fh))
