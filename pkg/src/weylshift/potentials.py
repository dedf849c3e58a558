"""Stock potentials used throughout the test and demo pipelines.

Smooth potentials are sampled onto piecewise-linear densities; the sampling
step controls the only representation error in the whole pipeline.
"""

import numpy as np

from .measures import SignedMeasure


def soliton(center=0.0, half_width=17.0, spacing=4e-3):
    """Single-well density -2 sech^2(t - center); reflectionless on (0, inf)."""
    fn = lambda t: -2.0 / np.cosh(t - center) ** 2
    return SignedMeasure.from_function(fn, center - half_width, center + half_width,
                                       max_spacing=spacing)


def square_barrier(lo=0.0, hi=1.0, height=1.0):
    """Indicator-type density: exactly `height` on (lo, hi), zero outside."""
    return SignedMeasure.from_density([lo, hi], [height, height])


def cosine(lo, hi, phase=0.0, spacing=5e-3):
    """Density cos(t + phase) on (lo, hi)."""
    return SignedMeasure.from_function(lambda t: np.cos(t + phase), lo, hi,
                                       max_spacing=spacing)


def exp_decay(rate=1.0, lo=0.0, hi=25.0, spacing=5e-3):
    """Density exp(-rate * t) on (lo, hi)."""
    return SignedMeasure.from_function(lambda t: np.exp(-rate * t), lo, hi,
                                       max_spacing=spacing)


def inverse_linear(lo=0.0, hi=200.0, spacing=1e-2):
    """Density 1 / (1 + t) on (lo, hi)."""
    return SignedMeasure.from_function(lambda t: 1.0 / (1.0 + t), lo, hi,
                                       max_spacing=spacing)


def oscillating_square_plus_derivative(lo=0.0, hi=45.0, spacing=1e-3):
    """Density U^2 + U' with U(t) = sin(t^2) / (1 + t).

    The sup norm stays of order one while unit-window averages decay, which
    separates uniform from weak-* decay.
    """
    def fn(t):
        u = np.sin(t ** 2) / (1.0 + t)
        du = 2.0 * t * np.cos(t ** 2) / (1.0 + t) - np.sin(t ** 2) / (1.0 + t) ** 2
        return u ** 2 + du

    return SignedMeasure.from_function(fn, lo, hi, max_spacing=spacing)
