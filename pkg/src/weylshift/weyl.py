"""Half-line m-functions and their boundary values.

Since every representable potential is compactly supported, the decaying
solution is a free exponential beyond the support; the m-function is the
Moebius image, under the transfer matrix to the support edge, of the free
half-line value i*sqrt(z).  This is exact (no truncation tail), so boundary
values on the continuous spectrum can be reached by shrinking Im z without
the usual truncation-radius blowup.  The classical truncation disks (images
of the real boundary-condition line) are kept for diagnostics: the true
value always lies inside them and their radius bounds what an unknown tail
beyond the propagation radius could do.

Branch convention: the free m-function is m0(z) = i sqrt(z) with the
principal square root on the upper half plane, extended with the cut along
[0, inf); at z = -kappa^2 this gives m0 = -kappa.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import PoleError, TruncationError, WeylshiftError
from .schrodinger import DEFAULT_SOLVER, propagate_matrix, solve_ivp

DEFAULT_Y_SCHEDULE = (1e-2, 1e-3, 1e-4)


def free_wavenumber(z):
    """sqrt(z) with the branch cut along [0, inf) and Im >= 0.

    This is the wavenumber of the decaying free solution e^{ikx}; real
    positive z is treated as the limit from the upper half plane.
    """
    z = complex(z)
    if z.imag == 0.0:
        if z.real <= 0.0:
            return complex(0.0, math.sqrt(-z.real))
        return complex(math.sqrt(z.real), 0.0)
    return 1j * cmath.sqrt(-z)


def free_m(z):
    """Free half-line m-function i*sqrt(z) in the package branch convention."""
    return 1j * free_wavenumber(z)


@dataclass(frozen=True)
class MFunctionSample:
    x: float
    z: complex
    side: str
    value: complex
    truncation_R: float
    error_estimate: float
    exact_tail: bool


@dataclass(frozen=True)
class WeylDisk:
    center: complex
    radius: float
    z: complex
    x: float
    side: str
    truncation_R: float


@dataclass(frozen=True)
class HerglotzSample:
    t: float
    y: float
    value: complex


@dataclass(frozen=True)
class BoundaryValue:
    x: float
    t: float
    side: str
    value: complex
    samples: tuple
    increments: tuple
    error_proxy: float
    converged: bool


@dataclass(frozen=True)
class GreenDiagonal:
    value: complex
    via_m: complex
    via_wronskian: complex
    x: float
    z: complex


@dataclass(frozen=True)
class AsymptoticCheck:
    kappas: np.ndarray
    values: np.ndarray
    residuals: np.ndarray


def _validate_side(side):
    if side not in ("plus", "minus"):
        raise ValueError("side must be 'plus' or 'minus'")


def _tail_edge(mu, x, side, margin):
    sup = mu.support
    if side == "plus":
        base = x if sup is None else max(x, sup[1])
        return base + margin
    base = x if sup is None else min(x, sup[0])
    return base - margin


def _disk_radius(T):
    det = T[0, 0] * T[1, 1] - T[0, 1] * T[1, 0]
    den = 2.0 * abs((np.conj(T[0, 1]) * T[1, 1]).imag)
    if den == 0.0:
        return math.inf
    return abs(det) / den


def m_halfline(mu, x, z, side="plus", tol=1e-8, cfg=DEFAULT_SOLVER,
               r_max=200.0, margin=0.5):
    """Half-line m-function m_side(x, z) with Dirichlet-type normalization.

    The value is the Moebius image of the free tail log-derivative at the
    support edge, which is exact for compactly supported potentials.  When
    the support extends beyond r_max the propagation is cut there and the
    truncation disk radius is reported; a radius above tol raises.
    """
    _validate_side(side)
    z = complex(z)
    if z == 0:
        raise WeylshiftError("m-function is singular at z = 0")
    if mu.has_atom_at(x):
        raise WeylshiftError(f"m-function undefined at an atom (x={x})")
    edge = _tail_edge(mu, x, side, margin)
    truncated = abs(edge - x) > r_max
    if truncated:
        edge = x + r_max if side == "plus" else x - r_max
    T, _ = propagate_matrix(mu, z, x, edge, cfg)
    k = free_wavenumber(z)
    h = 1j * k if side == "plus" else -1j * k
    den = T[1, 1] - h * T[0, 1]
    if den == 0:
        raise WeylshiftError("degenerate transfer matrix in m evaluation")
    val = (h * T[0, 0] - T[1, 0]) / den
    m = val if side == "plus" else -val
    radius = _disk_radius(T)
    if truncated:
        if not radius < tol:
            raise TruncationError(
                f"support extends beyond r_max={r_max} and the truncation disk "
                f"radius {radius:.3e} exceeds tol={tol}", achieved_radius=radius)
        err = radius
    else:
        err = max(cfg.rtol * (1.0 + abs(m)), 5e-15 * (1.0 + abs(m)))
    return MFunctionSample(x=float(x), z=z, side=side, value=complex(m),
                           truncation_R=abs(edge - x), error_estimate=float(err),
                           exact_tail=not truncated)


def weyl_disk(mu, x, z, side="plus", R=20.0, cfg=DEFAULT_SOLVER):
    """Truncation disk at radius R: the Moebius image of all real boundary
    conditions at x +/- R.  The true m-value lies inside for Im z > 0."""
    _validate_side(side)
    z = complex(z)
    if not z.imag > 0:
        raise WeylshiftError("Weyl disks require Im z > 0")
    if not R > 0:
        raise ValueError("R must be positive")
    if mu.has_atom_at(x):
        raise WeylshiftError(f"disk undefined at an atom (x={x})")
    x1 = x + R if side == "plus" else x - R
    T, _ = propagate_matrix(mu, z, x, x1, cfg)
    den = np.conj(T[0, 1]) * T[1, 1] - T[0, 1] * np.conj(T[1, 1])
    if den == 0:
        raise WeylshiftError("degenerate transfer matrix in disk construction")
    center = (T[0, 0] * np.conj(T[1, 1]) - T[1, 0] * np.conj(T[0, 1])) / den
    radius = _disk_radius(T)
    if not math.isfinite(radius):
        raise WeylshiftError("degenerate (infinite) Weyl disk")
    if side == "minus":
        center = -center
    return WeylDisk(center=complex(center), radius=float(radius), z=z,
                    x=float(x), side=side, truncation_R=float(R))


def _neville_at_zero(ys, values):
    p = [complex(v) for v in values]
    y = [float(v) for v in ys]
    n = len(p)
    for j in range(1, n):
        for i in range(n - j):
            p[i] = (y[i + j] * p[i] - y[i] * p[i + 1]) / (y[i + j] - y[i])
    return p[0]


def boundary_value(mu, x, t, side="plus", y_schedule=DEFAULT_Y_SCHEDULE,
                   cfg=DEFAULT_SOLVER, tol=1e-8, r_max=200.0):
    """Boundary value m_side(x, t + i0) by extrapolation along a y-schedule.

    Samples m at t + iy for the decreasing schedule and extrapolates the
    polynomial through (y, m) to y = 0.  The last raw increment is reported
    as an error proxy; the convergence flag records whether increments
    decreased monotonically (they need not at energies outside the
    absolutely continuous region).
    """
    ys = [float(y) for y in y_schedule]
    if not ys or any(y <= 0 for y in ys) or any(a <= b for a, b in zip(ys, ys[1:])):
        raise ValueError("y_schedule must be positive and strictly decreasing")
    samples = []
    for y in ys:
        s = m_halfline(mu, x, complex(t, y), side=side, tol=tol, cfg=cfg, r_max=r_max)
        samples.append(HerglotzSample(t=float(t), y=y, value=s.value))
    vals = [s.value for s in samples]
    value = _neville_at_zero(ys, vals) if len(vals) > 1 else vals[0]
    increments = tuple(abs(b - a) for a, b in zip(vals, vals[1:]))
    converged = all(b < a for a, b in zip(increments, increments[1:])) if len(increments) > 1 else True
    proxy = increments[-1] if increments else 0.0
    return BoundaryValue(x=float(x), t=float(t), side=side, value=value,
                         samples=tuple(samples), increments=increments,
                         error_proxy=float(proxy), converged=bool(converged))


def green_diagonal(mu, x, z, cfg=DEFAULT_SOLVER, pole_tol=1e-6, margin=0.5):
    """Diagonal Green function G(x, x; z) by two routes.

    Route one is -1/(m_plus + m_minus); route two is f_plus f_minus / W with
    the decaying solutions propagated from the support edges.  Both are
    returned so callers can assert their agreement.  Valid for Im z > 0 or
    real z below the spectrum; near a pole (m_plus + m_minus ~ 0) a
    PoleError is raised.
    """
    z = complex(z)
    mp = m_halfline(mu, x, z, side="plus", cfg=cfg, margin=margin)
    mm = m_halfline(mu, x, z, side="minus", cfg=cfg, margin=margin)
    H = mp.value + mm.value
    scale = 1.0 + abs(mp.value) + abs(mm.value)
    if abs(H) < pole_tol * scale:
        raise PoleError(f"Green function pole: m_plus + m_minus = {H:.3e} at z={z}")
    via_m = -1.0 / H

    k = free_wavenumber(z)
    edge_p = _tail_edge(mu, x, "plus", margin)
    edge_m = _tail_edge(mu, x, "minus", margin)
    st_p = solve_ivp(mu, z, edge_p, (1.0, 1j * k), x, cfg=cfg)
    st_m = solve_ivp(mu, z, edge_m, (1.0, -1j * k), x, cfg=cfg)
    W = st_p.f * st_m.df - st_p.df * st_m.f
    if W == 0:
        raise PoleError("vanishing Wronskian of the two decaying solutions")
    via_w = st_p.f * st_m.f / W
    return GreenDiagonal(value=complex(via_m), via_m=complex(via_m),
                         via_wronskian=complex(via_w), x=float(x), z=z)


def asymptotic_check(mu, x, kappas, side="plus", cfg=DEFAULT_SOLVER):
    """m_side(x, -kappa^2) + kappa for a list of kappa values.

    For potentials in the bounded classes the residual decays as kappa
    grows; the free potential gives exactly zero.
    """
    kappas = np.asarray(sorted(float(k) for k in kappas))
    if np.any(kappas <= 0):
        raise ValueError("kappa values must be positive")
    values = np.array([m_halfline(mu, x, -k * k, side=side, cfg=cfg).value
                       for k in kappas])
    residuals = values + kappas
    return AsymptoticCheck(kappas=kappas, values=values, residuals=residuals)


def m_continuity_test(mu_sequence, mu_limit, x, z_grid, side="plus",
                      cfg=DEFAULT_SOLVER):
    """Sup over the z-grid of |m(z; mu_n) - m(z; mu_limit)| per sequence entry."""
    z_grid = [complex(z) for z in z_grid]
    ref = [m_halfline(mu_limit, x, z, side=side, cfg=cfg).value for z in z_grid]
    out = []
    for mu_n in mu_sequence:
        devs = [abs(m_halfline(mu_n, x, z, side=side, cfg=cfg).value - r)
                for z, r in zip(z_grid, ref)]
        out.append(max(devs))
    return np.array(out)
