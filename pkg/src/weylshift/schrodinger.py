"""Propagation of -f'' + f mu = z f through atoms and piecewise-linear density.

Between atoms the equation is solved in the classical variables (f, f') with
a piecewise propagator: on every linear piece of the density a fourth-order
Magnus step (two-point Gauss collocation) is taken, which is exact on pieces
where the density is constant and has unit determinant by construction, so
Wronskians are preserved to machine precision regardless of step size.
Sloped pieces are subdivided until the local Magnus truncation error is
below the configured tolerance.  Atoms of weight a at position c act through
the exact jump f'(c+) = f'(c-) + a f(c); f itself stays continuous.

The quasi-derivative reported in solution states is taken relative to the
starting point of the initial value problem: Af(x) = f'(x) - I(x) where
I(x) is the oriented integral of f against mu from x0 to x.  For x0 = 0
this is the usual normalization.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import AtomAtEndpointError

_SQRT3_6 = math.sqrt(3.0) / 6.0


@dataclass(frozen=True)
class SolverConfig:
    """Accuracy knobs for the piecewise propagator.

    rtol sets the target accuracy of propagated states over the whole path
    (it controls subdivision of sloped density pieces); atol is a floor for
    near-zero states.  max_step caps the Magnus step on sloped pieces.
    """

    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = 0.25

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0 or self.max_step <= 0:
            raise ValueError("tolerances and max_step must be positive")


DEFAULT_SOLVER = SolverConfig()


@dataclass(frozen=True)
class SolutionState:
    """Solution data at a point: value, classical derivative, quasi-derivative."""

    x: float
    f: complex
    df: complex
    af: complex


@dataclass(frozen=True)
class TransferMatrix:
    """2x2 matrix mapping (f, f') at x0 to (f, f') at x1 at energy z."""

    matrix: np.ndarray
    z: complex
    x0: float
    x1: float

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex).copy()
        if m.shape != (2, 2):
            raise ValueError("transfer matrix must be 2x2")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def det(self):
        m = self.matrix
        return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]

    def apply(self, f, df):
        m = self.matrix
        return (m[0, 0] * f + m[0, 1] * df, m[1, 0] * f + m[1, 1] * df)


def _cosh_sinhc_coshm1c(theta):
    """cosh(t), sinh(t)/t and (cosh(t)-1)/t^2 for complex arrays, stable at 0."""
    theta = np.asarray(theta, dtype=complex)
    small = np.abs(theta) < 1e-2
    safe = np.where(small, 1.0, theta)
    t2 = theta * theta
    cosh = np.cosh(theta)
    sinhc = np.where(small, 1.0 + t2 / 6.0 * (1.0 + t2 / 20.0 * (1.0 + t2 / 42.0)),
                     np.sinh(safe) / safe)
    coshm1c = np.where(small,
                       0.5 + t2 / 24.0 * (1.0 + t2 / 30.0 * (1.0 + t2 / 56.0)),
                       (np.cosh(safe) - 1.0) / (safe * safe))
    return cosh, sinhc, coshm1c


def _magnus_entries(delta, ql, qr):
    """Entries of the Gauss-2 Magnus propagator over one piece.

    q is linear on the piece with endpoint values ql, qr (q = V - z).
    Returns (m00, m01, m10, m11); the determinant is identically 1.
    """
    delta = np.asarray(delta, dtype=float)
    ql = np.asarray(ql, dtype=complex)
    qr = np.asarray(qr, dtype=complex)
    qbar = 0.5 * (ql + qr)
    d = -(qr - ql) * delta * delta / 12.0
    theta = np.sqrt(d * d + delta * delta * qbar)
    cosh, sinhc, _ = _cosh_sinhc_coshm1c(theta)
    m00 = cosh + sinhc * d
    m01 = sinhc * delta
    m10 = sinhc * delta * qbar
    m11 = cosh - sinhc * d
    return m00, m01, m10, m11


def _blocks(mu, x0, x1):
    """Split the traversal [x0 -> x1] at interior atoms.

    Yields (stops, atom) where stops is an array of span boundaries in
    traversal order ending at the atom position (or at x1 when atom is
    None); atom is (position, signed weight) with the traversal sign.
    """
    lo, hi = (x0, x1) if x0 <= x1 else (x1, x0)
    parts = [np.array([lo, hi])]
    brk = mu.density_breaks
    if brk.size:
        parts.append(brk[(brk > lo) & (brk < hi)])
    pos = mu.atom_positions
    inner_atoms = pos[(pos > lo) & (pos < hi)] if pos.size else np.empty(0)
    if inner_atoms.size:
        parts.append(inner_atoms)
    stops = np.unique(np.concatenate(parts))
    if x0 > x1:
        stops = stops[::-1]
        inner_atoms = inner_atoms[::-1]
    sign = 1.0 if x1 >= x0 else -1.0
    weights = dict(zip(mu.atom_positions.tolist(), mu.atom_weights.tolist()))
    start = 0
    for apos in inner_atoms:
        idx = int(np.nonzero(stops == apos)[0][0])
        yield stops[start:idx + 1], (float(apos), sign * weights[float(apos)])
        start = idx
    yield stops[start:], None


def _span_arrays(mu, stops):
    """Span endpoints and density endpoint values for consecutive stops."""
    xl = stops[:-1]
    xr = stops[1:]
    brk = mu.density_breaks
    if brk.size == 0:
        z = np.zeros_like(xl)
        return xl, xr, z, z.copy()
    mid = 0.5 * (xl + xr)
    inside = (mid >= brk[0]) & (mid <= brk[-1])
    vl = np.where(inside, np.interp(xl, brk, mu.density_values), 0.0)
    vr = np.where(inside, np.interp(xr, brk, mu.density_values), 0.0)
    return xl, xr, vl, vr


def _subdivide(xl, xr, vl, vr, z, cfg, total_len, extra_points=()):
    """Split spans into Magnus-sized sub-pieces; returns flat arrays.

    Sub-piece endpoints inherit linear density values exactly.  extra_points
    forces boundaries at the given coordinates (used for trace emission).
    """
    az = abs(z)
    lengths = np.abs(xr - xl)
    qm = np.maximum(np.abs(vl), np.abs(vr)) + az
    h_ovf = 250.0 / np.maximum(1e-12, np.sqrt(qm))
    slope = np.where(lengths > 0, np.abs(vr - vl) / np.where(lengths > 0, lengths, 1.0), 0.0)
    h_acc = 0.7 * (240.0 * cfg.rtol /
                   ((1.0 + slope) * (1.0 + qm) * (1.0 + total_len))) ** 0.25
    h = np.where(slope > 0.0,
                 np.maximum(1e-5, np.minimum(np.minimum(h_acc, cfg.max_step), h_ovf)),
                 h_ovf)
    nsub = np.maximum(1, np.ceil(lengths / h)).astype(int)

    extra = np.asarray(extra_points, dtype=float)
    plain = (not extra.size) and bool(np.all(nsub == 1))
    if plain:
        return xl, xr, vl, vr

    out_xl, out_xr, out_vl, out_vr = [], [], [], []
    descending = xl.size and xl[0] > xr[0]
    for i in range(xl.size):
        a, b, va, vb = xl[i], xr[i], vl[i], vr[i]
        if a == b:
            continue
        cuts = [a, b]
        if extra.size:
            m = (extra > min(a, b)) & (extra < max(a, b))
            cuts.extend(extra[m].tolist())
        cuts.sort(reverse=bool(descending))
        for c0, c1 in zip(cuts[:-1], cuts[1:]):
            n = max(1, int(math.ceil(abs(c1 - c0) / h[i])))
            xs = np.linspace(c0, c1, n + 1)
            vs = va + (vb - va) * (xs - a) / (b - a)
            out_xl.append(xs[:-1])
            out_xr.append(xs[1:])
            out_vl.append(vs[:-1])
            out_vr.append(vs[1:])
    if not out_xl:
        return (np.empty(0),) * 4
    return (np.concatenate(out_xl), np.concatenate(out_xr),
            np.concatenate(out_vl), np.concatenate(out_vr))


def _check_endpoints(mu, x0, x1):
    for x in (x0, x1):
        if mu.has_atom_at(x):
            raise AtomAtEndpointError(
                f"atom of the potential sits exactly at evaluation point x={x}; "
                "perturb the endpoint")


def propagate_matrix(mu, z, x0, x1, cfg=DEFAULT_SOLVER):
    """Transfer matrix from x0 to x1 together with a log scale factor.

    The returned matrix equals exp(-logscale) times the true transfer
    matrix; logscale is nonzero only when entries would overflow.  The true
    matrix has determinant 1, so det(returned) = exp(-2 * logscale).
    """
    z = complex(z)
    x0, x1 = float(x0), float(x1)
    _check_endpoints(mu, x0, x1)
    a, b, c, d = 1.0 + 0.0j, 0.0j, 0.0j, 1.0 + 0.0j
    logscale = 0.0
    if x0 == x1:
        return np.array([[a, b], [c, d]]), logscale
    total_len = abs(x1 - x0)
    for stops, atom in _blocks(mu, x0, x1):
        sxl, sxr, svl, svr = _subdivide(*_span_arrays(mu, stops), z, cfg, total_len)
        if sxl.size:
            delta = sxr - sxl
            m00, m01, m10, m11 = _magnus_entries(delta, svl - z, svr - z)
            L00, L01, L10, L11 = (m00.tolist(), m01.tolist(),
                                  m10.tolist(), m11.tolist())
            for i in range(len(L00)):
                p, q, r, s = L00[i], L01[i], L10[i], L11[i]
                a, c = p * a + q * c, r * a + s * c
                b, d = p * b + q * d, r * b + s * d
                if i % 512 == 511:
                    m = max(abs(a), abs(b), abs(c), abs(d))
                    if m > 1e120:
                        a, b, c, d = a / m, b / m, c / m, d / m
                        logscale += math.log(m)
        m = max(abs(a), abs(b), abs(c), abs(d))
        if m > 1e120:
            a, b, c, d = a / m, b / m, c / m, d / m
            logscale += math.log(m)
        if atom is not None:
            _, alpha = atom
            c, d = alpha * a + c, alpha * b + d
    return np.array([[a, b], [c, d]]), logscale


def transfer_matrix(mu, z, x0, x1, cfg=DEFAULT_SOLVER):
    """Transfer matrix as a TransferMatrix value (entries must fit a float)."""
    m, logscale = propagate_matrix(mu, z, x0, x1, cfg)
    if logscale != 0.0:
        if logscale > 600.0:
            raise OverflowError("transfer matrix entries overflow; "
                                "use propagate_matrix for scaled access")
        m = m * math.exp(logscale)
    return TransferMatrix(matrix=m, z=complex(z), x0=float(x0), x1=float(x1))


def _exact_piece_integral(f0, df0, delta, q):
    """Oriented integral of f over a constant-q piece from its initial data."""
    theta = cmath.sqrt(q) * delta
    if abs(theta) < 1e-2:
        t2 = theta * theta
        sinhc = 1.0 + t2 / 6.0 * (1.0 + t2 / 20.0)
        coshm1c = 0.5 + t2 / 24.0 * (1.0 + t2 / 30.0)
    else:
        sinhc = cmath.sinh(theta) / theta
        coshm1c = (cmath.cosh(theta) - 1.0) / (theta * theta)
    return f0 * delta * sinhc + df0 * delta * delta * coshm1c


def solve_ivp(mu, z, x0, init, x1, cfg=DEFAULT_SOLVER, trace_points=None):
    """Propagate an initial state (f, Af) at x0 to x1.

    Because x0 carries no atom, Af(x0) coincides with f'(x0).  Returns the
    state at x1; when trace_points is given, also returns arrays
    (x, f, df) sampled there (trace points must lie between x0 and x1 and
    avoid atoms).
    """
    z = complex(z)
    x0, x1 = float(x0), float(x1)
    _check_endpoints(mu, x0, x1)
    f, df = complex(init[0]), complex(init[1])
    if f == 0 and df == 0:
        raise ValueError("initial state must be nontrivial")
    quasi = 0.0j

    want_trace = trace_points is not None
    if want_trace:
        tp = np.sort(np.asarray(trace_points, dtype=float))
        if x0 > x1:
            tp = tp[::-1]
        trace_x, trace_f, trace_df = [], [], []
        emit_idx = 0
    else:
        tp = np.empty(0)

    def emit(x):
        nonlocal emit_idx
        while emit_idx < tp.size and tp[emit_idx] == x:
            trace_x.append(x)
            trace_f.append(f)
            trace_df.append(df)
            emit_idx += 1

    if want_trace:
        emit(x0)
    if x1 != x0:
        total_len = abs(x1 - x0)
        for stops, atom in _blocks(mu, x0, x1):
            sxl, sxr, svl, svr = _subdivide(*_span_arrays(mu, stops), z, cfg,
                                            total_len, extra_points=tp)
            n = sxl.size
            if n:
                delta = sxr - sxl
                vm = 0.5 * (svl + svr)
                h00, h01, h10, h11 = _magnus_entries(0.5 * delta, svl - z, vm - z)
                g00, g01, g10, g11 = _magnus_entries(0.5 * delta, vm - z, svr - z)
                H = (h00.tolist(), h01.tolist(), h10.tolist(), h11.tolist())
                G = (g00.tolist(), g01.tolist(), g10.tolist(), g11.tolist())
                dl = delta.tolist()
                vll, vml, vrl = svl.tolist(), vm.tolist(), svr.tolist()
                xrl = sxr.tolist()
                for i in range(n):
                    d_i = dl[i]
                    fm = H[0][i] * f + H[1][i] * df
                    dfm = H[2][i] * f + H[3][i] * df
                    fr = G[0][i] * fm + G[1][i] * dfm
                    dfr = G[2][i] * fm + G[3][i] * dfm
                    if vll[i] == vrl[i]:
                        if vll[i] != 0.0:
                            quasi += vll[i] * _exact_piece_integral(
                                f, df, d_i, vll[i] - z)
                    else:
                        quasi += d_i / 6.0 * (vll[i] * f + 4.0 * vml[i] * fm
                                              + vrl[i] * fr)
                    f, df = fr, dfr
                    if want_trace:
                        emit(xrl[i])
            if atom is not None:
                pos, signed_alpha = atom
                quasi += signed_alpha * f
                df = df + signed_alpha * f
    if want_trace:
        emit(x1)
    state = SolutionState(x=x1, f=f, df=df, af=df - quasi)
    if want_trace:
        order = slice(None) if x1 >= x0 else slice(None, None, -1)
        return state, (np.array(trace_x)[order], np.array(trace_f)[order],
                       np.array(trace_df)[order])
    return state


def solution_trace(mu, z, x0, init, x1, n_points=201, cfg=DEFAULT_SOLVER):
    """States on a uniform grid between x0 and x1 (the grid must avoid atoms).

    Returns (x, f, df) arrays in increasing-x order; endpoints included.
    """
    grid = np.linspace(x0, x1, n_points)
    for g in grid[1:-1]:
        if mu.has_atom_at(g):
            raise AtomAtEndpointError(
                "trace grid hits an atom; choose a different point count")
    _, (xs, fs, dfs) = solve_ivp(mu, z, x0, init, x1, cfg=cfg, trace_points=grid)
    return xs, fs, dfs
