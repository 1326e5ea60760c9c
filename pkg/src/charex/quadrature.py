"""Adaptive Gauss-Kronrod (7/15) quadrature and a piecewise Chebyshev interpolant.

Both are vectorized over panels: every refinement round evaluates the
integrand once on a stacked array of nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Sequence, Tuple

import numpy as np

__all__ = ["QuadratureError", "QuadResult", "gauss_kronrod", "ChebyshevPanels", "build_chebyshev"]

# QUADPACK qk15 abscissae and weights
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full 15-point layout on [-1, 1]
_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[:-1][::-1]])
_KW = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[:-1][::-1]])
_GW = np.zeros(15)
for _pos, _w in zip((1, 3, 5), _WG[:3]):
    _GW[_pos] = _w
    _GW[14 - _pos] = _w
_GW[7] = _WG[3]

Integrand = Callable[[np.ndarray], np.ndarray]


class QuadratureError(RuntimeError):
    """Adaptive refinement hit its limit before reaching the requested tolerance."""

    def __init__(self, message: str, estimate: float = math.nan, error: float = math.nan):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    panels: int
    evaluations: int


def _split_interval(a: float, b: float, breakpoints: Iterable[float]) -> List[Tuple[float, float]]:
    span = b - a
    cuts = sorted({p for p in breakpoints if a + 1e-14 * span < p < b - 1e-14 * span})
    edges = [a, *cuts, b]
    return [(lo, hi) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]


def gauss_kronrod(
    func: Integrand,
    a: float,
    b: float,
    tol: float = 1e-9,
    breakpoints: Sequence[float] = (),
    max_depth: int = 40,
) -> QuadResult:
    """Integrate ``func`` over [a, b] to absolute error ``tol``.

    Panels whose Kronrod/Gauss gap exceeds their share of ``tol`` (pro rata
    by width) are bisected; a panel at ``max_depth`` is frozen. The call
    raises QuadratureError if the accumulated error estimate still exceeds
    ``tol`` once nothing is left to refine.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if b <= a:
        return QuadResult(0.0, 0.0, 0, 0)
    span = b - a
    panels = _split_interval(a, b, breakpoints)
    lo = np.array([p[0] for p in panels])
    hi = np.array([p[1] for p in panels])
    depth = np.zeros(len(panels), dtype=int)
    value = 0.0
    error = 0.0
    n_panels = 0
    n_evals = 0
    while lo.size:
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        x = mid[:, None] + half[:, None] * _NODES[None, :]
        fx = np.asarray(func(x.ravel()), dtype=float).reshape(x.shape)
        n_evals += fx.size
        kron = half * (fx @ _KW)
        gauss = half * (fx @ _GW)
        err = np.abs(kron - gauss)
        if not np.all(np.isfinite(kron)):
            raise QuadratureError("integrand returned non-finite values", math.nan, math.inf)
        local_tol = tol * (hi - lo) / span
        refine = (err > local_tol) & (depth < max_depth)
        done = ~refine
        value += float(kron[done].sum())
        error += float(err[done].sum())
        n_panels += int(done.sum())
        if not refine.any():
            break
        lo_r, hi_r, mid_r, d_r = lo[refine], hi[refine], mid[refine], depth[refine] + 1
        lo = np.concatenate([lo_r, mid_r])
        hi = np.concatenate([mid_r, hi_r])
        depth = np.concatenate([d_r, d_r])
    if error > tol:
        raise QuadratureError(
            f"quadrature did not converge: error estimate {error:.3g} > tol {tol:.3g}", value, error
        )
    return QuadResult(value, error, n_panels, n_evals)


class ChebyshevPanels:
    """Piecewise Chebyshev series on [edges[0], edges[-1]]; zero to the left of the domain."""

    def __init__(self, edges: np.ndarray, coeffs: np.ndarray):
        self.edges = np.asarray(edges, dtype=float)
        self.coeffs = np.asarray(coeffs, dtype=float)

    @property
    def lower(self) -> float:
        return float(self.edges[0])

    @property
    def upper(self) -> float:
        return float(self.edges[-1])

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        flat = xa.ravel()
        out = np.zeros_like(flat)
        if np.any(flat > self.upper * (1 + 1e-12)):
            raise ValueError(f"point beyond interpolation domain (upper={self.upper})")
        inside = flat > self.lower
        if np.any(inside):
            pts = np.minimum(flat[inside], self.upper)
            idx = np.clip(np.searchsorted(self.edges, pts, side="right") - 1, 0, len(self.edges) - 2)
            a = self.edges[idx]
            b = self.edges[idx + 1]
            t = (2.0 * pts - a - b) / (b - a)
            c = self.coeffs[idx]
            # Clenshaw recurrence, one coefficient row per point
            b1 = np.zeros_like(t)
            b2 = np.zeros_like(t)
            for j in range(c.shape[1] - 1, 0, -1):
                b1, b2 = 2.0 * t * b1 - b2 + c[:, j], b1
            out[inside] = t * b1 - b2 + c[:, 0]
        out = out.reshape(xa.shape)
        return float(out) if xa.ndim == 0 else out


def _cheb_points(n: int) -> np.ndarray:
    return np.cos(np.pi * (np.arange(n) + 0.5) / n)


def _cheb_coeffs(values: np.ndarray) -> np.ndarray:
    n = values.shape[-1]
    j = np.arange(n) + 0.5
    m = np.arange(n)
    basis = np.cos(np.pi * np.outer(m, j) / n)
    c = (2.0 / n) * values @ basis.T
    c[..., 0] *= 0.5
    return c


def build_chebyshev(
    func: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float,
    breakpoints: Sequence[float] = (),
    points: int = 24,
    max_depth: int = 24,
) -> ChebyshevPanels:
    """Adaptive piecewise Chebyshev interpolant of ``func`` on [a, b].

    A panel is accepted once its last two coefficients sum below ``tol``;
    panels always break at ``breakpoints``. ``func`` receives a 1-D array
    of nodes (first-kind points, so panel ends are never sampled).
    """
    if b <= a:
        raise ValueError("empty interpolation interval")
    ref = _cheb_points(points)
    pending = [(lo, hi, 0) for lo, hi in _split_interval(a, b, breakpoints)]
    accepted: List[Tuple[float, float, np.ndarray]] = []
    while pending:
        lo = np.array([p[0] for p in pending])
        hi = np.array([p[1] for p in pending])
        depth = [p[2] for p in pending]
        x = 0.5 * (lo + hi)[:, None] + 0.5 * (hi - lo)[:, None] * ref[None, :]
        vals = np.asarray(func(x.ravel()), dtype=float).reshape(x.shape)
        coeffs = _cheb_coeffs(vals)
        tail = np.abs(coeffs[:, -1]) + np.abs(coeffs[:, -2])
        nxt = []
        for i, (l, h, d) in enumerate(zip(lo, hi, depth)):
            if tail[i] <= tol:
                accepted.append((l, h, coeffs[i]))
            elif d >= max_depth:
                raise QuadratureError(
                    f"interpolant did not resolve [{l:.6g}, {h:.6g}] (tail {tail[i]:.3g} > {tol:.3g})"
                )
            else:
                m = 0.5 * (l + h)
                nxt.extend([(l, m, d + 1), (m, h, d + 1)])
        pending = nxt
    accepted.sort(key=lambda p: p[0])
    edges = np.array([p[0] for p in accepted] + [accepted[-1][1]])
    return ChebyshevPanels(edges, np.vstack([p[2] for p in accepted]))
