"""Left-hand densities of the three order-statistic identities, by numerical convolution.

T1:  X_(k-1; n-1) + X/n           =d  X_(k; n)      (1 < k <= n)
T2:  X_(k-1; n)   + X_0/(n-k+1)   =d  X_(k; n)      (1 < k <= n)
T3:  X_1/n + ... + X_k/(n-k+1)    =d  X_(k; n)      (1 <= k <= n)

For exponential parents all three hold exactly; the alternatives in the
catalog should show a visible gap.
"""

from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass, field
from typing import Callable, List, Sequence, Tuple

import numpy as np

from .distributions import Distribution, OrderStatisticSpec, order_stat_pdf
from .quadrature import ChebyshevPanels, QuadratureError, build_chebyshev, gauss_kronrod

__all__ = [
    "EqualityStatement",
    "parse_statement",
    "Density",
    "DensityComparison",
    "scaled_pdf",
    "scaled_density",
    "order_stat_density",
    "convolve_on_halfline",
    "lhs_pdf",
    "rhs_pdf",
    "lhs_density",
    "compare_densities",
    "default_grid",
    "lhs_support_upper",
    "QuadratureError",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-9
FORMS = ("T1", "T2", "T3")


@dataclass(frozen=True)
class EqualityStatement:
    form: str
    k: int
    n: int

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"unknown statement form {self.form!r}; expected one of {FORMS}")
        lo = 1 if self.form == "T3" else 2
        if not (lo <= self.k <= self.n):
            raise ValueError(
                f"{self.form} needs {'1 <=' if lo == 1 else '1 <'} k <= n, got k={self.k}, n={self.n}"
            )

    def weights(self) -> Tuple[float, ...]:
        """Scale factors applied to the independent summands, in summation order."""
        if self.form == "T1":
            return (1.0 / self.n,)
        if self.form == "T2":
            return (1.0 / (self.n - self.k + 1),)
        return tuple(1.0 / (self.n - i + 1) for i in range(1, self.k + 1))

    def __str__(self):
        return f"{self.form}:k={self.k},n={self.n}"


_STATEMENT_RE = re.compile(r"^\s*(T[123])\s*:\s*k\s*=\s*(\d+)\s*,\s*n\s*=\s*(\d+)\s*$", re.IGNORECASE)


def parse_statement(text: str) -> EqualityStatement:
    """Parse ``T1:k=2,n=3`` style text."""
    m = _STATEMENT_RE.match(text)
    if not m:
        raise ValueError(f"malformed statement {text!r}; expected e.g. 'T1:k=2,n=3'")
    return EqualityStatement(m.group(1).upper(), int(m.group(2)), int(m.group(3)))


@dataclass(frozen=True)
class Density:
    """Vectorized density on (0, inf) plus the interior points where it is not smooth."""

    func: Callable[[np.ndarray], np.ndarray]
    breakpoints: Tuple[float, ...] = ()

    def __call__(self, x):
        return self.func(x)


def scaled_pdf(d: Distribution, c: float, y):
    """Density of X/c at y, i.e. c f(c y)."""
    if not c > 0:
        raise ValueError("scale factor must be positive")
    out = c * np.asarray(d.pdf(c * np.asarray(y, dtype=float)))
    return float(out) if np.ndim(y) == 0 else out


def scaled_density(d: Distribution, c: float) -> Density:
    if not c > 0:
        raise ValueError("scale factor must be positive")
    return Density(lambda y: c * np.asarray(d.pdf(c * np.asarray(y, dtype=float))),
                   tuple(b / c for b in d.breakpoints()))


def order_stat_density(d: Distribution, k: int, n: int) -> Density:
    spec = OrderStatisticSpec(k, n, d)
    return Density(lambda x: np.asarray(order_stat_pdf(spec, x)), tuple(d.breakpoints()))


def _combine_breaks(a: Sequence[float], b: Sequence[float]) -> Tuple[float, ...]:
    pts = {p + q for p in (0.0, *a) for q in (0.0, *b)}
    pts.discard(0.0)
    return tuple(sorted(pts))


def convolve_on_halfline(g: Density, h: Density, x: float, tol: float = DEFAULT_TOL) -> float:
    """int_0^x g(x - y) h(y) dy for densities vanishing on (-inf, 0].

    The panel layout splits at every point where either factor is known to
    jump or kink, mapped into the integration variable.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not x > 0:
        return 0.0
    cuts = [p for p in h.breakpoints if 0 < p < x] + [x - p for p in g.breakpoints if 0 < p < x]
    res = gauss_kronrod(lambda y: g(x - y) * h(y), 0.0, x, tol=tol, breakpoints=cuts)
    return max(res.value, 0.0)


@functools.lru_cache(maxsize=64)
def _fold_cache(d: Distribution, scales: Tuple[int, ...], tol: float, upper: float) -> Tuple[ChebyshevPanels, Tuple[float, ...]]:
    # density of sum_{i} X_i / scales[i], tabulated on [0, upper]
    current = scaled_density(d, scales[0])
    for c in scales[1:]:
        h = scaled_density(d, c)
        prev = current
        node_tol = tol / 100.0

        def values(xs, prev=prev, h=h):
            return np.array([convolve_on_halfline(prev, h, float(x), node_tol) for x in xs])

        breaks = _combine_breaks(prev.breakpoints, h.breakpoints)
        panels = build_chebyshev(values, 0.0, upper, tol / 10.0, breakpoints=breaks)
        current = Density(panels, breaks)
    return current.func, current.breakpoints


def lhs_density(statement: EqualityStatement, d: Distribution, upper: float, tol: float = DEFAULT_TOL) -> Density:
    """Density of the left-hand side, usable on (0, upper]."""
    n, k = statement.n, statement.k
    if statement.form == "T1":
        g = order_stat_density(d, k - 1, n - 1)
        h = scaled_density(d, n)
    elif statement.form == "T2":
        g = order_stat_density(d, k - 1, n)
        h = scaled_density(d, n - k + 1)
    else:
        scales = tuple(n - i + 1 for i in range(1, k + 1))
        if k == 1:
            return scaled_density(d, n)
        if k == 2:
            g = scaled_density(d, scales[0])
        else:
            func, breaks = _fold_cache(d, scales[:-1], float(tol), float(upper))
            g = Density(func, breaks)
        h = scaled_density(d, scales[-1])

    def evaluate(x, g=g, h=h):
        xa = np.asarray(x, dtype=float)
        out = np.array([convolve_on_halfline(g, h, float(v), tol) for v in xa.ravel()]).reshape(xa.shape)
        return float(out) if xa.ndim == 0 else out

    return Density(evaluate, _combine_breaks(g.breakpoints, h.breakpoints))


def lhs_pdf(statement: EqualityStatement, d: Distribution, x: float, tol: float = DEFAULT_TOL) -> float:
    if not x > 0:
        return 0.0
    return float(lhs_density(statement, d, float(x), tol)(float(x)))


def rhs_pdf(statement: EqualityStatement, d: Distribution, x):
    return order_stat_pdf(OrderStatisticSpec(statement.k, statement.n, d), x)


def lhs_support_upper(statement: EqualityStatement, d: Distribution, mass: float = 1e-12) -> float:
    """Point beyond which the left-hand side carries at most about ``mass`` probability."""
    q = d.support_upper()
    if not math.isfinite(q):
        q = float(d.quantile(1.0 - mass))
    if statement.form == "T3":
        return q * sum(statement.weights())
    return q * (1.0 + statement.weights()[0])


def default_grid(d: Distribution, count: int = 100, lower: float = 0.01, upper: float = None) -> np.ndarray:
    """Evenly spaced grid on [lower, 5 * mean]; for Exponential(rate) that is [0.01, 5/rate]."""
    if upper is None:
        upper = 5.0 * d.mean
    return np.linspace(lower, upper, count)


@dataclass
class DensityComparison:
    statement: EqualityStatement
    base: Distribution
    grid: np.ndarray
    lhs_values: np.ndarray
    rhs_values: np.ndarray
    tol: float = DEFAULT_TOL
    sup_deviation: float = field(init=False)
    argmax: float = field(init=False)

    def __post_init__(self):
        if len(self.grid):
            gap = np.abs(self.lhs_values - self.rhs_values)
            i = int(np.argmax(gap))
            self.sup_deviation = float(gap[i])
            self.argmax = float(self.grid[i])
        else:
            self.sup_deviation = 0.0
            self.argmax = math.nan

    def to_dict(self) -> dict:
        return {
            "statement": str(self.statement),
            "distribution": self.base.to_spec(),
            "tol": self.tol,
            "grid": [float(v) for v in self.grid],
            "lhs": [float(v) for v in self.lhs_values],
            "rhs": [float(v) for v in self.rhs_values],
            "sup_deviation": self.sup_deviation,
            "argmax": None if math.isnan(self.argmax) else self.argmax,
        }


def compare_densities(
    statement: EqualityStatement,
    d: Distribution,
    grid: Sequence[float],
    tol: float = DEFAULT_TOL,
) -> DensityComparison:
    """Evaluate both sides of ``statement`` on ``grid`` and record the sup gap."""
    xs = np.asarray(grid, dtype=float)
    if xs.size == 0:
        empty = np.empty(0)
        return DensityComparison(statement, d, empty, empty, empty, tol)
    if np.any(xs <= 0) or np.any(np.diff(xs) < 0):
        raise ValueError("grid must be strictly positive and sorted")
    lhs = np.atleast_1d(lhs_density(statement, d, float(xs[-1]), tol)(xs))
    rhs = np.atleast_1d(np.asarray(rhs_pdf(statement, d, xs), dtype=float))
    return DensityComparison(statement, d, xs, lhs, rhs, tol)
