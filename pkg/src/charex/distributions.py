"""Positive-support laws used to probe the order-statistic characterizations.

Exponential is the only member of the characterized family; the others are
alternatives. All evaluators accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import ClassVar, Dict, Tuple, Type

import numpy as np
from scipy import special

__all__ = [
    "Distribution",
    "Exponential",
    "Weibull",
    "Gamma",
    "UniformPositive",
    "HalfNormal",
    "OrderStatisticSpec",
    "CATALOG",
    "parse_distribution",
    "make_stream",
    "uniforms",
    "sample",
    "order_stat_pdf",
    "order_stat_cdf",
    "order_stat_sample",
    "a_m",
    "regularized_lower_gamma",
]


def _wrap(x, out):
    return float(out) if np.ndim(x) == 0 else out


class Distribution:
    """Common surface; subclasses supply the closed forms on x > 0."""

    kind: ClassVar[str] = ""
    in_family: ClassVar[bool] = False

    def _pdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _sf(self, x: np.ndarray) -> np.ndarray:
        return 1.0 - self._cdf(x)

    def _quantile(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def pdf(self, x):
        xa = np.asarray(x, dtype=float)
        out = np.zeros_like(xa)
        pos = xa > 0
        if np.any(pos):
            out[pos] = self._pdf(xa[pos])
        return _wrap(x, out)

    def cdf(self, x):
        xa = np.asarray(x, dtype=float)
        out = np.zeros_like(xa)
        pos = xa > 0
        if np.any(pos):
            out[pos] = self._cdf(xa[pos])
        return _wrap(x, out)

    def sf(self, x):
        xa = np.asarray(x, dtype=float)
        out = np.ones_like(xa)
        pos = xa > 0
        if np.any(pos):
            out[pos] = self._sf(xa[pos])
        return _wrap(x, out)

    def quantile(self, u):
        ua = np.asarray(u, dtype=float)
        if np.any((ua <= 0) | (ua >= 1)) or np.any(np.isnan(ua)):
            raise ValueError("quantile needs u strictly inside (0, 1)")
        return _wrap(u, self._quantile(ua))

    @property
    def mean(self) -> float:
        raise NotImplementedError

    def breakpoints(self) -> Tuple[float, ...]:
        """Interior points where the density is not smooth."""
        return ()

    def support_upper(self) -> float:
        return math.inf

    def to_spec(self) -> str:
        params = ",".join(f"{f.name}={getattr(self, f.name)!r}" for f in fields(self))
        return f"{self.kind}:{params}"

    def __str__(self):
        return self.to_spec()


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (value > 0) or not math.isfinite(value):
        raise ValueError(f"{name} must be a finite positive number, got {value}")
    return value


@dataclass(frozen=True)
class Exponential(Distribution):
    rate: float = 1.0
    kind: ClassVar[str] = "exp"
    in_family: ClassVar[bool] = True

    def __post_init__(self):
        object.__setattr__(self, "rate", _positive("rate", self.rate))

    def _pdf(self, x):
        return self.rate * np.exp(-self.rate * x)

    def _cdf(self, x):
        return -np.expm1(-self.rate * x)

    def _sf(self, x):
        return np.exp(-self.rate * x)

    def _quantile(self, u):
        return -np.log1p(-u) / self.rate

    @property
    def mean(self):
        return 1.0 / self.rate


@dataclass(frozen=True)
class Weibull(Distribution):
    shape: float = 2.0
    scale: float = 1.0
    kind: ClassVar[str] = "weibull"

    def __post_init__(self):
        object.__setattr__(self, "shape", _positive("shape", self.shape))
        object.__setattr__(self, "scale", _positive("scale", self.scale))

    def _pdf(self, x):
        c, s = self.shape, self.scale
        z = x / s
        return (c / s) * z ** (c - 1) * np.exp(-(z**c))

    def _cdf(self, x):
        return -np.expm1(-((x / self.scale) ** self.shape))

    def _sf(self, x):
        return np.exp(-((x / self.scale) ** self.shape))

    def _quantile(self, u):
        return self.scale * (-np.log1p(-u)) ** (1.0 / self.shape)

    @property
    def mean(self):
        return self.scale * math.gamma(1.0 + 1.0 / self.shape)


def regularized_lower_gamma(a: float, x: float, eps: float = 1e-14, max_iter: int = 1000) -> float:
    """P(a, x): power series below a+1, modified Lentz continued fraction above."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x <= 0:
        return 0.0
    log_prefix = a * math.log(x) - x - math.lgamma(a)
    if x < a + 1.0:
        term = 1.0 / a
        total = term
        ap = a
        for _ in range(max_iter):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * eps:
                break
        return min(1.0, total * math.exp(log_prefix))
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, max_iter + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    upper = math.exp(log_prefix) * h
    return max(0.0, 1.0 - upper)


_lower_gamma_vec = np.vectorize(regularized_lower_gamma, otypes=[float])


@dataclass(frozen=True)
class Gamma(Distribution):
    shape: float = 2.0
    rate: float = 1.0
    kind: ClassVar[str] = "gamma"

    def __post_init__(self):
        object.__setattr__(self, "shape", _positive("shape", self.shape))
        object.__setattr__(self, "rate", _positive("rate", self.rate))

    def _pdf(self, x):
        a, b = self.shape, self.rate
        return np.exp(a * math.log(b) + (a - 1) * np.log(x) - b * x - math.lgamma(a))

    def _cdf(self, x):
        return _lower_gamma_vec(self.shape, self.rate * x)

    def _quantile(self, u):
        return special.gammaincinv(self.shape, u) / self.rate

    @property
    def mean(self):
        return self.shape / self.rate


@dataclass(frozen=True)
class UniformPositive(Distribution):
    upper: float = 1.0
    kind: ClassVar[str] = "unif"

    def __post_init__(self):
        object.__setattr__(self, "upper", _positive("upper", self.upper))

    def _pdf(self, x):
        return np.where(x < self.upper, 1.0 / self.upper, 0.0)

    def _cdf(self, x):
        return np.minimum(x / self.upper, 1.0)

    def _quantile(self, u):
        return u * self.upper

    @property
    def mean(self):
        return self.upper / 2.0

    def breakpoints(self):
        return (self.upper,)

    def support_upper(self):
        return self.upper


@dataclass(frozen=True)
class HalfNormal(Distribution):
    sigma: float = 1.0
    kind: ClassVar[str] = "halfnorm"

    def __post_init__(self):
        object.__setattr__(self, "sigma", _positive("sigma", self.sigma))

    def _pdf(self, x):
        s = self.sigma
        return math.sqrt(2.0 / math.pi) / s * np.exp(-0.5 * (x / s) ** 2)

    def _cdf(self, x):
        return special.erf(x / (self.sigma * math.sqrt(2.0)))

    def _sf(self, x):
        return special.erfc(x / (self.sigma * math.sqrt(2.0)))

    def _quantile(self, u):
        return self.sigma * math.sqrt(2.0) * special.erfinv(u)

    @property
    def mean(self):
        return self.sigma * math.sqrt(2.0 / math.pi)


CATALOG: Dict[str, Type[Distribution]] = {
    cls.kind: cls for cls in (Exponential, Weibull, Gamma, UniformPositive, HalfNormal)
}
_ALIASES = {"exponential": "exp", "uniform": "unif", "halfnormal": "halfnorm"}


def parse_distribution(text: str) -> Distribution:
    """Parse ``kind:key=value,...`` such as ``weibull:shape=2,scale=1``."""
    text = text.strip()
    kind, _, rest = text.partition(":")
    kind = _ALIASES.get(kind.strip().lower(), kind.strip().lower())
    if kind not in CATALOG:
        raise ValueError(f"unknown distribution {kind!r}; choose from {sorted(CATALOG)}")
    cls = CATALOG[kind]
    allowed = {f.name for f in fields(cls)}
    params = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, value = item.partition("=")
        key = key.strip()
        if not eq or key not in allowed:
            raise ValueError(f"bad parameter {item!r} for {kind}; expected {sorted(allowed)}")
        try:
            params[key] = float(value)
        except ValueError:
            raise ValueError(f"parameter {key} is not a number: {value!r}") from None
    return cls(**params)


@dataclass(frozen=True)
class OrderStatisticSpec:
    k: int
    n: int
    base: Distribution

    def __post_init__(self):
        if not (1 <= self.k <= self.n):
            raise ValueError(f"order statistic needs 1 <= k <= n, got k={self.k}, n={self.n}")


def make_stream(seed: int, *index: int) -> np.random.Generator:
    """Generator for sub-stream ``index`` of ``seed``; distinct indices never overlap."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(int(i) for i in index))
    return np.random.Generator(np.random.PCG64(ss))


_U53 = 2.0**-53


def uniforms(stream: np.random.Generator, size) -> np.ndarray:
    """Uniforms on the open interval (0, 1), one 64-bit draw each."""
    raw = stream.integers(0, 2**53, size=size, dtype=np.int64)
    return (raw.astype(float) + 0.5) * _U53


def sample(d: Distribution, stream: np.random.Generator, count: int) -> np.ndarray:
    if count < 0:
        raise ValueError("count must be non-negative")
    if count == 0:
        return np.empty(0)
    return np.asarray(d.quantile(uniforms(stream, count)), dtype=float)


def _orderstat_coeff(k: int, n: int) -> float:
    return float(math.factorial(n) // (math.factorial(k - 1) * math.factorial(n - k)))


def order_stat_pdf(spec: OrderStatisticSpec, x):
    """n!/((k-1)!(n-k)!) F^{k-1} (1-F)^{n-k} f."""
    d, k, n = spec.base, spec.k, spec.n
    xa = np.asarray(x, dtype=float)
    f = np.asarray(d.pdf(xa))
    out = _orderstat_coeff(k, n) * f
    if k > 1:
        out = out * np.asarray(d.cdf(xa)) ** (k - 1)
    if n > k:
        out = out * np.asarray(d.sf(xa)) ** (n - k)
    return _wrap(x, out)


def order_stat_cdf(spec: OrderStatisticSpec, x):
    """P(X_(k;n) <= x) = sum_{j>=k} C(n,j) F^j (1-F)^{n-j}."""
    xa = np.asarray(x, dtype=float)
    F = np.asarray(spec.base.cdf(xa))
    G = np.asarray(spec.base.sf(xa))
    out = np.zeros_like(F)
    for j in range(spec.k, spec.n + 1):
        out = out + math.comb(spec.n, j) * F**j * G ** (spec.n - j)
    return _wrap(x, out)


def order_stat_sample(spec: OrderStatisticSpec, stream: np.random.Generator, count: int) -> np.ndarray:
    """k-th smallest of n fresh draws, ``count`` times; draws are consumed row by row."""
    if count < 0:
        raise ValueError("count must be non-negative")
    if count == 0:
        return np.empty(0)
    draws = sample(spec.base, stream, count * spec.n).reshape(count, spec.n)
    if spec.n == 1:
        return draws[:, 0]
    return np.partition(draws, spec.k - 1, axis=1)[:, spec.k - 1]


def a_m(d: Distribution, m: int, x):
    """F(x)^m f(x)."""
    if m < 0:
        raise ValueError("m must be non-negative")
    xa = np.asarray(x, dtype=float)
    out = np.asarray(d.pdf(xa))
    if m:
        out = out * np.asarray(d.cdf(xa)) ** m
    return _wrap(x, out)
