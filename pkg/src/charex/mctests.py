"""Monte-Carlo checks of the identities and a data-driven exponentiality test.

Both sides of an identity are simulated on disjoint sub-streams and compared
with a two-sample KS or Cramer-von Mises test.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special

from .convolution import EqualityStatement
from .distributions import Distribution, OrderStatisticSpec, make_stream, order_stat_sample, sample

__all__ = [
    "McConfig",
    "TestReport",
    "InvalidDataError",
    "InsufficientDataError",
    "sample_lhs",
    "sample_rhs",
    "two_sample_statistic",
    "kolmogorov_sf",
    "cvm_limit_sf",
    "p_value",
    "permutation_p_value",
    "equality_mc_test",
    "gof_from_data",
    "gof_replicates",
    "read_data",
    "DEFAULT_ALPHA",
]

DEFAULT_ALPHA = 0.05
STATISTICS = ("KS", "CvM")
_SERIES_EPS = 1e-12

# sub-stream indices under the master seed
_LHS_STREAM, _RHS_STREAM, _PERM_STREAM = 0, 1, 2


class InvalidDataError(ValueError):
    pass


class InsufficientDataError(InvalidDataError):
    pass


@dataclass(frozen=True)
class McConfig:
    n_samples: int = 5000
    seed: int = 0
    statistic: str = "KS"
    p_value_mode: Optional[str] = None
    permutations: int = 999
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if self.n_samples < 2:
            raise ValueError("n_samples must be at least 2")
        stat = _normalize_stat(self.statistic)
        object.__setattr__(self, "statistic", stat)
        mode = self.p_value_mode
        if mode is None:
            mode = "permutation" if self.n_samples < 200 else "asymptotic"
        if mode not in ("asymptotic", "permutation"):
            raise ValueError(f"unknown p-value mode {mode!r}")
        object.__setattr__(self, "p_value_mode", mode)
        if mode == "permutation" and self.permutations < 99:
            raise ValueError("permutation mode needs at least 99 permutations")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")


def _normalize_stat(kind: str) -> str:
    for name in STATISTICS:
        if kind.lower() == name.lower():
            return name
    raise ValueError(f"unknown statistic {kind!r}; expected one of {STATISTICS}")


@dataclass(frozen=True)
class TestReport:
    statement: str
    base: str
    statistic_kind: str
    statistic: float
    p_value: float
    seed: int
    n_samples: Tuple[int, int]
    p_value_mode: str
    permutations: Optional[int] = None
    alpha: float = DEFAULT_ALPHA

    __test__ = False  # keep pytest from collecting this class

    @property
    def decision(self) -> str:
        return "reject" if self.p_value < self.alpha else "accept"

    def to_dict(self) -> dict:
        return {
            "statement": self.statement,
            "base": self.base,
            "statistic_kind": self.statistic_kind,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "decision": self.decision,
            "seed": self.seed,
            "n_samples": list(self.n_samples),
            "p_value_mode": self.p_value_mode,
            "permutations": self.permutations,
        }


def sample_lhs(statement: EqualityStatement, d: Distribution, stream: np.random.Generator, count: int) -> np.ndarray:
    """Replicates of the left-hand side; each replicate uses a contiguous run of draws."""
    k, n = statement.k, statement.n
    if count == 0:
        return np.empty(0)
    if statement.form == "T3":
        draws = sample(d, stream, count * k).reshape(count, k)
        return draws @ np.array(statement.weights())
    width = n if statement.form == "T1" else n + 1
    draws = sample(d, stream, count * width).reshape(count, width)
    block = draws[:, :-1]
    order = np.partition(block, k - 2, axis=1)[:, k - 2] if block.shape[1] > 1 else block[:, 0]
    return order + draws[:, -1] * statement.weights()[0]


def sample_rhs(statement: EqualityStatement, d: Distribution, stream: np.random.Generator, count: int) -> np.ndarray:
    return order_stat_sample(OrderStatisticSpec(statement.k, statement.n, d), stream, count)


def two_sample_statistic(xs: Sequence[float], ys: Sequence[float], kind: str = "KS") -> float:
    """KS sup-distance of the two ECDFs, or the rank form of the two-sample CvM statistic."""
    x = np.sort(np.asarray(xs, dtype=float))
    y = np.sort(np.asarray(ys, dtype=float))
    if x.size == 0 or y.size == 0:
        raise InvalidDataError("both samples must be non-empty")
    kind = _normalize_stat(kind)
    pooled = np.concatenate([x, y])
    if kind == "KS":
        fx = np.searchsorted(x, pooled, side="right") / x.size
        fy = np.searchsorted(y, pooled, side="right") / y.size
        return float(np.max(np.abs(fx - fy)))
    n, m = x.size, y.size
    N = n + m
    ranks = _average_ranks(pooled)
    rx = np.sort(ranks[:n])
    ry = np.sort(ranks[n:])
    u = n * np.sum((rx - np.arange(1, n + 1)) ** 2) + m * np.sum((ry - np.arange(1, m + 1)) ** 2)
    return float(u / (n * m * N) - (4.0 * n * m - 1.0) / (6.0 * N))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="mergesort")
    sorted_vals = values[order]
    ranks = np.empty(values.size)
    # tie groups get the mean of their positions
    starts = np.flatnonzero(np.r_[True, sorted_vals[1:] != sorted_vals[:-1]])
    ends = np.r_[starts[1:], values.size]
    avg = 0.5 * (starts + ends - 1) + 1.0
    ranks[order] = np.repeat(avg, ends - starts)
    return ranks


def kolmogorov_sf(lam: float) -> float:
    """P(K > lam) for the Kolmogorov limit law."""
    if lam <= 0:
        return 1.0
    if lam < 1.18:
        # theta-function form converges fast for small arguments
        total = 0.0
        j = 1
        while True:
            term = math.exp(-((2 * j - 1) ** 2) * math.pi**2 / (8.0 * lam * lam))
            total += term
            if term < _SERIES_EPS:
                break
            j += 1
        return min(1.0, max(0.0, 1.0 - math.sqrt(2.0 * math.pi) / lam * total))
    total = 0.0
    j = 1
    while True:
        term = math.exp(-2.0 * j * j * lam * lam)
        total += term if j % 2 else -term
        if term < _SERIES_EPS:
            break
        j += 1
    return min(1.0, max(0.0, 2.0 * total))


def cvm_limit_sf(t: float) -> float:
    """P(W > t) for the limiting Cramer-von Mises law (Bessel K_{1/4} series)."""
    if t <= 0:
        return 1.0
    total = 0.0
    j = 0
    while True:
        y = 4 * j + 1
        q = y * y / (16.0 * t)
        coef = math.exp(math.lgamma(j + 0.5) - math.lgamma(j + 1.0)) / (math.pi**1.5 * math.sqrt(t))
        term = coef * math.sqrt(y) * float(special.kve(0.25, q)) * math.exp(-2.0 * q)
        total += term
        if abs(term) < _SERIES_EPS or j > 200:
            break
        j += 1
    return min(1.0, max(0.0, 1.0 - total))


def p_value(statistic: float, kind: str, sizes: Tuple[int, int], mode: str = "asymptotic") -> float:
    """Asymptotic p-value; permutation p-values need the samples, see ``permutation_p_value``."""
    kind = _normalize_stat(kind)
    n, m = sizes
    if n < 1 or m < 1:
        raise InvalidDataError("both samples must be non-empty")
    if mode != "asymptotic":
        raise ValueError("p_value only covers asymptotic mode; use permutation_p_value")
    if kind == "KS":
        return kolmogorov_sf(math.sqrt(n * m / (n + m)) * statistic)
    # match the exact finite-sample mean and variance to the limit law (Anderson 1962)
    N = n + m
    mean = (1.0 + 1.0 / N) / 6.0
    var = (N + 1.0) * (4.0 * m * n * N - 3.0 * (m * m + n * n) - 2.0 * m * n) / (45.0 * N * N * 4.0 * m * n)
    return cvm_limit_sf(1.0 / 6.0 + (statistic - mean) / math.sqrt(45.0 * var))


def permutation_p_value(
    xs: Sequence[float],
    ys: Sequence[float],
    kind: str,
    count: int,
    stream: np.random.Generator,
) -> Tuple[float, float]:
    """(statistic, (b+1)/(B+1)) with b the number of pooled relabelings at least as extreme."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    observed = two_sample_statistic(x, y, kind)
    pooled = np.concatenate([x, y])
    n = x.size
    exceed = 0
    # small relative slack so float noise in equal statistics counts as a tie
    bar = observed - 1e-12 * max(1.0, abs(observed))
    for _ in range(count):
        perm = stream.permutation(pooled)
        if two_sample_statistic(perm[:n], perm[n:], kind) >= bar:
            exceed += 1
    return observed, (exceed + 1) / (count + 1)


def _run_test(xs, ys, config: McConfig, stream_for_perm) -> Tuple[float, float]:
    if config.p_value_mode == "permutation":
        return permutation_p_value(xs, ys, config.statistic, config.permutations, stream_for_perm())
    stat = two_sample_statistic(xs, ys, config.statistic)
    return stat, p_value(stat, config.statistic, (len(xs), len(ys)))


def equality_mc_test(statement: EqualityStatement, d: Distribution, config: McConfig) -> TestReport:
    """Simulate both sides of ``statement`` under ``d`` and test equality in law."""
    xs = sample_lhs(statement, d, make_stream(config.seed, _LHS_STREAM), config.n_samples)
    ys = sample_rhs(statement, d, make_stream(config.seed, _RHS_STREAM), config.n_samples)
    stat, p = _run_test(xs, ys, config, lambda: make_stream(config.seed, _PERM_STREAM))
    return TestReport(
        statement=str(statement),
        base=d.to_spec(),
        statistic_kind=config.statistic,
        statistic=stat,
        p_value=p,
        seed=config.seed,
        n_samples=(len(xs), len(ys)),
        p_value_mode=config.p_value_mode,
        permutations=config.permutations if config.p_value_mode == "permutation" else None,
        alpha=config.alpha,
    )


def _lhs_block(statement: EqualityStatement) -> int:
    if statement.form == "T2":
        return statement.n + 1
    return statement.n


def gof_replicates(size: int, statement: EqualityStatement) -> int:
    """Replicates per side that ``gof_from_data`` builds from ``size`` values."""
    return size // (statement.n + _lhs_block(statement))


def gof_from_data(
    data: Sequence[float],
    statement: EqualityStatement,
    config: McConfig,
    min_blocks: int = 50,
) -> TestReport:
    """Split positive data into disjoint blocks and compare the two sides of ``statement``.

    After a seeded shuffle, the first m blocks of n values give k-th order
    statistics and the next m blocks give left-hand replicates (for T3 the
    weighted sum of the first k entries). No value is used twice. Under an
    exponential parent both samples share one law whatever the rate, and
    every statistic is rank based, so rescaling the data changes nothing.
    """
    values = np.asarray(data, dtype=float)
    if values.ndim != 1:
        raise InvalidDataError("data must be one-dimensional")
    if not np.all(np.isfinite(values)) or np.any(values <= 0):
        raise InvalidDataError("data must be finite and strictly positive")
    n, k = statement.n, statement.k
    width_rhs = n
    width_lhs = _lhs_block(statement)
    required = (width_rhs + width_lhs) * min_blocks
    if values.size < required:
        raise InsufficientDataError(
            f"need at least {required} observations for {statement} with {min_blocks} blocks per side, got {values.size}"
        )
    m = gof_replicates(values.size, statement)
    shuffled = make_stream(config.seed, _LHS_STREAM).permutation(values)
    rhs_blocks = shuffled[: m * width_rhs].reshape(m, width_rhs)
    lhs_blocks = shuffled[m * width_rhs : m * (width_rhs + width_lhs)].reshape(m, width_lhs)
    ys = np.sort(rhs_blocks, axis=1)[:, k - 1]
    if statement.form == "T3":
        xs = lhs_blocks[:, :k] @ np.array(statement.weights())
    else:
        head = np.sort(lhs_blocks[:, :-1], axis=1)[:, k - 2]
        xs = head + lhs_blocks[:, -1] * statement.weights()[0]
    stat, p = _run_test(xs, ys, config, lambda: make_stream(config.seed, _PERM_STREAM))
    return TestReport(
        statement=str(statement),
        base="data",
        statistic_kind=config.statistic,
        statistic=stat,
        p_value=p,
        seed=config.seed,
        n_samples=(len(xs), len(ys)),
        p_value_mode=config.p_value_mode,
        permutations=config.permutations if config.p_value_mode == "permutation" else None,
        alpha=config.alpha,
    )


_SPLIT = re.compile(r"[,\s]+")


def read_data(path: Union[str, Path]) -> np.ndarray:
    """Read one-column CSV or whitespace-separated numbers; ``#`` starts a comment.

    A single non-numeric header line is tolerated before the first value.
    """
    values = []
    seen_header = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = [t for t in _SPLIT.split(line) if t]
            try:
                nums = [float(t) for t in tokens]
            except ValueError:
                if not values and not seen_header:
                    seen_header = True
                    continue
                raise InvalidDataError(f"{path}:{lineno}: not a number: {line!r}") from None
            values.extend(nums)
    arr = np.asarray(values, dtype=float)
    if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr <= 0)):
        raise InvalidDataError(f"{path}: values must be finite and strictly positive")
    return arr
