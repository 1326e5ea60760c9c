"""Instance-level checks of the Stirling-number lemmas behind the characterizations.

Each ``lemmaN_sides`` returns the exact (lhs, rhs) integer pair; ``sweep``
runs every in-domain case of a parameter box and collects the failures.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .combinatorics import binomial, factorial, stirling2

__all__ = [
    "DomainError",
    "IdentityCase",
    "IdentityResult",
    "DerivativeCase",
    "VerificationReport",
    "LEMMAS",
    "lemma1_sides",
    "lemma2_sides",
    "lemma3_sides",
    "lemma4_sides",
    "compositions",
    "homogeneous_lhs_enumerate",
    "homogeneous_lhs_recursive",
    "am_derivative_coefficient",
    "am_derivative_closed_form",
    "maclaurin_residual",
    "sweep",
    "evaluate_case",
    "COMPOSITION_CAP",
]

LEMMAS = ("L1", "L2", "L3", "L4")
# explicit enumeration is used while r + k stays at or below this
COMPOSITION_CAP = 20


class DomainError(ValueError):
    """Parameters fall outside a lemma's hypotheses."""


@dataclass(frozen=True, order=True)
class IdentityCase:
    lemma_id: str
    k: int
    n: int
    r: int

    def __post_init__(self):
        if self.lemma_id not in LEMMAS:
            raise DomainError(f"unknown lemma {self.lemma_id!r}")
        _check_domain(self.lemma_id, self.k, self.n, self.r)


@dataclass(frozen=True)
class IdentityResult:
    case: IdentityCase
    lhs: int
    rhs: int

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs

    @property
    def residual(self) -> int:
        return self.lhs - self.rhs

    def to_dict(self) -> dict:
        return {
            "lemma": self.case.lemma_id,
            "k": self.case.k,
            "n": self.case.n,
            "r": self.case.r,
            # big ints go out as strings so JSON consumers never round them
            "lhs": str(self.lhs),
            "rhs": str(self.rhs),
            "equal": self.equal,
        }


@dataclass(frozen=True)
class DerivativeCase:
    m: int
    r: int

    def __post_init__(self):
        if self.m < 0 or self.r < 0:
            raise DomainError("m and r must be non-negative")


@dataclass
class VerificationReport:
    lemmas: Tuple[str, ...]
    k_max: int
    n_max: int
    r_max: int
    total_cases: int
    failures: List[IdentityResult] = field(default_factory=list)
    per_lemma: Dict[str, int] = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        # elapsed is wall-clock and deliberately left out of the payload
        return {
            "grid": {
                "lemmas": list(self.lemmas),
                "k_max": self.k_max,
                "n_max": self.n_max,
                "r_max": self.r_max,
            },
            "total_cases": self.total_cases,
            "cases_per_lemma": dict(sorted(self.per_lemma.items())),
            "failures": [f.to_dict() for f in self.failures],
            "ok": self.ok,
        }


def _min_k(lemma_id: str) -> int:
    # Lemmas 3 and 4 also hold for k = 1
    return 2 if lemma_id in ("L1", "L2") else 1


def _check_domain(lemma_id: str, k: int, n: int, r: int) -> None:
    lo = _min_k(lemma_id)
    if not (lo <= k <= n) or r < 0:
        bound = "1 < k <= n" if lo == 2 else "1 <= k <= n"
        raise DomainError(f"{lemma_id} needs {bound} and r >= 0, got k={k}, n={n}, r={r}")


def lemma1_sides(k: int, n: int, r: int) -> Tuple[int, int]:
    _check_domain("L1", k, n, r)
    return _lemma12(k, n, r, top=n - k, base=n)


def lemma2_sides(k: int, n: int, r: int) -> Tuple[int, int]:
    _check_domain("L2", k, n, r)
    return _lemma12(k, n, r, top=n - k + 1, base=n - k + 1)


def _lemma12(k: int, n: int, r: int, top: int, base: int) -> Tuple[int, int]:
    S = stirling2
    lhs = 0
    for j in range(k - 2, k + r):
        power = base ** (k + r - 1 - j)
        inner = 0
        for i in range(j - k + 3):
            inner += binomial(top, i) * factorial(i + k - 2) * S(j + 1, i + k - 1)
        lhs += inner * (k - 1) * power
    return lhs, _shared_rhs_factorial(k, n, r)


def _shared_rhs_factorial(k: int, n: int, r: int) -> int:
    return sum(
        binomial(n - k, i) * factorial(i + k - 1) * stirling2(k + r + 1, i + k)
        for i in range(r + 2)
    )


def _rising_rhs(k: int, n: int, r: int) -> int:
    # sum_i C(n-k,i) (i+k-1)!/(k-1)! S(k+r+1, i+k)
    return sum(
        binomial(n - k, i) * math.perm(i + k - 1, i) * stirling2(k + r + 1, i + k)
        for i in range(r + 2)
    )


def lemma3_sides(k: int, n: int, r: int) -> Tuple[int, int]:
    _check_domain("L3", k, n, r)
    S = stirling2
    lhs = 0
    for i in range(r + 2):
        c = binomial(n - k, i)
        if not c:
            continue
        inner = sum((n - k + s) * math.perm(i + s - 1, i) * S(s + r, i + s) for s in range(1, k + 1))
        lhs += c * inner
    return lhs, _rising_rhs(k, n, r)


def compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """Weak compositions of ``total`` into ``parts`` non-negative parts, lexicographically.

    Generated iteratively; there are C(total + parts - 1, parts - 1) of them.
    """
    if parts <= 0:
        if total == 0:
            yield ()
        return
    comp = [0] * (parts - 1) + [total]
    while True:
        yield tuple(comp)
        if parts == 1:
            return
        if comp[-1] > 0:
            comp[-2] += 1
            comp[-1] -= 1
            continue
        # last part is empty: carry the rightmost positive interior part leftwards
        j = parts - 2
        while j >= 0 and comp[j] == 0:
            j -= 1
        if j <= 0:
            return
        comp[j - 1] += 1
        comp[-1] = comp[j] - 1
        comp[j] = 0


def homogeneous_lhs_enumerate(k: int, n: int, r: int) -> int:
    """h_{r+1}(n, n-1, ..., n-k+1) by explicit composition enumeration."""
    xs = [n - t for t in range(k)]
    total = 0
    for js in compositions(r + 1, k):
        term = 1
        for x, j in zip(xs, js):
            if j:
                term *= x**j
        total += term
    return total


def homogeneous_lhs_recursive(k: int, n: int, r: int) -> int:
    """Same quantity via h_d(x_1..x_i) = h_d(x_1..x_{i-1}) + x_i h_{d-1}(x_1..x_i)."""
    degree = r + 1
    xs = [n - t for t in range(k)]
    # h[d] for the variables processed so far; start with zero variables
    h = [1] + [0] * degree
    for x in xs:
        for d in range(1, degree + 1):
            h[d] = h[d] + x * h[d - 1]
    return h[degree]


def lemma4_sides(k: int, n: int, r: int, method: str = "auto") -> Tuple[int, int]:
    """Complete homogeneous sum against the Stirling expression.

    The right side uses S(k+r+1, i+k), matching the r = 0 base case and the
    companion identity of ``lemma3_sides``.
    """
    _check_domain("L4", k, n, r)
    if method == "auto":
        method = "enumerate" if r + k <= COMPOSITION_CAP else "recursive"
    if method == "enumerate":
        if r + k > COMPOSITION_CAP:
            raise DomainError(
                f"enumeration of {math.comb(r + k, k - 1)} compositions exceeds cap r+k <= {COMPOSITION_CAP}"
            )
        lhs = homogeneous_lhs_enumerate(k, n, r)
    elif method == "recursive":
        lhs = homogeneous_lhs_recursive(k, n, r)
    else:
        raise ValueError(f"unknown method {method!r}")
    return lhs, _rising_rhs(k, n, r)


_SIDES: Dict[str, Callable[[int, int, int], Tuple[int, int]]] = {
    "L1": lemma1_sides,
    "L2": lemma2_sides,
    "L3": lemma3_sides,
    "L4": lemma4_sides,
}


def evaluate_case(case: IdentityCase) -> IdentityResult:
    lhs, rhs = _SIDES[case.lemma_id](case.k, case.n, case.r)
    return IdentityResult(case, lhs, rhs)


def _multinomial(parts: Sequence[int]) -> int:
    out = math.factorial(sum(parts))
    for p in parts:
        out //= math.factorial(p)
    return out


def am_derivative_coefficient(case: DerivativeCase) -> int:
    """Integer c with A_m^{(r)}(0) = c * lam^{r+1} when f^{(j)}(0) = (-1)^j lam^{j+1}.

    Sums the multinomial expansion of the r-th derivative of F^m f at the
    origin over j_1..j_m >= 1, j_{m+1} >= 0. Each factor F^{(j)}(0) becomes
    f^{(j-1)}(0), so every term carries sign (-1)^(r-m) and lam-degree r+1.
    """
    m, r = case.m, case.r
    if r < m:
        return 0
    total = 0
    # j_1..j_m >= 1: shift by one and enumerate weak compositions of r - m
    for shifted in compositions(r - m, m + 1):
        parts = [j + 1 for j in shifted[:m]] + [shifted[m]]
        coeff = _multinomial(parts)
        sign_exp = sum(j - 1 for j in parts[:m]) + parts[m]
        total += -coeff if sign_exp % 2 else coeff
    return total


def am_derivative_closed_form(case: DerivativeCase) -> int:
    """(-1)^(r-m) m! S(r+1, m+1)."""
    m, r = case.m, case.r
    value = math.factorial(m) * stirling2(r + 1, m + 1)
    return -value if (r - m) % 2 else value


def maclaurin_residual(rate: float, x: float, terms: int) -> float:
    """Truncation error of the series sum_q (-1)^q rate^{q+1} x^q / q! against rate*exp(-rate*x)."""
    if rate <= 0 or x <= 0 or terms < 1:
        raise DomainError("need rate > 0, x > 0 and terms >= 1")
    term = rate
    partial = 0.0
    for q in range(terms):
        if q:
            term *= -rate * x / q
        partial += term
    return abs(partial - rate * math.exp(-rate * x))


def iter_cases(lemmas: Iterable[str], k_max: int, n_max: int, r_max: int) -> Iterator[IdentityCase]:
    for lemma in sorted(set(lemmas)):
        if lemma not in LEMMAS:
            raise DomainError(f"unknown lemma {lemma!r}")
        for n in range(1, n_max + 1):
            for k in range(_min_k(lemma), min(k_max, n) + 1):
                for r in range(r_max + 1):
                    yield IdentityCase(lemma, k, n, r)


def _default_workers() -> int:
    env = os.environ.get("CHAREX_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def sweep(
    lemmas: Iterable[str],
    k_max: int,
    n_max: int,
    r_max: int,
    workers: Optional[int] = None,
) -> VerificationReport:
    """Check every in-domain case inside the box; raise DomainError if there are none."""
    lemmas = tuple(sorted(set(lemmas)))
    if r_max < 0:
        raise DomainError("r_max must be non-negative")
    for lemma in lemmas:
        if lemma not in LEMMAS:
            raise DomainError(f"unknown lemma {lemma!r}")
        lo = _min_k(lemma)
        if k_max < lo or n_max < lo:
            raise DomainError(f"{lemma} has no cases with k_max={k_max}, n_max={n_max} (needs k >= {lo})")
    cases = list(iter_cases(lemmas, k_max, n_max, r_max))
    workers = _default_workers() if workers is None else workers
    start = time.perf_counter()
    if workers > 1 and len(cases) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map preserves input order, so aggregation is deterministic
            results = list(pool.map(evaluate_case, cases, chunksize=16))
    else:
        results = [evaluate_case(c) for c in cases]
    per_lemma: Dict[str, int] = {}
    for c in cases:
        per_lemma[c.lemma_id] = per_lemma.get(c.lemma_id, 0) + 1
    return VerificationReport(
        lemmas=lemmas,
        k_max=k_max,
        n_max=n_max,
        r_max=r_max,
        total_cases=len(cases),
        failures=[res for res in results if not res.equal],
        per_lemma=per_lemma,
        elapsed=time.perf_counter() - start,
    )
