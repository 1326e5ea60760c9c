"""Verification tools for Stirling-number identities and order-statistic characterizations
of the exponential distribution."""

__version__ = "0.1.0"

from .combinatorics import (  # noqa: E402
    StirlingTable,
    base_identity_residual,
    bell_triangle,
    binomial,
    factorial,
    falling_factorial,
    stirling2,
)
from .convolution import (  # noqa: E402
    DensityComparison,
    EqualityStatement,
    compare_densities,
    convolve_on_halfline,
    default_grid,
    lhs_pdf,
    parse_statement,
    scaled_pdf,
)
from .distributions import (  # noqa: E402
    Exponential,
    Gamma,
    HalfNormal,
    OrderStatisticSpec,
    UniformPositive,
    Weibull,
    a_m,
    order_stat_pdf,
    order_stat_sample,
    parse_distribution,
    sample,
)
from .identities import (  # noqa: E402
    DerivativeCase,
    IdentityCase,
    am_derivative_coefficient,
    lemma1_sides,
    lemma2_sides,
    lemma3_sides,
    lemma4_sides,
    maclaurin_residual,
    sweep,
)
from .mctests import McConfig, TestReport, equality_mc_test, gof_from_data  # noqa: E402
