"""Scalar normal and bivariate-normal primitives.

All probability formulas downstream reduce to the standard normal CDF, its
inverse, and the bivariate lower-quantile probability

    gamma_cdf(t, q1, q2) = P[X <= Phi^-1(q1), Y <= Phi^-1(q2)]

for a standard bivariate normal pair with correlation t.  Boundary
conventions (continuity limits, needed because integral marginals are
legitimate inputs): gamma(t, 0, q) = 0, gamma(t, 1, q) = q, gamma(1, q1, q2)
= min(q1, q2), gamma(-1, q1, q2) = max(0, q1 + q2 - 1).  Phi and Phi^-1 are
extended-real: phi(+-inf) = 1/0 and phi_inv(0/1) = -+inf.

Accuracy: gamma_cdf is exact to ~1e-14 absolute (both backends), well inside
the 1e-12 budget the certifier assumes; the certifier additionally keeps an
explicit numeric margin so quadrature error can never flip an elimination.
"""

import math

from . import kernels

__all__ = ["phi", "phi_inv", "gamma_cdf", "gamma_dcorr", "gamma_dq1"]


def phi(x: float) -> float:
    """Standard normal CDF, total on the extended reals."""
    return kernels.norm_cdf(x)


def phi_inv(q: float) -> float:
    """Standard normal quantile; q must lie in [0, 1], the ends map to -+inf."""
    if math.isnan(q) or q < 0.0 or q > 1.0:
        raise ValueError(f"quantile must lie in [0, 1], got {q!r}")
    return kernels.norm_ppf(q)


def gamma_cdf(t: float, q1: float, q2: float) -> float:
    """P[X <= Phi^-1(q1), Y <= Phi^-1(q2)] at correlation t."""
    if not -1.0 <= t <= 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {t!r}")
    if not (0.0 <= q1 <= 1.0 and 0.0 <= q2 <= 1.0):
        raise ValueError(f"quantiles must lie in [0, 1], got {q1!r}, {q2!r}")
    return kernels.gamma_cdf(t, q1, q2)


def gamma_dcorr(t: float, q1: float, q2: float) -> float:
    """d gamma_cdf / d t: the bivariate density at the two quantile preimages.

    Always nonnegative, which is what makes the separation probability
    monotone in each correlation.
    """
    if not -1.0 < t < 1.0:
        raise ValueError(f"correlation {t!r} is singular for the derivative")
    if not (0.0 < q1 < 1.0 and 0.0 < q2 < 1.0):
        raise ValueError("quantiles must lie in (0, 1) for the derivative")
    h = kernels.norm_ppf(q1)
    k = kernels.norm_ppf(q2)
    om = 1.0 - t * t
    return math.exp(-(h * h + k * k - 2.0 * h * k * t) / (2.0 * om)) / (
        2.0 * math.pi * math.sqrt(om)
    )


def gamma_dq1(t: float, q1: float, q2: float) -> float:
    """d gamma_cdf / d q1 = Phi((Phi^-1(q2) - t Phi^-1(q1)) / sqrt(1 - t^2)).

    A probability, hence in [0, 1]; q2 may be 0 or 1 (limits 0 and 1).
    """
    if not -1.0 < t < 1.0:
        raise ValueError(f"correlation {t!r} is singular for the derivative")
    if not 0.0 < q1 < 1.0:
        raise ValueError("q1 must lie in (0, 1) for the derivative")
    if not 0.0 <= q2 <= 1.0:
        raise ValueError(f"q2 must lie in [0, 1], got {q2!r}")
    h = kernels.norm_ppf(q1)
    k = kernels.norm_ppf(q2)
    if math.isinf(k):
        return 0.0 if k < 0 else 1.0
    return kernels.norm_cdf((k - t * h) / math.sqrt(1.0 - t * t))
