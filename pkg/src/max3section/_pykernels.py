"""Pure-Python kernel backend.

Scalar standard-normal and bivariate-normal primitives plus the pairwise
separation probability, built on scipy.special (ndtr/ndtri/owens_t).  The
compiled backend in ``_kernels.pyx`` exposes the same surface; either one
satisfies the accuracy contract (bivariate CDF to ~1e-14 absolute).
"""

import math

from scipy.special import ndtr, ndtri, owens_t

_PERMS = (
    (0, 1, 2),
    (0, 2, 1),
    (1, 0, 2),
    (1, 2, 0),
    (2, 0, 1),
    (2, 1, 0),
)

TWO_PI = 2.0 * math.pi


def norm_cdf(x: float) -> float:
    if math.isnan(x):
        return math.nan
    if x == math.inf:
        return 1.0
    if x == -math.inf:
        return 0.0
    return float(ndtr(x))


def norm_ppf(q: float) -> float:
    if q <= 0.0:
        return -math.inf
    if q >= 1.0:
        return math.inf
    return float(ndtri(q))


def _bvn_cdf(h: float, k: float, rho: float) -> float:
    """P[X <= h, Y <= k] for a standard bivariate normal, Owen's T route."""
    if h == 0.0 and k == 0.0:
        return 0.25 + math.asin(rho) / TWO_PI
    r = math.sqrt((1.0 - rho) * (1.0 + rho))
    if h == 0.0:
        return 0.5 * float(ndtr(k)) - float(owens_t(k, -rho / r))
    if k == 0.0:
        return 0.5 * float(ndtr(h)) - float(owens_t(h, -rho / r))
    ah = (k - rho * h) / (h * r)
    ak = (h - rho * k) / (k * r)
    delta = 0.5 if h * k < 0.0 else 0.0
    return (
        0.5 * (float(ndtr(h)) + float(ndtr(k)))
        - float(owens_t(h, ah))
        - float(owens_t(k, ak))
        - delta
    )


def gamma_cdf(t: float, q1: float, q2: float) -> float:
    """Bivariate-normal lower-quantile probability with boundary conventions.

    Arguments are clamped into their domains so the function is total; the
    degenerate cases (quantile 0/1, correlation +-1) use the continuity
    limits: gamma(t,0,q)=0, gamma(t,1,q)=q, gamma(1,.)=min, gamma(-1,.)=
    max(0, q1+q2-1).
    """
    q1 = 0.0 if q1 < 0.0 else (1.0 if q1 > 1.0 else q1)
    q2 = 0.0 if q2 < 0.0 else (1.0 if q2 > 1.0 else q2)
    t = -1.0 if t < -1.0 else (1.0 if t > 1.0 else t)
    if q1 == 0.0 or q2 == 0.0:
        return 0.0
    if q1 == 1.0:
        return q2
    if q2 == 1.0:
        return q1
    if t == 1.0:
        return min(q1, q2)
    if t == -1.0:
        return max(0.0, q1 + q2 - 1.0)
    v = _bvn_cdf(norm_ppf(q1), norm_ppf(q2), t)
    return 0.0 if v < 0.0 else (1.0 if v > 1.0 else v)


def _cond(num: float, prev: float) -> float:
    # conditional marginal num/(1-prev) with the 0/0 -> 0 convention
    d = 1.0 - prev
    if d <= 0.0:
        return 0.0
    c = num / d
    return 0.0 if c < 0.0 else (1.0 if c > 1.0 else c)


def perm_term(
    x1: float, x2: float, x3: float,
    w1: float, w2: float, w3: float,
    t1: float, t2: float, t3: float,
    i: int, j: int,
) -> float:
    """Same-cluster probability mass of one generation order (i first, j second)."""
    x = (x1, x2, x3)
    w = (w1, w2, w3)
    t = (t1, t2, t3)
    xc = _cond(x[j], x[i])
    wc = _cond(w[j], w[i])
    return gamma_cdf(t[i], x[i], w[i]) + gamma_cdf(t[i], 1.0 - x[i], 1.0 - w[i]) * (
        gamma_cdf(t[j], 1.0 - xc, 1.0 - wc) + gamma_cdf(t[j], xc, wc)
    )


def cut_prob(
    x1: float, x2: float, w1: float, w2: float,
    t1: float, t2: float, t3: float,
) -> float:
    """Separation probability, averaged over all six generation orders."""
    x3 = 1.0 - x1 - x2
    w3 = 1.0 - w1 - w2
    s = 0.0
    for i, j, _ in _PERMS:
        s += perm_term(x1, x2, x3, w1, w2, w3, t1, t2, t3, i, j)
    return 1.0 - s / 6.0


def cut_prob_fixed(
    x1: float, x2: float, w1: float, w2: float,
    t1: float, t2: float, t3: float,
) -> float:
    """Separation probability when parts are generated in the order 1,2,3."""
    x3 = 1.0 - x1 - x2
    w3 = 1.0 - w1 - w2
    return 1.0 - perm_term(x1, x2, x3, w1, w2, w3, t1, t2, t3, 0, 1)


def cut_prob_fill(args, out) -> None:
    """Rows of args: x1 x2 w1 w2 t1 t2 t3; writes f per row into out."""
    for i in range(len(out)):
        out[i] = cut_prob(*args[i])
