"""Separation probability f, SDP contribution g, and their ratio.

f(c) is the closed-form probability that the two-hyperplane rounding with a
uniformly random generation order separates an edge whose vectors realize
the configuration c; g(c) = 1 - alpha_1 - alpha_2 - alpha_3 is the edge's
contribution to the relaxation objective.  The approximation quality of the
rounding is governed by inf f/g over feasible configurations.

mc_cut_probability is the independent Monte Carlo oracle for f: it simulates
the pairwise threshold process directly (no Gamma evaluations), with a
counter-based generator so distinct seeds are reproducible under concurrency.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy.special import ndtri

from . import kernels
from .configspace import Configuration

_PERMS = tuple(permutations(range(3)))


def cut_probability(c: Configuration) -> float:
    """Probability the randomized rounding separates an edge realizing c.

    Averages the same-cluster mass over all six generation orders; the
    conditional quantiles use the 0/0 -> 0 convention and are clamped to
    [0, 1], so the formula is total (certifier midpoints may be infeasible).
    """
    return kernels.cut_prob(c.x[0], c.x[1], c.w[0], c.w[1],
                            c.t[0], c.t[1], c.t[2])


def cut_probability_fixed_order(c: Configuration) -> float:
    """Separation probability when parts are generated in the fixed order 1,2,3."""
    return kernels.cut_prob_fixed(c.x[0], c.x[1], c.w[0], c.w[1],
                                  c.t[0], c.t[1], c.t[2])


def permutation_term(c: Configuration, first: int, second: int) -> float:
    """Same-cluster probability mass of the order generating `first` then `second`."""
    return kernels.perm_term(*c.x, *c.w, *c.t, first, second)


def sdp_contribution(c: Configuration) -> float:
    """g(c) = 1 - alpha_1 - alpha_2 - alpha_3."""
    return 1.0 - c.alpha[0] - c.alpha[1] - c.alpha[2]


def marginal_lower_bound(c: Configuration) -> float:
    """sum_i |x_i - w_i| / 2, a separation-probability floor from marginal
    preservation alone."""
    return sum(abs(c.x[i] - c.w[i]) for i in range(3)) / 2.0


def f_derivative_bound(box_upper_x2: float, box_upper_x1: float,
                       box_upper_w2: float, box_upper_w1: float
                       ) -> tuple[float, float, float, float]:
    """Bounds on |df/dx1|, |df/dx2|, |df/dw1|, |df/dw2|.

    |df/dz_i| <= 5/3 - (1 - z_{3-i})/3, evaluated at the supplied upper
    bounds of the opposite coordinate; ranges from 4/3 to 5/3.
    """
    return (5.0 / 3.0 - (1.0 - box_upper_x2) / 3.0,
            5.0 / 3.0 - (1.0 - box_upper_x1) / 3.0,
            5.0 / 3.0 - (1.0 - box_upper_w2) / 3.0,
            5.0 / 3.0 - (1.0 - box_upper_w1) / 3.0)


@dataclass(frozen=True)
class RatioReport:
    f: float
    g: float
    ratio: float | None  # None when g == 0
    fixed_order_f: float
    fixed_order_ratio: float | None
    lower_bound_marginal: float
    feasible: bool
    violations: tuple[str, ...]


def ratio_report(c: Configuration, g_zero_tol: float = 1e-12) -> RatioReport:
    from .configspace import is_feasible

    f = cut_probability(c)
    g = sdp_contribution(c)
    ff = cut_probability_fixed_order(c)
    rep = is_feasible(c)
    defined = abs(g) > g_zero_tol
    return RatioReport(
        f=f, g=g,
        ratio=f / g if defined else None,
        fixed_order_f=ff,
        fixed_order_ratio=ff / g if defined else None,
        lower_bound_marginal=marginal_lower_bound(c),
        feasible=rep.feasible,
        violations=rep.violations,
    )


def mc_cut_probability(c: Configuration, samples: int, seed: int
                       ) -> tuple[float, float]:
    """Monte Carlo estimate of the separation probability.

    Simulates the pairwise view of the rounding: a random generation order,
    then one correlated standard-normal pair per stage, with threshold tests
    against the (conditional) marginal quantiles.  Returns (mean, stderr).
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    x = np.asarray(c.x)
    w = np.asarray(c.w)
    t = np.asarray(c.t)
    perm_idx = np.asarray(_PERMS)  # (6, 3)

    separated = 0
    chunk = 1 << 18
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        pi = perm_idx[rng.integers(0, 6, size=m)]  # (m, 3)
        x1, x2 = x[pi[:, 0]], x[pi[:, 1]]
        w1, w2 = w[pi[:, 0]], w[pi[:, 1]]
        t1, t2 = t[pi[:, 0]], t[pi[:, 1]]

        z = rng.standard_normal((m, 4))
        a1 = z[:, 0]
        b1 = t1 * z[:, 0] + np.sqrt(np.clip(1.0 - t1 * t1, 0.0, None)) * z[:, 1]
        a2 = z[:, 2]
        b2 = t2 * z[:, 2] + np.sqrt(np.clip(1.0 - t2 * t2, 0.0, None)) * z[:, 3]

        with np.errstate(divide="ignore", invalid="ignore"):
            xc = np.where(x1 < 1.0, x2 / (1.0 - x1), 0.0)
            wc = np.where(w1 < 1.0, w2 / (1.0 - w1), 0.0)
        xc = np.clip(xc, 0.0, 1.0)
        wc = np.clip(wc, 0.0, 1.0)

        u_s1 = a1 >= ndtri(np.clip(1.0 - x1, 0.0, 1.0))
        v_s1 = b1 >= ndtri(np.clip(1.0 - w1, 0.0, 1.0))
        u_s2 = a2 >= ndtri(1.0 - xc)
        v_s2 = b2 >= ndtri(1.0 - wc)

        lab_u = np.where(u_s1, 0, np.where(u_s2, 1, 2))
        lab_v = np.where(v_s1, 0, np.where(v_s2, 1, 2))
        separated += int(np.count_nonzero(lab_u != lab_v))
        done += m

    p = separated / samples
    stderr = float(np.sqrt(p * (1.0 - p) / samples))
    return p, stderr
