"""Max-k-Section generalization at the configuration level.

For k parts the rounding runs k-1 threshold stages with conditional
marginals; the separation probability averages the same-cluster mass over
all k! generation orders.  No polytope characterization exists beyond
k = 3, so feasibility is handled through the joint table itself (any
nonnegative k x k table with unit mass is realizable, by the same
square-root construction as in configspace.realize), and the ratio
infimum is estimated by multi-start derivative-free minimization over the
table simplex -- an estimate, never a certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy.optimize import minimize
from scipy.special import ndtri

from . import kernels

MAX_K_EXACT = 6  # k! permutation sum


@dataclass(frozen=True)
class KConfiguration:
    """One edge's geometry for k parts: the k x k table of inner products."""

    k: int
    joint: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "joint", np.asarray(self.joint, dtype=float))
        if self.k < 2:
            raise ValueError(f"need k >= 2, got {self.k}")
        if self.joint.shape != (self.k, self.k):
            raise ValueError(
                f"joint table must be {self.k}x{self.k}, got {self.joint.shape}")

    @property
    def x(self) -> np.ndarray:
        return self.joint.sum(axis=1)

    @property
    def w(self) -> np.ndarray:
        return self.joint.sum(axis=0)

    @property
    def alpha(self) -> np.ndarray:
        return np.diag(self.joint)

    def correlations(self) -> np.ndarray:
        """Per-cluster z-vector correlations from the diagonal (0 when degenerate)."""
        x, w, a = self.x, self.w, self.alpha
        rad = np.sqrt(np.clip(x - x * x, 0.0, None)
                      * np.clip(w - w * w, 0.0, None))
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(rad > 0.0, (a - x * w) / np.where(rad > 0, rad, 1.0), 0.0)
        return np.clip(t, -1.0, 1.0)

    def violations(self, tol: float = 1e-9) -> list[str]:
        out = []
        if self.joint.min() < -tol:
            out.append(f"negative entry {self.joint.min()}")
        if abs(self.joint.sum() - 1.0) > tol:
            out.append(f"total mass {self.joint.sum()} != 1")
        return out

    def embed(self) -> "KConfiguration":
        """Add an empty (k+1)-th cluster on both vertices."""
        p = np.zeros((self.k + 1, self.k + 1))
        p[: self.k, : self.k] = self.joint
        return KConfiguration(self.k + 1, p)

    @classmethod
    def from_configuration(cls, c) -> "KConfiguration":
        from .configspace import joint_from_config

        return cls(3, joint_from_config(c).p)


def sdp_contribution_k(c: KConfiguration) -> float:
    return 1.0 - float(np.trace(c.joint))


def _cond(num: float, rem: float) -> float:
    if rem <= 0.0:
        return 0.0
    v = num / rem
    return 0.0 if v < 0.0 else (1.0 if v > 1.0 else v)


def k_cut_probability(c: KConfiguration) -> float:
    """Separation probability of the k-stage rounding, exact permutation sum.

    Per generation order, the pair lands together in the j-th generated
    cluster when both survive the first j-1 stages and both pass stage j;
    the last cluster collects the all-survive mass.
    """
    if c.k > MAX_K_EXACT:
        raise ValueError(f"k={c.k} exceeds the k! budget ({MAX_K_EXACT})")
    x = c.x
    w = c.w
    t = c.correlations()
    gamma = kernels.gamma_cdf
    total_same = 0.0
    count = 0
    for perm in permutations(range(c.k)):
        rem_x = 1.0
        rem_w = 1.0
        surv = 1.0
        same = 0.0
        for j in range(c.k - 1):
            cl = perm[j]
            xt = _cond(x[cl], rem_x)
            wt = _cond(w[cl], rem_w)
            same += surv * gamma(t[cl], xt, wt)
            surv *= gamma(t[cl], 1.0 - xt, 1.0 - wt)
            rem_x -= x[cl]
            rem_w -= w[cl]
        same += surv  # both survive every stage: last cluster
        total_same += same
        count += 1
    return 1.0 - total_same / count


def k_mc_cut_probability(c: KConfiguration, samples: int, seed: int
                         ) -> tuple[float, float]:
    """Monte Carlo oracle: simulate the k-1 stage threshold process."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    k = c.k
    x = c.x
    w = c.w
    t = c.correlations()
    perms = np.asarray(list(permutations(range(k))))

    separated = 0
    chunk = 1 << 17
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        pi = perms[rng.integers(0, len(perms), size=m)]  # (m, k)
        lab_u = np.full(m, k - 1)
        lab_v = np.full(m, k - 1)
        rem_x = np.ones(m)
        rem_w = np.ones(m)
        for j in range(k - 1):
            cl = pi[:, j]
            tc = t[cl]
            z = rng.standard_normal((m, 2))
            a = z[:, 0]
            b = tc * z[:, 0] + np.sqrt(np.clip(1.0 - tc * tc, 0.0, None)) * z[:, 1]
            with np.errstate(divide="ignore", invalid="ignore"):
                xt = np.where(rem_x > 0.0, x[cl] / rem_x, 0.0)
                wt = np.where(rem_w > 0.0, w[cl] / rem_w, 0.0)
            xt = np.clip(xt, 0.0, 1.0)
            wt = np.clip(wt, 0.0, 1.0)
            hit_u = (lab_u == k - 1) & (a >= ndtri(1.0 - xt))
            hit_v = (lab_v == k - 1) & (b >= ndtri(1.0 - wt))
            lab_u = np.where(hit_u, j, lab_u)
            lab_v = np.where(hit_v, j, lab_v)
            rem_x = rem_x - x[cl]
            rem_w = rem_w - w[cl]
        separated += int(np.count_nonzero(lab_u != lab_v))
        done += m

    p = separated / samples
    return p, float(np.sqrt(p * (1.0 - p) / samples))


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(v) + 1)
    cond = u - css / idx > 0
    rho = idx[cond][-1]
    theta = css[cond][-1] / rho
    return np.maximum(v - theta, 0.0)


@dataclass(frozen=True)
class KEstimate:
    k: int
    min_ratio: float
    argmin: KConfiguration
    starts: int


def estimate_mu_k(k: int, starts: int = 200, seed: int = 0,
                  delta_prime: float = 0.01) -> KEstimate:
    """Multi-start local minimization of f/g over the joint-table simplex.

    Nelder-Mead in the raw k^2 coordinates with projection onto the
    simplex, restricted to g >= delta_prime by penalty; each start runs a
    second polish pass from its optimum.  Stochastic estimate only.
    """
    if not 3 <= k <= 5:
        raise ValueError(f"estimate supports 3 <= k <= 5, got {k}")
    n = k * k

    if k == 3:
        def ratio(p):
            x = p.sum(axis=1)
            w = p.sum(axis=0)
            a = np.diag(p)
            rad = np.sqrt(np.clip(x - x * x, 0.0, None)
                          * np.clip(w - w * w, 0.0, None))
            t = np.where(rad > 0.0, (a - x * w) / np.where(rad > 0, rad, 1.0), 0.0)
            t = np.clip(t, -1.0, 1.0)
            f = kernels.cut_prob(x[0], x[1], w[0], w[1], t[0], t[1], t[2])
            return f / (1.0 - a.sum())
    else:
        def ratio(p):
            c = KConfiguration(k, p)
            return k_cut_probability(c) / sdp_contribution_k(c)

    def objective(v):
        p = _project_simplex(np.asarray(v))
        g = 1.0 - p.reshape(k, k).trace()
        if g < delta_prime:
            return 2.0 + 100.0 * (delta_prime - g)
        return ratio(p.reshape(k, k))

    rng = np.random.default_rng(seed)
    best_val = math.inf
    best_p = None
    for _ in range(starts):
        v0 = rng.dirichlet(np.ones(n))
        res = minimize(objective, v0, method="Nelder-Mead",
                       options={"maxiter": 4000, "xatol": 1e-10,
                                "fatol": 1e-12, "adaptive": True})
        res = minimize(objective, res.x, method="Nelder-Mead",
                       options={"maxiter": 2000, "xatol": 1e-11,
                                "fatol": 1e-13, "adaptive": True})
        if res.fun < best_val:
            best_val = float(res.fun)
            best_p = _project_simplex(res.x).reshape(k, k)
    return KEstimate(k, best_val, KConfiguration(k, best_p), starts)
