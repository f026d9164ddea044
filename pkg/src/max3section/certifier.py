"""Branch-and-bound certifier for the approximation ratio.

Certifies, over a box region of the independent coordinates
(x1, x2, w1, w2, t1, t2, t3), that every feasible, symmetry-canonical
configuration not already handled by the marginal lower bound has
f(c)/g(c) >= rho.  Two elimination moves are used:

  * LP infeasibility of the box against the feasibility polytope, the
    canonical ordering, and the marginal-bound region (certified by an
    explicitly verified Farkas vector, or by a closed-form interval
    contradiction, which is the same certificate with an obvious vector);

  * the midpoint ratio bound: f at the box midpoint with correlations at
    their upper ends, minus the derivative-bound penalty over the box,
    must clear rho times a certified upper bound on g.

Splitting alternates 16-way marginal halving with 8-way correlation
halving.  Every eliminated or split box is logged as a CubeRecord; the leaf
boxes reconstruct the stage-1 tiling exactly, which audit_certificate
verifies before probing eliminated boxes for counterexamples.

All floating-point slop is pushed to the conservative side: elimination
requires an explicit margin of at least tau_num, so quadrature or LP error
can weaken the certificate (a box survives) but never unsound it.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np

from . import kernels
from ._lpcert import RowSystem, certified_infeasible, certified_max
from .configspace import Configuration, in_symmetric_polytope, is_feasible
from .cutratio import (
    cut_probability,
    f_derivative_bound,
    marginal_lower_bound,
    sdp_contribution,
)

LP_INFEASIBLE = "LP_INFEASIBLE"
RATIO_BOUND = "RATIO_BOUND"
SPLIT_MARGINALS = "SPLIT_MARGINALS"
SPLIT_T = "SPLIT_T"

_ELIMINATED = (LP_INFEASIBLE, RATIO_BOUND)

Interval = tuple[float, float]


def _mid(iv: Interval) -> float:
    return 0.5 * (iv[0] + iv[1])


def _halve(iv: Interval) -> list[Interval]:
    lo, hi = iv
    if hi <= lo:
        return [iv]
    m = _mid(iv)
    return [(lo, m), (m, hi)]


def _clip01(iv: Interval) -> Interval | None:
    lo, hi = max(iv[0], 0.0), min(iv[1], 1.0)
    return (lo, hi) if lo <= hi else None


def _hump_range(iv: Interval) -> Interval:
    """Exact range of s - s^2 over an interval inside [0, 1]."""
    lo, hi = iv
    f_lo, f_hi = lo - lo * lo, hi - hi * hi
    mn = min(f_lo, f_hi)
    mx = 0.25 if lo <= 0.5 <= hi else max(f_lo, f_hi)
    return mn, mx


def alpha_interval(ix: Interval, iw: Interval, it: Interval) -> Interval:
    """Range superset of x w + t sqrt((x - x^2)(w - w^2)) over the box.

    The product term is monotone on [0,1]^2; the radical needs the exact
    range of s - s^2 (its hump at 1/2 breaks naive monotone arithmetic).
    """
    p_lo, p_hi = ix[0] * iw[0], ix[1] * iw[1]
    hx, hw = _hump_range(ix), _hump_range(iw)
    r_lo = math.sqrt(max(hx[0] * hw[0], 0.0))
    r_hi = math.sqrt(max(hx[1] * hw[1], 0.0))
    cands = (it[0] * r_lo, it[0] * r_hi, it[1] * r_lo, it[1] * r_hi)
    return p_lo + min(cands), p_hi + max(cands)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box over the seven independent coordinates."""

    ix1: Interval
    ix2: Interval
    iw1: Interval
    iw2: Interval
    it1: Interval
    it2: Interval
    it3: Interval

    @classmethod
    def full(cls) -> "Box":
        u, s = (0.0, 1.0), (-1.0, 1.0)
        return cls(u, u, u, u, s, s, s)

    @classmethod
    def around(cls, center, halfwidth: float) -> "Box":
        """Clip a symmetric neighborhood of (x1,x2,w1,w2,t1,t2,t3) to the domain."""
        x1, x2, w1, w2, t1, t2, t3 = center
        def iv(c, lo, hi):
            return (max(c - halfwidth, lo), min(c + halfwidth, hi))
        return cls(iv(x1, 0, 1), iv(x2, 0, 1), iv(w1, 0, 1), iv(w2, 0, 1),
                   iv(t1, -1, 1), iv(t2, -1, 1), iv(t3, -1, 1))

    @classmethod
    def at_point(cls, center) -> "Box":
        return cls.around(center, 0.0)

    def marginal_intervals(self) -> tuple[Interval, Interval, Interval, Interval]:
        return self.ix1, self.ix2, self.iw1, self.iw2

    def t_intervals(self) -> tuple[Interval, Interval, Interval]:
        return self.it1, self.it2, self.it3

    @property
    def ix3(self) -> Interval:
        return (1.0 - self.ix1[1] - self.ix2[1], 1.0 - self.ix1[0] - self.ix2[0])

    @property
    def iw3(self) -> Interval:
        return (1.0 - self.iw1[1] - self.iw2[1], 1.0 - self.iw1[0] - self.iw2[0])

    def alpha_intervals(self) -> tuple[Interval, Interval, Interval] | None:
        """Derived alpha ranges intersected with [0, 1]; None when empty."""
        x3, w3 = _clip01(self.ix3), _clip01(self.iw3)
        if x3 is None or w3 is None:
            return None
        ivs = []
        for ix, iw, it in ((self.ix1, self.iw1, self.it1),
                           (self.ix2, self.iw2, self.it2),
                           (x3, w3, self.it3)):
            iv = _clip01(alpha_interval(ix, iw, it))
            if iv is None:
                return None
            ivs.append(iv)
        return tuple(ivs)

    def key(self) -> tuple[float, ...]:
        return (*self.ix1, *self.ix2, *self.iw1, *self.iw2,
                *self.it1, *self.it2, *self.it3)

    @classmethod
    def from_key(cls, vals) -> "Box":
        v = tuple(float(x) for x in vals)
        if len(v) != 14:
            raise ValueError(f"box key needs 14 endpoints, got {len(v)}")
        return cls(*(v[2 * i:2 * i + 2] for i in range(7)))

    def split_marginals(self) -> list["Box"]:
        return [replace(self, ix1=a, ix2=b, iw1=c, iw2=d)
                for a in _halve(self.ix1) for b in _halve(self.ix2)
                for c in _halve(self.iw1) for d in _halve(self.iw2)]

    def split_t(self) -> list["Box"]:
        return [replace(self, it1=a, it2=b, it3=c)
                for a in _halve(self.it1) for b in _halve(self.it2)
                for c in _halve(self.it3)]

    def sample(self, rng: np.random.Generator) -> tuple[float, ...]:
        return tuple(rng.uniform(lo, hi) if hi > lo else lo
                     for lo, hi in (self.ix1, self.ix2, self.iw1, self.iw2,
                                    self.it1, self.it2, self.it3))

    def contains(self, point, tol: float = 0.0) -> bool:
        ivs = (self.ix1, self.ix2, self.iw1, self.iw2,
               self.it1, self.it2, self.it3)
        return all(lo - tol <= p <= hi + tol for p, (lo, hi) in zip(point, ivs))


@dataclass(frozen=True)
class CertifyParams:
    rho: float = 0.80
    delta_prime: float = 0.01
    eta1: float = 0.05
    eta2: float = 0.25
    tau_num: float = 1e-8
    max_depth: int = 12
    region: Box | None = None
    workers: int = 1
    use_lp_gmax: bool = True

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")
        if not 0.0 < self.delta_prime < 1.0:
            raise ValueError(f"delta_prime must lie in (0, 1), got {self.delta_prime}")
        if self.eta1 <= 0 or self.eta2 <= 0 or self.tau_num <= 0:
            raise ValueError("eta1, eta2, tau_num must be positive")
        if self.max_depth < 0 or self.workers < 1:
            raise ValueError("max_depth must be >= 0 and workers >= 1")


@dataclass(frozen=True)
class CubeRecord:
    box: Box
    reason: str
    margin: float
    depth: int

    @property
    def eliminated(self) -> bool:
        return self.reason in _ELIMINATED


# ---------------------------------------------------------------------------
# LP constraint system
# ---------------------------------------------------------------------------

# variable order: x1 x2 x3 w1 w2 w3 a1 a2 a3 s1 s2 s3
_NV = 12
_X, _W, _A, _S = 0, 3, 6, 9


def _row(coeffs: dict[int, float]) -> np.ndarray:
    r = np.zeros(_NV)
    for k, v in coeffs.items():
        r[k] += v
    return r


def _minus(a: dict[int, float], b: dict[int, float]) -> dict[int, float]:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0.0) - v
    return out


class ConstraintTemplate:
    """Static rows of the LP for fixed (rho, delta_prime); box enters via b."""

    def __init__(self, rho: float, delta_prime: float):
        rows: list[np.ndarray] = []
        rhs: list[float] = []

        def add(coeffs, b):
            rows.append(_row(coeffs))
            rhs.append(float(b))

        # simplex equalities as inequality pairs
        add({_X: 1, _X + 1: 1, _X + 2: 1}, 1.0)
        add({_X: -1, _X + 1: -1, _X + 2: -1}, -1.0)
        add({_W: 1, _W + 1: 1, _W + 2: 1}, 1.0)
        add({_W: -1, _W + 1: -1, _W + 2: -1}, -1.0)
        # 0 <= alpha_i <= min(x_i, w_i)
        for i in range(3):
            add({_A + i: -1}, 0.0)
            add({_A + i: 1, _X + i: -1}, 0.0)
            add({_A + i: 1, _W + i: -1}, 0.0)
        # pair-table elimination chain: max(0, L1, L2) <= min(R1, R2, R3)
        l1 = {_X + 2: 1, _A + 2: -1, _A: 1, _W: -1}
        l2 = {_W + 1: 1, _A + 1: -1, _A: 1, _X: -1}
        r1 = {_W + 1: 1, _A + 1: -1}
        r2 = {_X + 2: 1, _A + 2: -1}
        r3 = {_X + 1: 1, _X + 2: 1, _W: -1, _A: 1, _A + 1: -1, _A + 2: -1}
        for rr in (r1, r2, r3):
            add({k: -v for k, v in rr.items()}, 0.0)
            add(_minus(l1, rr), 0.0)
            add(_minus(l2, rr), 0.0)
        # canonical ordering: x1 minimal, x2 <= x3
        for other in (_X + 1, _X + 2, _W, _W + 1, _W + 2):
            add({_X: 1, other: -1}, 0.0)
        add({_X + 1: 1, _X + 2: -1}, 0.0)
        # marginal-bound region: s_i >= |x_i - w_i|, sum s / 2 <= rho g, g >= d'
        for i in range(3):
            add({_X + i: 1, _W + i: -1, _S + i: -1}, 0.0)
            add({_W + i: 1, _X + i: -1, _S + i: -1}, 0.0)
        add({_S: 0.5, _S + 1: 0.5, _S + 2: 0.5,
             _A: rho, _A + 1: rho, _A + 2: rho}, rho)
        add({_A: 1, _A + 1: 1, _A + 2: 1}, 1.0 - delta_prime)
        # slack bounds keep the Farkas residual argument finite
        for i in range(3):
            add({_S + i: 1}, 2.0)
            add({_S + i: -1}, 0.0)

        self._static_a = np.vstack(rows)
        self._static_b = np.asarray(rhs)

        # box-bound rows, rhs filled per box
        bounded = (_X, _X + 1, _W, _W + 1, _X + 2, _W + 2,
                   _A, _A + 1, _A + 2)
        box_rows = []
        for var in bounded:
            box_rows.append(_row({var: 1}))
            box_rows.append(_row({var: -1}))
        self._box_a = np.vstack(box_rows)
        self._a = np.vstack([self._static_a, self._box_a])
        self._var_bound = np.array([1.0] * 9 + [2.0] * 3)
        self._gmax_c = _row({_A: -1, _A + 1: -1, _A + 2: -1})

    def system(self, box: Box) -> RowSystem | None:
        """Full row system for a box; None when derived intervals are empty."""
        alpha = box.alpha_intervals()
        x3, w3 = _clip01(box.ix3), _clip01(box.iw3)
        if alpha is None or x3 is None or w3 is None:
            return None
        ivs = (box.ix1, box.ix2, box.iw1, box.iw2, x3, w3, *alpha)
        b_box = np.empty(2 * len(ivs))
        for k, (lo, hi) in enumerate(ivs):
            b_box[2 * k] = hi
            b_box[2 * k + 1] = -lo
        return RowSystem(self._a, np.concatenate([self._static_b, b_box]),
                         self._var_bound)

    def gmax_upper(self, box: Box) -> float | None:
        """Certified upper bound on g over the box's LP relaxation."""
        system = self.system(box)
        if system is None:
            return None
        ub = certified_max(system, self._gmax_c)
        return None if ub is None else 1.0 + ub


# ---------------------------------------------------------------------------
# elimination checks
# ---------------------------------------------------------------------------

def _interval_distance(a: Interval, b: Interval) -> float:
    return max(0.0, a[0] - b[1], b[0] - a[1])


def g_upper_interval(box: Box) -> float | None:
    """Interval upper bound on g = 1 - sum alpha over box members of C.

    Besides the per-coordinate alpha floors, uses the completability
    consequence alpha_i >= x_i + w_i - 1 + sum_{j != i} alpha_j (mass of
    row i and column i cannot both fit unless the diagonal absorbs the
    overlap), which is what binds near the extremal configurations.
    """
    alpha = box.alpha_intervals()
    if alpha is None:
        return None
    lo = [max(0.0, iv[0]) for iv in alpha]
    x_lo = (box.ix1[0], box.ix2[0], max(0.0, box.ix3[0]))
    w_lo = (box.iw1[0], box.iw2[0], max(0.0, box.iw3[0]))
    plain = sum(lo)
    best = plain
    for i in range(3):
        best = max(best, x_lo[i] + w_lo[i] - 1.0 + 2.0 * (plain - lo[i]))
    return 1.0 - best


def _interval_infeasibility(box: Box, params: CertifyParams) -> float | None:
    """Closed-form contradiction margin, or None.

    Each check is a nonnegative combination of box-bound rows with one
    polytope row, i.e. a Farkas certificate evaluated analytically.
    """
    checks: list[float] = []
    for raw in (box.ix3, box.iw3):
        checks.append(raw[0] - 1.0)   # whole interval above 1
        checks.append(-raw[1])        # whole interval below 0
    x3, w3 = _clip01(box.ix3), _clip01(box.iw3)
    if x3 is not None and w3 is not None:
        # canonical ordering against interval endpoints
        for other in (box.ix2, box.iw1, box.iw2, w3, x3):
            checks.append(box.ix1[0] - other[1])
        checks.append(box.ix2[0] - x3[1])
        alpha = box.alpha_intervals()
        if alpha is None:
            for ix, iw, it in ((box.ix1, box.iw1, box.it1),
                               (box.ix2, box.iw2, box.it2),
                               (x3, w3, box.it3)):
                lo, hi = alpha_interval(ix, iw, it)
                checks.append(lo - 1.0)
                checks.append(-hi)
        else:
            g_hi = g_upper_interval(box)
            checks.append(params.delta_prime - g_hi)
            mlb_lo = (_interval_distance(box.ix1, box.iw1)
                      + _interval_distance(box.ix2, box.iw2)
                      + _interval_distance(x3, w3)) / 2.0
            checks.append(mlb_lo - params.rho * max(g_hi, 0.0))
    margin = max(checks)
    return margin if margin >= params.tau_num else None


@dataclass(frozen=True)
class LpVerdict:
    status: str  # FEASIBLE or INFEASIBLE_CERTIFIED
    margin: float = 0.0

    @property
    def infeasible(self) -> bool:
        return self.status == "INFEASIBLE_CERTIFIED"


def lp_feasible(box: Box, params: CertifyParams,
                template: ConstraintTemplate | None = None) -> LpVerdict:
    """FEASIBLE unless emptiness of the box's polytope slice is certified.

    Any numerical doubt (solver failure, unverifiable dual) falls back to
    FEASIBLE: a kept cube costs time, an unsound elimination costs the
    theorem.
    """
    margin = _interval_infeasibility(box, params)
    if margin is not None:
        return LpVerdict("INFEASIBLE_CERTIFIED", margin)
    if template is None:
        template = ConstraintTemplate(params.rho, params.delta_prime)
    system = template.system(box)
    if system is None:
        # empty derived interval not caught above with enough margin
        return LpVerdict("FEASIBLE")
    margin = certified_infeasible(system, params.tau_num)
    if margin is not None:
        return LpVerdict("INFEASIBLE_CERTIFIED", margin)
    return LpVerdict("FEASIBLE")


_DOMAIN_SLACK = 1e-12


def _project_midpoint(i1: Interval, i2: Interval) -> tuple[float, float] | None:
    """Midpoint of two intervals projected into {a + b <= 1 - slack}."""
    s = 1.0 - _DOMAIN_SLACK
    m1, m2 = _mid(i1), _mid(i2)
    if m1 + m2 <= s:
        return m1, m2
    e = 0.5 * (m1 + m2 - s)
    p1 = min(max(m1 - e, i1[0]), i1[1])
    p2 = min(max(m2 - e, i2[0]), i2[1])
    if p1 + p2 <= s:
        return p1, p2
    if i1[0] + i2[0] > s:
        return None  # the box misses the domain entirely
    p2 = i2[0]
    p1 = min(max(s - p2, i1[0]), i1[1])
    return (p1, p2) if p1 + p2 <= s else (i1[0], i2[0])


@dataclass(frozen=True)
class RatioVerdict:
    eliminated: bool
    margin: float = 0.0
    lower_bound: float = math.nan
    g_upper: float = math.nan


def ratio_lower_bound(box: Box) -> float | None:
    """Box-wide lower bound on f via the midpoint-derivative argument.

    Evaluates f at the marginal midpoints (projected into the open simplex
    domain) with every correlation at its upper end -- f is non-increasing
    in each t, so this minorizes f over the box up to the derivative-bound
    penalty sum |df/dz_i|_max * d_i, with d_i the largest distance from the
    midpoint to a box face.
    """
    mx = _project_midpoint(box.ix1, box.ix2)
    mw = _project_midpoint(box.iw1, box.iw2)
    if mx is None or mw is None:
        return None
    mx1, mx2 = mx
    mw1, mw2 = mw
    f_m = kernels.cut_prob(mx1, mx2, mw1, mw2,
                           box.it1[1], box.it2[1], box.it3[1])
    bounds = f_derivative_bound(box.ix2[1], box.ix1[1],
                                box.iw2[1], box.iw1[1])
    dist = (max(mx1 - box.ix1[0], box.ix1[1] - mx1),
            max(mx2 - box.ix2[0], box.ix2[1] - mx2),
            max(mw1 - box.iw1[0], box.iw1[1] - mw1),
            max(mw2 - box.iw2[0], box.iw2[1] - mw2))
    return f_m - sum(b * d for b, d in zip(bounds, dist))


def ratio_bound_holds(box: Box, params: CertifyParams,
                      template: ConstraintTemplate | None = None,
                      lp_gmax: bool | None = None) -> RatioVerdict:
    """Midpoint-derivative elimination.

    Eliminates when the box-wide lower bound on f clears rho times an upper
    bound on g with margin tau_num.  The g bound is the interval one first;
    when that is inconclusive and lp_gmax allows, a certified LP maximum of
    g over the box's polytope slice (tighter, since it couples the alphas)
    gets one more try.
    """
    lower = ratio_lower_bound(box)
    if lower is None:
        return RatioVerdict(False)
    g_up = g_upper_interval(box)
    if g_up is None:
        return RatioVerdict(False)
    u = params.rho * g_up
    if lower >= u + params.tau_num:
        return RatioVerdict(True, lower - u, lower, g_up)
    if lp_gmax is None:
        lp_gmax = params.use_lp_gmax
    if lp_gmax and lower > params.rho * params.delta_prime:
        if template is None:
            template = ConstraintTemplate(params.rho, params.delta_prime)
        g_lp = template.gmax_upper(box)
        if g_lp is not None and g_lp < g_up:
            u = params.rho * g_lp
            if lower >= u + params.tau_num:
                return RatioVerdict(True, lower - u, lower, g_lp)
    return RatioVerdict(False, lower_bound=lower, g_upper=g_up)


def _center_feasible(box: Box, params: CertifyParams) -> bool:
    """True when the box center witnesses a point of the constraint set.

    A positive witness makes the feasibility LP redundant (its relaxation
    can only be larger); a negative one decides nothing.
    """
    x1, x2 = _mid(box.ix1), _mid(box.ix2)
    w1, w2 = _mid(box.iw1), _mid(box.iw2)
    x3, w3 = 1.0 - x1 - x2, 1.0 - w1 - w2
    if not (0.0 <= x3 <= 1.0 and 0.0 <= w3 <= 1.0):
        return False
    c = Configuration.from_t(
        (x1, x2, x3), (w1, w2, w3),
        (_mid(box.it1), _mid(box.it2), _mid(box.it3)))
    if not (is_feasible(c, tol=0.0) and in_symmetric_polytope(c)):
        return False
    g = sdp_contribution(c)
    return g >= params.delta_prime and marginal_lower_bound(c) <= params.rho * g


# ---------------------------------------------------------------------------
# the two-stage procedure
# ---------------------------------------------------------------------------

def stage1_tiles(params: CertifyParams) -> list[Box]:
    """Tile the region at widths eta1 (marginals) and eta2 (correlations).

    Equal-width pieces per axis, so the tiles partition the region exactly
    and the audit can regenerate them bit-for-bit.
    """
    region = params.region if params.region is not None else Box.full()

    def pieces(iv: Interval, width: float) -> list[Interval]:
        lo, hi = iv
        if hi <= lo:
            return [iv]
        k = max(1, math.ceil((hi - lo) / width - 1e-12))
        edges = [lo + (hi - lo) * i / k for i in range(k + 1)]
        edges[0], edges[-1] = lo, hi
        return list(zip(edges[:-1], edges[1:]))

    axes = [pieces(region.ix1, params.eta1), pieces(region.ix2, params.eta1),
            pieces(region.iw1, params.eta1), pieces(region.iw2, params.eta1),
            pieces(region.it1, params.eta2), pieces(region.it2, params.eta2),
            pieces(region.it3, params.eta2)]
    return [Box(*combo) for combo in product(*axes)]


def _resolve_box(box: Box, depth: int, params: CertifyParams,
                 template: ConstraintTemplate, stats: dict) -> CubeRecord | None:
    """Try to eliminate one box; None keeps it for splitting.

    Ordered cheap-to-expensive: closed-form interval contradiction, ratio
    bound with the interval g cap, then the LPs (feasibility only when the
    box center is not already a feasibility witness, and the tighter g
    maximum as the last resort).
    """
    margin = _interval_infeasibility(box, params)
    if margin is not None:
        return CubeRecord(box, LP_INFEASIBLE, margin, depth)
    stats["ratio_checks"] += 1
    rb = ratio_bound_holds(box, params, template, lp_gmax=False)
    if rb.eliminated:
        return CubeRecord(box, RATIO_BOUND, rb.margin, depth)
    if not _center_feasible(box, params):
        stats["lp_checks"] += 1
        system = template.system(box)
        if system is not None:
            margin = certified_infeasible(system, params.tau_num)
            if margin is not None:
                return CubeRecord(box, LP_INFEASIBLE, margin, depth)
    if (params.use_lp_gmax and rb.lower_bound is not None
            and not math.isnan(rb.lower_bound)
            and rb.lower_bound > params.rho * params.delta_prime):
        stats["gmax_lps"] += 1
        g_lp = template.gmax_upper(box)
        if g_lp is not None and rb.lower_bound >= params.rho * g_lp + params.tau_num:
            return CubeRecord(box, RATIO_BOUND,
                              rb.lower_bound - params.rho * g_lp, depth)
    return None


def _process_tile(tile: Box, params: CertifyParams,
                  template: ConstraintTemplate | None = None
                  ) -> tuple[list[CubeRecord], list[tuple[Box, int]], dict]:
    """Resolve one stage-1 tile: records, survivors, counters."""
    if template is None:
        template = ConstraintTemplate(params.rho, params.delta_prime)
    records: list[CubeRecord] = []
    survivors: list[tuple[Box, int]] = []
    stats = {"lp_checks": 0, "ratio_checks": 0, "gmax_lps": 0, "boxes": 0}

    verdict = lp_feasible(tile, params, template)
    stats["lp_checks"] += 1
    stats["boxes"] += 1
    if verdict.infeasible:
        records.append(CubeRecord(tile, LP_INFEASIBLE, verdict.margin, 0))
        return records, survivors, stats

    stack: list[tuple[Box, int, str]] = [(tile, 0, "M")]
    while stack:
        box, depth, phase = stack.pop()
        if depth >= params.max_depth:
            survivors.append((box, depth))
            continue
        if phase == "M":
            records.append(CubeRecord(box, SPLIT_MARGINALS, 0.0, depth))
            children = box.split_marginals()
        else:
            records.append(CubeRecord(box, SPLIT_T, 0.0, depth))
            children = box.split_t()
        for child in children:
            stats["boxes"] += 1
            rec = _resolve_box(child, depth + 1, params, template, stats)
            if rec is not None:
                records.append(rec)
            else:
                stack.append((child, depth + 1, "T" if phase == "M" else "M"))
    return records, survivors, stats


def _process_tile_star(args):
    return _process_tile(*args)


@dataclass
class CertifyResult:
    status: str  # CERTIFIED or EXHAUSTED
    records: list[CubeRecord]
    survivors: list[tuple[Box, int]]
    params: CertifyParams
    stats: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.status == "CERTIFIED"


def certify(params: CertifyParams) -> CertifyResult:
    """Run the two-stage branch and bound over the region.

    CERTIFIED means every box of the stage-1 tiling was eliminated, hence
    f/g >= rho on the region's slice of the constraint set; EXHAUSTED
    reports the surviving boxes and never claims anything.
    """
    start = time.monotonic()
    tiles = stage1_tiles(params)
    records: list[CubeRecord] = []
    survivors: list[tuple[Box, int]] = []
    stats = {"lp_checks": 0, "ratio_checks": 0, "boxes": 0,
             "stage1_tiles": len(tiles)}

    if params.workers > 1 and len(tiles) > 1:
        jobs = [(tile, params) for tile in tiles]
        with ProcessPoolExecutor(max_workers=params.workers) as pool:
            outcomes = list(pool.map(_process_tile_star, jobs, chunksize=1))
    else:
        template = ConstraintTemplate(params.rho, params.delta_prime)
        outcomes = [_process_tile(tile, params, template) for tile in tiles]

    for recs, survs, st in outcomes:
        records.extend(recs)
        survivors.extend(survs)
        for k, v in st.items():
            stats[k] = stats.get(k, 0) + v
    stats["wall_seconds"] = time.monotonic() - start
    status = "CERTIFIED" if not survivors else "EXHAUSTED"
    return CertifyResult(status, records, survivors, params, stats)


def final_approximation_bound(rho, delta_prime):
    """(1 - d'/(2(1 - d'))) * rho: the end-to-end guarantee once mu' >= rho.

    Works with exact Fractions as well as floats.
    """
    one = rho / rho if hasattr(rho, "denominator") else 1.0
    return (one - delta_prime / (2 * (one - delta_prime))) * rho


# ---------------------------------------------------------------------------
# certificate serialization
# ---------------------------------------------------------------------------

def format_record(rec: CubeRecord) -> str:
    nums = " ".join(f"{v:.17g}" for v in rec.box.key())
    return f"{rec.depth} {rec.reason} {rec.margin:.17g} {nums}"


def write_certificate(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(format_record(rec) + "\n")


def read_certificate(path) -> list[CubeRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 17:
                raise ValueError(f"{path}: line {lineno}: expected 17 fields")
            depth = int(parts[0])
            reason = parts[1]
            if reason not in (LP_INFEASIBLE, RATIO_BOUND, SPLIT_MARGINALS, SPLIT_T):
                raise ValueError(f"{path}: line {lineno}: unknown reason {reason}")
            margin = float(parts[2])
            out.append(CubeRecord(Box.from_key(parts[3:]), reason, margin, depth))
    return out


def write_boxes(boxes, path) -> None:
    """Survivor sidecar: depth then the 14 endpoints per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for box, depth in boxes:
            nums = " ".join(f"{v:.17g}" for v in box.key())
            fh.write(f"{depth} {nums}\n")


def load_region(path) -> Box:
    """Region file: 14 whitespace-separated endpoints, '#' comments."""
    with open(path, encoding="utf-8") as fh:
        tokens = []
        for line in fh:
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            tokens.extend(s.split())
    return Box.from_key(tokens)


def save_region(box: Box, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(" ".join(f"{v:.17g}" for v in box.key()) + "\n")


# ---------------------------------------------------------------------------
# independent audit
# ---------------------------------------------------------------------------

@dataclass
class AuditResult:
    ok: bool
    failure: str | None = None
    witness: tuple[float, ...] | None = None
    eliminated_boxes: int = 0
    probes_in_region: int = 0

    def __bool__(self) -> bool:
        return self.ok


def _membership_mask(x, w, alpha, params: CertifyParams) -> np.ndarray:
    """Vectorized membership of (x, w, alpha) rows in the constraint set.

    Columns of x, w, alpha are the three cluster coordinates; strict
    (tolerance-free) checks so float noise can only skip probes, never
    fabricate a counterexample.
    """
    ok = (alpha >= 0.0).all(axis=1)
    ok &= (alpha <= np.minimum(x, w)).all(axis=1)
    l_side = np.maximum(
        0.0, np.maximum(x[:, 2] - alpha[:, 2] + alpha[:, 0] - w[:, 0],
                        w[:, 1] - alpha[:, 1] + alpha[:, 0] - x[:, 0]))
    r_side = np.minimum(
        w[:, 1] - alpha[:, 1],
        np.minimum(x[:, 2] - alpha[:, 2],
                   x[:, 1] + x[:, 2] - w[:, 0]
                   + alpha[:, 0] - alpha[:, 1] - alpha[:, 2]))
    ok &= l_side <= r_side
    # canonical polytope on the marginals
    ok &= (x[:, 0] <= x[:, 1]) & (x[:, 0] <= x[:, 2]) & (x[:, 1] <= x[:, 2])
    ok &= (x[:, [0]] <= w).all(axis=1)
    # marginal-bound region
    g = 1.0 - alpha.sum(axis=1)
    mlb = 0.5 * np.abs(x - w).sum(axis=1)
    ok &= (g >= params.delta_prime) & (mlb <= params.rho * g)
    return ok


def _pocs_alpha(x, w, rad, t_lo, t_hi, alpha0, cap, iters=12):
    """Vectorized cyclic projection of alpha rows onto the feasible slice.

    Halfspaces at fixed (x, w): per-coordinate bounds (including the range
    the row's t intervals allow), the elimination-chain rows, and the
    g-floor / marginal-bound cap.  Best effort: unconverged rows simply
    fail the strict retest afterwards.
    """
    lo = np.maximum(0.0, x * w + t_lo * rad)
    hi = np.minimum(np.minimum(x, w), x * w + t_hi * rad)
    normals = np.array([
        [0.0, 1.0, 0.0],    # R1 >= 0
        [0.0, 0.0, 1.0],    # R2 >= 0
        [-1.0, 1.0, 1.0],   # R3 >= 0
        [1.0, 1.0, -1.0],   # L1 <= R1
        [1.0, 0.0, 0.0],    # L1 <= R2
        [0.0, 1.0, 0.0],    # L1 <= R3
        [1.0, 0.0, 0.0],    # L2 <= R1
        [1.0, -1.0, 1.0],   # L2 <= R2
        [0.0, 0.0, 1.0],    # L2 <= R3
        [1.0, 1.0, 1.0],    # g floor / marginal cap
    ])
    norms2 = (normals * normals).sum(axis=1)
    rhs = np.column_stack([
        w[:, 1],
        x[:, 2],
        x[:, 1] + x[:, 2] - w[:, 0],
        w[:, 0] + w[:, 1] - x[:, 2],
        w[:, 0],
        x[:, 1],
        x[:, 0],
        x[:, 0] + x[:, 2] - w[:, 1],
        x.sum(axis=1) - w[:, 0] - w[:, 1],
        cap,
    ])
    a = np.clip(alpha0, lo, hi)
    for _ in range(iters):
        for j in range(normals.shape[0]):
            v = a @ normals[j] - rhs[:, j]
            np.maximum(v, 0.0, out=v)
            a -= np.outer(v / norms2[j], normals[j])
        np.clip(a, lo, hi, out=a)
    return a


def _probe_chunk(lo: np.ndarray, hi: np.ndarray, params: CertifyParams,
                 probes: int, rng: np.random.Generator
                 ) -> tuple[bool, tuple | None, int]:
    """Probe a chunk of eliminated boxes (rows of lo/hi, key order).

    Samples `probes` points per box, retests raw non-members after one
    batched projection of alpha onto the feasible slice (projected points
    must stay inside their box in t), and checks every member's ratio.
    """
    n = len(lo)
    low = np.repeat(lo, probes, axis=0)
    high = np.repeat(hi, probes, axis=0)
    pts = low + (high - low) * rng.random(low.shape)
    x = np.column_stack([pts[:, 0], pts[:, 1], 1.0 - pts[:, 0] - pts[:, 1]])
    w = np.column_stack([pts[:, 2], pts[:, 3], 1.0 - pts[:, 2] - pts[:, 3]])
    t = pts[:, 4:7].copy()
    t_lo, t_hi = low[:, 4:7], high[:, 4:7]
    in_domain = ((x[:, 2] >= 0.0) & (x[:, 2] <= 1.0)
                 & (w[:, 2] >= 0.0) & (w[:, 2] <= 1.0))

    rad = np.sqrt(np.clip(x - x * x, 0.0, None) * np.clip(w - w * w, 0.0, None))
    alpha = x * w + t * rad
    member = in_domain & _membership_mask(x, w, alpha, params)

    retry = np.flatnonzero(in_domain & ~member)
    if len(retry):
        xr, wr, rr = x[retry], w[retry], rad[retry]
        mlb = 0.5 * np.abs(xr - wr).sum(axis=1)
        cap = np.minimum(1.0 - params.delta_prime, 1.0 - mlb / params.rho)
        a_new = _pocs_alpha(xr, wr, rr, t_lo[retry], t_hi[retry],
                            alpha[retry], cap)
        with np.errstate(divide="ignore", invalid="ignore"):
            t_new = np.where(rr > 1e-14,
                             (a_new - xr * wr) / np.where(rr > 0, rr, 1.0),
                             t[retry])
        good = ((t_new >= t_lo[retry] - 1e-9)
                & (t_new <= t_hi[retry] + 1e-9)).all(axis=1)
        t_new = np.clip(t_new, t_lo[retry], t_hi[retry])
        a_fin = xr * wr + t_new * rr
        good &= _membership_mask(xr, wr, a_fin, params)
        idx = retry[good]
        alpha[idx] = a_fin[good]
        t[idx] = t_new[good]
        member[idx] = True

    hits = int(np.count_nonzero(member))
    idx = np.flatnonzero(member)
    if len(idx):
        args = np.ascontiguousarray(
            np.column_stack([x[idx, 0], x[idx, 1], w[idx, 0], w[idx, 1],
                             t[idx, 0], t[idx, 1], t[idx, 2]]))
        f = np.empty(len(idx))
        kernels.cut_prob_fill(args, f)
        g = 1.0 - alpha[idx].sum(axis=1)
        bad = np.flatnonzero(f / g < params.rho - 1e-9)
        if len(bad):
            return False, tuple(args[bad[0]]), hits
    return True, None, hits


def _probe_chunk_star(args):
    lo, hi, params, probes, seed, chunk_index = args
    rng = np.random.default_rng(np.random.SeedSequence([seed, chunk_index]))
    return _probe_chunk(lo, hi, params, probes, rng)


def audit_certificate(records, params: CertifyParams, probes_per_cube: int,
                      seed: int, survivors=None) -> AuditResult:
    """Independent soundness audit of a certificate log.

    First reconstructs the split tree from the records and checks the leaf
    boxes partition the stage-1 tiling of the region exactly (survivor
    boxes, when passed, are accepted as unproved leaves); then samples
    random points in every eliminated box and verifies no member of the
    constraint set has ratio below rho.
    """
    by_key: dict[tuple, CubeRecord] = {}
    for rec in records:
        k = rec.box.key()
        if k in by_key:
            return AuditResult(False, failure=f"duplicate record for box {k}")
        by_key[k] = rec
    survivor_keys = {box.key() for box, _ in (survivors or [])}

    eliminated: list[CubeRecord] = []
    stack = [(tile, "root") for tile in stage1_tiles(params)]
    while stack:
        box, _ = stack.pop()
        rec = by_key.get(box.key())
        if rec is None:
            if box.key() in survivor_keys:
                continue
            return AuditResult(
                False, failure=f"coverage gap: no record for box {box.key()}")
        if rec.eliminated:
            if rec.margin < params.tau_num:
                return AuditResult(
                    False, failure=f"elimination margin {rec.margin} below "
                                   f"tau_num for box {box.key()}")
            eliminated.append(rec)
        elif rec.reason == SPLIT_MARGINALS:
            stack.extend((child, "m") for child in box.split_marginals())
        else:
            stack.extend((child, "t") for child in box.split_t())

    probed = 0
    if eliminated and probes_per_cube > 0:
        keys = np.array([rec.box.key() for rec in eliminated])
        lo, hi = keys[:, 0::2], keys[:, 1::2]
        per_chunk = max(1, 500_000 // max(probes_per_cube, 1))
        chunks = [(lo[s:s + per_chunk], hi[s:s + per_chunk], params,
                   probes_per_cube, seed, ci)
                  for ci, s in enumerate(range(0, len(keys), per_chunk))]
        if params.workers > 1 and len(chunks) > 1:
            with ProcessPoolExecutor(max_workers=params.workers) as pool:
                outcomes = pool.map(_probe_chunk_star, chunks)
                for ok, witness, hits in outcomes:
                    probed += hits
                    if not ok:
                        return AuditResult(
                            False, failure="counterexample probe",
                            witness=witness,
                            eliminated_boxes=len(eliminated),
                            probes_in_region=probed)
        else:
            for chunk in chunks:
                ok, witness, hits = _probe_chunk_star(chunk)
                probed += hits
                if not ok:
                    return AuditResult(False, failure="counterexample probe",
                                       witness=witness,
                                       eliminated_boxes=len(eliminated),
                                       probes_in_region=probed)
    return AuditResult(True, eliminated_boxes=len(eliminated),
                       probes_in_region=probed)
