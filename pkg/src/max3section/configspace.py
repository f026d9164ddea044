"""Configuration data model for edge geometry.

A configuration packs the twelve numbers describing how an SDP solution sees
one edge (u, v): per-cluster marginals x (for u) and w (for v), the joint
same-cluster probabilities alpha, and the correlations t of the normalized
orthogonal components.  The three families are tied together by

    alpha_i = x_i w_i + t_i sqrt((x_i - x_i^2)(w_i - w_i^2)),

with the convention t_i = 0 whenever a marginal is integral (the radical
vanishes and the correlation is immaterial).

Feasibility of (x, w, alpha) -- existence of SDP vectors realizing it -- is
characterized by linear constraints; the proof eliminates the six
off-diagonal entries beta_1..beta_6 of the local pair distribution, and we
reuse that chain both to test feasibility and to reconstruct a concrete pair
table (joint_from_config) and explicit vectors (realize).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np

FEAS_TOL = 1e-9

_PERMS3 = tuple(permutations(range(3)))


class ConfigParseError(ValueError):
    """Malformed configuration text."""


class InfeasibleConfigurationError(ValueError):
    """Operation requires a feasible configuration."""


@dataclass(frozen=True)
class Configuration:
    x: tuple[float, float, float]
    w: tuple[float, float, float]
    alpha: tuple[float, float, float]
    t: tuple[float, float, float]

    @classmethod
    def from_alpha(cls, x, w, alpha) -> "Configuration":
        """Build a configuration from marginals and joint diagonals; t derived."""
        t = tuple(_t_from_alpha(x[i], w[i], alpha[i]) for i in range(3))
        return cls(tuple(map(float, x)), tuple(map(float, w)),
                   tuple(map(float, alpha)), t)

    @classmethod
    def from_t(cls, x, w, t) -> "Configuration":
        """Build a configuration from marginals and correlations; alpha derived."""
        alpha = alpha_from_t(x, w, t)
        return cls(tuple(map(float, x)), tuple(map(float, w)),
                   alpha, tuple(map(float, t)))

    def as_tuple(self) -> tuple[float, ...]:
        return (*self.x, *self.w, *self.alpha, *self.t)

    def basic_violations(self, tol: float = FEAS_TOL) -> list[str]:
        """Range, simplex, and alpha/t-consistency checks (not feasibility)."""
        out = []
        for name, vals, lo, hi in (("x", self.x, 0.0, 1.0),
                                   ("w", self.w, 0.0, 1.0),
                                   ("alpha", self.alpha, 0.0, 1.0),
                                   ("t", self.t, -1.0, 1.0)):
            for i, v in enumerate(vals):
                if not (lo - tol <= v <= hi + tol):
                    out.append(f"{name}{i + 1}={v} outside [{lo}, {hi}]")
        if abs(sum(self.x) - 1.0) > tol:
            out.append(f"x sums to {sum(self.x)}, not 1")
        if abs(sum(self.w) - 1.0) > tol:
            out.append(f"w sums to {sum(self.w)}, not 1")
        for i in range(3):
            rad = _radical(self.x[i], self.w[i])
            if rad > 0.0:
                want = self.x[i] * self.w[i] + self.t[i] * rad
                if abs(want - self.alpha[i]) > tol:
                    out.append(
                        f"alpha{i + 1}={self.alpha[i]} inconsistent with "
                        f"x{i + 1} w{i + 1} + t{i + 1} rad = {want}")
        return out


def _radical(xi: float, wi: float) -> float:
    return math.sqrt(max(0.0, xi - xi * xi) * max(0.0, wi - wi * wi))


def _t_from_alpha(xi: float, wi: float, ai: float) -> float:
    rad = _radical(xi, wi)
    if rad == 0.0:
        return 0.0
    return (ai - xi * wi) / rad


def alpha_from_t(x, w, t) -> tuple[float, float, float]:
    """alpha_i = x_i w_i + t_i sqrt((x_i - x_i^2)(w_i - w_i^2))."""
    return tuple(x[i] * w[i] + t[i] * _radical(x[i], w[i]) for i in range(3))


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    violations: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.feasible


def _beta6_interval(x, w, alpha) -> tuple[float, float]:
    """Admissible range of the free off-diagonal entry in the elimination chain."""
    lo = max(0.0,
             x[2] - alpha[2] + alpha[0] - w[0],
             w[1] - alpha[1] + alpha[0] - x[0])
    hi = min(w[1] - alpha[1],
             x[2] - alpha[2],
             x[1] + x[2] - w[0] + alpha[0] - alpha[1] - alpha[2])
    return lo, hi


def is_feasible(c: Configuration, tol: float = FEAS_TOL) -> FeasibilityReport:
    """Linear-constraint feasibility of (x, w, alpha).

    Condition (3) is the survivor of Fourier-Motzkin elimination of the six
    off-diagonal pair-table entries; together with the simplex sums and
    0 <= alpha_i <= min(x_i, w_i) it characterizes realizable configurations.
    """
    v = []
    if abs(sum(c.x) - 1.0) > tol:
        v.append(f"x does not sum to 1 (sum={sum(c.x)!r})")
    if abs(sum(c.w) - 1.0) > tol:
        v.append(f"w does not sum to 1 (sum={sum(c.w)!r})")
    for i in range(3):
        if c.alpha[i] < -tol:
            v.append(f"alpha{i + 1}={c.alpha[i]} < 0")
        if c.alpha[i] > min(c.x[i], c.w[i]) + tol:
            v.append(f"alpha{i + 1}={c.alpha[i]} > min(x{i + 1}, w{i + 1})"
                     f"={min(c.x[i], c.w[i])}")
    lo, hi = _beta6_interval(c.x, c.w, c.alpha)
    if lo > hi + tol:
        v.append(f"pair-table elimination interval empty: "
                 f"max-side {lo} > min-side {hi}")
    return FeasibilityReport(not v, tuple(v))


def _apply_symmetry(c: Configuration, perm, swap: bool) -> Configuration:
    x, w = (c.w, c.x) if swap else (c.x, c.w)
    return Configuration(
        tuple(x[p] for p in perm),
        tuple(w[p] for p in perm),
        tuple(c.alpha[p] for p in perm),
        tuple(c.t[p] for p in perm),
    )


def symmetry_images(c: Configuration) -> list[Configuration]:
    """All 12 images: 6 simultaneous cluster permutations x optional u/v swap."""
    return [_apply_symmetry(c, perm, swap)
            for swap in (False, True) for perm in _PERMS3]


def in_symmetric_polytope(c: Configuration) -> bool:
    """x1 minimal among all six marginals and x2 <= x3."""
    x1 = c.x[0]
    return (x1 <= c.x[1] and x1 <= c.x[2]
            and x1 <= c.w[0] and x1 <= c.w[1] and x1 <= c.w[2]
            and c.x[1] <= c.x[2])


def canonicalize(c: Configuration) -> Configuration:
    """Map c into the symmetry-canonical polytope.

    f and g are invariant under all 12 symmetries, so any image serves; ties
    are broken by the lexicographically smallest 12-tuple.
    """
    members = [im for im in symmetry_images(c) if in_symmetric_polytope(im)]
    if not members:
        raise InfeasibleConfigurationError(
            "no symmetry image lies in the canonical polytope; "
            "the configuration's marginals are malformed")
    return min(members, key=Configuration.as_tuple)


@dataclass(frozen=True)
class PairJoint:
    """Local pair distribution: p[i][j] = P[u in cluster i+1, v in cluster j+1]."""

    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        if self.p.shape != (3, 3):
            raise ValueError(f"pair table must be 3x3, got {self.p.shape}")

    @property
    def x(self) -> np.ndarray:
        return self.p.sum(axis=1)

    @property
    def w(self) -> np.ndarray:
        return self.p.sum(axis=0)

    def violations(self, tol: float = FEAS_TOL) -> list[str]:
        out = []
        if self.p.min() < -tol:
            out.append(f"negative entry {self.p.min()}")
        if abs(self.p.sum() - 1.0) > tol:
            out.append(f"total mass {self.p.sum()} != 1")
        return out

    def config(self) -> Configuration:
        """Read off the configuration this table realizes."""
        return Configuration.from_alpha(self.x, self.w, np.diag(self.p))


def joint_from_config(c: Configuration, tol: float = FEAS_TOL) -> PairJoint:
    """Reconstruct a pair table consistent with (x, w, alpha).

    Back-substitutes through the elimination chain with the free entry set to
    the midpoint of its admissible interval, so the output is deterministic
    and maximally interior.
    """
    rep = is_feasible(c, tol)
    if not rep:
        raise InfeasibleConfigurationError(
            "infeasible configuration: " + "; ".join(rep.violations))
    x, w, a = c.x, c.w, c.alpha
    lo, hi = _beta6_interval(x, w, a)
    b6 = 0.5 * (lo + hi)
    b5 = x[2] - b6 - a[2]
    b4 = x[1] - a[1] - (w[0] - a[0] - b5)
    b2 = x[0] - a[0] - (w[1] - a[1] - b6)
    b3 = w[0] - a[0] - b5
    b1 = w[1] - a[1] - b6
    p = np.array([[a[0], b1, b2],
                  [b3, a[1], b4],
                  [b5, b6, a[2]]])
    p[(p < 0.0) & (p > -1e-12)] = 0.0
    return PairJoint(p)


@dataclass(frozen=True)
class Realization:
    """Explicit vectors witnessing a pair table under the SDP constraints."""

    dimension: int
    y_empty: np.ndarray
    yu: np.ndarray  # shape (3, dimension)
    yv: np.ndarray

    def vectors(self) -> np.ndarray:
        """The seven vectors stacked: y_empty, then u's three, then v's three."""
        return np.vstack([self.y_empty, self.yu, self.yv])

    def violations(self, tol: float = 1e-8) -> list[str]:
        out = []
        if abs(self.y_empty @ self.y_empty - 1.0) > tol:
            out.append("reference vector not unit")
        for name, ys in (("u", self.yu), ("v", self.yv)):
            for i in range(3):
                sq = ys[i] @ ys[i]
                if abs(sq - self.y_empty @ ys[i]) > tol:
                    out.append(f"{name}{i + 1}: |y|^2 != y_empty.y")
                for j in range(i + 1, 3):
                    if abs(ys[i] @ ys[j]) > tol:
                        out.append(f"{name}: clusters {i + 1},{j + 1} not orthogonal")
            if abs(sum(ys[i] @ ys[i] for i in range(3)) - 1.0) > tol:
                out.append(f"{name}: marginals do not sum to 1")
        if (self.yu @ self.yv.T).min() < -tol:
            out.append("negative cross inner product")
        return out


def realize(joint: PairJoint) -> Realization:
    """Dimension-9 realization with basis indexed by cluster pairs (i, j).

    y_u^i spreads sqrt(p[i][j]) over row i, y_v^j over column j, and the
    reference vector over the whole table; inner products then reproduce the
    table exactly, which also shows the linear feasibility constraints are
    sufficient, not only necessary.
    """
    root = np.sqrt(np.clip(joint.p, 0.0, None))
    yu = np.zeros((3, 9))
    yv = np.zeros((3, 9))
    for i in range(3):
        for j in range(3):
            k = 3 * i + j
            yu[i, k] = root[i, j]
            yv[j, k] = root[i, j]
    return Realization(9, root.reshape(9).copy(), yu, yv)


def sample_pair_joint(rng: np.random.Generator) -> PairJoint:
    """Random pair table (Dirichlet over the nine cells)."""
    return PairJoint(rng.dirichlet(np.ones(9)).reshape(3, 3))


def sample_feasible(rng: np.random.Generator) -> Configuration:
    """Random feasible configuration, via a random pair table."""
    return sample_pair_joint(rng).config()


def parse_configuration(text: str) -> Configuration:
    """Parse the one-line text format: x1 x2 x3 w1 w2 w3 a1 a2 a3 t1 t2 t3."""
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 12:
            raise ConfigParseError(
                f"line {lineno}: expected 12 values, got {len(parts)}")
        try:
            vals = [float(p) for p in parts]
        except ValueError as exc:
            raise ConfigParseError(f"line {lineno}: {exc}") from exc
        return Configuration(tuple(vals[0:3]), tuple(vals[3:6]),
                             tuple(vals[6:9]), tuple(vals[9:12]))
    raise ConfigParseError("no configuration line found")


def load_configuration(path) -> Configuration:
    with open(path, encoding="utf-8") as fh:
        return parse_configuration(fh.read())


def format_configuration(c: Configuration) -> str:
    return " ".join(f"{v:.17g}" for v in c.as_tuple())


def save_configuration(c: Configuration, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_configuration(c) + "\n")
