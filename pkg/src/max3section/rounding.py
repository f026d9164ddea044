"""Two-hyperplane rounding with a random generation order, plus re-balancing.

round_once draws a uniformly random order of the three parts and two
independent Gaussian directions; a vertex joins the first part when its
(normalized, reference-orthogonal) component clears the quantile threshold
of its marginal, joins the second part via the same test against the
conditional marginal, and falls through to the third part otherwise.  This
preserves every marginal exactly, so sizes concentrate near n/3 and the
rebalance step repairs the remainder with a small expected loss.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy.special import ndtri

from .instances import Graph, Partition, ValidationError, VectorSolution

_PERMS = tuple(permutations((0, 1, 2)))


@dataclass(frozen=True)
class RoundingTrace:
    permutation: tuple[int, int, int]   # 0-based part indices, generation order
    thresholds: np.ndarray              # (n, 2), stage quantile thresholds
    stage1_members: tuple[int, ...]
    stage2_members: tuple[int, ...]


@dataclass(frozen=True)
class PipelineResult:
    partition: Partition
    attempts: int
    exhausted: bool


def _padded(solution: VectorSolution) -> tuple[np.ndarray, np.ndarray]:
    # One extra zero coordinate guarantees a direction orthogonal to the
    # reference vector exists even for the 1-dimensional integral embedding.
    y0 = np.concatenate([solution.y_empty, [0.0]])
    y = np.concatenate(
        [solution.y, np.zeros((solution.n, 3, 1))], axis=2)
    return y0, y


def _fallback_direction(y0: np.ndarray) -> np.ndarray:
    # first canonical direction orthogonalized against the reference vector;
    # falls back to the second when they are parallel
    for axis in range(len(y0)):
        e = np.zeros_like(y0)
        e[axis] = 1.0
        u = e - (e @ y0) * y0
        norm = np.linalg.norm(u)
        if norm > 1e-8:
            return u / norm
    raise ValidationError("reference vector spans the whole space")


def z_vector(solution: VectorSolution, vertex: int, cluster: int) -> np.ndarray:
    """Normalized component of y_v^i orthogonal to the reference vector.

    Returned in a (dimension+1)-padded space so the integral case (where no
    orthogonal direction may exist in the original span) stays well-defined;
    padding adds a zero coordinate and changes no inner products.
    """
    y0, y = _padded(solution)
    return _z_matrix(y0, y[:, cluster, :])[vertex]


def _z_matrix(y0: np.ndarray, yc: np.ndarray) -> np.ndarray:
    """Rows: z-vectors of one cluster for all vertices."""
    sq = np.einsum("vd,vd->v", yc, yc)
    sq = np.clip(sq, 0.0, 1.0)
    denom2 = sq - sq * sq
    z = np.empty_like(yc)
    degenerate = denom2 <= 1e-14
    ok = ~degenerate
    if ok.any():
        z[ok] = (yc[ok] - sq[ok, None] * y0) / np.sqrt(denom2[ok])[:, None]
    if degenerate.any():
        z[degenerate] = _fallback_direction(y0)
    return z


def round_once(solution: VectorSolution, seed: int) -> tuple[Partition, RoundingTrace]:
    """One pass of the randomized rounding; deterministic given the seed."""
    rng = np.random.default_rng(seed)
    y0, y = _padded(solution)
    d = y0.shape[0]

    order = _PERMS[rng.integers(0, 6)]
    g1 = rng.standard_normal(d)
    g2 = rng.standard_normal(d)

    m = np.clip(np.einsum("vid,vid->vi", y, y), 0.0, 1.0)
    m1 = m[:, order[0]]
    m2 = m[:, order[1]]
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(m1 < 1.0, m2 / (1.0 - m1), 0.0)
    cond = np.clip(cond, 0.0, 1.0)

    thr1 = ndtri(np.clip(1.0 - m1, 0.0, 1.0))
    thr2 = ndtri(1.0 - cond)
    z1 = _z_matrix(y0, y[:, order[0], :])
    z2 = _z_matrix(y0, y[:, order[1], :])

    in_s1 = z1 @ g1 >= thr1
    in_s2 = z2 @ g2 >= thr2

    labels = np.where(in_s1, order[0], np.where(in_s2, order[1], order[2])) + 1
    trace = RoundingTrace(
        permutation=order,
        thresholds=np.column_stack([thr1, thr2]),
        stage1_members=tuple(np.flatnonzero(in_s1)),
        stage2_members=tuple(np.flatnonzero(in_s2)),
    )
    return Partition(tuple(int(l) for l in labels)), trace


def is_eps_unbalanced(partition: Partition, epsilon: float) -> bool:
    """Every part within (1 +- epsilon) n/3."""
    target = partition.n / 3.0
    return all(abs(s - target) <= epsilon * target for s in partition.sizes)


def rebalance(graph: Graph, partition: Partition, seed: int) -> Partition:
    """Repair sizes to exactly n/3 by random shifting.

    Two cases: with two surplus parts, uniform excess subsets of each move to
    the deficit part; with one surplus part, a uniform excess subset is drawn
    and split uniformly between the two deficit parts.  For an eps-unbalanced
    input the expected crossing weight kept is at least (1 - 2 eps) of the
    original.
    """
    n = partition.n
    if n % 3 != 0:
        raise ValidationError(f"vertex count {n} not divisible by 3")
    target = n // 3
    sizes = partition.sizes
    if all(s == target for s in sizes):
        return Partition(partition.labels)

    rng = np.random.default_rng(seed)
    labels = list(partition.labels)
    surplus = [i + 1 for i, s in enumerate(sizes) if s > target]
    deficit = [i + 1 for i, s in enumerate(sizes) if s < target]

    def draw(pool: list[int], count: int) -> list[int]:
        pick = rng.choice(len(pool), size=count, replace=False)
        return [pool[i] for i in pick]

    if len(surplus) >= 2:
        # two surplus parts, single deficit part
        dst = deficit[0]
        for src in surplus:
            excess = sizes[src - 1] - target
            for v in draw(partition.members(src), excess):
                labels[v] = dst
    else:
        # single surplus part, up to two deficit parts
        src = surplus[0]
        miss = {d: target - sizes[d - 1] for d in deficit}
        excess = sizes[src - 1] - target
        moved = draw(partition.members(src), excess)
        second = deficit[1] if len(deficit) > 1 else deficit[0]
        take2 = miss.get(second, 0) if len(deficit) > 1 else 0
        sub = set(draw(moved, take2)) if take2 else set()
        for v in moved:
            labels[v] = second if v in sub else deficit[0]

    out = Partition(tuple(labels))
    assert out.sizes == (target, target, target)
    return out


def round_pipeline(graph: Graph, solution: VectorSolution, epsilon: float,
                   max_attempts: int, seed: int) -> PipelineResult:
    """Round until the output is epsilon-unbalanced, then rebalance exactly.

    On exhaustion the closest-to-balanced attempt is rebalanced anyway and
    the result carries exhausted=True.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValidationError(f"epsilon must lie in (0, 1), got {epsilon}")
    if max_attempts < 1:
        raise ValidationError("need at least one attempt")
    seeds = np.random.SeedSequence(seed).generate_state(max_attempts + 1)

    best = None
    best_dev = None
    attempts = 0
    for i in range(max_attempts):
        attempts += 1
        part, _ = round_once(solution, int(seeds[i]))
        dev = max(abs(s - part.n / 3.0) for s in part.sizes)
        if best is None or dev < best_dev:
            best, best_dev = part, dev
        if is_eps_unbalanced(part, epsilon):
            return PipelineResult(
                rebalance(graph, part, int(seeds[-1])), attempts, False)
    return PipelineResult(
        rebalance(graph, best, int(seeds[-1])), attempts, True)
