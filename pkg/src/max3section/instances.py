"""Graphs, vector solutions, constructed feasible solutions, brute force.

No SDP is solved here: solutions are either ingested from files (and
validated against the relaxation constraints) or constructed with known
ground truth -- integral solutions encode a balanced partition exactly, and
mixture solutions take convex combinations of integral Gram matrices, which
stay feasible because every constraint is linear in the Gram matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

SOLUTION_TOL = 1e-6
BRUTE_FORCE_MAX_N = 18


class GraphParseError(ValueError):
    """Malformed graph or solution file."""


class ValidationError(ValueError):
    """Input violates a structural constraint."""


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[tuple[int, int, float], ...]

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Normalize u < v, merge duplicates by summing weights."""
        if n < 0:
            raise ValidationError(f"negative vertex count {n}")
        acc: dict[tuple[int, int], float] = {}
        for u, v, w in edges:
            u, v, w = int(u), int(v), float(w)
            if u == v:
                raise ValidationError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValidationError(f"edge ({u}, {v}) outside vertex range")
            if w < 0:
                raise ValidationError(f"negative weight {w} on edge ({u}, {v})")
            key = (u, v) if u < v else (v, u)
            acc[key] = acc.get(key, 0.0) + w
        return cls(n, tuple((u, v, w) for (u, v), w in sorted(acc.items())))

    @property
    def total_weight(self) -> float:
        return sum(w for _, _, w in self.edges)

    def cut_value(self, partition: "Partition") -> float:
        lab = partition.labels
        return sum(w for u, v, w in self.edges if lab[u] != lab[v])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(u, v, 1.0) for u, v in combinations(range(n), 2)])


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n, 1.0) for i in range(n)])


def load_graph(path) -> Graph:
    """Text format: first line "n m", then m lines "u v w" (0-based)."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    header = None
    edges = []
    m_expected = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if header is None:
                if len(parts) != 2:
                    raise ValueError("expected 'n m'")
                header = (int(parts[0]), int(parts[1]))
                m_expected = header[1]
            else:
                if len(parts) != 3:
                    raise ValueError("expected 'u v w'")
                edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
        except ValueError as exc:
            raise GraphParseError(f"{path}: line {lineno}: {exc}") from exc
    if header is None:
        raise GraphParseError(f"{path}: missing 'n m' header")
    if m_expected != len(edges):
        raise GraphParseError(
            f"{path}: header promises {m_expected} edges, found {len(edges)}")
    try:
        return Graph.from_edges(header[0], edges)
    except ValidationError as exc:
        raise GraphParseError(f"{path}: {exc}") from exc


def save_graph(graph: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{graph.n} {len(graph.edges)}\n")
        for u, v, w in graph.edges:
            fh.write(f"{u} {v} {w:.17g}\n")


@dataclass(frozen=True)
class Partition:
    """Vertex labels in 1..k."""

    labels: tuple[int, ...]
    k: int = 3

    def __post_init__(self):
        bad = [l for l in self.labels if not 1 <= l <= self.k]
        if bad:
            raise ValidationError(f"labels outside 1..{self.k}: {sorted(set(bad))}")

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def sizes(self) -> tuple[int, ...]:
        counts = [0] * self.k
        for l in self.labels:
            counts[l - 1] += 1
        return tuple(counts)

    def is_balanced(self) -> bool:
        return len(set(self.sizes)) == 1 and self.n % self.k == 0

    def members(self, label: int) -> list[int]:
        return [v for v, l in enumerate(self.labels) if l == label]


@dataclass(frozen=True)
class VectorSolution:
    """Per-vertex cluster vectors plus the unit reference vector."""

    n: int
    dimension: int
    y_empty: np.ndarray           # (dimension,)
    y: np.ndarray                 # (n, 3, dimension)
    objective_hint: float | None = field(default=None, compare=False)

    def marginals(self) -> np.ndarray:
        """(n, 3) array of squared norms."""
        return np.einsum("vid,vid->vi", self.y, self.y)

    def violations(self, tol: float = SOLUTION_TOL) -> list[str]:
        out = []
        if abs(self.y_empty @ self.y_empty - 1.0) > tol:
            out.append("reference vector not unit")
        sq = self.marginals()
        dot0 = self.y @ self.y_empty
        if np.abs(sq - dot0).max() > tol:
            out.append("|y_v^i|^2 != y_empty . y_v^i for some (v, i)")
        if np.abs(sq.sum(axis=1) - 1.0).max() > tol:
            out.append("per-vertex marginals do not sum to 1")
        for i in range(3):
            for j in range(i + 1, 3):
                prods = np.einsum("vd,vd->v", self.y[:, i, :], self.y[:, j, :])
                if np.abs(prods).max() > tol:
                    out.append(f"same-vertex clusters {i + 1},{j + 1} not orthogonal")
        flat = self.y.reshape(3 * self.n, self.dimension)
        gram = flat @ flat.T
        if gram.min() < -tol:
            out.append(f"negative pairwise inner product ({gram.min():.3g})")
        balance = sq.sum(axis=0)
        if np.abs(balance - self.n / 3.0).max() > tol * max(1.0, self.n):
            out.append(
                "cluster mass not n/3: " + ", ".join(f"{b:.6f}" for b in balance))
        return out

    def validate(self, tol: float = SOLUTION_TOL) -> None:
        bad = self.violations(tol)
        if bad:
            raise ValidationError("invalid SDP solution: " + "; ".join(bad))

    def pair_configuration(self, u: int, v: int):
        from .configspace import Configuration

        x = tuple(float(self.y[u, i] @ self.y[u, i]) for i in range(3))
        w = tuple(float(self.y[v, i] @ self.y[v, i]) for i in range(3))
        alpha = tuple(float(self.y[u, i] @ self.y[v, i]) for i in range(3))
        return Configuration.from_alpha(x, w, alpha)


def integral_solution(partition: Partition) -> VectorSolution:
    """One-dimensional embedding of a balanced partition.

    y_v^i is the reference vector when v sits in part i and the zero vector
    otherwise; the objective then counts exactly the crossing weight.
    """
    if partition.k != 3:
        raise ValidationError("integral solutions are 3-section only")
    if not partition.is_balanced():
        raise ValidationError(
            f"partition sizes {partition.sizes} are not balanced; "
            "the cluster-mass constraint would fail")
    n = partition.n
    y = np.zeros((n, 3, 1))
    for v, l in enumerate(partition.labels):
        y[v, l - 1, 0] = 1.0
    return VectorSolution(n, 1, np.array([1.0]), y)


def mixture_solution(partitions: list[Partition], weights) -> VectorSolution:
    """Convex combination of integral solutions, refactorized into vectors.

    The Gram matrix of [y_empty, y_v^i ...] is averaged and factorized with
    an eigenvalue floor at zero (convexity keeps it PSD; negatives are pure
    round-off).
    """
    if not partitions:
        raise ValidationError("need at least one partition")
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (len(partitions),) or weights.min() < 0:
        raise ValidationError("weights must be nonnegative, one per partition")
    if abs(weights.sum() - 1.0) > 1e-12:
        raise ValidationError(f"weights sum to {weights.sum()}, not 1")
    n = partitions[0].n
    if any(p.n != n for p in partitions):
        raise ValidationError("partitions disagree on vertex count")

    dim0 = 1 + 3 * n
    gram = np.zeros((dim0, dim0))
    for lam, part in zip(weights, partitions):
        if not part.is_balanced():
            raise ValidationError(f"unbalanced component partition {part.sizes}")
        z = np.zeros(dim0)
        z[0] = 1.0
        for v, l in enumerate(part.labels):
            z[1 + 3 * v + (l - 1)] = 1.0
        gram += lam * np.outer(z, z)

    eigval, eigvec = np.linalg.eigh(gram)
    if eigval.min() < -1e-10:
        raise ValidationError(
            f"mixture Gram has eigenvalue {eigval.min():.3g} below the floor")
    keep = eigval > 1e-12
    factors = eigvec[:, keep] * np.sqrt(eigval[keep])
    d = int(keep.sum())
    y = factors[1:].reshape(n, 3, d)
    return VectorSolution(n, d, factors[0], y)


def sdp_objective(graph: Graph, solution: VectorSolution) -> float:
    """sum over edges of w * (1 - sum_i y_u^i . y_v^i)."""
    if graph.n != solution.n:
        raise ValidationError(
            f"graph has {graph.n} vertices, solution has {solution.n}")
    total = 0.0
    for u, v, w in graph.edges:
        same = float(np.einsum("id,id->", solution.y[u], solution.y[v]))
        total += w * (1.0 - same)
    return total


def load_solution(path, validate: bool = True) -> VectorSolution:
    """Text format: "n d", a line for y_empty, then 3 lines per vertex."""
    with open(path, encoding="utf-8") as fh:
        rows = [ln.strip() for ln in fh.read().splitlines()]
    rows = [r for r in rows if r and not r.startswith("#")]
    if not rows:
        raise GraphParseError(f"{path}: empty solution file")
    try:
        n, d = (int(tok) for tok in rows[0].split())
    except ValueError as exc:
        raise GraphParseError(f"{path}: bad header {rows[0]!r}") from exc
    need = 1 + 1 + 3 * n
    if len(rows) != need:
        raise GraphParseError(f"{path}: expected {need} lines, found {len(rows)}")

    def vec(line, what):
        vals = line.split()
        if len(vals) != d:
            raise GraphParseError(f"{path}: {what}: expected {d} values")
        try:
            return np.array([float(v) for v in vals])
        except ValueError as exc:
            raise GraphParseError(f"{path}: {what}: {exc}") from exc

    y_empty = vec(rows[1], "reference vector")
    y = np.zeros((n, 3, d))
    for v in range(n):
        for i in range(3):
            y[v, i] = vec(rows[2 + 3 * v + i], f"vertex {v} cluster {i + 1}")
    sol = VectorSolution(n, d, y_empty, y)
    if validate:
        sol.validate()
    return sol


def save_solution(solution: VectorSolution, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{solution.n} {solution.dimension}\n")
        fh.write(" ".join(f"{v:.17g}" for v in solution.y_empty) + "\n")
        for v in range(solution.n):
            for i in range(3):
                fh.write(" ".join(f"{c:.17g}" for c in solution.y[v, i]) + "\n")


def load_partition(path, k: int = 3) -> Partition:
    with open(path, encoding="utf-8") as fh:
        rows = [r.strip() for r in fh.read().splitlines()]
    rows = [r for r in rows if r and not r.startswith("#")]
    if len(rows) < 2:
        raise GraphParseError(f"{path}: expected 'n' then a label line")
    n = int(rows[0])
    labels = tuple(int(tok) for tok in rows[1].split())
    if len(labels) != n:
        raise GraphParseError(f"{path}: expected {n} labels, found {len(labels)}")
    return Partition(labels, k)


def save_partition(partition: Partition, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{partition.n}\n")
        fh.write(" ".join(str(l) for l in partition.labels) + "\n")


def brute_force_opt(graph: Graph) -> tuple[float, Partition]:
    """Exact optimum over balanced 3-partitions by enumeration.

    Quotients the 3! label symmetry: vertex 0 is pinned to part 1, and the
    smallest vertex outside parts 1 goes to part 2.  Internal weights of all
    (n/3)-subsets are precomputed once and looked up by bitmask.
    """
    n = graph.n
    if n % 3 != 0:
        raise ValidationError(f"vertex count {n} not divisible by 3")
    if n > BRUTE_FORCE_MAX_N:
        raise ValidationError(
            f"n={n} exceeds the enumeration cap {BRUTE_FORCE_MAX_N}")
    if n == 0:
        return 0.0, Partition(())
    size = n // 3
    total = graph.total_weight

    internal: dict[int, float] = {}
    for subset in combinations(range(n), size):
        mask = 0
        for v in subset:
            mask |= 1 << v
        internal[mask] = 0.0
    for u, v, w in graph.edges:
        bits = (1 << u) | (1 << v)
        for mask in internal:
            if mask & bits == bits:
                internal[mask] += w

    best = -1.0
    best_masks = None
    vertices = list(range(n))
    for s1 in combinations(vertices[1:], size - 1):
        mask1 = 1
        for v in s1:
            mask1 |= 1 << v
        rest = [v for v in vertices if not (mask1 >> v) & 1]
        anchor = rest[0]
        others = rest[1:]
        for s2 in combinations(others, size - 1):
            mask2 = 1 << anchor
            for v in s2:
                mask2 |= 1 << v
            mask3 = ((1 << n) - 1) ^ mask1 ^ mask2
            value = total - internal[mask1] - internal[mask2] - internal[mask3]
            if value > best:
                best = value
                best_masks = (mask1, mask2, mask3)
    labels = [0] * n
    for part, mask in enumerate(best_masks, start=1):
        for v in range(n):
            if (mask >> v) & 1:
                labels[v] = part
    return best, Partition(tuple(labels))
