"""Intersection graph construction, exact components and faithful exploration."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InputError, TraceError, WorkBudgetError
from .genbip import BipartiteIncidence
from .model import AttributeProfile
from .rng import stream

DEFAULT_WORK_BUDGET = 10**9


@dataclass(frozen=True, eq=False)
class IntersectionGraph:
    """Undirected simple graph in CSR form; ``neighbors(v)`` is sorted."""

    n: int
    indptr: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)
    s: int = 1

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    @property
    def adjacency(self) -> list[list[int]]:
        return [self.neighbors(v).tolist() for v in range(self.n)]

    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def num_edges(self) -> int:
        return int(self.indices.size // 2)

    def edges(self) -> np.ndarray:
        """(E, 2) array of edges with u < v, lexicographically sorted."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), self.degree())
        keep = rows < self.indices
        return np.column_stack([rows[keep], self.indices[keep]])

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges()}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntersectionGraph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    @classmethod
    def from_edges(cls, n: int, edges, s: int = 1) -> "IntersectionGraph":
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        e = e[e[:, 0] != e[:, 1]]
        lo, hi = np.minimum(e[:, 0], e[:, 1]), np.maximum(e[:, 0], e[:, 1])
        return cls._from_codes(n, np.unique(lo * n + hi), s)

    @classmethod
    def _from_codes(cls, n: int, codes: np.ndarray, s: int) -> "IntersectionGraph":
        u, v = np.divmod(codes, n) if n else (codes, codes)
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        return cls(n, indptr, cols.astype(np.int64), s)


@lru_cache(maxsize=256)
def _pairs(k: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(k, 1)


def _pair_codes(inc: BipartiteIncidence) -> np.ndarray:
    n = inc.n
    chunks = []
    for nodes in inc.attr_nodes:
        k = len(nodes)
        if k < 2:
            continue
        i, j = _pairs(k) if k <= 256 else np.triu_indices(k, 1)
        chunks.append(nodes[i] * n + nodes[j])
    if not chunks:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(chunks)


def build_intersection(
    inc: BipartiteIncidence,
    s: int = 1,
    work_budget: int = DEFAULT_WORK_BUDGET,
) -> IntersectionGraph:
    """Join u and v whenever |W(u) & W(v)| >= s.

    Pairs are generated attribute by attribute (each attribute's holders form a
    clique), so the work is sum_w |attr_nodes[w]|^2, which must not exceed
    ``work_budget``.
    """
    if s < 1:
        raise InputError(f"s must be >= 1, got {s}")
    work = sum(len(a) ** 2 for a in inc.attr_nodes)
    if work > work_budget:
        raise WorkBudgetError(f"pair work {work} exceeds budget {work_budget}")
    codes = _pair_codes(inc)
    if s == 1:
        codes = np.unique(codes)
    else:
        codes, counts = np.unique(codes, return_counts=True)
        codes = codes[counts >= s]
    return IntersectionGraph._from_codes(inc.n, codes, s)


class UnionFind:
    """Disjoint sets over 0..n-1 with union by size and path halving."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def component_size(self, x: int) -> int:
        return self.size[self.find(x)]

    def roots(self) -> list[int]:
        return [v for v, p in enumerate(self.parent) if v == p]


@dataclass(frozen=True)
class ComponentSummary:
    sizes: tuple[int, ...]
    labels: np.ndarray = field(repr=False, compare=False)

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def largest(self) -> int:
        return self.sizes[0] if self.sizes else 0

    @property
    def largest_fraction(self) -> float:
        return self.largest / self.n if self.sizes else 0.0

    @property
    def second_size(self) -> int:
        return self.sizes[1] if len(self.sizes) > 1 else 0

    def size_of(self, v: int) -> int:
        return self.sizes[int(self.labels[v])]

    def to_dict(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "largest_fraction": self.largest_fraction,
            "second_size": self.second_size,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _summary_from_uf(uf: UnionFind, n: int) -> ComponentSummary:
    roots = np.fromiter((uf.find(v) for v in range(n)), dtype=np.int64, count=n)
    uniq, inverse, counts = np.unique(roots, return_inverse=True, return_counts=True)
    # rank components by size descending, ties by smallest root
    order = np.lexsort((uniq, -counts))
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return ComponentSummary(tuple(int(x) for x in counts[order]), rank[inverse])


def components(g: IntersectionGraph) -> ComponentSummary:
    uf = UnionFind(g.n)
    for u, v in g.edges().tolist():
        uf.union(u, v)
    return _summary_from_uf(uf, g.n)


def incidence_components(inc: BipartiteIncidence) -> ComponentSummary:
    """Components of the s=1 intersection graph without building its edges.

    Holders of a shared attribute are united directly, which is the same
    partition as unioning every edge of the attribute's clique.
    """
    uf = UnionFind(inc.n)
    for nodes in inc.attr_nodes:
        if len(nodes) > 1:
            first = int(nodes[0])
            for u in nodes[1:].tolist():
                uf.union(first, u)
    return _summary_from_uf(uf, inc.n)


@dataclass
class ExplorationTrace:
    """Time series of one exploration.

    ``y[t]`` is the alive count after t processed nodes (``y[0] == 1``),
    ``z[t-1]`` the nodes newly made alive at step t, ``phi[t]`` and
    ``wcum[t]`` the survival weight and size of the discovered attribute set
    after t+1 processed nodes, and ``r[t] = phi[t-1] - phi[t]`` (with
    ``phi[-1] = 1``) for surrogate runs.
    """

    start: int
    n: int
    y: list[int]
    z: list[int]
    r: list[float]
    phi: list[float]
    wcum: list[int]
    stop_time: int
    new_attrs: list[np.ndarray] = field(default_factory=list, repr=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "Y", "Z", "r", "phi", "wcum"])

        def fmt(seq, i):
            return format(seq[i], ".17g") if i < len(seq) else ""

        for t in range(len(self.y)):
            z = str(self.z[t - 1]) if t >= 1 else ""
            wc = str(self.wcum[t]) if t < len(self.wcum) else ""
            w.writerow([t, self.y[t], z, fmt(self.r, t), fmt(self.phi, t), wc])
        return buf.getvalue()


def check_trace(trace: ExplorationTrace, q: np.ndarray | None = None, tol: float = 1e-9) -> None:
    """Raise TraceError if any bookkeeping identity of the trace fails.

    Integer identities are exact; float identities (phi recomputation and
    rate telescoping) hold to ``tol`` relative/absolute.
    """
    y, z, n = trace.y, trace.z, trace.n
    if not y or y[0] != 1:
        raise TraceError("Y_0 must equal 1")
    if len(z) != len(y) - 1:
        raise TraceError("len(z) must be len(y) - 1")
    for t in range(1, len(y)):
        if y[t] != y[t - 1] + z[t - 1] - 1:
            raise TraceError(f"increment identity fails at t={t}")
        if y[t] < 0 or n - t - y[t] < 0:
            raise TraceError(f"alive count out of range at t={t}")
    if trace.stop_time != len(y) - 1:
        raise TraceError("stop_time must equal the number of steps")
    if any(v == 0 for v in y[1:-1]):
        raise TraceError("Y hit zero before the stopping time")
    if y[-1] != 0 and trace.stop_time != n:
        raise TraceError("trace ended with alive nodes before t = n")
    phi = trace.phi
    if phi:
        if phi[0] > 1.0 or any(p <= 0.0 for p in phi):
            raise TraceError("phi must lie in (0, 1]")
        if any(b > a for a, b in zip(phi, phi[1:])):
            raise TraceError("phi must be non-increasing")
        if q is not None and trace.new_attrs:
            logq = np.log(q)
            acc = 0.0
            for t, new in enumerate(trace.new_attrs):
                acc += float(logq[new].sum())
                if abs(np.exp(acc) - phi[t]) > tol * phi[t]:
                    raise TraceError(f"phi recomputation mismatch at t={t}")
    if trace.r:
        prev = 1.0
        total = 0.0
        for t, r in enumerate(trace.r):
            if abs(r - (prev - phi[t])) > tol:
                raise TraceError(f"rate r_{t} != phi_{t-1} - phi_{t}")
            total += r
            prev = phi[t]
            if abs(total - (1.0 - phi[t])) > tol:
                raise TraceError(f"rate telescoping fails at t={t}")


def explore_faithful(
    inc: BipartiteIncidence,
    v0: int,
    profile: AttributeProfile | None = None,
    seed: int | None = None,
) -> ExplorationTrace:
    """Explore the component of v0 on the realized incidence (s = 1).

    Each step processes one alive node, chosen uniformly with the stream
    (seed, "explore", v0), and makes alive every neutral node that holds one
    of its newly discovered attributes.  The stopping time is exactly |C(v0)|.
    ``phi`` is recorded only when the generating profile is supplied.
    """
    n = inc.n
    if not 0 <= v0 < n:
        raise IndexError(f"start node {v0} out of range [0, {n})")
    rng = stream(inc.seed if seed is None else seed, "explore", v0)
    q = profile.q if profile is not None else None
    status = bytearray(n)  # 0 neutral, 1 alive, 2 dead
    discovered = bytearray(inc.m)
    alive = [v0]
    pos = {v0: 0}
    status[v0] = 1
    y, z, phi, wcum, new_log = [1], [], [], [], []
    cur_phi, n_disc = 1.0, 0
    node_attrs, attr_nodes = inc.node_attrs, inc.attr_nodes
    t = 0
    while y[-1] > 0:
        if t == 0:
            v = v0
        else:
            v = alive[int(rng.integers(len(alive)))]
        # swap-remove v from the alive list
        i = pos.pop(v)
        last = alive.pop()
        if last != v:
            alive[i] = last
            pos[last] = i
        status[v] = 2
        new = [w for w in node_attrs[v].tolist() if not discovered[w]]
        zt = 0
        for w in new:
            discovered[w] = 1
            for u in attr_nodes[w].tolist():
                if status[u] == 0:
                    status[u] = 1
                    pos[u] = len(alive)
                    alive.append(u)
                    zt += 1
        n_disc += len(new)
        if q is not None and new:
            cur_phi *= float(np.prod(q[new]))
        t += 1
        z.append(zt)
        y.append(y[-1] + zt - 1)
        wcum.append(n_disc)
        new_log.append(np.asarray(new, dtype=np.int64))
        if q is not None:
            phi.append(cur_phi)
    return ExplorationTrace(v0, n, y, z, [], phi, wcum, t, new_log)
