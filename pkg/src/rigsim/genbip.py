"""Seeded sampling of the node-attribute incidence."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InputError
from .model import AttributeProfile, RigConfig
from .rng import stream


def _freeze(lists: Sequence[np.ndarray]) -> tuple[np.ndarray, ...]:
    out = []
    for a in lists:
        a = np.asarray(a, dtype=np.int64)
        a.setflags(write=False)
        out.append(a)
    return tuple(out)


def _transpose(lists: Sequence[np.ndarray], size: int) -> tuple[np.ndarray, ...]:
    lens = np.fromiter((len(a) for a in lists), dtype=np.int64, count=len(lists))
    if lens.sum() == 0:
        return tuple(np.empty(0, dtype=np.int64) for _ in range(size))
    rows = np.repeat(np.arange(len(lists), dtype=np.int64), lens)
    cols = np.concatenate(lists).astype(np.int64)
    order = np.lexsort((rows, cols))
    rows, cols = rows[order], cols[order]
    bounds = np.searchsorted(cols, np.arange(size + 1))
    return tuple(rows[bounds[i]:bounds[i + 1]] for i in range(size))


@dataclass(frozen=True, eq=False)
class BipartiteIncidence:
    """Realized attribute sets W(v), stored in both orientations.

    ``node_attrs[v]`` and ``attr_nodes[w]`` are strictly increasing int64 arrays.
    """

    n: int
    m: int
    node_attrs: tuple[np.ndarray, ...] = field(repr=False)
    attr_nodes: tuple[np.ndarray, ...] = field(repr=False)
    seed: int = 0

    @classmethod
    def from_node_attrs(cls, node_attrs: Sequence[Sequence[int]], m: int, seed: int = 0) -> "BipartiteIncidence":
        rows = [np.unique(np.asarray(a, dtype=np.int64)) for a in node_attrs]
        for a in rows:
            if a.size and (a[0] < 0 or a[-1] >= m):
                raise InputError(f"attribute index out of range [0, {m})")
        return cls(len(rows), m, _freeze(rows), _freeze(_transpose(rows, m)), seed)

    @classmethod
    def from_attr_nodes(cls, attr_nodes: Sequence[Sequence[int]], n: int, seed: int = 0) -> "BipartiteIncidence":
        cols = [np.unique(np.asarray(a, dtype=np.int64)) for a in attr_nodes]
        for a in cols:
            if a.size and (a[0] < 0 or a[-1] >= n):
                raise InputError(f"node index out of range [0, {n})")
        return cls(n, len(cols), _freeze(_transpose(cols, n)), _freeze(cols), seed)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BipartiteIncidence):
            return NotImplemented
        return (
            self.n == other.n
            and self.m == other.m
            and all(np.array_equal(a, b) for a, b in zip(self.node_attrs, other.node_attrs))
        )

    def num_entries(self) -> int:
        return int(sum(len(a) for a in self.attr_nodes))

    def check(self) -> None:
        """Raise InputError unless both views are sorted, in range and transposes."""
        if len(self.node_attrs) != self.n or len(self.attr_nodes) != self.m:
            raise InputError("list counts do not match n, m")
        for lists, bound in ((self.node_attrs, self.m), (self.attr_nodes, self.n)):
            for a in lists:
                if a.size and (a[0] < 0 or a[-1] >= bound or np.any(np.diff(a) <= 0)):
                    raise InputError("index list not strictly increasing within range")
        rebuilt = _transpose(self.node_attrs, self.m)
        if not all(np.array_equal(a, b) for a, b in zip(rebuilt, self.attr_nodes)):
            raise InputError("node_attrs and attr_nodes are not transposes")

    def relabel(self, perm: Sequence[int]) -> "BipartiteIncidence":
        """Incidence with node v renamed to perm[v]."""
        perm = np.asarray(perm, dtype=np.int64)
        cols = [np.sort(perm[a]) for a in self.attr_nodes]
        return BipartiteIncidence.from_attr_nodes(cols, self.n, self.seed)

    def union(self, other: "BipartiteIncidence") -> "BipartiteIncidence":
        if (self.n, self.m) != (other.n, other.m):
            raise InputError("incidences must share n and m")
        cols = [np.union1d(a, b) for a, b in zip(self.attr_nodes, other.attr_nodes)]
        return BipartiteIncidence.from_attr_nodes(cols, self.n, self.seed)

    # text export ---------------------------------------------------------

    def dumps(self) -> str:
        buf = io.StringIO()
        buf.write(f"RIG-INC v1 {self.n} {self.m} {self.seed}\n")
        for v, attrs in enumerate(self.node_attrs):
            buf.write(" ".join(map(str, [v, len(attrs), *attrs.tolist()])) + "\n")
        return buf.getvalue()

    @classmethod
    def loads(cls, text: str) -> "BipartiteIncidence":
        lines = text.splitlines()
        if not lines:
            raise InputError("empty incidence text")
        head = lines[0].split()
        if head[:2] != ["RIG-INC", "v1"] or len(head) != 5:
            raise InputError(f"bad header {lines[0]!r}")
        n, m, seed = int(head[2]), int(head[3]), int(head[4])
        body = [ln for ln in lines[1:] if ln.strip()]
        if len(body) != n:
            raise InputError(f"expected {n} node lines, got {len(body)}")
        rows = []
        for expect, ln in enumerate(body):
            parts = [int(x) for x in ln.split()]
            if parts[0] != expect or parts[1] != len(parts) - 2:
                raise InputError(f"malformed node line {ln!r}")
            rows.append(parts[2:])
        return cls.from_node_attrs(rows, m, seed)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path: str | Path) -> "BipartiteIncidence":
        return cls.loads(Path(path).read_text())


def sample_column(n: int, p: float, seed: int, w: int) -> np.ndarray:
    """Nodes holding attribute w: a Binomial(n, p) count, then a uniform subset."""
    rng = stream(seed, "col", w)
    k = int(rng.binomial(n, p))
    if k == 0:
        return np.empty(0, dtype=np.int64)
    return np.sort(rng.choice(n, size=k, replace=False, shuffle=False)).astype(np.int64)


def sample_incidence(config: RigConfig) -> BipartiteIncidence:
    n, seed = int(config.n), int(config.seed)
    cols = [sample_column(n, float(p), seed, w) for w, p in enumerate(config.profile.probs)]
    return BipartiteIncidence(n, len(cols), _freeze(_transpose(cols, n)), _freeze(cols), seed)


def sample(n: int, profile: AttributeProfile, seed: int = 0) -> BipartiteIncidence:
    return sample_incidence(RigConfig(n=n, profile=profile, seed=seed))


@dataclass(frozen=True)
class IncidenceStats:
    attr_counts: np.ndarray
    mean_degree: float
    max_degree: int
    empty_fraction: float

    def to_dict(self) -> dict:
        return {
            "n_entries": int(self.attr_counts.sum()),
            "mean_degree": self.mean_degree,
            "max_degree": self.max_degree,
            "empty_fraction": self.empty_fraction,
            "attr_counts": self.attr_counts.tolist(),
        }


def incidence_stats(inc: BipartiteIncidence) -> IncidenceStats:
    counts = np.fromiter((len(a) for a in inc.attr_nodes), dtype=np.int64, count=inc.m)
    degs = np.fromiter((len(a) for a in inc.node_attrs), dtype=np.int64, count=inc.n)
    assert counts.sum() == degs.sum()
    return IncidenceStats(
        attr_counts=counts,
        mean_degree=float(degs.mean()) if inc.n else 0.0,
        max_degree=int(degs.max()) if inc.n else 0,
        empty_fraction=float(np.mean(degs == 0)) if inc.n else 1.0,
    )
