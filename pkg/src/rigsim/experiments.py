"""Monte Carlo harness: phase-transition sweeps and verification demos."""

from __future__ import annotations

import csv
import io
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import analysis
from .errors import DomainError, InputError, RigError
from .genbip import sample
from .graph import DEFAULT_WORK_BUDGET, build_intersection, check_trace, components, explore_faithful
from .model import AttributeProfile, make_weighted_profile, validate_profile
from .rng import ALGORITHM, derive_seed, stream
from .stats import ks_two_sample, wilson_interval
from .surrogate import run_surrogate

SCHEMA = "schema=rigsweep.v1"
SWEEP_COLUMNS = [
    "n", "m", "c", "shape", "s", "reps",
    "mean_largest_frac", "std_largest_frac", "mean_second", "zeta_pred", "seed",
    "max_largest", "max_second", "status", "wall_time",
]


@dataclass(frozen=True)
class Cell:
    n: int
    m: int
    c: float
    shape: str = "uniform"
    shape_params: tuple[tuple[str, float], ...] = ()

    def profile(self) -> AttributeProfile:
        return make_weighted_profile(self.n, self.m, self.c, self.shape, **dict(self.shape_params))

    @property
    def shape_label(self) -> str:
        if not self.shape_params:
            return self.shape
        inner = ",".join(f"{k}={v:g}" for k, v in self.shape_params)
        return f"{self.shape}({inner})"


@dataclass(frozen=True)
class SweepSpec:
    cells: tuple[Cell, ...]
    reps: int = 10
    seed: int = 0
    s: int = 1
    probe_traces: bool = False
    work_budget: int = DEFAULT_WORK_BUDGET

    def __post_init__(self) -> None:
        if self.reps < 1:
            raise InputError("reps must be >= 1")
        for cell in self.cells:
            validate_profile(cell.profile(), cell.n)

    @classmethod
    def grid(cls, n: Iterable[int], m: Iterable[int], c: Iterable[float],
             shape: Iterable[str] = ("uniform",), **kw: Any) -> "SweepSpec":
        cells = tuple(Cell(int(a), int(b), float(x), sh)
                      for a, b, x, sh in itertools.product(n, m, c, shape))
        return cls(cells=cells, **kw)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "SweepSpec":
        kw = {k: d[k] for k in ("reps", "seed", "s", "work_budget") if k in d}
        if "cells" in d:
            cells = tuple(
                Cell(int(x["n"]), int(x["m"]), float(x["c"]), x.get("shape", "uniform"),
                     tuple(sorted((x.get("shape_params") or {}).items())))
                for x in d["cells"]
            )
            return cls(cells=cells, **kw)

        def seq(v):
            return v if isinstance(v, list) else [v]

        return cls.grid(seq(d["n"]), seq(d["m"]), seq(d["c"]), seq(d.get("shape", "uniform")), **kw)


@dataclass
class RepResult:
    largest: int
    second: int
    traces_checked: int = 0


@dataclass
class SweepRow:
    cell: Cell
    s: int
    reps: int
    seed: int
    mean_largest_frac: float = math.nan
    std_largest_frac: float = math.nan
    mean_second: float = math.nan
    zeta_pred: float = math.nan
    max_largest: int = 0
    max_second: int = 0
    status: str = "ok"
    wall_time: float = 0.0
    largest: list[int] = field(default_factory=list)
    second: list[int] = field(default_factory=list)
    traces_checked: int = 0

    def as_record(self) -> dict[str, Any]:
        return {
            "n": self.cell.n, "m": self.cell.m, "c": repr(self.cell.c),
            "shape": self.cell.shape_label, "s": self.s, "reps": self.reps,
            "mean_largest_frac": format(self.mean_largest_frac, ".17g"),
            "std_largest_frac": format(self.std_largest_frac, ".17g"),
            "mean_second": format(self.mean_second, ".17g"),
            "zeta_pred": format(self.zeta_pred, ".17g"),
            "seed": self.seed, "max_largest": self.max_largest,
            "max_second": self.max_second, "status": self.status,
            "wall_time": f"{self.wall_time:.3f}",
        }


def run_rep(cell: Cell, s: int, seed: int, cell_index: int, rep: int,
            probe_traces: bool = False, work_budget: int = DEFAULT_WORK_BUDGET) -> RepResult:
    """One full pipeline pass: profile -> incidence -> intersection -> components."""
    profile = cell.profile()
    rep_seed = derive_seed(seed, "sweep", cell_index, rep)
    inc = sample(cell.n, profile, rep_seed)
    summary = components(build_intersection(inc, s, work_budget))
    res = RepResult(summary.largest, summary.second_size)
    if probe_traces and s == 1:
        v0 = int(stream(seed, "sweep-probe", cell_index, rep).integers(cell.n))
        trace = explore_faithful(inc, v0, profile)
        check_trace(trace, profile.q)
        if trace.stop_time != summary.size_of(v0):
            raise RigError("faithful stopping time disagrees with component size")
        res.traces_checked = 1
    return res


def _run_rep_task(args):
    return run_rep(*args)


def sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """Run every (cell, rep); results are reduced in index order."""
    rows = []
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for ci, cell in enumerate(spec.cells):
            row = SweepRow(cell=cell, s=spec.s, reps=spec.reps, seed=spec.seed)
            t0 = time.perf_counter()
            tasks = [(cell, spec.s, spec.seed, ci, r, spec.probe_traces, spec.work_budget) for r in range(spec.reps)]
            try:
                results = list(pool.map(_run_rep_task, tasks)) if pool else [_run_rep_task(t) for t in tasks]
            except RigError as exc:
                row.status = f"failed: {type(exc).__name__}"
                row.zeta_pred = analysis.solve_zeta(cell.c).zeta
                row.wall_time = time.perf_counter() - t0
                rows.append(row)
                continue
            frac = np.array([r.largest for r in results]) / cell.n
            row.largest = [r.largest for r in results]
            row.second = [r.second for r in results]
            row.mean_largest_frac = float(frac.mean())
            row.std_largest_frac = float(frac.std(ddof=1)) if len(frac) > 1 else 0.0
            row.mean_second = float(np.mean(row.second))
            row.max_largest = max(row.largest)
            row.max_second = max(row.second)
            row.traces_checked = sum(r.traces_checked for r in results)
            row.zeta_pred = analysis.solve_zeta(validate_profile(cell.profile(), cell.n).c).zeta
            row.wall_time = time.perf_counter() - t0
            rows.append(row)
    finally:
        if pool:
            pool.shutdown()
    return rows


def sweep_csv(rows: Sequence[SweepRow], wall_time: bool = True) -> str:
    cols = SWEEP_COLUMNS if wall_time else SWEEP_COLUMNS[:-1]
    buf = io.StringIO()
    buf.write(SCHEMA + "\n")
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for row in rows:
        w.writerow(row.as_record())
    return buf.getvalue()


def check_sweep(rows: Sequence[SweepRow], tol: float = 0.03) -> list[str]:
    """Failure messages for rows that miss the regime predictions."""
    bad = []
    for row in rows:
        cell = row.cell
        if row.status != "ok":
            bad.append(f"{cell}: {row.status}")
            continue
        c = validate_profile(cell.profile(), cell.n).c
        if c > 1.0 and abs(row.mean_largest_frac - row.zeta_pred) > tol:
            bad.append(f"{cell}: mean largest fraction {row.mean_largest_frac:.4f} vs zeta {row.zeta_pred:.4f}")
        if c < 1.0 and cell.n >= 2:
            bound = analysis.behrisch_bound(c, cell.n)
            if row.max_largest > bound:
                bad.append(f"{cell}: largest component {row.max_largest} exceeds {bound:.1f}")
    return bad


# surrogate versus realized graphs -------------------------------------------

@dataclass
class FidelityReport:
    surrogate: np.ndarray
    faithful: np.ndarray
    statistic: float
    p_value: float
    traces_checked: int

    def ecdf(self, which: str) -> tuple[np.ndarray, np.ndarray]:
        x = np.sort(getattr(self, which))
        vals, counts = np.unique(x, return_counts=True)
        return vals, np.cumsum(counts) / x.size

    def to_dict(self) -> dict:
        out = {"statistic": self.statistic, "p_value": self.p_value,
               "reps": int(self.surrogate.size), "traces_checked": self.traces_checked}
        for which in ("surrogate", "faithful"):
            vals, cdf = self.ecdf(which)
            out[f"{which}_ecdf"] = {"x": vals.tolist(), "F": cdf.tolist()}
            out[f"{which}_mean"] = float(getattr(self, which).mean())
        return out


def surrogate_vs_faithful(n: int, profile: AttributeProfile, reps: int, seed: int = 0,
                          rate: str = "conditional", check: bool = True) -> FidelityReport:
    """Compare surrogate stopping times with component sizes on fresh graphs.

    Every faithful replicate samples a new incidence and a uniform start node;
    every trace from either side is run through ``check_trace`` when ``check``.
    """
    if reps < 1:
        raise InputError("reps must be >= 1")
    q = profile.q
    sur = np.empty(reps, dtype=np.int64)
    fai = np.empty(reps, dtype=np.int64)
    checked = 0
    for i in range(reps):
        tr = run_surrogate(n, profile, seed=derive_seed(seed, "svf-surrogate"), index=i, rate=rate)
        sur[i] = tr.stop_time
        inc = sample(n, profile, derive_seed(seed, "svf-graph", i))
        v0 = int(stream(seed, "svf-start", i).integers(n))
        ft = explore_faithful(inc, v0, profile)
        fai[i] = ft.stop_time
        if check:
            check_trace(tr, q)
            check_trace(ft, q)
            checked += 2
    res = ks_two_sample(sur, fai)
    return FidelityReport(sur, fai, res.statistic, res.p_value, checked)


# edge dependence ------------------------------------------------------------

def _sample_rows(rng: np.random.Generator, batch: int, k: int, p: np.ndarray) -> np.ndarray:
    return rng.random((batch, k, p.size)) < p


@dataclass
class DependenceReport:
    reps: int
    joint: float
    product: float
    p_ik: float
    p_jk: float
    z: float
    se: float
    exact_joint: float
    exact_product: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def dependence_demo(profile: AttributeProfile, reps: int, seed: int = 0,
                    batch: int = 50_000) -> DependenceReport:
    """Estimate P[v_i~v_k, v_j~v_k] and P[v_i~v_k] P[v_j~v_k] on three nodes.

    Each replicate draws fresh attribute sets for three fixed nodes (the rest
    of the graph does not affect these two events).  ``z`` is the difference
    over its delta-method standard error, i.e. the sample covariance of the
    two edge indicators divided by its standard error.
    """
    if reps < 1:
        raise InputError("reps must be >= 1")
    p = profile.probs
    rng = stream(seed, "depdemo")
    a = np.empty(reps, dtype=bool)
    b = np.empty(reps, dtype=bool)
    done = 0
    per = max(1, min(batch, 5_000_000 // max(3 * p.size, 1)))
    while done < reps:
        k = min(per, reps - done)
        w = _sample_rows(rng, k, 3, p)
        a[done:done + k] = np.any(w[:, 0] & w[:, 2], axis=1)
        b[done:done + k] = np.any(w[:, 1] & w[:, 2], axis=1)
        done += k
    fa, fb = a.astype(np.float64), b.astype(np.float64)
    ma, mb = fa.mean(), fb.mean()
    joint = float(np.mean(fa * fb))
    infl = (fa - ma) * (fb - mb)
    se = float(infl.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    diff = joint - ma * mb
    z = diff / se if se > 0 else 0.0
    exact = analysis.pair_dependence(profile, seed=derive_seed(seed, "depdemo-exact"))
    return DependenceReport(reps, joint, ma * mb, ma, mb, z, se, exact.joint, exact.product)


@dataclass
class EdgeFrequencyReport:
    hits: int
    trials: int
    interval: tuple[float, float]
    predicted: float

    @property
    def inside(self) -> bool:
        return self.interval[0] <= self.predicted <= self.interval[1]


def edge_frequency(profile: AttributeProfile, trials: int, seed: int = 0,
                   confidence: float = 0.99) -> EdgeFrequencyReport:
    """How often two fixed nodes are adjacent, against 1 - prod(1 - p_w^2)."""
    p = profile.probs
    rng = stream(seed, "edgefreq")
    hits = 0
    done = 0
    per = max(1, 5_000_000 // max(2 * p.size, 1))
    while done < trials:
        k = min(per, trials - done)
        w = _sample_rows(rng, k, 2, p)
        hits += int(np.any(w[:, 0] & w[:, 1], axis=1).sum())
        done += k
    return EdgeFrequencyReport(hits, trials, wilson_interval(hits, trials, confidence),
                               analysis.edge_probability(profile))


# sprinkling ----------------------------------------------------------------

def sprinkle_profile(profile: AttributeProfile, gamma: float) -> AttributeProfile:
    """Union of the base layer with an independent layer at p_w ** gamma."""
    if not gamma > 1.0:
        raise DomainError(f"gamma must exceed 1, got {gamma}")
    p = profile.probs
    return AttributeProfile(p + p ** gamma * (1.0 - p))


@dataclass
class SprinkleReport:
    n: int
    gamma: float
    largest_before: float
    largest_after: float
    c_before: float
    c_after: float
    zeta_before: float
    zeta_after: float
    sum_sq_before: float
    sum_sq_after: float
    sprinkle_diag: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def sprinkle_demo(n: int, profile: AttributeProfile, gamma: float, seed: int = 0) -> SprinkleReport:
    """Overlay an independent p_w ** gamma layer and compare largest components.

    ``sprinkle_diag`` is n^2 * sum_w p_w^(2 gamma); the merging argument needs
    it to grow without bound.
    """
    merged = sprinkle_profile(profile, gamma)
    hat = AttributeProfile(profile.probs ** gamma)
    base_inc = sample(n, profile, derive_seed(seed, "sprinkle-base"))
    hat_inc = sample(n, hat, derive_seed(seed, "sprinkle-hat"))
    before = components(build_intersection(base_inc, 1))
    after = components(build_intersection(base_inc.union(hat_inc), 1))
    st0, st1 = validate_profile(profile, n), validate_profile(merged, n)
    p = profile.probs
    return SprinkleReport(
        n=n, gamma=gamma,
        largest_before=before.largest_fraction,
        largest_after=after.largest_fraction,
        c_before=st0.c, c_after=st1.c,
        zeta_before=analysis.solve_zeta(st0.c).zeta if st0.c > 0 else 0.0,
        zeta_after=analysis.solve_zeta(st1.c).zeta if st1.c > 0 else 0.0,
        sum_sq_before=st0.c / n, sum_sq_after=st1.c / n,
        sprinkle_diag=n * n * math.fsum((p ** (2 * gamma)).tolist()),
    )


def metadata() -> dict:
    return {"rng": ALGORITHM, "schema": SCHEMA}
