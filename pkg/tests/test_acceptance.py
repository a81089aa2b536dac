"""Exit criteria, one test per criterion, each reporting a PASS/FAIL line.

Statistical criteria (6, 7, 8) get one retry with an independent seed.
"""

import math
import time

import numpy as np
import pytest

from conftest import retry_once
from oracles import binom_pmf, brute_adjacency, random_instances, zeta_by_bisection
from rigsim.analysis import behrisch_bound, edge_probability, phi0_moments, solve_zeta
from rigsim.errors import TraceError
from rigsim.experiments import SweepSpec, dependence_demo, edge_frequency, surrogate_vs_faithful, sweep
from rigsim.genbip import sample
from rigsim.graph import build_intersection, components, explore_faithful
from rigsim.model import AttributeProfile, make_uniform_profile, make_weighted_profile
from rigsim.rng import stream
from rigsim.stats import chi_square_pmf
from rigsim.surrogate import thinning_sampler

N_BIG = 5000


@pytest.fixture(scope="module")
def battery():
    out = []
    for n, prof, seed in random_instances(200, 20261016):
        out.append((n, prof, sample(n, prof, seed)))
    return out


def test_c1_exploration_equals_component_size(battery, report):
    t0 = time.perf_counter()
    checked = mismatches = 0
    for n, prof, inc in battery:
        cs = components(build_intersection(inc, 1))
        for v0 in range(n):
            checked += 1
            if explore_faithful(inc, v0, prof).stop_time != cs.size_of(v0):
                mismatches += 1
    dt = time.perf_counter() - t0
    ok = mismatches == 0 and dt < 10
    report("1", ok, f"{checked} starts over 200 instances, {mismatches} mismatches, {dt:.2f}s (< 10s)")
    assert mismatches == 0
    assert dt < 10


def test_c2_intersection_equals_brute_force(battery, report):
    t0 = time.perf_counter()
    bad = 0
    for n, prof, inc in battery:
        for s in (1, 2, 3):
            if build_intersection(inc, s).adjacency != brute_adjacency(inc.node_attrs, s):
                bad += 1
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 30
    report("2", ok, f"600 (instance, s) pairs, {bad} mismatches, {dt:.2f}s (< 30s)")
    assert bad == 0
    assert dt < 30


def test_c3_fixed_point(report):
    cs = stream(3, "acceptance-c").uniform(1.0, 10.0, size=10_000)
    cs = np.where(cs == 1.0, 10.0, cs)  # (1, 10]
    worst_res = worst_dual = 0.0
    for c in cs:
        g = solve_zeta(float(c))
        worst_res = max(worst_res, abs(1 - math.exp(-c * g.zeta) - g.zeta))
        worst_dual = max(worst_dual, abs(g.rho - math.exp(c * (g.rho - 1))))
    oracle = zeta_by_bisection(2.0)
    z2 = solve_zeta(2.0).zeta
    ok = worst_res < 1e-12 and worst_dual < 1e-12 and abs(z2 - 0.7968121) <= 1e-6 and abs(z2 - oracle) <= 1e-6
    report("3", ok, f"max residual {worst_res:.1e}, max duality gap {worst_dual:.1e}, "
                    f"zeta(2) = {z2:.10f} (bisection {oracle:.10f})")
    assert worst_res < 1e-12 and worst_dual < 1e-12
    assert abs(z2 - 0.7968121) <= 1e-6 and abs(z2 - oracle) <= 1e-6


@pytest.fixture(scope="module")
def supercritical():
    t0 = time.perf_counter()
    rows = sweep(SweepSpec.grid([N_BIG], [N_BIG], [2.0], reps=20, seed=4, probe_traces=True))
    return rows[0], time.perf_counter() - t0


@pytest.fixture(scope="module")
def subcritical():
    t0 = time.perf_counter()
    rows = sweep(SweepSpec.grid([N_BIG], [N_BIG], [0.5], reps=20, seed=5, probe_traces=True))
    return rows[0], time.perf_counter() - t0


@pytest.fixture(scope="module")
def fidelity():
    prof = make_uniform_profile(40, 40, 1.5)
    attempts = []

    def trial(seed):
        t0 = time.perf_counter()
        try:
            rep = surrogate_vs_faithful(40, prof, reps=5000, seed=seed, check=True)
        except TraceError as exc:
            attempts.append((None, time.perf_counter() - t0, str(exc)))
            return False, None
        attempts.append((rep, time.perf_counter() - t0, ""))
        return rep.p_value > 0.01, rep.p_value

    ok, _ = retry_once(trial)
    return ok, attempts


def test_c4_supercritical_giant(supercritical, report):
    row, dt = supercritical
    target = solve_zeta(2.0).zeta
    cap = 10 * math.log(N_BIG)
    ok_mean = abs(row.mean_largest_frac - target) <= 0.03
    ok_second = row.status == "ok" and row.max_second <= cap
    ok = ok_mean and ok_second and dt < 60
    report("4", ok, f"mean largest fraction {row.mean_largest_frac:.4f} vs zeta_c {target:.4f} (tol 0.03); "
                    f"max second {row.max_second} <= {cap:.1f}; {dt:.1f}s (< 60s)")
    assert row.status == "ok"
    assert row.max_second <= cap
    assert dt < 60
    assert abs(row.mean_largest_frac - target) <= 0.03


def test_c5_subcritical_small_components(subcritical, report):
    row, dt = subcritical
    bound = behrisch_bound(0.5, N_BIG)
    ok = row.status == "ok" and row.max_largest <= bound and dt < 30
    report("5", ok, f"max component {row.max_largest} <= {bound:.1f} over 20 reps; {dt:.1f}s (< 30s)")
    assert row.status == "ok"
    assert max(row.largest) <= bound
    assert dt < 30


def test_c6_surrogate_fidelity(fidelity, report):
    ok, attempts = fidelity
    desc = "; ".join(
        f"KS D={a.statistic:.4f} p={a.p_value:.3f} in {dt:.1f}s" if a else f"trace error: {err}"
        for a, dt, err in attempts)
    slow = any(dt >= 60 for _, dt, _ in attempts)
    report("6", ok and not slow, f"{desc} (p > 0.01, < 60s each)")
    assert ok
    assert not slow


@pytest.mark.parametrize("m,nu1,nu2", [(2, 0.5, 0.5), (10, 0.3, 0.7), (50, 0.9, 0.1)])
def test_c7_thinning_law(m, nu1, nu2, report):
    def trial(seed):
        l1, l2 = thinning_sampler(m, nu1, nu2, stream(seed, "acceptance-thin", m), size=100_000)
        p_kept = chi_square_pmf(l2, binom_pmf(m, nu1 * nu2)).p_value
        p_lost = chi_square_pmf(l1 - l2, binom_pmf(m, nu1 * (1 - nu2))).p_value
        return min(p_kept, p_lost) > 0.01, (p_kept, p_lost)

    ok, res = retry_once(trial)
    report(f"7 (m={m}, nu1={nu1}, nu2={nu2})", ok,
           ", ".join(f"p(L2)={a:.3f} p(L1-L2)={b:.3f}" for a, b in res))
    assert ok, res


def test_c8_edge_probability_and_dependence(report):
    prof = make_weighted_profile(10, 6, 0.5, "geometric", ratio=0.6)

    def trial(seed):
        rep = edge_frequency(prof, 100_000, seed=seed, confidence=0.99)
        return rep.inside, rep

    ok_edge, reps = retry_once(trial)
    dep = dependence_demo(AttributeProfile([0.5]), 100_000, seed=8)
    ok_dep = abs(dep.joint - 0.125) < 4 * math.sqrt(0.125 * 0.875 / 1e5) and \
        abs(dep.product - 0.0625) < 0.005 and dep.z > 10
    last = reps[-1]
    report("8", ok_edge and ok_dep,
           f"edge frequency {last.hits / last.trials:.5f}, 99% CI [{last.interval[0]:.5f}, {last.interval[1]:.5f}] "
           f"vs {edge_probability(prof):.5f}; joint {dep.joint:.4f} product {dep.product:.4f} z={dep.z:.1f}")
    assert ok_edge
    assert ok_dep


def test_c9_phi0_moments(report):
    profiles = [
        AttributeProfile([0.5]),
        make_weighted_profile(20, 30, 1.5, "geometric", ratio=0.8),
        make_weighted_profile(10, 12, 2.0, "two-level", fraction=0.25, ratio=0.3),
    ]
    lines, ok = [], True
    for i, prof in enumerate(profiles):
        p = prof.probs
        held = stream(9, "acceptance-phi0", i).random((100_000, p.size)) < p
        phi = np.exp(held.astype(np.float64) @ np.log1p(-p))
        mo = phi0_moments(prof)
        z1 = (phi.mean() - mo.mean) / (phi.std(ddof=1) / math.sqrt(phi.size))
        sq = phi * phi
        z2 = (sq.mean() - mo.second_moment) / (sq.std(ddof=1) / math.sqrt(sq.size))
        ok &= abs(z1) < 4 and abs(z2) < 4
        lines.append(f"profile {i}: z(mean)={z1:+.2f} z(second)={z2:+.2f}")
    report("9", ok, "; ".join(lines) + " (|z| < 4)")
    assert ok


def test_c10_trace_identities(supercritical, subcritical, fidelity, report):
    (sup, _), (sub, _) = supercritical, subcritical
    ok6, attempts = fidelity
    trace_errors = [err for _, _, err in attempts if err]
    # sweep rows turn a TraceError into a failed status
    statuses = [sup.status, sub.status]
    n_traces = sup.traces_checked + sub.traces_checked + sum(a.traces_checked for a, _, _ in attempts if a)
    ok = not trace_errors and statuses == ["ok", "ok"] and n_traces > 0
    report("10", ok, f"{n_traces} traces checked (integer identities exact, float identities 1e-9); "
                     f"errors: {trace_errors or 'none'}")
    assert ok
