import math

import numpy as np
import pytest

from rigsim.analysis import behrisch_bound, solve_zeta
from rigsim.errors import DomainError, InputError
from rigsim.experiments import (
    Cell,
    SweepSpec,
    dependence_demo,
    edge_frequency,
    sprinkle_demo,
    sprinkle_profile,
    surrogate_vs_faithful,
    sweep,
    sweep_csv,
)
from rigsim.model import AttributeProfile, make_uniform_profile, validate_profile


def test_single_rep_shape():
    rows = sweep(SweepSpec((Cell(10, 10, 1.5),), reps=1, seed=3))
    assert len(rows) == 1
    frac = rows[0].mean_largest_frac
    assert frac in [k / 10 for k in range(1, 11)]


def test_sweep_csv_deterministic_modulo_wall_time():
    spec = SweepSpec.grid([200], [150], [0.5, 2.0], ["uniform", "geometric"], reps=3, seed=11)
    a = sweep_csv(sweep(spec), wall_time=False)
    b = sweep_csv(sweep(spec), wall_time=False)
    assert a == b
    lines = a.splitlines()
    assert lines[0] == "schema=rigsweep.v1"
    assert lines[1].startswith("n,m,c,shape,s,reps,mean_largest_frac,std_largest_frac,mean_second,zeta_pred,seed")
    assert len(lines) == 2 + 4


def test_sweep_parallel_matches_serial():
    spec = SweepSpec.grid([150], [150], [1.5], reps=4, seed=2)
    a = sweep_csv(sweep(spec, workers=1), wall_time=False)
    b = sweep_csv(sweep(spec, workers=2), wall_time=False)
    assert a == b


def test_sweep_marks_failed_cell():
    # the first cell's single attribute clique (~170 holders) exceeds the budget
    spec = SweepSpec((Cell(200, 1, 150.0), Cell(50, 50, 1.5)), reps=2, work_budget=10_000)
    rows = sweep(spec)
    assert rows[0].status == "failed: WorkBudgetError"
    assert rows[1].status == "ok"
    assert "failed: WorkBudgetError" in sweep_csv(rows)


def test_sweep_from_dict():
    spec = SweepSpec.from_dict({"n": [100], "m": 100, "c": [0.5, 1.5], "reps": 2, "seed": 4})
    assert len(spec.cells) == 2 and spec.reps == 2
    spec = SweepSpec.from_dict({"cells": [{"n": 50, "m": 20, "c": 1.2, "shape": "two-level",
                                           "shape_params": {"fraction": 0.5, "ratio": 0.5}}]})
    assert spec.cells[0].shape_label == "two-level(fraction=0.5,ratio=0.5)"
    with pytest.raises(InputError):
        SweepSpec((Cell(10, 10, 1.0),), reps=0)


def test_cross_regime_monotone():
    cs = [0.5, 0.8, 1.2, 1.5, 2.0]
    rows = sweep(SweepSpec.grid([1000], [1000], cs, reps=6, seed=8))
    fracs = [r.mean_largest_frac for r in rows]
    assert all(b >= a for a, b in zip(fracs, fracs[1:])), fracs


def test_supercritical_second_component_small():
    rows = sweep(SweepSpec.grid([2000], [2000], [2.0], reps=5, seed=12))
    assert rows[0].max_second <= 10 * math.log(2000)


def test_sweep_probe_traces():
    rows = sweep(SweepSpec.grid([300], [300], [2.0], reps=3, seed=1, probe_traces=True))
    assert rows[0].traces_checked == 3


def test_surrogate_vs_faithful_degenerate():
    rep = surrogate_vs_faithful(1, make_uniform_profile(1, 3, 0.5), reps=50)
    assert rep.statistic == 0.0 and set(rep.surrogate) == {1} and set(rep.faithful) == {1}
    rep = surrogate_vs_faithful(10, AttributeProfile([]), reps=50)
    assert rep.statistic == 0.0 and set(rep.faithful) == {1}
    d = rep.to_dict()
    assert d["surrogate_ecdf"] == {"x": [1], "F": [1.0]}


def test_literal_rate_is_rejected():
    # drawing Bin(N_t, phi_{t-1} - phi_t) without conditioning undercounts growth
    prof = make_uniform_profile(40, 40, 1.5)
    rep = surrogate_vs_faithful(40, prof, reps=3000, seed=5, rate="unconditional")
    assert rep.p_value < 1e-4
    assert rep.surrogate.mean() < rep.faithful.mean()


def test_dependence_demo_empty_profile():
    rep = dependence_demo(AttributeProfile([]), reps=1000)
    assert rep.joint == 0 and rep.product == 0 and rep.z == 0
    assert rep.exact_joint == 0 and rep.exact_product == 0


@pytest.mark.parametrize("c", [0.5, 2.0, 8.0])
def test_dependence_demo_jensen(c):
    prof = make_uniform_profile(20, 15, c)
    rep = dependence_demo(prof, reps=50_000, seed=3)
    assert rep.joint >= rep.product - 4 * rep.se
    assert rep.exact_joint >= rep.exact_product


def test_edge_frequency():
    rep = edge_frequency(AttributeProfile([0.3, 0.2, 0.1]), 50_000, seed=1)
    assert rep.inside
    assert rep.predicted == pytest.approx(1 - 0.91 * 0.96 * 0.99)


def test_sprinkle_profile_examples():
    assert sprinkle_profile(AttributeProfile([0.5]), 2).probs[0] == pytest.approx(0.625)
    p = np.array([0.5, 0.2, 1e-3])
    assert np.allclose(sprinkle_profile(AttributeProfile(p), 50).probs, p, atol=1e-12, rtol=0)
    with pytest.raises(DomainError):
        sprinkle_profile(AttributeProfile([0.5]), 1.0)


def test_sprinkle_profile_small_change():
    prof = make_uniform_profile(5000, 5000, 2.0)
    p = prof.probs[0]
    # by hand: n * m * (p + p^1.5 (1 - p))^2 = 2 (1 + sqrt(p) (1 - p))^2
    c15 = validate_profile(sprinkle_profile(prof, 1.5), 5000).c
    assert c15 == pytest.approx(2.0 * (1 + math.sqrt(p) * (1 - p)) ** 2, rel=1e-12)
    assert c15 == pytest.approx(2.0678, abs=1e-4)
    # the relative change only drops under 1% once p^(gamma-1) < ~0.005
    assert abs(validate_profile(sprinkle_profile(prof, 1.7), 5000).c - 2.0) < 0.01 * 2.0


def test_sprinkle_entries_bounds():
    p = np.random.default_rng(0).uniform(1e-6, 0.999, 1000)
    new = sprinkle_profile(AttributeProfile(p), 1.7).probs
    assert np.all(new >= p) and np.all(new < 1)


def test_sprinkle_demo_monotone():
    prof = make_uniform_profile(500, 500, 1.5)
    rep = sprinkle_demo(500, prof, 1.3, seed=4)
    assert rep.largest_after >= rep.largest_before
    assert rep.c_after > rep.c_before
    assert rep.sprinkle_diag == pytest.approx(500**2 * 500 * prof.probs[0] ** 2.6)


def test_sprinkle_negligible_at_large_gamma():
    prof = make_uniform_profile(1000, 1000, 2.0)
    diffs = [sprinkle_demo(1000, prof, 50, seed=s).largest_after
             - sprinkle_demo(1000, prof, 50, seed=s).largest_before for s in range(5)]
    assert np.mean(diffs) < 0.01


def test_uniform_m_equals_n_follows_two_type_law():
    # with m = n every attribute clique carries ~sqrt(c) nodes, so the giant
    # tracks the node-attribute branching process rather than zeta_c
    from rigsim.analysis import two_type_zeta

    rows = sweep(SweepSpec.grid([3000], [3000], [2.0], reps=10, seed=21))
    assert rows[0].mean_largest_frac == pytest.approx(two_type_zeta(2.0, 3000, 3000), abs=0.03)
    assert rows[0].mean_largest_frac < solve_zeta(2.0).zeta - 0.2
