import numpy as np
import pytest
from scipy import stats as sps

from oracles import binom_pmf
from rigsim.errors import InputError
from rigsim.rng import stream
from rigsim.stats import chi_square, chi_square_pmf, ks_two_sample, merge_small_bins, wilson_interval
from rigsim.surrogate import thinning_sampler


def test_ks_identical_samples():
    x = [1, 2, 2, 5, 7]
    res = ks_two_sample(x, x)
    assert res.statistic == 0.0 and res.p_value == 1.0


def test_ks_statistic_matches_scipy():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a = rng.poisson(3, size=rng.integers(5, 400))
        b = rng.poisson(3.3, size=rng.integers(5, 400))
        assert ks_two_sample(a, b).statistic == pytest.approx(sps.ks_2samp(a, b).statistic, abs=1e-14)


def test_ks_pvalue_close_to_scipy_asymptotic():
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=3000), rng.normal(0.05, size=3000)
    ours = ks_two_sample(a, b).p_value
    ref = sps.ks_2samp(a, b, method="asymp").pvalue
    assert ours == pytest.approx(ref, rel=0.1)


def test_ks_empty():
    with pytest.raises(InputError):
        ks_two_sample([], [1])


def test_wilson_symmetric():
    lo, hi = wilson_interval(50, 100, 0.99)
    assert lo < 0.5 < hi
    assert 0.5 - lo == pytest.approx(hi - 0.5)


def test_wilson_edges():
    lo, hi = wilson_interval(0, 20, 0.95)
    assert lo == 0.0 and 0 < hi < 0.2
    with pytest.raises(InputError):
        wilson_interval(3, 0)


def test_chi_square_matches_scipy_when_no_merge():
    obs = np.array([30, 50, 20])
    exp = np.array([25.0, 50.0, 25.0])
    res = chi_square(obs, exp)
    ref = sps.chisquare(obs, exp)
    assert res.statistic == pytest.approx(ref.statistic)
    assert res.p_value == pytest.approx(ref.pvalue)


def test_bin_merging():
    obs, exp = merge_small_bins([1, 2, 10, 1], [2.0, 3.0, 10.0, 1.0])
    assert obs.tolist() == [3, 11] and exp.tolist() == [5.0, 11.0]


def test_chi_square_thinning_against_exact_pmf():
    _, l2 = thinning_sampler(2, 0.5, 0.5, stream(77, "thin-stats"), size=100_000)
    assert chi_square_pmf(l2, binom_pmf(2, 0.25)).p_value > 0.01


def test_chi_square_detects_wrong_law():
    x = stream(1, "wrong").binomial(10, 0.3, size=20_000)
    assert chi_square_pmf(x, binom_pmf(10, 0.35)).p_value < 1e-6
