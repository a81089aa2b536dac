"""Two-sample KS, chi-square goodness of fit and Wilson intervals.

p-values come from the asymptotic distributions (Kolmogorov and chi-square)
and are approximations; for discrete data the KS p-value is conservative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .errors import InputError


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    dof: int | None = None

    def __iter__(self):
        return iter((self.statistic, self.p_value))


def ecdf_distance(a, b) -> float:
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_two_sample(a, b) -> TestResult:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.size == 0 or b.size == 0:
        raise InputError("KS test needs two nonempty samples")
    d = ecdf_distance(a, b)
    en = math.sqrt(a.size * b.size / (a.size + b.size))
    # Stephens' small-sample correction to the Kolmogorov limit
    p = float(sps.kstwobign.sf((en + 0.12 + 0.11 / en) * d)) if d > 0 else 1.0
    return TestResult(d, min(max(p, 0.0), 1.0))


def merge_small_bins(observed, expected, min_expected: float = 5.0):
    """Merge adjacent bins left to right until each expected count >= min_expected."""
    obs_out, exp_out = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(observed, expected):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            obs_out.append(o_acc)
            exp_out.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if exp_out:
            obs_out[-1] += o_acc
            exp_out[-1] += e_acc
        else:
            obs_out.append(o_acc)
            exp_out.append(e_acc)
    return np.asarray(obs_out), np.asarray(exp_out)


def chi_square(observed, expected, min_expected: float = 5.0, ddof: int = 0) -> TestResult:
    """Pearson goodness of fit; ``expected`` is rescaled to the observed total."""
    obs = np.asarray(observed, dtype=np.float64)
    exp = np.asarray(expected, dtype=np.float64)
    if obs.size == 0 or obs.shape != exp.shape:
        raise InputError("observed and expected must be nonempty and equal length")
    if obs.sum() <= 0 or exp.sum() <= 0:
        raise InputError("chi-square needs positive totals")
    exp = exp * (obs.sum() / exp.sum())
    obs, exp = merge_small_bins(obs, exp, min_expected)
    dof = obs.size - 1 - ddof
    if dof < 1:
        return TestResult(0.0, 1.0, 0)
    stat = float(np.sum((obs - exp) ** 2 / exp))
    return TestResult(stat, float(sps.chi2.sf(stat, dof)), dof)


def chi_square_pmf(samples, pmf) -> TestResult:
    """Goodness of fit of integer samples against a pmf on 0..len(pmf)-1.

    Samples beyond the support are pooled into the last bin.
    """
    pmf = np.asarray(pmf, dtype=np.float64)
    x = np.asarray(samples, dtype=np.int64)
    if x.size == 0:
        raise InputError("empty sample")
    counts = np.bincount(np.clip(x, 0, pmf.size - 1), minlength=pmf.size)
    return chi_square(counts, pmf * x.size)


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials <= 0:
        raise InputError("Wilson interval needs trials > 0")
    if not 0 <= successes <= trials:
        raise InputError("successes must lie in [0, trials]")
    z = float(sps.norm.ppf(0.5 + confidence / 2.0))
    phat = successes / trials
    denom = 1.0 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def binom_pmf(m: int, p: float) -> np.ndarray:
    return sps.binom.pmf(np.arange(m + 1), m, p)
