"""Closed-form quantities: survival weights, edge probability, giant fixed point."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .errors import DomainError, EnumerationBudgetError, RangeError
from .model import AttributeProfile
from .rng import stream

ZETA_TOL = 1e-12
EXACT_ENUM_MAX_M = 20


def _log_prod(factors_log: np.ndarray) -> float:
    return math.fsum(np.asarray(factors_log, dtype=np.float64).tolist())


def expected_phi(profile: AttributeProfile, t: int) -> float:
    """E[phi_t] = prod_w (1 - p_w (1 - (1 - p_w)^(t+1)))."""
    if t < 0 or int(t) != t:
        raise RangeError(f"t must be a non-negative integer, got {t}")
    p = profile.probs
    if p.size == 0:
        return 1.0
    # 1 - (1-p)^(t+1) via expm1/log1p keeps precision for tiny p
    found = -np.expm1((t + 1) * np.log1p(-p))
    return math.exp(_log_prod(np.log1p(-p * found)))


@dataclass(frozen=True)
class Phi0Moments:
    mean: float
    second_moment: float
    variance: float


def phi0_moments(profile: AttributeProfile) -> Phi0Moments:
    p = profile.probs
    mean = math.exp(_log_prod(np.log1p(-p * p)))
    second = math.exp(_log_prod(np.log1p(-2 * p * p + p ** 3)))
    return Phi0Moments(mean, second, max(second - mean * mean, 0.0))


def edge_probability(profile: AttributeProfile) -> float:
    """P[u ~ v] = 1 - prod_w (1 - p_w^2)."""
    p = profile.probs
    return -math.expm1(_log_prod(np.log1p(-p * p)))


@dataclass(frozen=True)
class PairDependence:
    joint: float
    product: float
    method: str


def _joint_exact(p: np.ndarray) -> float:
    m = p.size
    if m == 0:
        return 0.0
    masks = np.arange(1 << m, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(m)) & 1).astype(bool)
    logp, logq = np.log(p), np.log1p(-p)
    # P[W(v_k) = A] and prod_{a in A} q_a for every subset A
    log_prob = np.where(bits, logp, logq).sum(axis=1)
    miss = np.exp(np.where(bits, logq, 0.0).sum(axis=1))
    return float(np.sum(np.exp(log_prob) * (1.0 - miss) ** 2))


def pair_dependence(
    profile: AttributeProfile,
    method: str = "auto",
    reps: int = 100_000,
    seed: int = 0,
) -> PairDependence:
    """Joint P[v_i ~ v_k, v_j ~ v_k] versus the product of the marginals.

    Given W(v_k) the two events are independent, each with probability
    1 - prod_{a in W(v_k)} q_a, so the joint is the second moment of that
    quantity.  ``exact`` enumerates all subsets (m <= 20); ``mc`` averages over
    ``reps`` sampled sets; ``auto`` picks exact whenever allowed.
    """
    p = profile.probs
    if method == "auto":
        method = "exact" if p.size <= EXACT_ENUM_MAX_M else "mc"
    if method == "exact":
        if p.size > EXACT_ENUM_MAX_M:
            raise EnumerationBudgetError(f"exact enumeration needs m <= {EXACT_ENUM_MAX_M}, got {p.size}")
        joint = _joint_exact(p)
    elif method == "mc":
        rng = stream(seed, "pairdep")
        logq = np.log1p(-p)
        acc = 0.0
        done = 0
        while done < reps:
            b = min(reps - done, max(1, 2_000_000 // max(p.size, 1)))
            held = rng.random((b, p.size)) < p
            miss = np.exp(held.astype(np.float64) @ logq)
            acc += float(np.sum((1.0 - miss) ** 2))
            done += b
        joint = acc / reps
    else:
        raise RangeError(f"unknown method {method!r}")
    return PairDependence(joint, edge_probability(profile) ** 2, method)


@dataclass(frozen=True)
class GiantPrediction:
    c: float
    zeta: float
    predicted_size: float
    clt_var: float
    rho: float

    def to_dict(self) -> dict:
        return asdict(self)


def _zeta_root(c: float) -> float:
    """Root in (0, 1) of F(z) = 1 - exp(-c z) - z for c > 1.

    Newton from 1 - exp(-c), falling back to bisection whenever a step leaves
    the current bracket.  F > 0 left of the root and F < 0 right of it.
    """
    lo, hi = 1e-16, 1.0 - 1e-16
    f = lambda z: -math.expm1(-c * z) - z
    if f(lo) <= 0.0:
        # c so close to 1 that the root is below double resolution
        return 0.0
    z = -math.expm1(-c)
    for _ in range(200):
        fz = f(z)
        if fz == 0.0:
            return z
        if fz > 0:
            lo = z
        else:
            hi = z
        d = c * math.exp(-c * z) - 1.0
        nz = z - fz / d if d != 0.0 else lo - 1.0
        if not lo < nz < hi:
            nz = 0.5 * (lo + hi)
        if abs(nz - z) <= 4e-16 * z:
            return nz
        z = nz
    return z


def solve_zeta(c: float, n: int | None = None) -> GiantPrediction:
    """Giant-component fraction zeta_c with 1 - exp(-c zeta) = zeta.

    zeta = 0 for c <= 1.  ``predicted_size`` is n * zeta when n is given,
    otherwise zeta itself (size per node).
    """
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    # root rounds to 1.0 for c >~ 37; keep it inside (0, 1)
    zeta = min(_zeta_root(c), 1.0 - 2.0**-53) if c > 1.0 else 0.0
    denom = (1.0 - c + c * zeta) ** 2
    num = zeta * (1.0 - zeta)
    clt_var = num / denom if num > 0 else 0.0
    size = zeta * n if n is not None else zeta
    return GiantPrediction(c=c, zeta=zeta, predicted_size=size, clt_var=clt_var, rho=1.0 - zeta)


def zeta_bisection(c: float, tol: float = 1e-14) -> float:
    """Plain bisection for the same root; kept as a slow independent route."""
    if c <= 1.0:
        return 0.0
    lo, hi = 1e-12, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if 1.0 - math.exp(-c * mid) - mid > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ErBracket:
    c_minus: float
    c_plus: float

    def rates(self, n: int) -> tuple[float, float]:
        """Erdos-Renyi edge probabilities c-/n and c+/n."""
        return self.c_minus / n, self.c_plus / n

    def __iter__(self):
        return iter((self.c_minus, self.c_plus))


def er_bracket(c: float, delta: float) -> ErBracket:
    if not c > 1.0:
        raise DomainError(f"bracketing needs c > 1, got {c}")
    if not 0.0 < delta < c - 1.0:
        raise DomainError(f"delta must lie in (0, c - 1), got {delta}")
    lo = c * (1.0 - delta)
    if not lo > 1.0:
        raise DomainError(f"lower bracket c(1 - delta) = {lo} is not supercritical")
    return ErBracket(lo, c * (1.0 + delta))


def behrisch_bound(c: float, n: int) -> float:
    """Largest-component envelope 9 / (1 - c^2) * ln n for subcritical c."""
    if not 0.0 < c < 1.0:
        raise DomainError(f"bound needs 0 < c < 1, got {c}")
    if n < 2:
        raise DomainError(f"bound needs n >= 2, got {n}")
    if c > 1.0 - 1e-9:
        return math.inf
    return 9.0 / (1.0 - c * c) * math.log(n)


def two_type_zeta(c: float, n: int, m: int) -> float:
    """Survival probability of the node-attribute branching process, uniform p.

    A node holds Poisson(m p) attributes and each attribute reaches
    Poisson(n p) further nodes, with p = sqrt(c / (n m)).  The largest
    component fraction of a uniform intersection graph tends to this value;
    it coincides with ``solve_zeta(c).zeta`` only as m / n grows.
    """
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    mu, nu = math.sqrt(c * m / n), math.sqrt(c * n / m)
    f = lambda z: -math.expm1(-mu * -math.expm1(-nu * z)) - z
    if c <= 1.0 or f(1e-12) <= 0.0:
        return 0.0
    lo, hi = 1e-12, 1.0
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
