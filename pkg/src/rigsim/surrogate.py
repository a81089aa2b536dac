"""Count-level simulation of the exploration process.

No graph is built: the state is the step counter, the alive count, the set
of still-undiscovered attributes and the survival weight
phi = prod_{w discovered} (1 - p_w).  At each step every undiscovered
attribute is found independently with probability p_w, and the number of
neutral nodes that turn alive is binomial.

The trace records the unconditional rate r_t = phi_{t-1} - phi_t.  New alive
nodes are drawn from the N_t neutral nodes, which are known to miss every
previously discovered attribute; conditioned on that, each one is hit with
probability r_t / phi_{t-1} = 1 - phi_t / phi_{t-1}.  ``rate="conditional"``
(the default) draws Z_{t+1} ~ Bin(N_t, r_t / phi_{t-1}) and reproduces the
component-size law; ``rate="unconditional"`` draws Bin(N_t, r_t) literally and
undercounts growth once phi has moved away from 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import RangeError, StateError
from .graph import ExplorationTrace
from .model import AttributeProfile
from .rng import stream

RATE_MODES = ("conditional", "unconditional")


@dataclass
class SurrogateState:
    n: int
    t: int = 0
    y: int = 1
    phi: float = 1.0
    undiscovered: np.ndarray = field(default=None, repr=False)  # attribute indices

    @property
    def neutral(self) -> int:
        return self.n - self.t - self.y


@dataclass
class StepResult:
    state: SurrogateState
    z: int
    r: float
    new_attrs: np.ndarray


class Surrogate:
    """Stepper bound to one profile.

    For uniform profiles discoveries are sampled as a Binomial count followed
    by a uniform subset (``fast_uniform``); otherwise each undiscovered
    attribute is tested individually.  Both paths give the same law.
    """

    def __init__(self, n: int, profile: AttributeProfile, rate: str = "conditional",
                 fast_uniform: bool | None = None):
        if rate not in RATE_MODES:
            raise RangeError(f"rate must be one of {RATE_MODES}")
        self.n = int(n)
        self.profile = profile
        self.p = profile.probs
        self.logq = np.log1p(-self.p)
        self.rate = rate
        uniform = profile.is_uniform() and profile.m > 0
        self.fast_uniform = uniform if fast_uniform is None else (fast_uniform and uniform)

    def initial(self) -> SurrogateState:
        return SurrogateState(n=self.n, undiscovered=np.arange(self.profile.m, dtype=np.int64))

    def _discover(self, und: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        if und.size == 0:
            return und, und
        if self.fast_uniform:
            k = int(rng.binomial(und.size, self.p[0]))
            if k == 0:
                return und[:0], und
            pick = rng.choice(und.size, size=k, replace=False, shuffle=False)
            mask = np.zeros(und.size, dtype=bool)
            mask[pick] = True
        else:
            mask = rng.random(und.size) < self.p[und]
        return und[mask], und[~mask]

    def step(self, state: SurrogateState, rng: np.random.Generator) -> StepResult:
        if state.y <= 0:
            raise StateError("step() called on a finished process (Y = 0)")
        new, rest = self._discover(state.undiscovered, rng)
        log_ratio = math.fsum(self.logq[new].tolist()) if new.size else 0.0
        phi_new = state.phi * math.exp(log_ratio)
        r = state.phi - phi_new
        if self.rate == "conditional":
            hit = -math.expm1(log_ratio)
        else:
            hit = r
        z = int(rng.binomial(state.neutral, min(max(hit, 0.0), 1.0)))
        nxt = SurrogateState(n=state.n, t=state.t + 1, y=state.y + z - 1,
                             phi=phi_new, undiscovered=rest)
        return StepResult(nxt, z, r, new)


def step(state: SurrogateState, profile: AttributeProfile, rng: np.random.Generator,
         rate: str = "conditional") -> StepResult:
    return Surrogate(state.n, profile, rate=rate).step(state, rng)


def run_surrogate(
    n: int,
    profile: AttributeProfile,
    seed: int = 0,
    index: int = 0,
    rate: str = "conditional",
    fast_uniform: bool | None = None,
) -> ExplorationTrace:
    """One surrogate exploration on stream (seed, "surrogate", index).

    Runs until the alive count reaches zero.  Since N_t = n - t - Y_t never
    goes negative this happens by t = n at the latest, so a run that would
    hit the t = n - 1 cap with Y > 0 ends with stop_time = n.
    """
    sim = Surrogate(n, profile, rate=rate, fast_uniform=fast_uniform)
    rng = stream(seed, "surrogate", index)
    state = sim.initial()
    y, z, r, phi, wcum, new_log = [1], [], [], [], [], []
    found = 0
    while state.y > 0:
        res = sim.step(state, rng)
        state = res.state
        found += res.new_attrs.size
        y.append(state.y)
        z.append(res.z)
        r.append(res.r)
        phi.append(state.phi)
        wcum.append(found)
        new_log.append(res.new_attrs)
    return ExplorationTrace(-1, n, y, z, r, phi, wcum, state.t, new_log)


def stop_times(n: int, profile: AttributeProfile, reps: int, seed: int = 0,
               rate: str = "conditional") -> np.ndarray:
    sim = Surrogate(n, profile, rate=rate)
    out = np.empty(reps, dtype=np.int64)
    for i in range(reps):
        rng = stream(seed, "surrogate", i)
        state = sim.initial()
        while state.y > 0:
            state = sim.step(state, rng).state
        out[i] = state.t
    return out


def marginal_alive_law(trace: ExplorationTrace, t: int) -> tuple[int, float]:
    """Parameters (n - 1, 1 - prod_{tau<t} (1 - r_tau)) of the law of Y_t + t - 1."""
    if not 1 <= t <= len(trace.r):
        raise RangeError(f"t must lie in [1, {len(trace.r)}], got {t}")
    r = np.asarray(trace.r[:t], dtype=np.float64)
    return trace.n - 1, float(-np.expm1(np.sum(np.log1p(-r))))


def thinning_sampler(m_trials: int, nu1: float, nu2: float,
                     rng: np.random.Generator, size: int | None = None):
    """Two-stage binomial: L1 ~ Bin(m, nu1), then L2 | L1 ~ Bin(L1, nu2)."""
    for nu in (nu1, nu2):
        if not 0.0 <= nu <= 1.0:
            raise RangeError(f"probabilities must lie in [0, 1], got {nu}")
    if m_trials < 0:
        raise RangeError("m_trials must be non-negative")
    lam1 = rng.binomial(m_trials, nu1, size=size)
    lam2 = rng.binomial(lam1, nu2)
    return lam1, lam2
