"""Attachment-probability profiles and threshold diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import ProfileRangeError, RangeError, SizeError

CRITICAL_TOL = 1e-9


@dataclass(frozen=True)
class AttributeProfile:
    """Vector of attachment probabilities p_w, one entry per attribute."""

    probs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.array(self.probs, dtype=np.float64).reshape(-1)
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)
        if arr.size and not (np.all(arr > 0.0) and np.all(arr < 1.0)):
            bad = arr[~((arr > 0.0) & (arr < 1.0))]
            raise ProfileRangeError(
                f"attachment probabilities must lie in (0, 1); got {bad[:5].tolist()}"
            )

    @property
    def m(self) -> int:
        return int(self.probs.size)

    @property
    def q(self) -> np.ndarray:
        return 1.0 - self.probs

    def is_uniform(self) -> bool:
        return self.m == 0 or bool(np.all(self.probs == self.probs[0]))

    def __len__(self) -> int:
        return self.m

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AttributeProfile):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())

    def __repr__(self) -> str:
        return f"AttributeProfile(m={self.m})"


@dataclass(frozen=True)
class RigConfig:
    n: int
    profile: AttributeProfile
    s: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if int(self.n) < 1:
            raise SizeError(f"n must be >= 1, got {self.n}")
        if int(self.s) < 1:
            raise SizeError(f"s must be >= 1, got {self.s}")
        if not 0 <= int(self.seed) < 2**64:
            raise RangeError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class ThresholdStat:
    c: float
    cube_diag: float
    max_diag: float
    regime: str


def classify(c: float, tol: float = CRITICAL_TOL) -> str:
    if abs(c - 1.0) <= tol:
        return "critical"
    return "subcritical" if c < 1.0 else "supercritical"


def validate_profile(profile: AttributeProfile, n: int) -> ThresholdStat:
    """Threshold statistic c = n * sum p_w^2 plus the regularity diagnostics.

    Sums use ``math.fsum`` so c keeps full precision for m up to 1e6 tiny entries.
    """
    if int(n) < 1:
        raise SizeError(f"n must be >= 1, got {n}")
    p = np.asarray(profile.probs, dtype=np.float64)
    if p.size and not (np.all(p > 0.0) and np.all(p < 1.0)):
        raise ProfileRangeError("attachment probabilities must lie in (0, 1)")
    sq = math.fsum((p * p).tolist())
    cube = math.fsum((p * p * p).tolist())
    c = n * sq
    return ThresholdStat(
        c=c,
        cube_diag=n * n * cube,
        max_diag=n * float(p.max()) if p.size else 0.0,
        regime=classify(c),
    )


def make_uniform_profile(n: int, m: int, c_target: float) -> AttributeProfile:
    if n < 1 or m < 1:
        raise SizeError("n and m must be positive")
    if not c_target > 0:
        raise RangeError(f"c_target must be positive, got {c_target}")
    p = math.sqrt(c_target / (n * m))
    if not 0.0 < p < 1.0:
        raise RangeError(f"uniform probability {p} falls outside (0, 1)")
    return AttributeProfile(np.full(m, p))


def _shape_base(m: int, shape: str, params: Mapping[str, float]) -> np.ndarray:
    if shape == "uniform":
        return np.ones(m)
    if shape == "geometric":
        ratio = float(params.get("ratio", 0.5))
        if not 0.0 < ratio <= 1.0:
            raise RangeError(f"geometric ratio must lie in (0, 1], got {ratio}")
        # squared entries decay geometrically with the given ratio
        return np.sqrt(ratio) ** np.arange(m)
    if shape == "two-level":
        fraction = float(params.get("fraction", 0.5))
        ratio = float(params.get("ratio", 0.5))
        if not 0.0 < fraction < 1.0:
            raise RangeError(f"two-level fraction must lie in (0, 1), got {fraction}")
        if not 0.0 < ratio <= 1.0:
            raise RangeError(f"two-level ratio must lie in (0, 1], got {ratio}")
        base = np.full(m, ratio)
        base[: int(round(fraction * m))] = 1.0
        return base
    raise RangeError(f"unknown profile shape {shape!r}")


def make_weighted_profile(
    n: int,
    m: int,
    c_target: float,
    shape: str = "uniform",
    **params: float,
) -> AttributeProfile:
    """Profile of the given shape rescaled so that n * sum p_w^2 == c_target.

    Shapes: ``uniform``; ``geometric`` (ratio): p_w proportional to ratio**(w/2);
    ``two-level`` (fraction, ratio): the first round(fraction*m) attributes sit
    at level 1, the rest at level ``ratio``, before rescaling.
    """
    if n < 1 or m < 1:
        raise SizeError("n and m must be positive")
    if not c_target > 0:
        raise RangeError(f"c_target must be positive, got {c_target}")
    if shape == "uniform":
        return make_uniform_profile(n, m, c_target)
    base = _shape_base(m, shape, params)
    scale = math.sqrt(c_target / (n * math.fsum((base * base).tolist())))
    p = scale * base
    if not np.all(p < 1.0):
        raise RangeError(f"rescaling pushes max entry to {p.max()} >= 1")
    return AttributeProfile(p)


def profile_from_config(cfg: Mapping[str, Any]) -> AttributeProfile:
    """Build a profile from the JSON config object.

    Accepts either an explicit ``"profile": [floats]`` array or the
    ``n, m, c, shape, shape_params`` description.
    """
    if "profile" in cfg:
        return AttributeProfile(np.asarray(cfg["profile"], dtype=np.float64))
    shape = cfg.get("shape", "uniform")
    params = dict(cfg.get("shape_params") or {})
    return make_weighted_profile(int(cfg["n"]), int(cfg["m"]), float(cfg["c"]), shape, **params)


def config_from_dict(cfg: Mapping[str, Any]) -> RigConfig:
    profile = profile_from_config(cfg)
    return RigConfig(
        n=int(cfg["n"]),
        profile=profile,
        s=int(cfg.get("s", 1)),
        seed=int(cfg.get("seed", 0)),
    )


def as_profile(p: AttributeProfile | Sequence[float] | np.ndarray) -> AttributeProfile:
    return p if isinstance(p, AttributeProfile) else AttributeProfile(np.asarray(p, dtype=np.float64))
