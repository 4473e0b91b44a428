"""Control-authority arbitration between human and autonomous wrench commands.

The authority signal lambda in [0, 1] blends the human wrench u_h with the
autonomous wrench u_a: h = lambda*u_h + (1-lambda)*u_a. lambda = 0 leaves the
robot fully autonomous, lambda = 1 hands full control to the human. In
shared-control mode the operator sets lambda directly; in shared-autonomy
mode it is tuned from sensed guidance force and inferred operator intent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import TYPE_CHECKING, Optional, Sequence

from .errors import DimensionError

if TYPE_CHECKING:
    from .knowledge import IntentEstimate

ControlInput = tuple[float, ...]

AUTONOMY_BELOW = 0.05
MANUAL_ABOVE = 0.95


class Mode(str, Enum):
    AUTONOMY = "autonomy"
    BLENDED = "blended"
    MANUAL = "manual"


class ArbitrationSource(str, Enum):
    SHARED_CONTROL = "shared_control"
    SHARED_AUTONOMY = "shared_autonomy"


@dataclass(frozen=True)
class AutoTunePolicy:
    """Constants of the authority auto-tuning law (all config-exposed).

    raw = logistic(gain * (|F_h| - force_threshold)), floored at intent_floor
    when the operator's inferred intent requests guidance, then first-order
    filtered with time_constant.
    """

    force_threshold: float = 5.0  # N
    gain: float = 0.5  # 1/N
    time_constant: float = 0.3  # s
    intent_floor: float = 0.8

    def __post_init__(self):
        if not (self.time_constant > 0):
            raise ValueError("time_constant must be > 0")
        if self.gain < 0:
            raise ValueError("gain must be >= 0")
        if not (0.0 <= self.intent_floor <= 1.0):
            raise ValueError("intent_floor must be in [0, 1]")


@dataclass(frozen=True)
class ArbitrationState:
    lambda_: float = 0.0
    mode: Mode = Mode.AUTONOMY
    source: ArbitrationSource = ArbitrationSource.SHARED_CONTROL
    filtered_lambda: float = 0.0


def clamp(value: float, lo: float, hi: float) -> float:
    return lo if value < lo else hi if value > hi else value


def logistic(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def classify_mode(
    lambda_: float, autonomy_below: float = AUTONOMY_BELOW, manual_above: float = MANUAL_ABOVE
) -> Mode:
    """Operating mode as a pure function of the authority value."""
    if not (0.0 <= lambda_ <= 1.0):
        raise ValueError(f"lambda {lambda_} outside [0, 1]")
    if lambda_ < autonomy_below:
        return Mode.AUTONOMY
    if lambda_ > manual_above:
        return Mode.MANUAL
    return Mode.BLENDED


def _validated(values: Sequence[float], name: str) -> ControlInput:
    out = tuple(float(x) for x in values)
    for x in out:
        if not math.isfinite(x):
            raise ValueError(f"{name} has non-finite component {x}")
    return out


def blend(lambda_: float, u_h: Sequence[float], u_a: Sequence[float]) -> ControlInput:
    """h = lambda*u_h + (1-lambda)*u_a, componentwise.

    Exact at the endpoints: lambda=0 returns u_a and lambda=1 returns u_h to
    machine precision.
    """
    if not math.isfinite(lambda_) or not (0.0 <= lambda_ <= 1.0):
        raise ValueError(f"lambda {lambda_} outside [0, 1]")
    h = _validated(u_h, "u_h")
    a = _validated(u_a, "u_a")
    if len(h) != len(a):
        raise DimensionError(f"u_h has dimension {len(h)}, u_a has {len(a)}")
    w = 1.0 - lambda_
    return tuple(lambda_ * hh + w * aa for hh, aa in zip(h, a))


def set_lambda(state: ArbitrationState, requested: float) -> ArbitrationState:
    """Operator-requested authority (shared control only); clamped to [0, 1]."""
    if state.source is not ArbitrationSource.SHARED_CONTROL:
        raise ValueError("direct lambda setting requires shared-control source")
    if not math.isfinite(requested):
        raise ValueError(f"requested lambda {requested} is not finite")
    lam = clamp(float(requested), 0.0, 1.0)
    return replace(state, lambda_=lam, filtered_lambda=lam, mode=classify_mode(lam))


def auto_tune_lambda(
    policy: AutoTunePolicy,
    human_force_magnitude: float,
    intent: Optional["IntentEstimate"],
    dt: float,
    state: ArbitrationState,
) -> ArbitrationState:
    """One auto-tuning update from sensed force and inferred intent.

    Monotone in the sensed force magnitude; a guidance-requesting intent
    floors the raw target at policy.intent_floor before filtering.
    """
    if state.source is not ArbitrationSource.SHARED_AUTONOMY:
        raise ValueError("auto-tuning requires shared-autonomy source")
    if not (dt > 0):
        raise ValueError(f"dt must be > 0, got {dt}")
    raw = logistic(policy.gain * (abs(human_force_magnitude) - policy.force_threshold))
    if intent is not None and intent.wants_guidance():
        raw = max(raw, policy.intent_floor)
    alpha = 1.0 - math.exp(-dt / policy.time_constant)
    filtered = state.filtered_lambda + (raw - state.filtered_lambda) * alpha
    filtered = clamp(filtered, 0.0, 1.0)
    return replace(state, lambda_=filtered, filtered_lambda=filtered, mode=classify_mode(filtered))
