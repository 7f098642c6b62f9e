"""Online adaptive estimators driven by quantized or continuous observations.

The quantized recursion consumes only the quantizer symbol: the update is
``gain * sign(symbol) * level[|symbol|]``, so the raw observation never
crosses the module boundary.  The continuous-observation reference applies
the (negated) noise score to the raw innovation instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .noise import NoiseModel
from .quantizer import QuantizerDesign, QuantizerSpec, quantize


class ScheduleKind(str, Enum):
    CONSTANT = "constant"
    WIENER = "wiener"
    WIENER_DRIFT = "wiener_drift"


@dataclass(frozen=True)
class GainSchedule:
    """Gain sequence matched to the parameter evolution model.

    ``info`` is the Fisher information of one observation (quantized or
    continuous, depending on which estimator the schedule drives).

    constant      : gain_k = 1 / (k * info)
    wiener        : gain_k = sigma_w / sqrt(info)
    wiener_drift  : gain_k = (4 * u_hat^2 / info^2)^(1/3), with |u_hat|
                    floored at ``u_floor`` so a zero drift estimate cannot
                    freeze the recursion.
    """

    kind: ScheduleKind
    info: float
    sigma_w: float = 0.0
    drift_gain: float = 1e-5
    u_floor: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "kind", ScheduleKind(self.kind))
        if not (self.info > 0.0 and math.isfinite(self.info)):
            raise ValueError(f"info must be positive and finite, got {self.info}")
        if self.sigma_w < 0.0:
            raise ValueError(f"sigma_w must be nonnegative, got {self.sigma_w}")
        if self.kind is ScheduleKind.WIENER and self.sigma_w == 0.0:
            raise ValueError("wiener schedule requires sigma_w > 0")
        if self.kind is ScheduleKind.WIENER_DRIFT and self.drift_gain <= 0.0:
            raise ValueError(f"drift_gain must be positive, got {self.drift_gain}")


def gain(schedule: GainSchedule, k: int, u_hat: float = 0.0) -> float:
    """Gain for step k >= 1 (k counts the update being applied)."""
    if k < 1:
        raise ValueError(f"step index must be >= 1, got {k}")
    if schedule.kind is ScheduleKind.CONSTANT:
        return 1.0 / (k * schedule.info)
    if schedule.kind is ScheduleKind.WIENER:
        return schedule.sigma_w / math.sqrt(schedule.info)
    u = max(abs(u_hat), schedule.u_floor)
    return (4.0 * u * u / schedule.info**2) ** (1.0 / 3.0)


@dataclass(frozen=True)
class EstimatorState:
    """Current estimate, step counter and (for the drift model) drift estimate."""

    x_hat: float
    k: int = 0
    u_hat: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.x_hat):
            raise ValueError(f"x_hat must be finite, got {self.x_hat}")
        if self.k < 0:
            raise ValueError(f"step counter must be >= 0, got {self.k}")


def step_quantized(state: EstimatorState, y: float, design: QuantizerDesign,
                   spec: QuantizerSpec, schedule: GainSchedule) -> EstimatorState:
    """Advance the estimate by one quantized observation.

    The quantizer offset is the previous estimate; only the resulting
    symbol enters the update.  For the drift schedule the drift estimate
    is refreshed by first-order smoothing of the estimate increments.
    """
    if not math.isfinite(y):
        raise ValueError(f"observation must be finite, got {y}")
    symbol = quantize(y, state.x_hat, spec, design.step)
    k = state.k + 1
    g = gain(schedule, k, state.u_hat)
    increment = g * math.copysign(1.0, symbol) * design.levels[abs(symbol) - 1]
    x_new = state.x_hat + increment
    u_new = state.u_hat
    if schedule.kind is ScheduleKind.WIENER_DRIFT:
        u_new = state.u_hat + schedule.drift_gain * (increment - state.u_hat)
    return replace(state, x_hat=x_new, k=k, u_hat=u_new)


def step_continuous(state: EstimatorState, y: float, model: NoiseModel,
                    schedule: GainSchedule) -> EstimatorState:
    """Advance the continuous-measurement reference estimator by one step.

    The correction is the negated noise score of the innovation, i.e. the
    ascent direction of the log-likelihood, so positive innovations move
    the estimate up.  Requires a differentiable density (ST any beta,
    GG beta > 1).
    """
    if not math.isfinite(y):
        raise ValueError(f"observation must be finite, got {y}")
    k = state.k + 1
    g = gain(schedule, k, state.u_hat)
    increment = -g * model.score(y - state.x_hat)
    x_new = state.x_hat + increment
    u_new = state.u_hat
    if schedule.kind is ScheduleKind.WIENER_DRIFT:
        u_new = state.u_hat + schedule.drift_gain * (increment - state.u_hat)
    return replace(state, x_hat=x_new, k=k, u_hat=u_new)
