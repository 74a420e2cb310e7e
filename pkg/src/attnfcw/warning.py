"""Rule-based forward collision warnings.

Stop-distance warning distance (conventional FCW), its attention-aware
variant driven by the counterfactual lead speed, and the AttenD gaze buffer
baselines.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .counterfactual import counterfactual_speeds
from .kinematics import AttentionTrace, Episode, require_valid

# float residue from repeated +/- rate*dt is snapped to the clamp bounds
_BUFFER_EPS = 1e-9


@dataclass(frozen=True)
class FcwParams:
    t_dr: float = 1.5
    a_ego_max: float = 6.0
    a_lead_max: float = 6.0
    alpha: float = 1.8
    attend_buffer_max: float = 2.0
    attend_decrement_rate: float = 1.0
    attend_increment_rate: float = 1.0
    min_gap_warn: float = 2.0
    horizon: float = 3.0
    history: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValueError(f"{f.name} must be a finite number, got {value!r}")
            object.__setattr__(self, f.name, float(value))
            if f.name == "alpha":
                if value < 0:
                    raise ValueError(f"alpha must be >= 0, got {value}")
            elif value <= 0:
                raise ValueError(f"{f.name} must be > 0, got {value}")

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class WarningTrace:
    dt: float
    start_time: float
    warn: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "warn", tuple(bool(w) for w in self.warn))

    @classmethod
    def from_mask(cls, mask, dt: float, start_time: float) -> "WarningTrace":
        return cls(dt, start_time, tuple(np.asarray(mask, dtype=bool).tolist()))

    @property
    def first_warning_time(self) -> Optional[float]:
        return first_warning_time(self)

    @property
    def times(self) -> np.ndarray:
        return self.start_time + np.arange(len(self.warn)) * self.dt

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t_s", "warn"])
            for t, w in zip(self.times.tolist(), self.warn):
                writer.writerow([repr(t), int(w)])


def first_warning_time(w: WarningTrace) -> Optional[float]:
    for i, flag in enumerate(w.warn):
        if flag:
            # rounding strips i*dt float residue (45 * 0.1 -> 4.5)
            return round(w.start_time + i * w.dt, 9)
    return None


def _check_speeds(*speeds) -> None:
    for v in speeds:
        if np.any(np.asarray(v) < 0):
            raise ValueError(f"speeds must be non-negative, got {v}")


def _stop_distance_core(v_ego, v_lead, p: FcwParams):
    # braking distances v^2/(2a); the printed exponent placement is not dimensionally a length
    return v_ego * p.t_dr + v_ego**2 / (2.0 * p.a_ego_max) - v_lead**2 / (2.0 * p.a_lead_max)


def sda_warning_distance(v_ego, v_lead, p: FcwParams):
    """Stop-distance warning distance, clamped at zero. Accepts scalars or arrays."""
    _check_speeds(v_ego, v_lead)
    return np.maximum(0.0, _stop_distance_core(v_ego, v_lead, p))


def attention_aware_warning_distance(v_ego, v_lead, v_hat_lead, p: FcwParams):
    """Stop-distance warning distance shifted by alpha * (perceived - actual lead speed)."""
    _check_speeds(v_ego, v_lead, v_hat_lead)
    return np.maximum(0.0, _stop_distance_core(v_ego, v_lead, p) + p.alpha * (v_hat_lead - v_lead))


def _trace(e: Episode, mask) -> WarningTrace:
    return WarningTrace.from_mask(mask, e.dt, e.start_time)


def sda_mask(e: Episode, p: FcwParams) -> np.ndarray:
    return e.gaps() < sda_warning_distance(e.ego.speed, e.lead.speed, p)


def evaluate_sda(e: Episode, p: FcwParams) -> WarningTrace:
    require_valid(e)
    return _trace(e, sda_mask(e, p))


def evaluate_attention_aware(e: Episode, p: FcwParams) -> WarningTrace:
    require_valid(e)
    v_hat = counterfactual_speeds(e.lead, e.attention)
    d_w = attention_aware_warning_distance(e.ego.speed, e.lead.speed, v_hat, p)
    return _trace(e, e.gaps() < d_w)


def attend_buffer_trace(attention: AttentionTrace, p: FcwParams) -> np.ndarray:
    """AttenD time buffer per step.

    The buffer starts full. Between steps i-1 and i it drains at the decrement
    rate if the driver was looking away at step i-1 and refills otherwise,
    clamped to [0, attend_buffer_max].
    """
    attended = np.asarray(attention.attended, dtype=bool)
    buf = np.empty(len(attended))
    if len(attended) == 0:
        return buf
    cap = p.attend_buffer_max
    down = p.attend_decrement_rate * attention.dt
    up = p.attend_increment_rate * attention.dt
    b = cap
    buf[0] = b
    for i in range(1, len(attended)):
        b = b + up if attended[i - 1] else b - down
        if b <= _BUFFER_EPS:
            b = 0.0
        elif b >= cap - _BUFFER_EPS:
            b = cap
        buf[i] = b
    return buf


def evaluate_attend_gaze_only(e: Episode, p: FcwParams) -> WarningTrace:
    require_valid(e)
    return _trace(e, attend_buffer_trace(e.attention, p) <= 0.0)


def evaluate_attend_gaze_scene(e: Episode, p: FcwParams) -> WarningTrace:
    require_valid(e)
    gaze = attend_buffer_trace(e.attention, p) <= 0.0
    return _trace(e, gaze & sda_mask(e, p))
