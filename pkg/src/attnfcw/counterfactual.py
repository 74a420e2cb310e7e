"""What the driver believes the lead vehicle is doing.

While the driver looks away, the lead is assumed to keep the velocity it had
at the last attended step. The first step always counts as observed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kinematics import AttentionTrace, Trajectory, _frozen, index_at


@dataclass(frozen=True, eq=False)
class PerceivedTrajectory:
    dt: float
    start_time: float
    x: np.ndarray
    y: np.ndarray
    heading: np.ndarray
    speed: np.ndarray
    observed: np.ndarray

    def __post_init__(self):
        for name in ("x", "y", "heading", "speed"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        object.__setattr__(self, "observed", _frozen(self.observed, dtype=bool))

    def __len__(self) -> int:
        return len(self.x)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PerceivedTrajectory):
            return NotImplemented
        return (
            self.dt == other.dt
            and self.start_time == other.start_time
            and all(
                np.array_equal(getattr(self, n), getattr(other, n))
                for n in ("x", "y", "heading", "speed", "observed")
            )
        )

    __hash__ = None

    @property
    def times(self) -> np.ndarray:
        return self.start_time + np.arange(len(self)) * self.dt

    def as_trajectory(self) -> Trajectory:
        return Trajectory(self.dt, self.start_time, self.x, self.y, self.heading, self.speed)


def last_observed_index(attended) -> np.ndarray:
    """For each step, the index of the most recent attended step (step 0 counts)."""
    attended = np.asarray(attended, dtype=bool)
    idx = np.where(attended, np.arange(len(attended)), 0)
    return np.maximum.accumulate(idx) if len(idx) else idx


def _check_aligned(lead: Trajectory, attention: AttentionTrace) -> None:
    if len(lead) != len(attention):
        raise ValueError(f"lead has {len(lead)} steps but attention has {len(attention)}")
    if lead.dt != attention.dt or lead.start_time != attention.start_time:
        raise ValueError("lead and attention are sampled on different grids")
    if len(lead) == 0:
        raise ValueError("empty lead trajectory")


def perceived_lead_trajectory(lead: Trajectory, attention: AttentionTrace) -> PerceivedTrajectory:
    _check_aligned(lead, attention)
    last = last_observed_index(attention.attended)
    steps_since = (np.arange(len(lead)) - last) * lead.dt
    v = lead.speed[last]
    h = lead.heading[last]
    # held steps are integrated in closed form from the anchor, never cumulatively
    x = lead.x[last] + v * steps_since * np.cos(h)
    y = lead.y[last] + v * steps_since * np.sin(h)
    observed = last == np.arange(len(lead))
    # attended steps copy the measured state bit-for-bit
    x = np.where(observed, lead.x, x)
    y = np.where(observed, lead.y, y)
    heading = np.where(observed, lead.heading, h)
    speed = np.where(observed, lead.speed, v)
    return PerceivedTrajectory(lead.dt, lead.start_time, x, y, heading, speed, observed)


def counterfactual_speeds(lead: Trajectory, attention: AttentionTrace) -> np.ndarray:
    _check_aligned(lead, attention)
    return lead.speed[last_observed_index(attention.attended)]


def counterfactual_speed_at(lead: Trajectory, attention: AttentionTrace, t: float) -> float:
    """Perceived lead speed at the step containing time t."""
    _check_aligned(lead, attention)
    i = index_at(lead.start_time, lead.dt, len(lead), t)
    return float(counterfactual_speeds(lead, attention)[i])
