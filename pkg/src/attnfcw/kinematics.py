"""Episode and trajectory types plus the longitudinal gap geometry.

Trajectories are stored column-wise (x, y, heading, speed arrays) because every
consumer downstream works on whole time series. Arrays are frozen after
construction so the dataclasses behave as values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

CANONICAL_DT = 0.1
DEFAULT_VEHICLE_LENGTH = 4.5
EPISODE_SPAN = 15.0
DEPLOYED_FCW_TIME = 5.0


def _frozen(values, dtype=float) -> np.ndarray:
    if isinstance(values, np.ndarray) and values.dtype == dtype and not values.flags.writeable:
        # views of already-frozen buffers are safe to share
        if values.base is None or not getattr(values.base, "flags", values.flags).writeable:
            return values
    arr = np.array(values, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


def wrap_angle(theta):
    """Wrap angle(s) into [-pi, pi)."""
    return (np.asarray(theta, dtype=float) + np.pi) % (2.0 * np.pi) - np.pi


@dataclass(frozen=True)
class VehicleState:
    x: float
    y: float
    heading: float
    speed: float

    @property
    def position_xy(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled vehicle states; state i lives at start_time + i * dt."""

    dt: float
    start_time: float
    x: np.ndarray
    y: np.ndarray
    heading: np.ndarray
    speed: np.ndarray

    def __post_init__(self):
        for name in ("x", "y", "heading", "speed"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @classmethod
    def _adopt(cls, dt: float, start_time: float, x, y, heading, speed) -> "Trajectory":
        """Build from float arrays nobody else writes to, without copying them."""
        t = object.__new__(cls)
        for arr in (x, y, heading, speed):
            arr.flags.writeable = False
        t.__dict__.update(dt=dt, start_time=start_time, x=x, y=y, heading=heading, speed=speed)
        return t

    @classmethod
    def from_states(cls, states: Sequence[VehicleState], dt: float, start_time: float = 0.0) -> "Trajectory":
        return cls(
            dt=dt,
            start_time=start_time,
            x=[s.x for s in states],
            y=[s.y for s in states],
            heading=[s.heading for s in states],
            speed=[s.speed for s in states],
        )

    @classmethod
    def straight(cls, positions, speeds, dt: float, start_time: float = 0.0, y: float = 0.0) -> "Trajectory":
        """Trajectory along +x with the given longitudinal positions and speeds."""
        positions = np.asarray(positions, dtype=float)
        return cls(
            dt=dt,
            start_time=start_time,
            x=positions,
            y=np.full_like(positions, y),
            heading=np.zeros_like(positions),
            speed=speeds,
        )

    def __len__(self) -> int:
        return len(self.x)

    def __getitem__(self, i: int) -> VehicleState:
        return VehicleState(float(self.x[i]), float(self.y[i]), float(self.heading[i]), float(self.speed[i]))

    def __iter__(self) -> Iterator[VehicleState]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.dt == other.dt
            and self.start_time == other.start_time
            and all(np.array_equal(getattr(self, n), getattr(other, n)) for n in ("x", "y", "heading", "speed"))
        )

    __hash__ = None

    @property
    def states(self) -> list[VehicleState]:
        return list(self)

    @property
    def times(self) -> np.ndarray:
        return self.start_time + np.arange(len(self)) * self.dt

    @property
    def end_time(self) -> float:
        return self.start_time + (len(self) - 1) * self.dt

    def slice(self, start: int, stop: int) -> "Trajectory":
        """Sub-trajectory over indices [start, stop)."""
        return Trajectory._adopt(
            dt=self.dt,
            start_time=self.start_time + start * self.dt,
            x=self.x[start:stop],
            y=self.y[start:stop],
            heading=self.heading[start:stop],
            speed=self.speed[start:stop],
        )


@dataclass(frozen=True, eq=False)
class AttentionTrace:
    """Per-step flag: is the driver looking at the lead vehicle."""

    dt: float
    start_time: float
    attended: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "attended", _frozen(self.attended, dtype=bool))

    def __len__(self) -> int:
        return len(self.attended)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AttentionTrace):
            return NotImplemented
        return (
            self.dt == other.dt
            and self.start_time == other.start_time
            and np.array_equal(self.attended, other.attended)
        )

    __hash__ = None


@dataclass(frozen=True)
class Annotation:
    """Observer validity votes and, for valid votes, the preferred warning time."""

    validity_votes: tuple[bool, ...]
    preferred_times: tuple[Optional[float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "validity_votes", tuple(bool(v) for v in self.validity_votes))
        times = tuple(None if t is None else float(t) for t in self.preferred_times)
        if not times:
            times = (None,) * len(self.validity_votes)
        object.__setattr__(self, "preferred_times", times)


@dataclass(frozen=True)
class Episode:
    id: str
    dt: float
    ego: Trajectory
    lead: Trajectory
    attention: AttentionTrace
    annotation: Annotation
    deployed_fcw_time: float = DEPLOYED_FCW_TIME
    ego_length: float = DEFAULT_VEHICLE_LENGTH
    lead_length: float = DEFAULT_VEHICLE_LENGTH

    def __len__(self) -> int:
        return len(self.ego)

    @property
    def start_time(self) -> float:
        return self.ego.start_time

    @property
    def times(self) -> np.ndarray:
        return self.ego.times

    def gaps(self) -> np.ndarray:
        return longitudinal_gaps(self.ego, self.lead, self.ego_length, self.lead_length)


class EpisodeValidationError(ValueError):
    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("invalid episode: " + "; ".join(violations))


def _check_trajectory(path: str, t: Trajectory) -> list[str]:
    out = []
    if not t.dt > 0:
        out.append(f"{path}.dt: dt must be positive (got {t.dt})")
    if not math.isfinite(t.start_time):
        out.append(f"{path}.start_time: must be finite")
    lengths = {len(t.x), len(t.y), len(t.heading), len(t.speed)}
    if len(lengths) != 1:
        out.append(f"{path}: column length mismatch {sorted(lengths)}")
        return out
    if len(t) == 0:
        out.append(f"{path}.states: must be non-empty")
        return out
    if not (np.all(np.isfinite(t.x)) and np.all(np.isfinite(t.y))):
        out.append(f"{path}.position_xy: non-finite component")
    if np.any(~np.isfinite(t.speed)) or np.any(t.speed < 0):
        out.append(f"{path}.speed: must be finite and >= 0")
    if np.any(~np.isfinite(t.heading)) or np.any(t.heading < -np.pi) or np.any(t.heading >= np.pi):
        out.append(f"{path}.heading: must lie in [-pi, pi)")
    return out


def validate_episode(e: Episode) -> list[str]:
    """Return every invariant violation as 'field.path: message'; empty means valid."""
    out: list[str] = []
    if not e.dt > 0:
        out.append(f"dt: dt must be positive (got {e.dt})")
    out += _check_trajectory("ego", e.ego)
    out += _check_trajectory("lead", e.lead)
    if not e.attention.dt > 0:
        out.append(f"attention.dt: dt must be positive (got {e.attention.dt})")

    n = len(e.ego)
    for path, m in (("lead", len(e.lead)), ("attention.attended", len(e.attention))):
        if m != n:
            out.append(f"{path}: length mismatch ({m} vs ego {n})")
    for path, obj in (("ego", e.ego), ("lead", e.lead), ("attention", e.attention)):
        if e.dt > 0 and obj.dt != e.dt:
            out.append(f"{path}.dt: does not match episode dt ({obj.dt} vs {e.dt})")
    for path, obj in (("lead", e.lead), ("attention", e.attention)):
        if obj.start_time != e.ego.start_time:
            out.append(f"{path}.start_time: does not match ego start_time")

    if not (e.ego_length > 0 and math.isfinite(e.ego_length)):
        out.append("ego_length: must be positive")
    if not (e.lead_length > 0 and math.isfinite(e.lead_length)):
        out.append("lead_length: must be positive")

    if n and e.dt > 0:
        t0, t1 = e.ego.start_time, e.ego.start_time + (n - 1) * e.dt
        if not (t0 <= e.deployed_fcw_time <= t1):
            out.append(f"deployed_fcw_time: {e.deployed_fcw_time} outside span [{t0}, {t1}]")
    else:
        t0 = t1 = None

    ann = e.annotation
    if len(ann.preferred_times) != len(ann.validity_votes):
        out.append("annotation.preferred_times: length differs from validity_votes")
    for k, (vote, pt) in enumerate(zip(ann.validity_votes, ann.preferred_times)):
        if pt is not None and not vote:
            out.append(f"annotation.preferred_times[{k}]: present for an invalid vote")
        if pt is not None and t0 is not None and not (t0 <= pt <= t1):
            out.append(f"annotation.preferred_times[{k}]: {pt} outside episode span")
    return out


def require_valid(e: Episode) -> None:
    violations = validate_episode(e)
    if violations:
        raise EpisodeValidationError(violations)


def _grid_size(span: float, dt: float) -> int:
    steps = span / dt
    nearest = round(steps)
    if abs(steps - nearest) < 1e-9:
        return int(nearest) + 1
    return int(math.floor(steps)) + 1


def resample(t: Trajectory, dt_new: float) -> Trajectory:
    """Linearly interpolate onto a uniform grid of step dt_new over the same span.

    The first sample is always kept; the last is kept whenever the span is a
    multiple of dt_new. Headings are interpolated on the unwrapped angle.
    """
    if not dt_new > 0:
        raise ValueError(f"dt_new must be positive, got {dt_new}")
    if len(t) == 0:
        raise ValueError("cannot resample an empty trajectory")
    if dt_new == t.dt or len(t) == 1:
        return Trajectory(t.dt if len(t) > 1 else dt_new, t.start_time, t.x, t.y, t.heading, t.speed)

    span = (len(t) - 1) * t.dt
    n_new = _grid_size(span, dt_new)
    # interpolate in index space so integer ratios hit source samples exactly
    u = np.arange(n_new) * (dt_new / t.dt)
    u = np.minimum(u, len(t) - 1)
    knots = np.arange(len(t))
    heading = wrap_angle(np.interp(u, knots, np.unwrap(t.heading)))
    return Trajectory(
        dt=dt_new,
        start_time=t.start_time,
        x=np.interp(u, knots, t.x),
        y=np.interp(u, knots, t.y),
        heading=heading,
        speed=np.interp(u, knots, t.speed),
    )


def resample_attention(a: AttentionTrace, dt_new: float, n_new: Optional[int] = None) -> AttentionTrace:
    """Zero-order hold of the attention flags onto a new grid."""
    if not dt_new > 0:
        raise ValueError(f"dt_new must be positive, got {dt_new}")
    if n_new is None:
        n_new = _grid_size((len(a) - 1) * a.dt, dt_new)
    idx = np.floor(np.arange(n_new) * (dt_new / a.dt) + 1e-9).astype(int)
    idx = np.clip(idx, 0, len(a) - 1)
    return AttentionTrace(dt_new, a.start_time, a.attended[idx])


def speeds_from_positions(x, y, dt: float) -> np.ndarray:
    """Speed magnitude by central differences (one-sided at the ends)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        return np.zeros_like(x)
    vx = np.gradient(x, dt)
    vy = np.gradient(y, dt)
    return np.hypot(vx, vy)


def longitudinal_gaps(ego: Trajectory, lead: Trajectory, ego_length: float, lead_length: float) -> np.ndarray:
    """Per-step bumper gap measured along the ego heading; negative means overlap."""
    return gaps_along_heading(ego.x, ego.y, ego.heading, lead.x, lead.y, ego_length, lead_length)


def gaps_along_heading(ego_x, ego_y, ego_heading, lead_x, lead_y, ego_length: float, lead_length: float):
    """Array form of the bumper gap; works elementwise on any matching shapes."""
    proj = (lead_x - ego_x) * np.cos(ego_heading) + (lead_y - ego_y) * np.sin(ego_heading)
    return proj - 0.5 * (ego_length + lead_length)


def longitudinal_gap(ego: VehicleState, lead: VehicleState, ego_length: float, lead_length: float) -> float:
    dx = lead.x - ego.x
    dy = lead.y - ego.y
    proj = dx * math.cos(ego.heading) + dy * math.sin(ego.heading)
    return proj - 0.5 * (ego_length + lead_length)


def index_at(start_time: float, dt: float, n: int, t: float) -> int:
    """Index of the step whose interval [t_i, t_i + dt) contains t."""
    i = int(math.floor((t - start_time) / dt + 1e-9))
    if i < 0 or i >= n:
        raise ValueError(f"t={t} outside span [{start_time}, {start_time + n * dt})")
    return i
