"""Seeded synthetic car-following episodes with rule-derived need-to-warn labels.

Scenes are single-lane and straight along +x. The lead follows a scripted speed
profile; the ego holds speed until the driver notices the hazard (an attended
step where the gap is inside the stop-distance warning distance), then after
the reaction time brakes at full deceleration down to the lead speed seen at
that moment. Lead speed changes during inattention go unanswered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .kinematics import (
    CANONICAL_DT,
    DEFAULT_VEHICLE_LENGTH,
    DEPLOYED_FCW_TIME,
    EPISODE_SPAN,
    Annotation,
    AttentionTrace,
    Episode,
    Trajectory,
)
from .warning import FcwParams, sda_warning_distance

KINDS = (
    "brake_during_inattention",
    "accelerate_during_inattention",
    "nominal_following",
    "attentive_brake",
)

LABEL_THRESHOLD = 5.0
MAX_SPEED_JITTER = 0.02
N_OBSERVERS = 3


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str = "nominal_following"
    ego_speed: float = 20.0
    lead_speed: float = 20.0
    initial_gap: float = 40.0
    event_time: float = 5.0
    event_magnitude: float = 0.0
    inattention_window: Optional[tuple[float, float]] = None
    duration: float = EPISODE_SPAN
    dt: float = CANONICAL_DT
    seed: int = 0
    # speed the lead's event ramps toward; None: 0 when braking, lead_speed + 6 when accelerating
    terminal_speed: Optional[float] = None
    episode_id: Optional[str] = None

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.ego_speed < 0 or self.lead_speed < 0:
            raise ValueError("speeds must be non-negative")
        if not self.initial_gap > 0:
            raise ValueError(f"infeasible spec: initial gap {self.initial_gap} m leaves no clearance at t=0")
        if not (0 <= self.event_time <= self.duration):
            raise ValueError("event_time must lie within [0, duration]")
        if self.duration <= DEPLOYED_FCW_TIME:
            raise ValueError("duration must extend past the deployed alert time")
        if self.inattention_window is not None:
            w0, w1 = self.inattention_window
            if not (0 <= w0 <= w1 <= self.duration):
                raise ValueError("inattention_window must lie within [0, duration]")
        if self.terminal_speed is not None and self.terminal_speed < 0:
            raise ValueError("terminal_speed must be non-negative")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))


@dataclass(frozen=True)
class Rollout:
    """Raw simulation output before packaging as an Episode."""

    t: np.ndarray
    ego_x: np.ndarray
    ego_v: np.ndarray
    lead_x: np.ndarray
    lead_v: np.ndarray
    attended: np.ndarray
    gap: np.ndarray

    @property
    def min_gap(self) -> float:
        return float(self.gap.min())

    @property
    def contact(self) -> bool:
        return bool(np.any(self.gap <= 0.0))


def jitter_factor(seed: int) -> float:
    rng = np.random.default_rng(seed)
    return 1.0 + rng.uniform(-MAX_SPEED_JITTER, MAX_SPEED_JITTER)


def _lead_speed_profile(spec: ScenarioSpec, v0: float, t: np.ndarray) -> np.ndarray:
    a = spec.event_magnitude
    if a == 0:
        return np.full_like(t, v0)
    if spec.terminal_speed is not None:
        terminal = spec.terminal_speed
    else:
        terminal = 0.0 if a < 0 else v0 + 6.0
    v = v0 + a * np.maximum(0.0, t - spec.event_time)
    v = np.maximum(v, terminal) if a < 0 else np.minimum(v, max(terminal, v0))
    return np.maximum(v, 0.0)


def simulate(spec: ScenarioSpec, params: FcwParams = FcwParams(), ego_length=DEFAULT_VEHICLE_LENGTH,
             lead_length=DEFAULT_VEHICLE_LENGTH) -> Rollout:
    spec.validate()
    n = spec.n_steps
    dt = spec.dt
    t = np.arange(n) * dt
    k = jitter_factor(spec.seed)
    v_ego0 = spec.ego_speed * k
    v_lead0 = spec.lead_speed * k

    attended = np.ones(n, dtype=bool)
    if spec.inattention_window is not None:
        w0, w1 = spec.inattention_window
        attended &= ~((t >= w0 - 1e-9) & (t < w1 - 1e-9))

    lead_v = _lead_speed_profile(spec, v_lead0, t)
    lead_x = np.empty(n)
    lead_x[0] = spec.initial_gap + 0.5 * (ego_length + lead_length)
    lead_x[1:] = lead_x[0] + np.cumsum(0.5 * (lead_v[1:] + lead_v[:-1]) * dt)

    ego_x = np.empty(n)
    ego_v = np.empty(n)
    gap = np.empty(n)
    ego_x[0], ego_v[0] = 0.0, v_ego0
    delay = int(round(params.t_dr / dt))
    noticed = np.zeros(n, dtype=bool)
    target = math.inf
    for i in range(n):
        gap[i] = lead_x[i] - ego_x[i] - 0.5 * (ego_length + lead_length)
        if i == n - 1:
            break
        noticed[i] = attended[i] and gap[i] < sda_warning_distance(ego_v[i], lead_v[i], params)
        # each noticed step sets a speed target (the lead speed seen then) that takes hold t_dr later
        if i >= delay and noticed[i - delay]:
            target = min(target, lead_v[i - delay])
        v = ego_v[i]
        if v > target:
            v = max(v - params.a_ego_max * dt, target, 0.0)
        if gap[i] <= 0.0:
            # no passing through the lead after contact
            v = min(v, lead_v[i + 1])
        ego_v[i + 1] = v
        ego_x[i + 1] = ego_x[i] + 0.5 * (ego_v[i] + v) * dt
    return Rollout(t, ego_x, ego_v, lead_x, lead_v, attended, gap)


def maneuver_avoids_contact(r: Rollout, k: int, params: FcwParams) -> bool:
    """Would reacting at step k (hold speed t_dr, then full brake to stop) avoid contact?

    The lead follows its recorded motion and holds its final speed past the
    episode end.
    """
    dt = r.t[1] - r.t[0]
    v = r.ego_v[k]
    t_total = params.t_dr + v / params.a_ego_max + dt
    m = int(math.ceil(t_total / dt)) + 1
    tau = np.arange(m) * dt
    tb = np.clip(tau - params.t_dr, 0.0, v / params.a_ego_max)
    ego_d = v * np.minimum(tau, params.t_dr) + v * tb - 0.5 * params.a_ego_max * tb**2

    avail = len(r.t) - k
    lead_d = np.empty(m)
    j = min(m, avail)
    lead_d[:j] = r.lead_x[k:k + j] - r.lead_x[k]
    if m > avail:
        tail = np.arange(1, m - avail + 1) * dt
        lead_d[avail:] = lead_d[avail - 1] + r.lead_v[-1] * tail
    return bool(np.all(r.gap[k] + lead_d - ego_d > 0.0))


def preferred_warning_time(r: Rollout, params: FcwParams) -> float:
    """Latest time, at or before the closest approach, from which reacting still avoids contact."""
    critical = int(np.argmax(r.gap <= 0.0)) if r.contact else int(np.argmin(r.gap))
    for k in range(critical, -1, -1):
        if maneuver_avoids_contact(r, k, params):
            return float(r.t[k])
    return float(r.t[0])


def needs_warning(r: Rollout, label_threshold: float = LABEL_THRESHOLD) -> bool:
    return r.contact or r.min_gap < label_threshold


def generate(spec: ScenarioSpec, params: FcwParams = FcwParams(), label_threshold: float = LABEL_THRESHOLD,
             ego_length=DEFAULT_VEHICLE_LENGTH, lead_length=DEFAULT_VEHICLE_LENGTH) -> Episode:
    r = simulate(spec, params, ego_length, lead_length)
    return _package(spec, r, params, needs_warning(r, label_threshold), ego_length, lead_length)


def _package(spec: ScenarioSpec, r: Rollout, params: FcwParams, label: bool, ego_length, lead_length) -> Episode:
    rng = np.random.default_rng([spec.seed, 1])

    votes = [label] * N_OBSERVERS
    if rng.random() < 0.25:
        # a lone dissenting observer never flips the majority
        votes[int(rng.integers(N_OBSERVERS))] = not label
    t_pref = preferred_warning_time(r, params) if label else None
    end = float(r.t[-1])
    times = []
    for v in votes:
        if not v:
            times.append(None)
            continue
        base = t_pref if t_pref is not None else DEPLOYED_FCW_TIME
        times.append(round(min(max(base + rng.uniform(-0.3, 0.3), 0.0), end), 1))

    dt = spec.dt
    zeros = np.zeros_like(r.t)
    return Episode(
        id=spec.episode_id or f"{spec.kind}-{spec.seed}",
        dt=dt,
        ego=Trajectory(dt, 0.0, r.ego_x, zeros, zeros, r.ego_v),
        lead=Trajectory(dt, 0.0, r.lead_x, zeros, zeros, r.lead_v),
        attention=AttentionTrace(dt, 0.0, r.attended),
        annotation=Annotation(tuple(votes), tuple(times)),
        deployed_fcw_time=DEPLOYED_FCW_TIME,
        ego_length=ego_length,
        lead_length=lead_length,
    )


def _sample_spec(kind: str, base: ScenarioSpec, rng: np.random.Generator, params: FcwParams) -> ScenarioSpec:
    u = rng.uniform
    v = base.ego_speed * u(0.8, 1.2)
    common = dict(kind=kind, ego_speed=v, seed=int(rng.integers(2**31 - 1)))
    if kind == "brake_during_inattention":
        w0 = u(2.5, 4.0)
        onset = w0 + u(0.3, 1.2)
        return replace(base, **common, lead_speed=v, initial_gap=v * params.t_dr + u(8.0, 16.0),
                       event_time=onset, event_magnitude=-u(4.0, 7.0),
                       inattention_window=(w0, onset + u(1.5, 3.0)))
    if kind == "accelerate_during_inattention":
        v_lead = v * u(0.45, 0.65)
        accel = u(0.8, 2.0)
        w0 = u(0.2, 0.8)
        onset = w0 + u(0.2, 0.6)
        # conventional warning distance is reached roughly `lag` seconds after onset
        lag = u(0.8, 2.5)
        d_w = float(sda_warning_distance(v, v_lead, params))
        closing = v - v_lead - v_lead * accel / params.a_lead_max
        gap = d_w + (v - v_lead) * onset + closing * lag
        return replace(base, **common, lead_speed=v_lead, initial_gap=gap,
                       event_time=onset, event_magnitude=accel,
                       terminal_speed=v * u(1.05, 1.2), inattention_window=(w0, w0 + u(3.0, 5.0)))
    if kind == "nominal_following":
        window = None
        if rng.random() < 0.5:
            w0 = u(1.0, 10.0)
            window = (w0, w0 + u(0.5, 3.0))
        return replace(base, **common, lead_speed=v, initial_gap=v * params.t_dr + u(5.0, 20.0),
                       event_time=u(3.0, 7.0), event_magnitude=u(-0.3, 0.3), inattention_window=window)
    if kind == "attentive_brake":
        return replace(base, **common, lead_speed=v, initial_gap=v * params.t_dr + u(0.0, 8.0),
                       event_time=u(4.0, 6.0), event_magnitude=-u(5.0, 9.0), inattention_window=None)
    raise ValueError(f"unknown scenario kind {kind!r}")


def suite_specs(n_per_kind: int, base: ScenarioSpec = ScenarioSpec(), seed: int = 0,
                params: FcwParams = FcwParams(), kinds: Sequence[str] = KINDS) -> list[ScenarioSpec]:
    if n_per_kind < 1:
        raise ValueError(f"n_per_kind must be >= 1, got {n_per_kind}")
    unknown = set(kinds) - set(KINDS)
    if unknown:
        raise ValueError(f"unknown scenario kind(s): {sorted(unknown)}")
    rng = np.random.default_rng(seed)
    specs = []
    for kind in kinds:
        for i in range(n_per_kind):
            s = _sample_spec(kind, base, rng, params)
            specs.append(replace(s, episode_id=f"{kind}-{i:03d}"))
    return specs


@dataclass(frozen=True)
class SuiteEntry:
    spec: ScenarioSpec
    episode: Episode
    label: bool


def build_suite(n_per_kind: int, base: ScenarioSpec = ScenarioSpec(), seed: int = 0,
                params: FcwParams = FcwParams(), label_threshold: float = LABEL_THRESHOLD,
                kinds: Sequence[str] = KINDS) -> list[SuiteEntry]:
    out = []
    for s in suite_specs(n_per_kind, base, seed, params, kinds):
        r = simulate(s, params)
        label = needs_warning(r, label_threshold)
        ep = _package(s, r, params, label, DEFAULT_VEHICLE_LENGTH, DEFAULT_VEHICLE_LENGTH)
        out.append(SuiteEntry(s, ep, label))
    return out


def generate_suite(n_per_kind: int, base: ScenarioSpec = ScenarioSpec(), seed: int = 0,
                   params: FcwParams = FcwParams(), label_threshold: float = LABEL_THRESHOLD):
    """List of (episode, needs_warning) pairs covering every scenario kind."""
    return [(x.episode, x.label) for x in build_suite(n_per_kind, base, seed, params, label_threshold)]
