"""Joint ego/lead forecasters and the minimum-future-gap warning rule.

A forecaster is any callable taking a ForecastRequest and returning a Forecast.
Futures include the current state as step 0 and extend horizon seconds ahead.
Learned models plug in through precomputed JSON Lines files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Optional

import numpy as np

from .counterfactual import perceived_lead_trajectory
from .kinematics import Episode, Trajectory, gaps_along_heading, longitudinal_gaps, require_valid
from .warning import FcwParams, WarningTrace


@dataclass(frozen=True)
class ForecastRequest:
    ego_history: Trajectory
    lead_history: Trajectory
    horizon: float
    # where the request comes from; only file-backed forecasters need these
    episode_id: Optional[str] = None
    timestep_index: Optional[int] = None

    @property
    def dt(self) -> float:
        return self.ego_history.dt

    @property
    def n_future(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass(frozen=True)
class Forecast:
    ego_future: Trajectory
    lead_future: Trajectory

    def truncate(self, horizon: float) -> "Forecast":
        n = int(round(horizon / self.ego_future.dt)) + 1
        return Forecast(self.ego_future.slice(0, n), self.lead_future.slice(0, n))


Forecaster = Callable[[ForecastRequest], Forecast]


class ForecastDataError(LookupError):
    pass


def _check_request(r: ForecastRequest) -> None:
    if not r.horizon > 0:
        raise ValueError(f"horizon must be positive, got {r.horizon}")
    if len(r.ego_history) != len(r.lead_history):
        raise ValueError("ego and lead histories are not aligned")


# --- physics core -----------------------------------------------------------
# Forecasters below work on stacked history windows (one row per request). A
# single request is a one-row stack, so per-request and whole-episode
# evaluation run identical arithmetic.

@dataclass(frozen=True)
class _Rows:
    x: np.ndarray
    y: np.ndarray
    heading: np.ndarray
    speed: np.ndarray

    @classmethod
    def of(cls, t: Trajectory) -> "_Rows":
        return cls(t.x[None, :], t.y[None, :], t.heading[None, :], t.speed[None, :])

    @classmethod
    def windows(cls, t: Trajectory, k: int) -> "_Rows":
        """Row j holds states j .. j+k."""
        w = np.lib.stride_tricks.sliding_window_view
        return cls(w(t.x, k + 1), w(t.y, k + 1), w(t.heading, k + 1), w(t.speed, k + 1))

    def __len__(self) -> int:
        return self.x.shape[1]


Fields = tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


def _rows_rollout(w: _Rows, dist: np.ndarray, speed: np.ndarray) -> Fields:
    h = w.heading[:, -1]
    c = np.array([math.cos(v) for v in h])[:, None]
    s = np.array([math.sin(v) for v in h])[:, None]
    x = w.x[:, -1:] + dist * c
    y = w.y[:, -1:] + dist * s
    heading = np.repeat(h[:, None], dist.shape[1], axis=1)
    return x, y, heading, speed


def _rows_constant_speed(w: _Rows, n: int, dt: float) -> Fields:
    v = w.speed[:, -1:]
    tau = np.arange(n + 1) * dt
    return _rows_rollout(w, v * tau, np.repeat(v, n + 1, axis=1))


def _rows_constant_accel(w: _Rows, n: int, dt: float, accel) -> Fields:
    """Speed v0 + a*t clamped at zero; distance integrated exactly."""
    v0 = w.speed[:, -1:]
    accel = np.broadcast_to(np.asarray(accel, dtype=float).reshape(-1, 1), v0.shape)
    tau = np.arange(n + 1) * dt
    speed = np.maximum(0.0, v0 + accel * tau)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_stop = np.where(accel < 0, v0 / -accel, np.inf)
    tc = np.minimum(tau, t_stop)
    dist = v0 * tc + 0.5 * accel * tc**2
    return _rows_rollout(w, dist, speed)


def _rows_slope(speed: np.ndarray, dt: float) -> np.ndarray:
    """Least-squares slope of each row of speeds against time."""
    tau = np.arange(speed.shape[1]) * dt
    tc = tau - tau.mean()
    return np.array([np.dot(tc, r - r.mean()) for r in speed]) / np.dot(tc, tc)


def _check_rows(ego: _Rows, lead: _Rows, min_len: int) -> None:
    if ego.x.shape != lead.x.shape:
        raise ValueError("ego and lead histories are not aligned")
    if len(ego) < min_len:
        raise ValueError(f"history needs at least {min_len} step(s), got {len(ego)}")


def _cv_rows(ego: _Rows, lead: _Rows, n: int, dt: float) -> tuple[Fields, Fields]:
    _check_rows(ego, lead, 1)
    return _rows_constant_speed(ego, n, dt), _rows_constant_speed(lead, n, dt)


def _ca_rows(ego: _Rows, lead: _Rows, n: int, dt: float) -> tuple[Fields, Fields]:
    _check_rows(ego, lead, 2)
    return (_rows_constant_accel(ego, n, dt, _rows_slope(ego.speed, dt)),
            _rows_constant_accel(lead, n, dt, _rows_slope(lead.speed, dt)))


def _wcb_rows(decel: float):
    def rows(ego: _Rows, lead: _Rows, n: int, dt: float) -> tuple[Fields, Fields]:
        _check_rows(ego, lead, 1)
        return _rows_constant_speed(ego, n, dt), _rows_constant_accel(lead, n, dt, -decel)
    return rows


def _single(r: ForecastRequest, rows) -> Forecast:
    _check_request(r)
    ego, lead = rows(_Rows.of(r.ego_history), _Rows.of(r.lead_history), r.n_future, r.dt)

    def traj(fields: Fields, hist: Trajectory) -> Trajectory:
        x, y, h, v = (np.ascontiguousarray(a[0]) for a in fields)
        return Trajectory._adopt(hist.dt, hist.end_time, x, y, h, v)

    return Forecast(traj(ego, r.ego_history), traj(lead, r.lead_history))


def forecast_constant_velocity(r: ForecastRequest) -> Forecast:
    """Each vehicle keeps its final speed and heading."""
    return _single(r, _cv_rows)


def speed_slope(t: Trajectory) -> float:
    """Least-squares slope of speed against time."""
    return float(_rows_slope(t.speed[None, :], t.dt)[0])


def forecast_constant_acceleration(r: ForecastRequest) -> Forecast:
    """Each vehicle keeps its least-squares history acceleration, speed clamped at zero."""
    return _single(r, _ca_rows)


def forecast_worst_case_brake(r: ForecastRequest, decel: float) -> Forecast:
    """Lead brakes at decel until stopped; ego holds its speed."""
    if not decel > 0:
        raise ValueError(f"decel must be positive, got {decel}")
    return _single(r, _wcb_rows(decel))


def worst_case_brake_forecaster(decel: float) -> Forecaster:
    if not decel > 0:
        raise ValueError(f"decel must be positive, got {decel}")

    def forecaster(r: ForecastRequest) -> Forecast:
        return forecast_worst_case_brake(r, decel)

    forecaster.rows = _wcb_rows(decel)
    return forecaster


# whole-episode fast path used by forecast_min_gaps
forecast_constant_velocity.rows = _cv_rows
forecast_constant_acceleration.rows = _ca_rows


def min_future_gap(f: Forecast, ego_length: float, lead_length: float) -> float:
    return float(np.min(longitudinal_gaps(f.ego_future, f.lead_future, ego_length, lead_length)))


def history_steps(p: FcwParams, dt: float) -> int:
    return int(round(p.history / dt))


def forecast_min_gaps(e: Episode, forecaster: Forecaster, p: FcwParams, use_counterfactual: bool) -> np.ndarray:
    """Minimum hypothesized future gap per step; NaN before a full history exists."""
    require_valid(e)
    k = history_steps(p, e.dt)
    if len(e) <= k:
        raise ValueError(f"episode {e.id} has {len(e)} steps, needs more than {k} for a {p.history} s history")
    lead = perceived_lead_trajectory(e.lead, e.attention).as_trajectory() if use_counterfactual else e.lead
    out = np.full(len(e), np.nan)
    rows = getattr(forecaster, "rows", None)
    if rows is not None:
        if not p.horizon > 0:
            raise ValueError(f"horizon must be positive, got {p.horizon}")
        n = int(round(p.horizon / e.dt))
        (ex, ey, eh, _), (lx, ly, _, _) = rows(_Rows.windows(e.ego, k), _Rows.windows(lead, k), n, e.dt)
        out[k:] = gaps_along_heading(ex, ey, eh, lx, ly, e.ego_length, e.lead_length).min(axis=1)
        return out
    for i in range(k, len(e)):
        req = ForecastRequest(
            ego_history=e.ego.slice(i - k, i + 1),
            lead_history=lead.slice(i - k, i + 1),
            horizon=p.horizon,
            episode_id=e.id,
            timestep_index=i,
        )
        out[i] = min_future_gap(forecaster(req), e.ego_length, e.lead_length)
    return out


def evaluate_forecast_fcw(e: Episode, forecaster: Forecaster, p: FcwParams, use_counterfactual: bool) -> WarningTrace:
    gaps = forecast_min_gaps(e, forecaster, p, use_counterfactual)
    # NaN compares False, so pre-history steps never warn
    with np.errstate(invalid="ignore"):
        mask = gaps < p.min_gap_warn
    return WarningTrace.from_mask(mask, e.dt, e.start_time)


# --- file-backed forecasts -------------------------------------------------

def _states_to_json(t: Trajectory) -> list[dict]:
    return [
        {"x_m": float(x), "y_m": float(y), "heading_rad": float(h), "speed_mps": float(v)}
        for x, y, h, v in zip(t.x, t.y, t.heading, t.speed)
    ]


def _states_from_json(rows, dt: float, where: str) -> Trajectory:
    try:
        return Trajectory(
            dt=dt,
            start_time=0.0,
            x=[r["x_m"] for r in rows],
            y=[r["y_m"] for r in rows],
            heading=[r["heading_rad"] for r in rows],
            speed=[r["speed_mps"] for r in rows],
        )
    except (KeyError, TypeError) as exc:
        raise ForecastDataError(f"{where}: malformed state ({exc})") from exc


def forecast_record(episode_id: str, timestep_index: int, f: Forecast) -> dict:
    return {
        "episode_id": episode_id,
        "timestep_index": int(timestep_index),
        "dt_s": f.ego_future.dt,
        "ego_future": _states_to_json(f.ego_future),
        "lead_future": _states_to_json(f.lead_future),
    }


def save_forecasts(path, records: Mapping[tuple[str, int], Forecast]) -> None:
    with open(path, "w") as fh:
        for (eid, i) in sorted(records):
            fh.write(json.dumps(forecast_record(eid, i, records[(eid, i)])) + "\n")


def load_external_forecasts(path) -> dict[tuple[str, int], Forecast]:
    out: dict[tuple[str, int], Forecast] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                rec = json.loads(line)
                key = (str(rec["episode_id"]), int(rec["timestep_index"]))
                dt = float(rec["dt_s"])
                ego = _states_from_json(rec["ego_future"], dt, where)
                lead = _states_from_json(rec["lead_future"], dt, where)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ForecastDataError(f"{where}: cannot parse forecast record ({exc})") from exc
            if len(ego) != len(lead) or len(ego) == 0:
                raise ForecastDataError(f"{where}: ego/lead futures must be non-empty and equal length")
            out[key] = Forecast(ego, lead)
    return out


class ExternalForecaster:
    """Serves precomputed forecasts keyed by (episode id, timestep index)."""

    def __init__(self, forecasts: Mapping[tuple[str, int], Forecast]):
        self.forecasts = forecasts

    @classmethod
    def from_file(cls, path) -> "ExternalForecaster":
        return cls(load_external_forecasts(path))

    def __call__(self, r: ForecastRequest) -> Forecast:
        key = (r.episode_id, r.timestep_index)
        try:
            f = self.forecasts[key]
        except KeyError:
            raise ForecastDataError(
                f"no external forecast for episode {r.episode_id!r} timestep {r.timestep_index}"
            ) from None
        if not math.isclose(f.ego_future.dt, r.dt, rel_tol=1e-9):
            raise ForecastDataError(
                f"forecast for episode {r.episode_id!r} timestep {r.timestep_index} has dt {f.ego_future.dt}, "
                f"expected {r.dt}"
            )
        return f


class RecordingForecaster:
    """Wraps a forecaster and keeps every output, for exporting to a forecast file."""

    def __init__(self, inner: Forecaster):
        self.inner = inner
        self.records: dict[tuple[str, int], Forecast] = {}

    def __call__(self, r: ForecastRequest) -> Forecast:
        f = self.inner(r)
        self.records[(r.episode_id, r.timestep_index)] = f
        return f
