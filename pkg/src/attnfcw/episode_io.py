"""Episode JSON files and CSV exports.

Episode files hold one episode each (schema_version 1). Inputs sampled at
any uniform rate are resampled onto the canonical 0.1 s grid on load.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path
from typing import Iterable

import numpy as np

from .counterfactual import PerceivedTrajectory
from .kinematics import (
    CANONICAL_DT,
    DEFAULT_VEHICLE_LENGTH,
    DEPLOYED_FCW_TIME,
    Annotation,
    AttentionTrace,
    Episode,
    Trajectory,
    resample,
    resample_attention,
    speeds_from_positions,
)

SCHEMA_VERSION = 1


class EpisodeFormatError(ValueError):
    pass


def _vehicle(t: Trajectory, i: int) -> dict:
    return {
        "x_m": float(t.x[i]),
        "y_m": float(t.y[i]),
        "heading_rad": float(t.heading[i]),
        "speed_mps": float(t.speed[i]),
    }


def episode_to_dict(e: Episode) -> dict:
    times = e.times.tolist()
    frames = [
        {"t_s": round(times[i], 9), "ego": _vehicle(e.ego, i), "lead": _vehicle(e.lead, i),
         "attended": bool(e.attention.attended[i])}
        for i in range(len(e))
    ]
    return {
        "schema_version": SCHEMA_VERSION,
        "id": e.id,
        "dt_s": e.dt,
        "deployed_fcw_time_s": e.deployed_fcw_time,
        "ego_length_m": e.ego_length,
        "lead_length_m": e.lead_length,
        "frames": frames,
        "annotation": {
            "votes": list(e.annotation.validity_votes),
            "preferred_times_s": list(e.annotation.preferred_times),
        },
    }


def _column(frames, who: str, key: str, where: str):
    try:
        return [f[who][key] for f in frames]
    except KeyError as exc:
        raise EpisodeFormatError(f"{where}: frame missing {who}.{exc.args[0]}") from None


def episode_from_dict(d: dict, where: str = "<episode>", dt_target: float = CANONICAL_DT) -> Episode:
    if d.get("schema_version") != SCHEMA_VERSION:
        raise EpisodeFormatError(f"{where}: unsupported schema_version {d.get('schema_version')!r}")
    try:
        eid = str(d["id"])
        dt = float(d["dt_s"])
        frames = d["frames"]
        ann = d["annotation"]
        votes = ann["votes"]
    except KeyError as exc:
        raise EpisodeFormatError(f"{where}: missing key {exc.args[0]!r}") from None
    if not frames:
        raise EpisodeFormatError(f"{where}: no frames")
    if not dt > 0:
        raise EpisodeFormatError(f"{where}: dt_s must be positive")
    t = np.array([f["t_s"] for f in frames], dtype=float)
    if np.any(np.diff(t) <= 0):
        raise EpisodeFormatError(f"{where}: timestamps must be strictly increasing")
    if not np.allclose(np.diff(t), dt, atol=1e-6):
        raise EpisodeFormatError(f"{where}: frames are not uniformly spaced at dt_s={dt}")

    def trajectory(who: str) -> Trajectory:
        x = _column(frames, who, "x_m", where)
        y = _column(frames, who, "y_m", where)
        heading = _column(frames, who, "heading_rad", where)
        if all("speed_mps" in f[who] for f in frames):
            speed = [f[who]["speed_mps"] for f in frames]
        else:
            speed = speeds_from_positions(x, y, dt)
        return Trajectory(dt, float(t[0]), x, y, heading, speed)

    ego = trajectory("ego")
    lead = trajectory("lead")
    try:
        attention = AttentionTrace(dt, float(t[0]), [bool(f["attended"]) for f in frames])
    except KeyError:
        raise EpisodeFormatError(f"{where}: frame missing 'attended'") from None
    if dt_target is not None and abs(dt - dt_target) > 1e-12:
        ego = resample(ego, dt_target)
        lead = resample(lead, dt_target)
        attention = resample_attention(attention, dt_target, len(ego))
        dt = dt_target

    preferred = ann.get("preferred_times_s") or [None] * len(votes)
    return Episode(
        id=eid,
        dt=dt,
        ego=ego,
        lead=lead,
        attention=attention,
        annotation=Annotation(tuple(bool(v) for v in votes), tuple(preferred)),
        deployed_fcw_time=float(d.get("deployed_fcw_time_s", DEPLOYED_FCW_TIME)),
        ego_length=float(d.get("ego_length_m", DEFAULT_VEHICLE_LENGTH)),
        lead_length=float(d.get("lead_length_m", DEFAULT_VEHICLE_LENGTH)),
    )


def save_episode(e: Episode, path) -> None:
    with open(path, "w") as fh:
        json.dump(episode_to_dict(e), fh, indent=1)
        fh.write("\n")


def load_episode(path, dt_target: float = CANONICAL_DT) -> Episode:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise EpisodeFormatError(f"{path}: invalid JSON ({exc})") from exc
    return episode_from_dict(d, str(path), dt_target)


def load_episode_dir(directory, dt_target: float = CANONICAL_DT) -> list[Episode]:
    """All *.json episodes in a directory, sorted by episode id."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"episode directory not found: {directory}")
    episodes = [load_episode(p, dt_target) for p in sorted(directory.glob("*.json"))]
    if not episodes:
        raise FileNotFoundError(f"no episode files in {directory}")
    return sorted(episodes, key=lambda e: e.id)


def write_episodes(episodes: Iterable[Episode], directory) -> list[Path]:
    os.makedirs(directory, exist_ok=True)
    paths = []
    for e in episodes:
        p = Path(directory) / f"{e.id}.json"
        save_episode(e, p)
        paths.append(p)
    return paths


def perceived_to_csv(pt: PerceivedTrajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_s", "x_m", "y_m", "speed_mps", "observed"])
        for t, x, y, v, o in zip(pt.times.tolist(), pt.x.tolist(), pt.y.tolist(), pt.speed.tolist(),
                                 pt.observed.tolist()):
            w.writerow([repr(t), repr(x), repr(y), repr(v), int(o)])
