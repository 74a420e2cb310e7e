import json

import numpy as np
import pytest

from attnfcw.counterfactual import perceived_lead_trajectory
from attnfcw.episode_io import (
    EpisodeFormatError,
    episode_from_dict,
    episode_to_dict,
    load_episode,
    load_episode_dir,
    perceived_to_csv,
    save_episode,
    write_episodes,
)
from attnfcw.kinematics import validate_episode


def test_round_trip_exact(tmp_path, suite):
    e = suite[0].episode
    p = tmp_path / "e.json"
    save_episode(e, p)
    assert load_episode(p) == e


def test_dir_loader_sorts_by_id(tmp_path, suite):
    eps = [s.episode for s in suite[:6]]
    write_episodes(reversed(eps), tmp_path)
    loaded = load_episode_dir(tmp_path)
    assert [e.id for e in loaded] == sorted(e.id for e in eps)


def test_missing_or_empty_dir(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_episode_dir(tmp_path / "nope")
    with pytest.raises(FileNotFoundError):
        load_episode_dir(tmp_path)


def _fine_dict(dt=0.05, n=301, speeds=True):
    t = np.arange(n) * dt
    frames = []
    for ti in t:
        ego = {"x_m": 15.0 * ti, "y_m": 0.0, "heading_rad": 0.0}
        lead = {"x_m": 40.0 + 12.0 * ti, "y_m": 0.0, "heading_rad": 0.0}
        if speeds:
            ego["speed_mps"] = 15.0
            lead["speed_mps"] = 12.0
        frames.append({"t_s": float(ti), "ego": ego, "lead": lead, "attended": bool(ti < 3.0 or ti >= 5.0)})
    return {"schema_version": 1, "id": "fine", "dt_s": dt, "frames": frames,
            "annotation": {"votes": [True, True, False]}}


def test_resamples_to_canonical_grid():
    e = episode_from_dict(_fine_dict())
    assert e.dt == 0.1
    assert len(e) == 151
    np.testing.assert_allclose(e.ego.x, 15.0 * np.arange(151) * 0.1, atol=1e-9)
    att = np.asarray(e.attention.attended)
    assert not att[30:50].any() and att[:30].all() and att[50:].all()
    assert validate_episode(e) == []


def test_missing_speeds_derived_from_positions():
    e = episode_from_dict(_fine_dict(speeds=False), dt_target=None)
    np.testing.assert_allclose(e.ego.speed, 15.0, atol=1e-9)
    np.testing.assert_allclose(e.lead.speed, 12.0, atol=1e-9)


@pytest.mark.parametrize("mutate, msg", [
    (lambda d: d.update(schema_version=2), "schema_version"),
    (lambda d: d.pop("frames"), "frames"),
    (lambda d: d["frames"][3].update(t_s=0.0), "increasing"),
    (lambda d: d["frames"][2]["ego"].pop("x_m"), "ego.x_m"),
    (lambda d: d["frames"][1].pop("attended"), "attended"),
    (lambda d: d.update(dt_s=0.07), "uniformly"),
])
def test_format_errors(mutate, msg):
    d = _fine_dict()
    mutate(d)
    with pytest.raises(EpisodeFormatError, match=msg):
        episode_from_dict(d, "x.json")


def test_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{")
    with pytest.raises(EpisodeFormatError, match="bad.json"):
        load_episode(p)


def test_dict_has_rounded_timestamps(suite):
    d = episode_to_dict(suite[0].episode)
    assert d["frames"][3]["t_s"] == 0.3
    assert json.loads(json.dumps(d)) == d


def test_perceived_csv(tmp_path, suite):
    e = suite[0].episode
    pt = perceived_lead_trajectory(e.lead, e.attention)
    p = tmp_path / "p.csv"
    perceived_to_csv(pt, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "t_s,x_m,y_m,speed_mps,observed"
    assert len(lines) == len(e) + 1
