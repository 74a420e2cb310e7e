import sys

import numpy as np
import pytest

from attnfcw.kinematics import Annotation, AttentionTrace, Episode, Trajectory
from attnfcw.synthgen import build_suite


def straight_episode(ego_x, ego_v, lead_x, lead_v, attended=None, dt=0.1, start_time=0.0,
                     votes=(True, True, True), eid="ep", lengths=(4.0, 4.0), deployed=None):
    n = len(ego_x)
    if attended is None:
        attended = np.ones(n, dtype=bool)
    if deployed is None:
        deployed = start_time + min(5.0, (n - 1) * dt)
    return Episode(
        id=eid,
        dt=dt,
        ego=Trajectory.straight(ego_x, ego_v, dt, start_time),
        lead=Trajectory.straight(lead_x, lead_v, dt, start_time),
        attention=AttentionTrace(dt, start_time, attended),
        annotation=Annotation(tuple(votes)),
        deployed_fcw_time=deployed,
        ego_length=lengths[0],
        lead_length=lengths[1],
    )


def constant_speed_episode(n=150, dt=0.1, ego_v=20.0, lead_v=20.0, gap=30.0, attended=None, **kw):
    t = np.arange(n) * dt
    lengths = kw.pop("lengths", (4.0, 4.0))
    lead0 = gap + 0.5 * sum(lengths)
    return straight_episode(ego_v * t, np.full(n, ego_v), lead0 + lead_v * t, np.full(n, lead_v),
                            attended, dt=dt, lengths=lengths, **kw)


@pytest.fixture(scope="session")
def suite():
    return build_suite(25, seed=7)


@pytest.fixture(scope="session")
def suite_by_kind(suite):
    out = {}
    for entry in suite:
        out.setdefault(entry.spec.kind, []).append(entry)
    return out


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        terminalreporter.write_line(results[num])
