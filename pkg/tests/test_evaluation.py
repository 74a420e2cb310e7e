import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from attnfcw.evaluation import (
    ConfusionCounts,
    EpisodeResult,
    UndefinedRateError,
    buffer_time,
    classify_episode,
    evaluate_method,
    majority_validity,
    rates,
    report_from_results,
)
from attnfcw.warning import (
    FcwParams,
    WarningTrace,
    evaluate_attention_aware,
    evaluate_sda,
)

P = FcwParams()


def test_majority_vote():
    assert majority_validity([True, True, False])
    assert not majority_validity([False, False, True])
    assert not majority_validity([True, False])
    with pytest.raises(ValueError):
        majority_validity([])


def test_classify_episode():
    assert not classify_episode(WarningTrace(0.1, 0.0, [False] * 5))
    assert classify_episode(WarningTrace(0.1, 0.0, [False] * 4 + [True]))
    assert classify_episode(WarningTrace(0.1, 0.0, [True] + [False] * 60))


def test_rates_worked_example():
    tpr, tnr, uar = rates(ConfusionCounts(tp=3, fn=1, tn=4, fp=1))
    assert (tpr, tnr) == (0.75, 0.8)
    assert uar == pytest.approx(0.775, abs=1e-12)


def test_rates_total_failure():
    assert rates(ConfusionCounts(tp=0, fn=4, tn=0, fp=3)) == (0.0, 0.0, 0.0)


def test_rates_missing_class_names_it():
    with pytest.raises(UndefinedRateError, match="TPR"):
        rates(ConfusionCounts(tn=3, fp=1))
    with pytest.raises(UndefinedRateError, match="TNR"):
        rates(ConfusionCounts(tp=3, fn=1))


@given(st.integers(0, 500), st.integers(0, 500), st.integers(0, 500), st.integers(0, 500))
def test_rates_exact_and_bounded(tp, fn, tn, fp):
    c = ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)
    if tp + fn == 0 or tn + fp == 0:
        with pytest.raises(UndefinedRateError):
            rates(c)
        return
    tpr, tnr, uar = rates(c)
    assert 0 <= tpr <= 1 and 0 <= tnr <= 1
    exact = (Fraction(tp, tp + fn) + Fraction(tn, tn + fp)) / 2
    assert abs(uar - float(exact)) <= 1e-12
    assert c.total == tp + fn + tn + fp


def test_buffer_time():
    w = [False] * 45 + [True] * 10
    assert buffer_time(WarningTrace(0.1, 0.0, w), 5.0) == 0.5
    assert buffer_time(WarningTrace(0.1, 0.0, [False] * 80), 5.0) is None
    late = [False] * 58 + [True]
    assert buffer_time(WarningTrace(0.1, 0.0, late), 5.0) == -0.8


def _label(e):
    return majority_validity(e.annotation.validity_votes)


def test_perfect_method(suite):
    episodes = [s.episode for s in suite]

    def oracle(e, p):
        return WarningTrace(e.dt, e.start_time, [_label(e)] * len(e))

    r = evaluate_method(episodes, oracle, P)
    assert (r.tpr, r.tnr, r.uar) == (1.0, 1.0, 1.0)
    assert r.buffer_n == r.counts.tp
    assert r.buffer_mean == pytest.approx(5.0)


def test_never_warn_method(suite):
    episodes = [s.episode for s in suite]
    r = evaluate_method(episodes, lambda e, p: WarningTrace(e.dt, e.start_time, [False] * len(e)), P)
    assert (r.tpr, r.tnr, r.uar) == (0.0, 1.0, 0.5)
    assert r.buffer_n == 0 and r.buffer_mean is None


def test_report_invariants(suite):
    episodes = [s.episode for s in suite]
    for method in (evaluate_sda, evaluate_attention_aware):
        r = evaluate_method(episodes, method, P)
        assert r.counts.total == len(episodes)
        assert r.buffer_n == r.counts.tp
        assert r.uar == (r.tpr + r.tnr) / 2
        assert [x.id for x in r.per_episode] == sorted(e.id for e in episodes)
        assert r == evaluate_method(list(reversed(episodes)), method, P)
        json.dumps(r.to_dict())


def test_buffer_only_from_true_positives():
    results = [
        EpisodeResult("a", True, True, 4.5, 0.5),
        EpisodeResult("b", True, False, None, None),
        EpisodeResult("c", False, True, 1.0, 4.0),
        EpisodeResult("d", False, False, None, None),
        EpisodeResult("e", True, True, 5.8, -0.8),
    ]
    r = report_from_results("m", results)
    assert r.buffer_n == 2 == r.counts.tp
    assert r.buffer_mean == pytest.approx(-0.15)


def test_attention_aware_buffer_not_below_sda_on_brake_subset(suite_by_kind):
    episodes = [s.episode for s in suite_by_kind["brake_during_inattention"]]
    # brake-only subset has no negatives; score it alongside the nominal ones
    negatives = [s.episode for s in suite_by_kind["nominal_following"]]
    aware = evaluate_method(episodes + negatives, evaluate_attention_aware, P)
    conv = evaluate_method(episodes + negatives, evaluate_sda, P)
    brake_ids = {e.id for e in episodes}
    a = [r.buffer for r in aware.per_episode if r.id in brake_ids and r.buffer is not None]
    c = [r.buffer for r in conv.per_episode if r.id in brake_ids and r.buffer is not None]
    assert len(a) == len(c) == len(episodes)
    assert sum(a) / len(a) >= sum(c) / len(c)


def test_per_episode_csv(tmp_path, suite):
    r = evaluate_method([s.episode for s in suite[:60]], evaluate_sda, P)
    path = tmp_path / "r.csv"
    r.per_episode_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "id,label,warned,first_warning_time_s,buffer_s"
    assert len(lines) == 61
