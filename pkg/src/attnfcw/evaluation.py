"""Episode-level scoring of warning methods: TPR, TNR, UAR and FCW buffer time."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .kinematics import Episode
from .warning import FcwParams, WarningTrace, first_warning_time

Method = Callable[[Episode, FcwParams], WarningTrace]


class UndefinedRateError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class EpisodeResult:
    id: str
    label: bool
    warned: bool
    first_warning_time: Optional[float]
    buffer: Optional[float]
    preferred_times: tuple[Optional[float], ...] = ()


@dataclass(frozen=True)
class EvaluationReport:
    method: str
    counts: ConfusionCounts
    tpr: float
    tnr: float
    uar: float
    buffer_mean: Optional[float]
    buffer_n: int
    per_episode: tuple[EpisodeResult, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_episode"] = [asdict(r) for r in self.per_episode]
        for r in d["per_episode"]:
            r["preferred_times"] = list(r["preferred_times"])
        return d

    def summary_line(self) -> str:
        buf = "n/a" if self.buffer_mean is None else f"{self.buffer_mean:.3f}"
        return (
            f"{self.method:<22} UAR {self.uar:.3f}  TPR {self.tpr:.3f}  TNR {self.tnr:.3f}  "
            f"buffer {buf} ({self.buffer_n})"
        )

    def per_episode_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["id", "label", "warned", "first_warning_time_s", "buffer_s"])
            for r in self.per_episode:
                w.writerow([
                    r.id,
                    int(r.label),
                    int(r.warned),
                    "" if r.first_warning_time is None else repr(r.first_warning_time),
                    "" if r.buffer is None else repr(r.buffer),
                ])


def majority_validity(votes: Sequence[bool]) -> bool:
    """Strict majority; ties on an even panel count as not valid."""
    votes = list(votes)
    if not votes:
        raise ValueError("cannot take a majority of zero votes")
    return 2 * sum(bool(v) for v in votes) > len(votes)


def classify_episode(trace: WarningTrace) -> bool:
    return any(trace.warn)


def rates(c: ConfusionCounts) -> tuple[float, float, float]:
    if c.tp + c.fn == 0:
        raise UndefinedRateError("TPR undefined: no warning-needed episodes")
    if c.tn + c.fp == 0:
        raise UndefinedRateError("TNR undefined: no warning-not-needed episodes")
    tpr = c.tp / (c.tp + c.fn)
    tnr = c.tn / (c.tn + c.fp)
    return tpr, tnr, (tpr + tnr) / 2


def uar_from_rates(tpr: float, tnr: float) -> float:
    return (tpr + tnr) / 2


def buffer_time(trace: WarningTrace, deployed: float) -> Optional[float]:
    """Seconds by which the first warning precedes the deployed alert (negative if later)."""
    t = first_warning_time(trace)
    if t is None:
        return None
    return round(deployed - t, 9)


def evaluate_method(episodes: Iterable[Episode], method: Method, p: FcwParams, name: str = "") -> EvaluationReport:
    results = []
    for e in sorted(episodes, key=lambda e: e.id):
        trace = method(e, p)
        label = majority_validity(e.annotation.validity_votes)
        warned = classify_episode(trace)
        results.append(EpisodeResult(
            id=e.id,
            label=label,
            warned=warned,
            first_warning_time=first_warning_time(trace),
            buffer=buffer_time(trace, e.deployed_fcw_time),
            preferred_times=e.annotation.preferred_times,
        ))
    return report_from_results(name or getattr(method, "__name__", "method"), results)


def report_from_results(name: str, results: Sequence[EpisodeResult]) -> EvaluationReport:
    tp = sum(r.label and r.warned for r in results)
    fn = sum(r.label and not r.warned for r in results)
    tn = sum(not r.label and not r.warned for r in results)
    fp = sum(not r.label and r.warned for r in results)
    counts = ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)
    tpr, tnr, uar = rates(counts)
    # buffer is only scored on correctly triggered warnings
    buffers = [r.buffer for r in results if r.label and r.warned]
    buffer_mean = sum(buffers) / len(buffers) if buffers else None
    return EvaluationReport(name, counts, tpr, tnr, uar, buffer_mean, len(buffers), tuple(results))
