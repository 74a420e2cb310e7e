"""Command-line entry point: generate, evaluate, sweep, trace.

Exit codes: 0 success, 1 usage/config error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .counterfactual import counterfactual_speeds
from .episode_io import EpisodeFormatError, load_episode_dir, write_episodes
from .evaluation import UndefinedRateError, evaluate_method
from .forecasting import ForecastDataError, forecast_min_gaps
from .kinematics import EpisodeValidationError
from .methods import DISPLAY_NAMES, FORECASTER_NAMES, METHOD_NAMES, make_forecaster, make_method
from .synthgen import LABEL_THRESHOLD, ScenarioSpec, build_suite
from .warning import FcwParams, attention_aware_warning_distance, sda_warning_distance

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 1, 2


class ConfigError(ValueError):
    pass


# ConfigError is caught first, so the trailing ValueError only sees data problems
DATA_ERRORS = (EpisodeFormatError, EpisodeValidationError, UndefinedRateError, ForecastDataError,
               FileNotFoundError, NotADirectoryError, ValueError)


def read_key_values(path) -> dict[str, str]:
    """Parse `key = value` lines; blank lines and # comments are skipped."""
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in out:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _opt_path(v) -> Optional[str]:
    if v is None:
        return None
    v = str(v).strip()
    return None if v in ("", "none", "None") else v


def _number(key: str, v) -> float:
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number, got {v!r}") from None


def _integer(key: str, v) -> int:
    try:
        return int(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected an integer, got {v!r}") from None


def make_params(values: dict) -> FcwParams:
    try:
        return FcwParams(**{k: _number(k, v) for k, v in values.items()})
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class RunConfig:
    method: str = "attention_aware"
    forecaster: str = "constant_velocity"
    params: FcwParams = field(default_factory=FcwParams)
    episode_dir: Optional[str] = None
    output: Optional[str] = None
    external_forecasts: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHOD_NAMES:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {', '.join(METHOD_NAMES)}")
        if self.forecaster not in FORECASTER_NAMES:
            raise ConfigError(f"unknown forecaster {self.forecaster!r}; expected one of {', '.join(FORECASTER_NAMES)}")
        if self.forecaster == "external" and self.external_forecasts is None:
            raise ConfigError("forecaster 'external' requires external_forecasts")

    _TOP = ("method", "forecaster", "episode_dir", "output", "external_forecasts", "seed")

    @classmethod
    def from_mapping(cls, m: dict) -> "RunConfig":
        unknown = set(m) - set(cls._TOP) - set(FcwParams.field_names())
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        params = make_params({k: v for k, v in m.items() if k in FcwParams.field_names()})
        kw = {}
        for k in ("method", "forecaster"):
            if k in m:
                kw[k] = str(m[k]).strip()
        for k in ("episode_dir", "output", "external_forecasts"):
            if k in m:
                kw[k] = _opt_path(m[k])
        if "seed" in m:
            kw["seed"] = _integer("seed", m["seed"])
        return cls(params=params, **kw)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        return cls.from_mapping(read_key_values(path))

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self._TOP}
        d.update(asdict(self.params))
        return d


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    overrides = {}
    if getattr(args, "method", None):
        overrides["method"] = args.method
    if getattr(args, "episodes", None):
        overrides["episode_dir"] = args.episodes
    if getattr(args, "out", None):
        overrides["output"] = args.out
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if overrides:
        cfg = RunConfig.from_mapping({**cfg.to_dict(), **overrides})
    return cfg


def _episodes(cfg: RunConfig):
    if cfg.episode_dir is None:
        raise ConfigError("no episode directory: set episode_dir or pass --episodes")
    return load_episode_dir(cfg.episode_dir)


def _method(cfg: RunConfig):
    forecaster = None
    if cfg.method.startswith("forecast_"):
        forecaster = make_forecaster(cfg.forecaster, cfg.params, cfg.external_forecasts)
    return make_method(cfg.method, forecaster)


def _write_text(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


# --- generate --------------------------------------------------------------

GENERATE_KEYS = ("n_per_kind", "seed", "ego_speed", "duration", "dt", "label_threshold")


def cmd_generate(spec_file: Optional[str], out_dir: str, seed: Optional[int] = None) -> int:
    """Write a synthetic suite and its manifest; returns the number of episodes."""
    raw = read_key_values(spec_file) if spec_file else {}
    unknown = set(raw) - set(GENERATE_KEYS) - set(FcwParams.field_names())
    if unknown:
        raise ConfigError(f"unknown generate key(s): {', '.join(sorted(unknown))}")
    params = make_params({k: v for k, v in raw.items() if k in FcwParams.field_names()})
    n_per_kind = _integer("n_per_kind", raw.get("n_per_kind", 25))
    if n_per_kind < 1:
        raise ConfigError(f"n_per_kind must be >= 1, got {n_per_kind}")
    if seed is None:
        seed = _integer("seed", raw.get("seed", 0))
    base = ScenarioSpec(
        ego_speed=_number("ego_speed", raw.get("ego_speed", 20.0)),
        duration=_number("duration", raw.get("duration", 15.0)),
        dt=_number("dt", raw.get("dt", 0.1)),
    )
    label_threshold = _number("label_threshold", raw.get("label_threshold", LABEL_THRESHOLD))
    try:
        suite = build_suite(n_per_kind, base, seed, params, label_threshold)
    except ValueError as exc:
        raise ConfigError(f"invalid scenario spec: {exc}") from exc
    episodes = [x.episode for x in suite]
    rows = [(x.episode.id, x.spec.kind, x.spec.seed, int(x.label)) for x in suite]
    try:
        write_episodes(episodes, out_dir)
        with open(Path(out_dir) / "manifest.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["id", "kind", "seed", "label"])
            w.writerows(rows)
    except OSError as exc:
        raise ConfigError(f"cannot write to {out_dir}: {exc}") from exc
    return len(episodes)


# --- evaluate / sweep ------------------------------------------------------

def cmd_evaluate(cfg: RunConfig):
    episodes = _episodes(cfg)
    report = evaluate_method(episodes, _method(cfg), cfg.params, name=cfg.method)
    doc = {"config": cfg.to_dict(), "display_name": DISPLAY_NAMES[cfg.method], "report": report.to_dict()}
    if cfg.output is not None:
        _write_text(cfg.output, json.dumps(doc, indent=1) + "\n")
    print(report.summary_line())
    return report


SWEEP_COLUMNS = ("param", "value", "method", "uar", "tpr", "tnr", "buffer_mean", "buffer_n", "tp", "fp", "tn", "fn")


def cmd_sweep(cfg: RunConfig, param: str, values: list[float]):
    if param not in FcwParams.field_names():
        raise ConfigError(f"unknown parameter {param!r}; expected one of {', '.join(FcwParams.field_names())}")
    if not values:
        raise ConfigError("sweep needs at least one value")
    episodes = _episodes(cfg)
    reports = []
    for v in values:
        try:
            p = replace(cfg.params, **{param: v})
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        run = replace(cfg, params=p)
        reports.append((v, evaluate_method(episodes, _method(run), p, name=cfg.method)))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for v, r in reports:
        c = r.counts
        w.writerow([param, repr(float(v)), r.method, repr(r.uar), repr(r.tpr), repr(r.tnr),
                    "" if r.buffer_mean is None else repr(r.buffer_mean), r.buffer_n, c.tp, c.fp, c.tn, c.fn])
    _write_text(cfg.output, buf.getvalue())
    return reports


# --- trace -----------------------------------------------------------------

TRACE_COLUMNS = ("t_s", "gap_m", "d_w_conventional_m", "d_w_attention_m", "v_lead_mps", "v_hat_lead_mps",
                 "attended", "min_future_gap_m", "warn")


def trace_rows(e, cfg: RunConfig) -> list[list]:
    p = cfg.params
    gaps = e.gaps()
    v_hat = counterfactual_speeds(e.lead, e.attention)
    d_conv = sda_warning_distance(e.ego.speed, e.lead.speed, p)
    d_att = attention_aware_warning_distance(e.ego.speed, e.lead.speed, v_hat, p)
    forecaster = make_forecaster(cfg.forecaster, p, cfg.external_forecasts)
    use_cf = cfg.method in ("forecast_driver_attn", "attention_aware")
    min_gaps = forecast_min_gaps(e, forecaster, p, use_counterfactual=use_cf)
    warn = _method(cfg)(e, p).warn
    rows = []
    for i, t in enumerate(e.times.tolist()):
        mg = "" if np.isnan(min_gaps[i]) else repr(float(min_gaps[i]))
        rows.append([repr(round(t, 9)), repr(float(gaps[i])), repr(float(d_conv[i])), repr(float(d_att[i])),
                     repr(float(e.lead.speed[i])), repr(float(v_hat[i])), int(e.attention.attended[i]), mg,
                     int(warn[i])])
    return rows


def cmd_trace(cfg: RunConfig, episode_id: str) -> int:
    episodes = {e.id: e for e in _episodes(cfg)}
    if episode_id not in episodes:
        raise ConfigError(f"unknown episode id {episode_id!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    rows = trace_rows(episodes[episode_id], cfg)
    w.writerows(rows)
    _write_text(cfg.output, buf.getvalue())
    return len(rows)


# --- argument parsing ------------------------------------------------------

def _float_list(text: str) -> list[float]:
    parts = [s for s in text.split(",") if s.strip()]
    try:
        return [float(s) for s in parts]
    except ValueError:
        raise ConfigError(f"--values: not a comma-separated list of numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="attnfcw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a seeded synthetic episode suite")
    g.add_argument("--config", help="generation spec (key = value)")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--seed", type=int)

    for name, help_ in (("evaluate", "score one method over an episode directory"),
                        ("sweep", "score one method across values of a parameter"),
                        ("trace", "per-step diagnostic CSV for one episode")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", help="run config (key = value)")
        s.add_argument("--episodes", help="episode directory")
        s.add_argument("--out", help="output path (stdout when omitted for CSV outputs)")
        s.add_argument("--method", choices=METHOD_NAMES)
        s.add_argument("--seed", type=int)
        if name == "sweep":
            s.add_argument("--param", required=True)
            s.add_argument("--values", required=True)
        if name == "trace":
            s.add_argument("--episode-id", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        if args.command == "generate":
            n = cmd_generate(args.config, args.out, args.seed)
            print(f"wrote {n} episodes to {args.out}")
            return EXIT_OK
        cfg = _load_config(args)
        if args.command == "evaluate":
            cmd_evaluate(cfg)
        elif args.command == "sweep":
            cmd_sweep(cfg, args.param, _float_list(args.values))
        elif args.command == "trace":
            cmd_trace(cfg, args.episode_id)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
