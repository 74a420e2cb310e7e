"""The six compared warning methods, keyed by their CLI names."""

from __future__ import annotations

from typing import Optional

from .evaluation import Method
from .forecasting import (
    ExternalForecaster,
    Forecaster,
    evaluate_forecast_fcw,
    forecast_constant_acceleration,
    forecast_constant_velocity,
    worst_case_brake_forecaster,
)
from .warning import (
    FcwParams,
    evaluate_attend_gaze_only,
    evaluate_attend_gaze_scene,
    evaluate_attention_aware,
    evaluate_sda,
)

METHOD_NAMES = (
    "sda",
    "attention_aware",
    "attend_gaze",
    "attend_gaze_scene",
    "forecast_full_attn",
    "forecast_driver_attn",
)

DISPLAY_NAMES = {
    "attend_gaze": "AttenD (gaze-only)",
    "attend_gaze_scene": "AttenD (gaze+scene)",
    "forecast_full_attn": "Learned (Full Attn)",
    "forecast_driver_attn": "Learned (Driver Attn)",
    "sda": "Conventional FCW",
    "attention_aware": "Attention-aware FCW",
}

FORECASTER_NAMES = ("constant_velocity", "constant_acceleration", "worst_case_brake", "external")


def make_forecaster(name: str, params: FcwParams, external_path=None) -> Forecaster:
    if name == "constant_velocity":
        return forecast_constant_velocity
    if name == "constant_acceleration":
        return forecast_constant_acceleration
    if name == "worst_case_brake":
        return worst_case_brake_forecaster(params.a_lead_max)
    if name == "external":
        if external_path is None:
            raise ValueError("forecaster 'external' requires an external_forecasts path")
        return ExternalForecaster.from_file(external_path)
    raise ValueError(f"unknown forecaster {name!r}; expected one of {FORECASTER_NAMES}")


def make_method(name: str, forecaster: Optional[Forecaster] = None) -> Method:
    simple = {
        "sda": evaluate_sda,
        "attention_aware": evaluate_attention_aware,
        "attend_gaze": evaluate_attend_gaze_only,
        "attend_gaze_scene": evaluate_attend_gaze_scene,
    }
    if name in simple:
        return simple[name]
    if name in ("forecast_full_attn", "forecast_driver_attn"):
        if forecaster is None:
            forecaster = forecast_constant_velocity
        use_cf = name == "forecast_driver_attn"

        def method(e, p):
            return evaluate_forecast_fcw(e, forecaster, p, use_counterfactual=use_cf)

        method.__name__ = name
        return method
    raise ValueError(f"unknown method {name!r}; expected one of {METHOD_NAMES}")
