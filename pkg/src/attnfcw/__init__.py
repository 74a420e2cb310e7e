"""Attention-aware forward collision warning.

Conventional and attention-aware stop-distance warnings, AttenD gaze buffers,
forecast-based warnings, a seeded synthetic episode generator and the scoring
used to compare them.
"""

from .counterfactual import PerceivedTrajectory, counterfactual_speed_at, perceived_lead_trajectory
from .evaluation import ConfusionCounts, EvaluationReport, evaluate_method, rates
from .forecasting import (
    Forecast,
    ForecastRequest,
    evaluate_forecast_fcw,
    forecast_constant_acceleration,
    forecast_constant_velocity,
    forecast_worst_case_brake,
    load_external_forecasts,
    min_future_gap,
)
from .kinematics import Annotation, AttentionTrace, Episode, Trajectory, VehicleState, validate_episode
from .methods import METHOD_NAMES, make_method
from .synthgen import ScenarioSpec, build_suite, generate, generate_suite
from .warning import (
    FcwParams,
    WarningTrace,
    attention_aware_warning_distance,
    evaluate_attend_gaze_only,
    evaluate_attend_gaze_scene,
    evaluate_attention_aware,
    evaluate_sda,
    sda_warning_distance,
)
