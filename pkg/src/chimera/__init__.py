"""Hospitalization forecasting with a mechanistic epidemic model, human-judgment
peak forecasts blended through a copula-augmented posterior, spatial extension
of human forecasts, and proper-score evaluation."""

from .epiweek import EpiWeek, epiweek_from_date, week_range
from .series import HospSeries, ScaledSeries, peak, running_max_scale, weekly_from_daily
from .densities import (
    Density1D,
    IndividualForecast,
    JointDensity2D,
    QuantileForecast,
    TailPolicy,
    cdf_from_quantiles,
    joint_independence,
    linear_pool,
    log_joint_at,
    pdf_from_cdf,
    uniform_density,
)

__all__ = [
    "EpiWeek",
    "epiweek_from_date",
    "week_range",
    "HospSeries",
    "ScaledSeries",
    "peak",
    "running_max_scale",
    "weekly_from_daily",
    "Density1D",
    "IndividualForecast",
    "JointDensity2D",
    "QuantileForecast",
    "TailPolicy",
    "cdf_from_quantiles",
    "joint_independence",
    "linear_pool",
    "log_joint_at",
    "pdf_from_cdf",
    "uniform_density",
]

__version__ = "0.1.0"
