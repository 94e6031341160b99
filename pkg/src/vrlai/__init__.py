"""Residual-life moments, variance residual life ageing intensity and stochastic orders."""

from .errors import *  # noqa: F401,F403
from .models import (
    SurvivalModel,
    density,
    erlang,
    exponential,
    from_spec,
    hazard,
    iid_convolution,
    load_spec,
    lomax,
    mixture,
    numeric_only,
    order_statistic,
    parallel,
    pareto,
    series,
    survival,
)
from .numerics import DEFAULT_CONFIG, QuadratureConfig

__version__ = "0.1.0"
