"""Cycle-length forecasting for actuated signal corridors.

The package simulates a corridor of fully-actuated traffic signals to
produce per-signal cycle-length time series, then fits and compares
next-cycle forecasters: a last-5-cycle average, per-signal ARMA, and
vector autoregressions fit by least squares or by proximal gradient
with an elementwise L1 penalty or a hierarchical lag-group penalty.
"""

from .evaluate import (EvaluationReport, ModelScore, RollingSplit,
                       lambda_path, make_rolling_split, mspe, run_comparison,
                       select_lambda)
from .exceptions import (ConfigError, CyclecastError, DataError,
                         DegenerateSeriesError, NumericalError,
                         RankDeficiencyError)
from .fista import FistaInfo, FistaSettings, fista_fit_row
from .forecasters import (ArmaPanelForecaster, CycleAverageForecaster,
                          VarForecaster)
from .panel import (AcfTable, PanelSeries, average_last_k_forecast,
                    make_panel, sample_acf)
from .prox import hglasso_prox, lasso_prox
from .sim import (ControllerConfig, CorridorConfig, CorridorSimulator,
                  CycleRecord, SignalController, simulate_corridor)
from .univariate import (ArmaModel, fit_ar, fit_arma_hr,
                         predict_one_step_univ, select_order)
from .var import (CoefficientSet, PenaltySpec, RegressionForm,
                  build_regression, fit_ols, fit_penalized,
                  make_lambda_grid, predict_one_step)

__version__ = "0.1.0"

__all__ = [
    "AcfTable",
    "ArmaModel",
    "ArmaPanelForecaster",
    "CoefficientSet",
    "ConfigError",
    "ControllerConfig",
    "CorridorConfig",
    "CorridorSimulator",
    "CycleAverageForecaster",
    "CycleRecord",
    "CyclecastError",
    "DataError",
    "DegenerateSeriesError",
    "EvaluationReport",
    "FistaInfo",
    "FistaSettings",
    "ModelScore",
    "NumericalError",
    "PanelSeries",
    "PenaltySpec",
    "RankDeficiencyError",
    "RegressionForm",
    "RollingSplit",
    "SignalController",
    "VarForecaster",
    "average_last_k_forecast",
    "build_regression",
    "fista_fit_row",
    "fit_ar",
    "fit_arma_hr",
    "fit_ols",
    "fit_penalized",
    "hglasso_prox",
    "lambda_path",
    "lasso_prox",
    "make_lambda_grid",
    "make_panel",
    "make_rolling_split",
    "mspe",
    "predict_one_step",
    "predict_one_step_univ",
    "run_comparison",
    "sample_acf",
    "select_lambda",
    "select_order",
    "simulate_corridor",
]
