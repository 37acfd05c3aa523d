"""Simulation laboratory for counterfactual-prediction treatment effects.

Generates synthetic randomized or confounded datasets with a known constant
treatment effect, estimates the effect by cross-training regressors on the
treated and control groups, and aggregates percentage-error tables over a
Monte-Carlo grid of true effects and participation rates.
"""

from ._version import __version__
from .config import (SCENARIO_IDS, config_echo, emit_config, load_config,
                     parse_config)
from .datagen import (CellConfig, CovariateSpec, Dataset, OutcomeParams,
                      TreatmentRule, assign_confounded, assign_randomized,
                      generate_covariates, generate_dataset, generate_outcome)
from .estimator import (AteEstimates, GroupSplit, MethodEstimate,
                        ModelSettings, estimate_all, estimate_ate, naive_ate,
                        pct_error, split_by_treatment)
from .harness import (CellResult, GridReport, MethodStats, ScenarioConfig,
                      cell_index, default_scenarios, run_cell, run_grid,
                      summarize_excluding)
from .models import (ForestFit, ForestParams, LassoFit, LassoParams,
                     LinearFit, coordinate_descent, fit_forest, fit_lasso_cv,
                     fit_ols, lambda_grid, lasso_objective, lasso_path,
                     predict_forest, predict_linear)
from .prng import (RngStream, StreamProvenance, derive_stream,
                   sample_bernoulli, sample_normal)
from .report import (emit_csv, emit_manifest, emit_markdown, load_csv,
                     render_csv, render_markdown)

__all__ = [
    "__version__",
    # prng
    "RngStream", "StreamProvenance", "derive_stream", "sample_normal",
    "sample_bernoulli",
    # datagen
    "CovariateSpec", "OutcomeParams", "TreatmentRule", "Dataset",
    "CellConfig", "generate_covariates", "assign_randomized",
    "assign_confounded", "generate_outcome", "generate_dataset",
    # models
    "LinearFit", "fit_ols", "predict_linear", "LassoFit", "LassoParams",
    "fit_lasso_cv", "coordinate_descent", "lambda_grid", "lasso_objective",
    "lasso_path", "ForestFit", "ForestParams", "fit_forest",
    "predict_forest",
    # estimator
    "GroupSplit", "AteEstimates", "MethodEstimate", "ModelSettings",
    "split_by_treatment", "naive_ate", "estimate_ate", "pct_error",
    "estimate_all",
    # harness
    "ScenarioConfig", "CellResult", "MethodStats", "GridReport",
    "cell_index", "run_cell", "run_grid", "summarize_excluding",
    "default_scenarios",
    # config / report
    "SCENARIO_IDS", "parse_config", "load_config", "config_echo",
    "emit_config", "emit_csv", "emit_markdown", "emit_manifest", "load_csv",
    "render_csv", "render_markdown",
]
