"""Three regression families sharing a fit/predict contract."""

from .forest import ForestFit, ForestParams, fit_forest, predict_forest
from .lasso import (LassoFit, LassoParams, coordinate_descent, fit_lasso_cv,
                    lambda_grid, lasso_objective, lasso_path)
from .linear import LinearFit, fit_ols, predict_linear

__all__ = [
    "LinearFit", "fit_ols", "predict_linear",
    "LassoFit", "LassoParams", "fit_lasso_cv", "coordinate_descent",
    "lambda_grid", "lasso_objective", "lasso_path",
    "ForestFit", "ForestParams", "fit_forest", "predict_forest",
]
