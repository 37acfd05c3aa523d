"""Ordinary least squares with an internal intercept."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import (InsufficientDataError, InvalidDataError, ShapeError,
                      SingularDesignError)


@dataclass(frozen=True)
class LinearFit:
    """An intercept plus one coefficient per input column."""

    intercept: float
    coefficients: np.ndarray

    def predict(self, x) -> float | np.ndarray:
        return predict_linear(self, x)


def check_xy(x, y, min_rows: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Validate a design matrix / target pair and return float64 copies."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"design matrix must be 2-d, got shape {x.shape}")
    if y.shape != (x.shape[0],):
        raise ShapeError(
            f"target shape {y.shape} does not match {x.shape[0]} rows")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise InvalidDataError("design matrix and target must be finite")
    if x.shape[0] < min_rows:
        raise InsufficientDataError(
            f"need at least {min_rows} rows, got {x.shape[0]}")
    return x, y


def fit_ols(x, y) -> LinearFit:
    """Least-squares fit via an orthogonal decomposition (SVD).

    Raises SingularDesignError when the intercept-augmented design is rank
    deficient, rather than silently returning a minimum-norm solution.
    """
    x, y = check_xy(x, y)
    n, p = x.shape
    if n < p + 1:
        raise InsufficientDataError(
            f"OLS with {p} columns needs at least {p + 1} rows, got {n}")
    a = np.hstack([np.ones((n, 1)), x])
    sol, _, rank, _ = np.linalg.lstsq(a, y, rcond=None)
    if rank < p + 1:
        raise SingularDesignError(
            f"design has rank {rank} < {p + 1} after intercept augmentation")
    return LinearFit(intercept=float(sol[0]), coefficients=sol[1:].copy())


def predict_linear(fit, x) -> float | np.ndarray:
    """intercept + x @ coefficients, for a single row or a matrix of rows.

    Works for any fit exposing ``intercept`` and original-scale
    ``coefficients`` (plain least squares or lasso).
    """
    coefs = np.asarray(fit.coefficients, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        if x.shape[0] != coefs.shape[0]:
            raise ShapeError(
                f"row has {x.shape[0]} values, fit expects {coefs.shape[0]}")
        return float(fit.intercept + x @ coefs)
    if x.ndim == 2:
        if x.shape[1] != coefs.shape[0]:
            raise ShapeError(
                f"matrix has {x.shape[1]} columns, fit expects {coefs.shape[0]}")
        return fit.intercept + x @ coefs
    raise ShapeError(f"expected a row or matrix, got shape {x.shape}")
