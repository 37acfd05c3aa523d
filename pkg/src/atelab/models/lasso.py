"""L1-penalized least squares, solved by cyclic coordinate descent.

The penalty weight is picked by k-fold cross validation over a log-spaced
grid anchored at the smallest weight that zeroes every coefficient.  All
penalized work happens on standardized columns with an unpenalized
intercept; returned coefficients are mapped back to the original scale.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import (ConvergenceWarning, InsufficientDataError,
                      InvalidParameterError)
from ..prng import RngStream
from ._kernels import cd_solve, cv_lasso_sse, lasso_path_std
from .linear import check_xy, predict_linear


@dataclass(frozen=True)
class LassoParams:
    """Tuning knobs; defaults are the conventional choices."""

    folds: int = 10
    n_lambdas: int = 100
    lambda_min_ratio: float = 1e-4
    tol: float = 1e-7
    max_iter: int = 10_000

    def validate(self) -> None:
        if self.folds < 2:
            raise InvalidParameterError("folds must be >= 2")
        if self.n_lambdas < 1:
            raise InvalidParameterError("n_lambdas must be >= 1")
        if not (0.0 < self.lambda_min_ratio <= 1.0):
            raise InvalidParameterError("lambda_min_ratio must be in (0, 1]")
        if self.tol <= 0.0 or self.max_iter < 1:
            raise InvalidParameterError("tol must be > 0 and max_iter >= 1")


@dataclass(frozen=True)
class LassoFit:
    """Selected penalty, original-scale coefficients, and the
    per-column standardization used internally."""

    intercept: float
    coefficients: np.ndarray
    lambda_selected: float
    column_means: np.ndarray
    column_sds: np.ndarray
    converged: bool

    def predict(self, x) -> float | np.ndarray:
        return predict_linear(self, x)


def _standardize(x: np.ndarray):
    """Return (xt_std (p, n), means, sds, active); constant columns are
    deactivated (their coefficient stays 0) instead of dividing by zero."""
    means = x.mean(axis=0)
    sds = x.std(axis=0)  # population sd, so active columns have x_j.x_j = n
    active = sds > 0.0
    xt = (x - means).T.copy()
    xt[active] /= sds[active, None]
    xt[~active] = 0.0
    return xt, means, sds, active


def lambda_grid(x, y, n_lambdas: int = 100,
                lambda_min_ratio: float = 1e-4) -> np.ndarray:
    """Descending log-spaced grid from lambda_max down to
    lambda_max * lambda_min_ratio.

    lambda_max = max_j |<standardized x_j, centred y>| / n is the smallest
    penalty at which every coefficient is exactly zero.
    """
    x, y = check_xy(x, y)
    xt, _, _, active = _standardize(x)
    yc = y - y.mean()
    lam_max = 0.0
    if active.any():
        lam_max = float(np.max(np.abs(xt[active] @ yc)) / x.shape[0])
    if lam_max <= 0.0:
        return np.zeros(1)
    if n_lambdas == 1:
        return np.array([lam_max])
    return np.geomspace(lam_max, lam_max * lambda_min_ratio, n_lambdas)


def coordinate_descent(x_std, y_c, lam: float, init, tol: float = 1e-7,
                       max_iter: int = 10_000) -> np.ndarray:
    """Cyclic soft-thresholding on already-standardized data.

    Stops when the largest coefficient change in a full cycle drops below
    tol; hitting max_iter is reported with a ConvergenceWarning, not an
    error.  The penalized objective is non-increasing across cycles.
    """
    x_std, y_c = check_xy(x_std, y_c)
    if lam < 0.0:
        raise InvalidParameterError("lambda must be >= 0")
    beta = np.array(init, dtype=np.float64).copy()
    if beta.shape != (x_std.shape[1],):
        raise InvalidParameterError(
            f"init has shape {beta.shape}, expected ({x_std.shape[1]},)")
    xt = np.ascontiguousarray(x_std.T)
    active = np.ones(x_std.shape[1], dtype=np.bool_)
    _, ok = cd_solve(xt, np.ascontiguousarray(y_c), lam, beta, active,
                     tol, max_iter)
    if not ok:
        warnings.warn(
            f"coordinate descent hit max_iter={max_iter} at lambda={lam}",
            ConvergenceWarning)
    return beta


def lasso_objective(x_std, y_c, beta, lam: float) -> float:
    """(1 / 2n) ||y - X b||^2 + lam * ||b||_1 on standardized data."""
    x_std = np.asarray(x_std, dtype=np.float64)
    y_c = np.asarray(y_c, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    r = y_c - x_std @ beta
    n = x_std.shape[0]
    return float(r @ r / (2 * n) + lam * np.abs(beta).sum())


def lasso_path(x, y, lambdas=None, params: LassoParams = LassoParams()):
    """Standardized-scale coefficients along a descending penalty grid.

    Returns (lambdas, betas_std (L, p), converged).  Mostly a diagnostics
    and testing surface; fit_lasso_cv is the production entry point.
    """
    x, y = check_xy(x, y, min_rows=2)
    lambdas = (lambda_grid(x, y, params.n_lambdas, params.lambda_min_ratio)
               if lambdas is None
               else np.sort(np.asarray(lambdas, dtype=np.float64))[::-1].copy())
    xt, _, _, active = _standardize(x)
    yc = y - y.mean()
    betas, converged = lasso_path_std(np.ascontiguousarray(xt),
                                      np.ascontiguousarray(yc), lambdas,
                                      active, params.tol, params.max_iter)
    return lambdas, betas, converged


def fit_lasso_cv(x, y, folds: int = 10, stream: RngStream | None = None,
                 params: LassoParams | None = None,
                 lambdas=None) -> LassoFit:
    """Cross-validated lasso fit.

    Fold membership comes from a stream-seeded permutation cut into
    contiguous near-equal blocks.  For each penalty in the grid the held-out
    mean squared error is accumulated over all folds (training folds are
    standardized from scratch each time); the penalty minimizing it wins,
    with ties broken toward the stronger penalty.  The returned fit is
    re-estimated on the full data at the selected penalty.

    ``lambdas`` overrides the automatic grid (useful for pinning the
    penalty in tests; a single value skips nothing, the same selection path
    runs over the one-point grid).
    """
    if params is None:
        params = LassoParams(folds=folds)
    else:
        params = LassoParams(folds=folds, n_lambdas=params.n_lambdas,
                             lambda_min_ratio=params.lambda_min_ratio,
                             tol=params.tol, max_iter=params.max_iter)
    params.validate()
    x, y = check_xy(x, y, min_rows=2)
    n, p = x.shape
    if n < params.folds:
        raise InsufficientDataError(
            f"{params.folds}-fold CV needs at least {params.folds} rows, got {n}")
    if stream is None:
        raise InvalidParameterError(
            "fit_lasso_cv needs a stream for the fold permutation")

    if lambdas is None:
        grid = lambda_grid(x, y, params.n_lambdas, params.lambda_min_ratio)
    else:
        grid = np.sort(np.asarray(lambdas, dtype=np.float64))[::-1].copy()
        if grid.size == 0 or (grid < 0).any():
            raise InvalidParameterError("lambdas must be non-negative and non-empty")

    perm = stream.permutation(n)
    fold_ids = np.empty(n, dtype=np.int64)
    bounds = np.linspace(0, n, params.folds + 1).round().astype(np.int64)
    for f in range(params.folds):
        fold_ids[perm[bounds[f]:bounds[f + 1]]] = f

    xt = np.ascontiguousarray(x.T)
    sse = cv_lasso_sse(xt, np.ascontiguousarray(y), fold_ids, params.folds,
                       grid, params.tol, params.max_iter)
    sel = int(np.argmin(sse))  # first minimum = largest lambda on ties

    xt_std, means, sds, active = _standardize(x)
    ymean = float(y.mean())
    yc = y - ymean
    betas, converged = lasso_path_std(np.ascontiguousarray(xt_std),
                                      np.ascontiguousarray(yc),
                                      grid[:sel + 1], active,
                                      params.tol, params.max_iter)
    beta_std = betas[-1]
    ok = bool(converged.all())
    if not ok:
        warnings.warn("lasso refit hit max_iter before reaching tol",
                      ConvergenceWarning)
    coefs = np.zeros(p)
    coefs[active] = beta_std[active] / sds[active]
    intercept = ymean - float(coefs @ means)
    return LassoFit(intercept=intercept, coefficients=coefs,
                    lambda_selected=float(grid[sel]),
                    column_means=means, column_sds=sds, converged=ok)
