"""Counterfactual-prediction treatment-effect estimation.

Split the data by treatment status, train one model per group on the four
covariates, cross-feed each group's covariates into the other group's model
to predict the unobserved counterfactual outcomes, and combine the two
group-level contrasts weighted by the empirical treated fraction:

    ate = pi * (mean(y_t) - mean(yhat_t)) + (1 - pi) * (mean(yhat_c) - mean(y_c))

The naive contrast mean(y_t) - mean(y_c) is computed alongside as the
biased-under-confounding baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datagen import Dataset
from .errors import DegenerateSplitError, InvalidParameterError
from .models import ForestParams, LassoParams, fit_forest, fit_lasso_cv, fit_ols
from .prng import PURPOSE_MODEL, RngStream

METHOD_NAMES = ("LM", "Lasso", "RF")

# Each method derives its own model-internal stream at a fixed offset from
# the replicate's base model tag, so adding or removing methods never
# changes another method's draws.
_METHOD_STREAM_OFFSET = {"LM": 0, "Lasso": 1, "RF": 2}


@dataclass(frozen=True)
class GroupSplit:
    """Treated and control covariates/outcomes, plus the treated fraction."""

    x_t: np.ndarray
    y_t: np.ndarray
    x_c: np.ndarray
    y_c: np.ndarray

    @property
    def n_treated(self) -> int:
        return self.y_t.shape[0]

    @property
    def n_control(self) -> int:
        return self.y_c.shape[0]

    @property
    def pi_empirical(self) -> float:
        return self.n_treated / (self.n_treated + self.n_control)


@dataclass(frozen=True)
class MethodEstimate:
    ate_sim: float
    error_pct: float


@dataclass(frozen=True)
class AteEstimates:
    """Per-replicate results: naive contrast plus one entry per method."""

    ate_naive: float
    error_naive_pct: float
    pi_empirical: float
    methods: dict[str, MethodEstimate]


@dataclass(frozen=True)
class ModelSettings:
    """Hyperparameters passed through to the per-group fits."""

    lasso: LassoParams = LassoParams()
    forest: ForestParams = ForestParams()


def split_by_treatment(d: Dataset) -> GroupSplit:
    """Partition rows by treatment status, preserving row order."""
    treated = d.t == 1
    n_t = int(treated.sum())
    if n_t == 0 or n_t == d.n:
        raise DegenerateSplitError(
            f"dataset has {n_t} treated rows out of {d.n}; both groups "
            "must be non-empty")
    return GroupSplit(x_t=d.x[treated], y_t=d.y[treated],
                      x_c=d.x[~treated], y_c=d.y[~treated])


def naive_ate(split: GroupSplit) -> float:
    """Difference of observed group mean outcomes."""
    return float(split.y_t.mean() - split.y_c.mean())


def estimate_ate(split: GroupSplit, fit, stream: RngStream | None = None) -> float:
    """Counterfactual-prediction estimate using one model family.

    ``fit(x, y, stream)`` must return an object with ``predict``.  The model
    trained on the treated rows predicts the control group's counterfactual
    and vice versa; the two contrasts are weighted by the empirical treated
    fraction.
    """
    model_t = fit(split.x_t, split.y_t, stream)
    model_c = fit(split.x_c, split.y_c, stream)
    yhat_t = model_c.predict(split.x_t)
    yhat_c = model_t.predict(split.x_c)
    pi = split.pi_empirical
    return float(pi * (split.y_t.mean() - np.mean(yhat_t))
                 + (1.0 - pi) * (np.mean(yhat_c) - split.y_c.mean()))


def pct_error(ate_sim: float, ate_true: float) -> float:
    """Absolute percentage error, |100 * (ate_sim - ate_true) / ate_true|."""
    if ate_true == 0.0:
        raise ZeroDivisionError(
            "percentage error is undefined for a true effect of exactly 0; "
            "use a small placeholder such as 0.1 instead")
    return abs(100.0 * (ate_sim - ate_true) / ate_true)


def _fit_lm(settings: ModelSettings):
    def fit(x, y, stream):
        return fit_ols(x, y)
    return fit

def _fit_lasso(settings: ModelSettings):
    def fit(x, y, stream):
        return fit_lasso_cv(x, y, folds=settings.lasso.folds, stream=stream,
                            params=settings.lasso)
    return fit

def _fit_rf(settings: ModelSettings):
    def fit(x, y, stream):
        return fit_forest(x, y, params=settings.forest, stream=stream)
    return fit

_FACTORIES = {"LM": _fit_lm, "Lasso": _fit_lasso, "RF": _fit_rf}


def estimate_all(d: Dataset, ate_true: float, methods,
                 stream: RngStream,
                 settings: ModelSettings | None = None) -> AteEstimates:
    """Split once, then compute the naive contrast and one counterfactual
    estimate per requested method, each with its percentage error.

    ``stream`` is the replicate's base model stream; each method re-derives
    its own stream at a distinct purpose tag.
    """
    if settings is None:
        settings = ModelSettings()
    methods = tuple(methods)
    unknown = [m for m in methods if m not in _FACTORIES]
    if unknown:
        raise InvalidParameterError(
            f"unknown methods {unknown}; choose from {METHOD_NAMES}")
    split = split_by_treatment(d)
    ate_n = naive_ate(split)
    base_tag = stream.provenance.purpose_tag
    results: dict[str, MethodEstimate] = {}
    for name in METHOD_NAMES:
        if name not in methods:
            continue
        method_stream = stream.with_purpose(base_tag + _METHOD_STREAM_OFFSET[name])
        ate = estimate_ate(split, _FACTORIES[name](settings), method_stream)
        results[name] = MethodEstimate(ate_sim=ate,
                                       error_pct=pct_error(ate, ate_true))
    return AteEstimates(ate_naive=ate_n,
                        error_naive_pct=pct_error(ate_n, ate_true),
                        pi_empirical=split.pi_empirical,
                        methods=results)


__all__ = [
    "GroupSplit", "MethodEstimate", "AteEstimates", "ModelSettings",
    "METHOD_NAMES", "split_by_treatment", "naive_ate", "estimate_ate",
    "pct_error", "estimate_all", "PURPOSE_MODEL",
]
