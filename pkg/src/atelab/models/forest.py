"""Random-forest regression: bagged CART trees with feature subsampling.

Trees are grown to purity subject to a minimum leaf size, splitting on the
best variance-reducing midpoint among a per-node random subset of features.
All randomness (bootstrap rows, feature draws) is pre-drawn from the caller's
stream, so a fit is a pure function of (data, hyperparameters, provenance).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientDataError, InvalidParameterError, ShapeError
from ..prng import RngStream
from ._kernels import build_forest, forest_predict
from .linear import check_xy


@dataclass(frozen=True)
class ForestParams:
    """Hyperparameters; mtry=None means max(1, n_features // 3)."""

    n_trees: int = 100
    mtry: int | None = None
    min_leaf_size: int = 5
    bootstrap: bool = True

    def validate(self) -> None:
        if self.n_trees < 1:
            raise InvalidParameterError("n_trees must be >= 1")
        if self.min_leaf_size < 1:
            raise InvalidParameterError("min_leaf_size must be >= 1")
        if self.mtry is not None and self.mtry < 1:
            raise InvalidParameterError("mtry must be >= 1")


@dataclass(frozen=True)
class ForestFit:
    """All trees flattened into shared node arrays.

    Nodes of tree t live at [offsets[t], offsets[t+1]); a node with
    feature < 0 is a leaf holding the mean target of the rows it absorbed.
    """

    features: np.ndarray    # int16, -1 marks a leaf
    thresholds: np.ndarray  # float64
    lefts: np.ndarray       # int32, absolute node ids
    rights: np.ndarray      # int32
    values: np.ndarray      # float64
    offsets: np.ndarray     # int64, len n_trees + 1
    n_features: int
    params: ForestParams

    @property
    def n_trees(self) -> int:
        return self.offsets.shape[0] - 1

    def predict(self, x) -> float | np.ndarray:
        return predict_forest(self, x)


def fit_forest(x, y, params: ForestParams = ForestParams(),
               stream: RngStream | None = None) -> ForestFit:
    """Fit a forest of ``params.n_trees`` regression trees.

    Each tree sees a bootstrap resample of the rows (same size, drawn with
    replacement) unless bootstrap is off.  At every node ``mtry`` features
    are drawn without replacement and the best admissible split is taken;
    a node that cannot strictly reduce its squared deviation with both
    children at least ``min_leaf_size`` rows becomes a leaf.
    """
    params.validate()
    x, y = check_xy(x, y)
    n, p = x.shape
    if n < 2 * params.min_leaf_size:
        raise InsufficientDataError(
            f"forest needs at least {2 * params.min_leaf_size} rows, got {n}")
    mtry = params.mtry if params.mtry is not None else max(1, p // 3)
    if mtry > p:
        raise InvalidParameterError(f"mtry={mtry} exceeds {p} features")
    if stream is None:
        raise InvalidParameterError("fit_forest needs a stream")

    n_trees = params.n_trees
    if params.bootstrap:
        rows = stream.integers(0, n, size=(n_trees, n))
    else:
        rows = np.broadcast_to(np.arange(n, dtype=np.int64),
                               (n_trees, n)).copy()
    cap = 2 * max(1, n // params.min_leaf_size) + 1
    tapes = stream.random(size=(n_trees, cap * mtry))

    feat = np.empty((n_trees, cap), dtype=np.int16)
    thresh = np.zeros((n_trees, cap), dtype=np.float64)
    left = np.zeros((n_trees, cap), dtype=np.int32)
    right = np.zeros((n_trees, cap), dtype=np.int32)
    value = np.empty((n_trees, cap), dtype=np.float64)
    counts = np.empty(n_trees, dtype=np.int64)
    build_forest(np.ascontiguousarray(x), y, rows, tapes,
                 params.min_leaf_size, mtry, feat, thresh, left, right,
                 value, counts)

    offsets = np.zeros(n_trees + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    keep = np.arange(cap) < counts[:, None]
    base = offsets[:-1].astype(np.int32)[:, None]
    return ForestFit(features=feat[keep],
                     thresholds=thresh[keep],
                     lefts=(left + base)[keep],
                     rights=(right + base)[keep],
                     values=value[keep],
                     offsets=offsets, n_features=p, params=params)


def predict_forest(fit: ForestFit, x) -> float | np.ndarray:
    """Mean over trees of the leaf reached by each row."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x.reshape(1, -1)
    if x.ndim != 2 or x.shape[1] != fit.n_features:
        raise ShapeError(
            f"expected rows of {fit.n_features} features, got shape {x.shape}")
    out = np.empty(x.shape[0])
    forest_predict(fit.features, fit.thresholds, fit.lefts, fit.rights,
                   fit.values, fit.offsets, np.ascontiguousarray(x), out)
    return float(out[0]) if single else out
