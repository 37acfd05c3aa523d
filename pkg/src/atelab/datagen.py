"""Synthetic dataset generation for one replicate.

Covariates mimic a university course: two grade distributions, an age with a
hard floor of 18, and a slightly skewed binary gender flag.  Treatment is
either randomized (independent Bernoulli) or confounded on the second grade
column x3: students below the lower cutoff always take the intervention,
students above the upper cutoff never do, and the band in between joins with
probability one half.  The outcome is linear in the covariates except for a
configurable power on x1, plus a constant additive treatment effect and
Gaussian noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateSplitError, EmptyDatasetError,
                     InvalidParameterError, ShapeError)
from .prng import (PURPOSE_COVARIATES, PURPOSE_NOISE, PURPOSE_TREATMENT,
                   RETRY_PURPOSE_STRIDE, RngStream, derive_stream)

N_COVARIATES = 4


@dataclass(frozen=True)
class CovariateSpec:
    """Distribution parameters for the four covariate columns.

    ``age_floor_mode`` selects how the age floor is enforced: ``"clamp"``
    replaces draws below the floor with the floor itself, ``"resample"``
    redraws them until they land at or above it.
    """

    x1_mean: float = 50.0
    x1_sd: float = 5.0
    x2_mean: float = 20.0
    x2_sd: float = 2.0
    x2_floor: float = 18.0
    x3_mean: float = 45.0
    x3_sd: float = 6.0
    x4_prob: float = 0.6
    age_floor_mode: str = "clamp"

    def validate(self) -> None:
        for name in ("x1_sd", "x2_sd", "x3_sd"):
            if not (getattr(self, name) > 0.0):
                raise InvalidParameterError(f"{name} must be > 0")
        if not (0.0 <= self.x4_prob <= 1.0):
            raise InvalidParameterError("x4_prob must be in [0, 1]")
        if self.age_floor_mode not in ("clamp", "resample"):
            raise InvalidParameterError(
                f"age_floor_mode must be 'clamp' or 'resample', "
                f"got {self.age_floor_mode!r}")


@dataclass(frozen=True)
class OutcomeParams:
    """Coefficients and shape of the outcome equation.

    y = intercept + coef_x1 * x1^degree + coef_x2 * x2 + coef_x3 * x3
        + coef_x4 * x4 + ate_true * t + noise,   noise ~ N(0, noise_sd^2)
    """

    intercept: float = 0.5
    coef_x1: float = 0.7
    coef_x2: float = 0.5
    coef_x3: float = 0.5
    coef_x4: float = 0.7
    ate_true: float = 1.0
    degree: int = 1
    noise_sd: float = 1.0

    def validate(self) -> None:
        if self.degree not in (1, 2, 3):
            raise InvalidParameterError(f"degree must be 1, 2 or 3, got {self.degree}")
        if self.noise_sd < 0.0:
            raise InvalidParameterError("noise_sd must be >= 0")


@dataclass(frozen=True)
class TreatmentRule:
    """How treatment is assigned.

    mode "randomized": independent Bernoulli(pi) per row.
    mode "confounded": driven by x3 -- treat below ``lower``, never treat
    above ``upper``, coin-flip with probability ``mid_prob`` on the closed
    band in between (band endpoints fall in the coin-flip region).
    """

    mode: str = "randomized"
    pi: float = 0.5
    lower: float = 41.0
    upper: float = 49.0
    mid_prob: float = 0.5

    @classmethod
    def randomized(cls, pi: float) -> "TreatmentRule":
        return cls(mode="randomized", pi=pi)

    @classmethod
    def confounded(cls, lower: float = 41.0, upper: float = 49.0,
                   mid_prob: float = 0.5) -> "TreatmentRule":
        return cls(mode="confounded", lower=lower, upper=upper,
                   mid_prob=mid_prob)

    def validate(self) -> None:
        if self.mode == "randomized":
            if not (0.0 <= self.pi <= 1.0):
                raise InvalidParameterError(f"pi must be in [0, 1], got {self.pi}")
        elif self.mode == "confounded":
            if not (self.lower < self.upper):
                raise InvalidParameterError("confounded rule needs lower < upper")
            if not (0.0 <= self.mid_prob <= 1.0):
                raise InvalidParameterError("mid_prob must be in [0, 1]")
        else:
            raise InvalidParameterError(f"unknown treatment mode {self.mode!r}")


@dataclass(frozen=True, eq=False)
class Dataset:
    """One replicate: covariate matrix, treatment vector, outcome vector."""

    x: np.ndarray  # (n, 4) float64
    t: np.ndarray  # (n,) int64 in {0, 1}
    y: np.ndarray  # (n,) float64

    @property
    def n(self) -> int:
        return self.x.shape[0]


@dataclass(frozen=True)
class CellConfig:
    """Everything needed to generate one grid cell's replicates."""

    n_samples: int
    covariates: CovariateSpec
    outcome: OutcomeParams
    treatment: TreatmentRule
    master_seed: int
    cell_index: int

    def validate(self) -> None:
        if self.n_samples < 1:
            raise EmptyDatasetError("n_samples must be >= 1")
        self.covariates.validate()
        self.outcome.validate()
        self.treatment.validate()


def generate_covariates(n: int, spec: CovariateSpec,
                        stream: RngStream) -> np.ndarray:
    """Draw the (n, 4) covariate matrix.

    Columns: x1 ~ N(x1_mean, x1_sd), x2 ~ N(x2_mean, x2_sd) floored at
    x2_floor, x3 ~ N(x3_mean, x3_sd), x4 ~ Bernoulli(x4_prob).
    """
    if n < 1:
        raise EmptyDatasetError("cannot generate a dataset with 0 rows")
    spec.validate()
    x = np.empty((n, N_COVARIATES), dtype=np.float64)
    x[:, 0] = stream.normal(spec.x1_mean, spec.x1_sd, size=n)
    age = stream.normal(spec.x2_mean, spec.x2_sd, size=n)
    if spec.age_floor_mode == "clamp":
        np.maximum(age, spec.x2_floor, out=age)
    else:
        low = age < spec.x2_floor
        while low.any():
            age[low] = stream.normal(spec.x2_mean, spec.x2_sd,
                                     size=int(low.sum()))
            low = age < spec.x2_floor
    x[:, 1] = age
    x[:, 2] = stream.normal(spec.x3_mean, spec.x3_sd, size=n)
    x[:, 3] = stream.bernoulli(spec.x4_prob, size=n).astype(np.float64)
    return x


def assign_randomized(n: int, pi: float, stream: RngStream) -> np.ndarray:
    """Treatment independent of everything: Bernoulli(pi) per row."""
    if not (0.0 <= pi <= 1.0):
        raise InvalidParameterError(f"pi must be in [0, 1], got {pi}")
    if n < 1:
        raise EmptyDatasetError("cannot assign treatment to 0 rows")
    return stream.bernoulli(pi, size=n)


def assign_confounded(x3: np.ndarray, rule: TreatmentRule,
                      stream: RngStream) -> np.ndarray:
    """Treatment driven by the x3 grade column.

    Below ``rule.lower``: treated.  Above ``rule.upper``: control.  On the
    closed band [lower, upper]: Bernoulli(mid_prob).  The coin flips are
    drawn for every row so the stream consumption does not depend on how
    many rows land in the band.
    """
    rule.validate()
    if rule.mode != "confounded":
        raise InvalidParameterError("assign_confounded needs a confounded rule")
    x3 = np.asarray(x3, dtype=np.float64)
    coin = stream.bernoulli(rule.mid_prob, size=x3.shape[0])
    t = np.where(x3 < rule.lower, 1, np.where(x3 > rule.upper, 0, coin))
    return t.astype(np.int64)


def generate_outcome(x: np.ndarray, t: np.ndarray, params: OutcomeParams,
                     stream: RngStream) -> np.ndarray:
    """Evaluate the outcome equation, adding noise only when noise_sd > 0."""
    params.validate()
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(t)
    if x.ndim != 2 or x.shape[1] != N_COVARIATES:
        raise ShapeError(f"x must be (n, {N_COVARIATES}), got {x.shape}")
    if t.shape != (x.shape[0],):
        raise ShapeError(f"t has shape {t.shape}, expected ({x.shape[0]},)")
    y = (params.intercept
         + params.coef_x1 * x[:, 0] ** params.degree
         + params.coef_x2 * x[:, 1]
         + params.coef_x3 * x[:, 2]
         + params.coef_x4 * x[:, 3]
         + params.ate_true * t)
    if params.noise_sd > 0.0:
        y = y + stream.normal(0.0, params.noise_sd, size=x.shape[0])
    return y


def generate_dataset(cell: CellConfig, replicate_index: int,
                     attempt: int = 0) -> Dataset:
    """Generate one replicate, deterministic in (cell, replicate, attempt).

    Covariates, treatment, and noise each use their own purpose-tagged
    stream.  ``attempt`` > 0 shifts every purpose tag by a fixed stride so a
    degenerate replicate can be regenerated from fresh draws without
    touching any other replicate's randomness.

    Raises DegenerateSplitError if the generated treatment vector leaves the
    treated or control group empty; callers may retry with attempt + 1.
    """
    cell.validate()
    shift = attempt * RETRY_PURPOSE_STRIDE

    def _stream(purpose: int) -> RngStream:
        return derive_stream(cell.master_seed, cell.cell_index,
                             replicate_index, purpose + shift)

    x = generate_covariates(cell.n_samples, cell.covariates,
                            _stream(PURPOSE_COVARIATES))
    rule = cell.treatment
    if rule.mode == "randomized":
        t = assign_randomized(cell.n_samples, rule.pi,
                              _stream(PURPOSE_TREATMENT))
    else:
        t = assign_confounded(x[:, 2], rule, _stream(PURPOSE_TREATMENT))
    n_treated = int(t.sum())
    if n_treated == 0 or n_treated == cell.n_samples:
        raise DegenerateSplitError(
            f"replicate {replicate_index} of cell {cell.cell_index} has "
            f"{n_treated} treated rows out of {cell.n_samples}")
    y = generate_outcome(x, t, cell.outcome, _stream(PURPOSE_NOISE))
    return Dataset(x=x, t=t, y=y)
