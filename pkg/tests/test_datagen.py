"""Covariate, treatment, and outcome generation."""

import dataclasses

import numpy as np
import pytest

from atelab.datagen import (CellConfig, CovariateSpec, OutcomeParams,
                            TreatmentRule, assign_confounded,
                            assign_randomized, generate_covariates,
                            generate_dataset, generate_outcome)
from atelab.errors import (DegenerateSplitError, EmptyDatasetError,
                           InvalidParameterError, ShapeError)
from atelab.prng import derive_stream


def stream(seed=0, purpose=0):
    return derive_stream(seed, 0, 0, purpose)


def default_cell(**overrides):
    base = dict(n_samples=1000, covariates=CovariateSpec(),
                outcome=OutcomeParams(ate_true=5.0),
                treatment=TreatmentRule.randomized(0.5),
                master_seed=17, cell_index=0)
    base.update(overrides)
    return CellConfig(**base)


class TestCovariates:
    def test_column_means(self):
        x = generate_covariates(100_000, CovariateSpec(), stream(1))
        assert 49.95 <= x[:, 0].mean() <= 50.05   # se = 5/sqrt(1e5)
        assert 0.595 <= x[:, 3].mean() <= 0.605

    def test_age_floor_clamped(self):
        x = generate_covariates(100_000, CovariateSpec(), stream(2))
        assert x[:, 1].min() >= 18.0
        # clamping piles mass exactly at the floor: P(N(20,2) < 18) ~ 0.1587
        at_floor = (x[:, 1] == 18.0).mean()
        assert 0.15 <= at_floor <= 0.17

    def test_age_floor_resampled(self):
        spec = CovariateSpec(age_floor_mode="resample")
        x = generate_covariates(100_000, spec, stream(3))
        assert x[:, 1].min() >= 18.0
        assert (x[:, 1] == 18.0).sum() == 0

    def test_zero_rows_rejected(self):
        with pytest.raises(EmptyDatasetError):
            generate_covariates(0, CovariateSpec(), stream())

    def test_bad_spec_rejected(self):
        with pytest.raises(InvalidParameterError):
            generate_covariates(10, CovariateSpec(x1_sd=0.0), stream())
        with pytest.raises(InvalidParameterError):
            CovariateSpec(age_floor_mode="reject").validate()


class TestTreatment:
    def test_randomized_degenerate_probs(self):
        assert not assign_randomized(1000, 0.0, stream(4)).any()
        assert assign_randomized(1000, 1.0, stream(4)).all()

    def test_randomized_mean(self):
        t = assign_randomized(100_000, 0.3, stream(5))
        assert 0.295 <= t.mean() <= 0.305

    def test_randomized_rejects_bad_pi(self):
        with pytest.raises(InvalidParameterError):
            assign_randomized(10, 1.5, stream())

    def test_confounded_strict_regions(self):
        t = assign_confounded(np.array([30.0, 60.0, 40.9]),
                              TreatmentRule.confounded(), stream(6))
        assert list(t) == [1, 0, 1]

    def test_confounded_band_is_coin_flip(self):
        t = assign_confounded(np.full(100_000, 45.0),
                              TreatmentRule.confounded(), stream(7))
        assert 0.495 <= t.mean() <= 0.505

    def test_confounded_overall_rate(self):
        # Phi(-2/3) + 0.5 * (Phi(2/3) - Phi(-2/3)) = 0.5 exactly
        x3 = stream(8).normal(45.0, 6.0, size=100_000)
        t = assign_confounded(x3, TreatmentRule.confounded(), stream(9, 1))
        assert 0.495 <= t.mean() <= 0.505

    def test_confounded_needs_confounded_rule(self):
        with pytest.raises(InvalidParameterError):
            assign_confounded(np.array([45.0]), TreatmentRule.randomized(0.5),
                              stream())

    def test_rule_validation(self):
        with pytest.raises(InvalidParameterError):
            TreatmentRule.confounded(lower=49.0, upper=41.0).validate()
        with pytest.raises(InvalidParameterError):
            TreatmentRule(mode="other").validate()


class TestOutcome:
    ROW = np.array([[50.0, 20.0, 45.0, 1.0]])

    def test_linear_value(self):
        # 0.5 + 0.7*50 + 0.5*20 + 0.5*45 + 0.7*1 + 5*1 = 73.7
        p = OutcomeParams(ate_true=5.0, degree=1, noise_sd=0.0)
        y = generate_outcome(self.ROW, np.array([1]), p, stream())
        assert y[0] == pytest.approx(73.7, abs=1e-12)

    def test_squared_value(self):
        # 0.5 + 0.7*2500 + 10 + 22.5 + 0.7 = 1783.7
        p = OutcomeParams(ate_true=5.0, degree=2, noise_sd=0.0)
        y = generate_outcome(self.ROW, np.array([0]), p, stream())
        assert y[0] == pytest.approx(1783.7, abs=1e-12)

    def test_treatment_term_is_exactly_additive(self):
        x = generate_covariates(500, CovariateSpec(), stream(10))
        p = OutcomeParams(ate_true=-7.25, degree=3, noise_sd=0.0)
        y1 = generate_outcome(x, np.ones(500, dtype=int), p, stream())
        y0 = generate_outcome(x, np.zeros(500, dtype=int), p, stream())
        assert np.allclose(y1 - y0, -7.25, atol=1e-12)

    def test_noise_free_is_pure(self):
        x = generate_covariates(100, CovariateSpec(), stream(11))
        t = assign_randomized(100, 0.5, stream(12))
        p = OutcomeParams(ate_true=1.0, noise_sd=0.0)
        a = generate_outcome(x, t, p, stream(1))
        b = generate_outcome(x, t, p, stream(2))
        assert (a == b).all()

    def test_shape_mismatch(self):
        p = OutcomeParams(ate_true=1.0)
        with pytest.raises(ShapeError):
            generate_outcome(self.ROW, np.array([1, 0]), p, stream())
        with pytest.raises(ShapeError):
            generate_outcome(np.ones((3, 2)), np.ones(3, dtype=int), p, stream())

    def test_degree_validation(self):
        with pytest.raises(InvalidParameterError):
            OutcomeParams(ate_true=1.0, degree=4).validate()
        with pytest.raises(InvalidParameterError):
            OutcomeParams(ate_true=1.0, noise_sd=-0.1).validate()


class TestGenerateDataset:
    def test_deterministic(self):
        cell = default_cell()
        a = generate_dataset(cell, 3)
        b = generate_dataset(cell, 3)
        assert (a.x == b.x).all() and (a.t == b.t).all() and (a.y == b.y).all()

    def test_balanced_treated_count(self):
        d = generate_dataset(default_cell(), 0)
        assert 440 <= d.t.sum() <= 560   # +-3.8 sigma binomial bound

    def test_confounded_rule_region(self):
        cell = default_cell(treatment=TreatmentRule.confounded())
        d = generate_dataset(cell, 0)
        assert (d.t[d.x[:, 2] < 41.0] == 1).all()
        assert (d.t[d.x[:, 2] > 49.0] == 0).all()

    def test_degenerate_raises(self):
        cell = default_cell(treatment=TreatmentRule.randomized(0.0))
        with pytest.raises(DegenerateSplitError):
            generate_dataset(cell, 0)

    def test_retry_attempt_changes_draws(self):
        cell = default_cell()
        a = generate_dataset(cell, 0, attempt=0)
        b = generate_dataset(cell, 0, attempt=1)
        assert (a.x != b.x).any()

    def test_randomized_uncorrelated_with_covariates(self):
        d = generate_dataset(default_cell(), 1)
        for j in range(4):
            r = np.corrcoef(d.t, d.x[:, j])[0, 1]
            assert abs(r) < 0.1   # ~3 sigma at n=1000

    def test_confounded_shifts_x3_down_for_treated(self):
        cell = default_cell(treatment=TreatmentRule.confounded())
        d = generate_dataset(cell, 2)
        gap = d.x[d.t == 0, 2].mean() - d.x[d.t == 1, 2].mean()
        assert gap > 3.0

    def test_model_purpose_isolation(self):
        # consuming model-internal randomness cannot perturb the data
        cell = default_cell()
        before = generate_dataset(cell, 5)
        derive_stream(cell.master_seed, 0, 5, 3).normal(0, 1, size=999)
        after = generate_dataset(cell, 5)
        assert (before.y == after.y).all()

    def test_different_replicates_differ(self):
        cell = default_cell()
        assert (generate_dataset(cell, 0).y != generate_dataset(cell, 1).y).any()


def test_outcome_coefficients_configurable():
    p = OutcomeParams(intercept=1.0, coef_x1=0.0, coef_x2=0.0, coef_x3=0.0,
                      coef_x4=0.0, ate_true=2.0, noise_sd=0.0)
    x = np.array([[5.0, 6.0, 7.0, 1.0]])
    y = generate_outcome(x, np.array([1]), p, stream())
    assert y[0] == pytest.approx(3.0, abs=1e-14)


def test_dataset_n_property():
    d = generate_dataset(default_cell(n_samples=123), 0)
    assert d.n == 123 and d.x.shape == (123, 4)
