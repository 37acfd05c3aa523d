"""Monte-Carlo grid runner.

Iterates scenarios x true-effect grid x participation grid, runs the
requested number of replicates per cell, and aggregates.  Per-cell error
follows the convention of the study being reproduced: the percentage error
of the replicate-mean estimate (not the mean of per-replicate errors), so a
method that is merely noisy but unbiased converges to zero error as
replicates grow.  Aggregation always walks replicates in index order with
exact (fsum) summation, so results do not depend on execution order.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._version import __version__
from .datagen import CellConfig, CovariateSpec, OutcomeParams, TreatmentRule, generate_dataset
from .errors import (CellAbortError, DegenerateSplitError, EmptySummaryError,
                     InvalidParameterError)
from .estimator import METHOD_NAMES, ModelSettings, estimate_all, pct_error
from .models import ForestParams, LassoParams
from .prng import PURPOSE_MODEL, RETRY_PURPOSE_STRIDE, derive_stream

log = logging.getLogger("atelab")

DEFAULT_MASTER_SEED = 1729
DEFAULT_ATE_GRID = (-10.0, -5.0, 0.1, 5.0, 10.0)
DEFAULT_PI_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)

CONFOUNDING_MODES = ("none", "single_x3")
DEGREE_NAMES = {1: "linear", 2: "squared", 3: "cubic"}

# Cell indices encode (scenario, ate position, pi position) so extending the
# scenario list never changes the randomness of existing cells.
_ATE_STRIDE = 100
_SCENARIO_STRIDE = 10_000


@dataclass(frozen=True)
class ScenarioConfig:
    """One scenario (confounding mode + outcome degree) and its grids."""

    confounding: str
    degree: int
    ate_true_grid: tuple = DEFAULT_ATE_GRID
    pi_grid: tuple = DEFAULT_PI_GRID
    n_samples: int = 1000
    n_replicates: int = 200
    master_seed: int = DEFAULT_MASTER_SEED
    methods: tuple = METHOD_NAMES
    covariates: CovariateSpec = field(default_factory=CovariateSpec)
    outcome: OutcomeParams = field(default_factory=OutcomeParams)
    treatment_rule: TreatmentRule = field(default_factory=TreatmentRule.confounded)
    lasso: LassoParams = field(default_factory=LassoParams)
    forest: ForestParams = field(default_factory=ForestParams)

    @property
    def scenario_id(self) -> str:
        mode = "randomized" if self.confounding == "none" else "confounded"
        return f"{mode}-{DEGREE_NAMES[self.degree]}"

    @property
    def scenario_code(self) -> int:
        return (0 if self.confounding == "none" else 3) + (self.degree - 1)

    def validate(self) -> None:
        if self.confounding not in CONFOUNDING_MODES:
            raise InvalidParameterError(
                f"confounding must be one of {CONFOUNDING_MODES}, "
                f"got {self.confounding!r}")
        if self.degree not in DEGREE_NAMES:
            raise InvalidParameterError(f"degree must be 1, 2 or 3, got {self.degree}")
        if not self.ate_true_grid:
            raise InvalidParameterError("ate_true_grid must be non-empty")
        if any(a == 0.0 for a in self.ate_true_grid):
            raise InvalidParameterError(
                "ate_true_grid must not contain 0: the percentage error "
                "divides by the true effect (use a placeholder like 0.1)")
        if not self.pi_grid:
            raise InvalidParameterError("pi_grid must be non-empty")
        if any(not (0.0 < p < 1.0) for p in self.pi_grid):
            raise InvalidParameterError("pi values must lie strictly in (0, 1)")
        if self.n_samples < 50:
            raise InvalidParameterError("n_samples must be >= 50")
        if self.n_replicates < 1:
            raise InvalidParameterError("n_replicates must be >= 1")
        if self.master_seed < 0:
            raise InvalidParameterError("master_seed must be >= 0")
        unknown = [m for m in self.methods if m not in METHOD_NAMES]
        if unknown:
            raise InvalidParameterError(
                f"unknown methods {unknown}; choose from {METHOD_NAMES}")
        self.covariates.validate()
        self.outcome.validate()
        self.lasso.validate()
        self.forest.validate()
        if self.confounding == "single_x3":
            TreatmentRule.confounded(self.treatment_rule.lower,
                                     self.treatment_rule.upper,
                                     self.treatment_rule.mid_prob).validate()


def cell_index(scenario_code: int, ate_idx: int, pi_idx: int) -> int:
    """Stable identity of one grid cell inside the seed space."""
    if not (0 <= pi_idx < _ATE_STRIDE and 0 <= ate_idx < _SCENARIO_STRIDE // _ATE_STRIDE):
        raise InvalidParameterError("grid too large for the cell index layout")
    return scenario_code * _SCENARIO_STRIDE + ate_idx * _ATE_STRIDE + pi_idx


@dataclass(frozen=True)
class MethodStats:
    """Aggregates for one estimator within one cell.

    mean_error_pct is the percentage error of mean_ate_sim (the table
    convention); sd_error_pct is the spread of per-replicate errors.
    """

    mean_ate_sim: float
    sd_ate_sim: float
    mean_error_pct: float
    sd_error_pct: float


@dataclass(frozen=True)
class CellResult:
    scenario_id: str
    confounding: str
    degree: int
    ate_true: float
    pi_nominal: float
    cell_index: int
    n_replicates: int
    n_effective: int
    retries: int
    failures: int
    mean_pi_empirical: float
    naive: MethodStats
    methods: dict[str, MethodStats]


@dataclass(frozen=True)
class CellStatus:
    cell_index: int
    scenario_id: str
    ate_true: float
    pi_nominal: float
    status: str  # "ok" | "aborted"
    retries: int
    failures: int
    n_effective: int
    detail: str = ""


@dataclass(frozen=True)
class GridReport:
    """Every cell plus per-scenario summary rows.

    Summaries map scenario_id -> column -> mean over that scenario's cells
    of the cell error, where column is "naive" or a method name.  The
    excluded summary drops cells at the unstable placeholder true effect.
    """

    cells: tuple
    overall_summary: dict
    excluded_summary: dict | None
    excluded_ate: float | None
    methods: tuple
    master_seed: int
    complete: bool
    statuses: tuple
    total_retries: int
    version: str = __version__


def _fmean(values) -> float:
    return math.fsum(values) / len(values)


def _fsd(values, mean: float) -> float:
    if len(values) < 2:
        return 0.0
    return math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (len(values) - 1))


def _aggregate(ates: list, errors: list, ate_true: float) -> MethodStats:
    mean_ate = _fmean(ates)
    return MethodStats(mean_ate_sim=mean_ate,
                       sd_ate_sim=_fsd(ates, mean_ate),
                       mean_error_pct=pct_error(mean_ate, ate_true),
                       sd_error_pct=_fsd(errors, _fmean(errors)))


def run_cell(config: ScenarioConfig, ate_true: float, pi: float,
             cell_idx: int, replicate_order=None) -> CellResult:
    """Run every replicate of one grid cell and aggregate.

    ``replicate_order`` only reorders execution (a testing hook for the
    order-independence contract); results are stored by replicate index and
    aggregated in index order regardless.

    A replicate whose generated treatment vector is degenerate is retried
    once from fresh purpose-tagged draws; if it fails again it is dropped.
    More than 1% dropped replicates abort the cell.
    """
    config.validate()
    if config.confounding == "none":
        rule = TreatmentRule.randomized(pi)
    else:
        rule = replace(config.treatment_rule, mode="confounded")
    cell = CellConfig(
        n_samples=config.n_samples,
        covariates=config.covariates,
        outcome=replace(config.outcome, ate_true=ate_true, degree=config.degree),
        treatment=rule,
        master_seed=config.master_seed,
        cell_index=cell_idx)
    settings = ModelSettings(lasso=config.lasso, forest=config.forest)

    n_rep = config.n_replicates
    order = range(n_rep) if replicate_order is None else replicate_order
    results: list = [None] * n_rep
    retries = 0
    for r in order:
        attempt = 0
        dataset = None
        while dataset is None and attempt <= 1:
            try:
                dataset = generate_dataset(cell, r, attempt=attempt)
            except DegenerateSplitError:
                if attempt == 0:
                    retries += 1
                    log.info("cell %d replicate %d degenerate, retrying",
                             cell_idx, r)
                attempt += 1
        if dataset is None:
            log.warning("cell %d replicate %d dropped after retry", cell_idx, r)
            continue
        model_stream = derive_stream(config.master_seed, cell_idx, r,
                                     PURPOSE_MODEL + attempt * RETRY_PURPOSE_STRIDE)
        results[r] = estimate_all(dataset, ate_true, config.methods,
                                  model_stream, settings)

    done = [res for res in results if res is not None]
    failures = n_rep - len(done)
    if failures > 0.01 * n_rep:
        raise CellAbortError(
            f"cell {cell_idx} ({config.scenario_id}, ate_true={ate_true}, "
            f"pi={pi}): {failures}/{n_rep} replicates degenerate after one "
            "retry each")

    naive = _aggregate([e.ate_naive for e in done],
                       [e.error_naive_pct for e in done], ate_true)
    per_method = {
        name: _aggregate([e.methods[name].ate_sim for e in done],
                         [e.methods[name].error_pct for e in done], ate_true)
        for name in config.methods}
    return CellResult(
        scenario_id=config.scenario_id, confounding=config.confounding,
        degree=config.degree, ate_true=ate_true, pi_nominal=pi,
        cell_index=cell_idx, n_replicates=n_rep, n_effective=len(done),
        retries=retries, failures=failures,
        mean_pi_empirical=_fmean([e.pi_empirical for e in done]),
        naive=naive, methods=per_method)


def _run_cell_task(args):
    config, ate, pi, idx = args
    try:
        return run_cell(config, ate, pi, idx), None
    except CellAbortError as exc:
        return None, str(exc)


def _summarize(cells, methods, keep) -> dict:
    """Per-scenario arithmetic mean of cell errors over cells passing keep."""
    summary: dict = {}
    by_scenario: dict = {}
    for c in cells:
        by_scenario.setdefault(c.scenario_id, []).append(c)
    for sid, group in by_scenario.items():
        kept = [c for c in group if keep(c)]
        if not kept:
            raise EmptySummaryError(
                f"scenario {sid}: no cells left to summarize")
        row = {"naive": _fmean([c.naive.mean_error_pct for c in kept])}
        for m in methods:
            row[m] = _fmean([c.methods[m].mean_error_pct for c in kept])
        summary[sid] = row
    return summary


def run_grid(configs, workers: int = 1, progress=None) -> GridReport:
    """Run all cells of every scenario config and summarize.

    Cells are independent; ``workers`` > 1 spreads them over processes
    without changing any result.  Aborted cells are recorded in the report's
    statuses and mark it incomplete rather than killing the whole grid.
    """
    configs = list(configs)
    if not configs:
        raise InvalidParameterError("run_grid needs at least one scenario")
    for cfg in configs:
        cfg.validate()
    methods = configs[0].methods
    tasks = []
    meta = []
    for cfg in configs:
        for ai, ate in enumerate(cfg.ate_true_grid):
            for pi_i, pi in enumerate(cfg.pi_grid):
                idx = cell_index(cfg.scenario_code, ai, pi_i)
                tasks.append((cfg, ate, pi, idx))
                meta.append((cfg.scenario_id, ate, pi, idx))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_cell_task, tasks))
    else:
        outcomes = []
        for i, task in enumerate(tasks):
            outcomes.append(_run_cell_task(task))
            if progress is not None:
                progress(i + 1, len(tasks))

    cells = []
    statuses = []
    for (sid, ate, pi, idx), (cell, error) in zip(meta, outcomes):
        if cell is not None:
            cells.append(cell)
            statuses.append(CellStatus(
                cell_index=idx, scenario_id=sid, ate_true=ate, pi_nominal=pi,
                status="ok", retries=cell.retries, failures=cell.failures,
                n_effective=cell.n_effective))
        else:
            log.error("aborted: %s", error)
            statuses.append(CellStatus(
                cell_index=idx, scenario_id=sid, ate_true=ate, pi_nominal=pi,
                status="aborted", retries=0, failures=0, n_effective=0,
                detail=error or ""))
    complete = all(s.status == "ok" for s in statuses)

    overall = _summarize(cells, methods, lambda c: True) if cells else {}
    excluded_ate = 0.1 if any(c.ate_true == 0.1 for c in cells) else None
    excluded = None
    if excluded_ate is not None and any(c.ate_true != excluded_ate for c in cells):
        excluded = _summarize(cells, methods,
                              lambda c: c.ate_true != excluded_ate)
    return GridReport(cells=tuple(cells), overall_summary=overall,
                      excluded_summary=excluded, excluded_ate=excluded_ate,
                      methods=tuple(methods),
                      master_seed=configs[0].master_seed, complete=complete,
                      statuses=tuple(statuses),
                      total_retries=sum(s.retries for s in statuses))


def summarize_excluding(report: GridReport, excluded_ate: float) -> dict:
    """Per-scenario mean cell errors with one true-effect value dropped."""
    if not any(c.ate_true == excluded_ate for c in report.cells):
        raise InvalidParameterError(
            f"excluded_ate={excluded_ate} does not appear in the grid")
    return _summarize(report.cells, report.methods,
                      lambda c: c.ate_true != excluded_ate)


def default_scenarios(**overrides) -> list:
    """The six standard scenarios (both confounding modes x three degrees)."""
    out = []
    for confounding in CONFOUNDING_MODES:
        for degree in (1, 2, 3):
            out.append(ScenarioConfig(confounding=confounding, degree=degree,
                                      **overrides))
    return out
