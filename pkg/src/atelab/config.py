"""Scenario configuration: a declarative YAML file with strict validation.

An empty document means "run the full default study": all six scenarios,
the standard true-effect and participation grids, 1000 rows per replicate,
200 replicates per cell.  Every key is optional, unknown keys are rejected,
and the echoed canonical form round-trips through parse_config unchanged.
"""

from __future__ import annotations

import dataclasses
import os
from typing import Any

import yaml

from .datagen import CovariateSpec, OutcomeParams, TreatmentRule
from .errors import ConfigError, InvalidParameterError
from .harness import (CONFOUNDING_MODES, DEGREE_NAMES, DEFAULT_ATE_GRID,
                      DEFAULT_MASTER_SEED, DEFAULT_PI_GRID, ScenarioConfig)
from .models import ForestParams, LassoParams

SCENARIO_IDS = tuple(
    f"{'randomized' if mode == 'none' else 'confounded'}-{DEGREE_NAMES[d]}"
    for mode in CONFOUNDING_MODES for d in (1, 2, 3))

_SCENARIO_BY_ID = {
    sid: (mode, d)
    for sid, (mode, d) in zip(SCENARIO_IDS,
                              [(m, d) for m in CONFOUNDING_MODES
                               for d in (1, 2, 3)])}

_TOP_KEYS = {
    "master_seed", "n_samples", "n_replicates", "ate_true_grid", "pi_grid",
    "methods", "scenarios", "covariates", "outcome", "treatment_rule",
    "lasso", "forest",
}


def _check_keys(section: dict, allowed, where: str) -> None:
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {where}")


def _coerce(section: dict, cls, where: str):
    """Build a dataclass from a mapping, naming any offending field."""
    _check_keys(section, [f.name for f in dataclasses.fields(cls)], where)
    try:
        obj = cls(**section)
        obj.validate()
    except InvalidParameterError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    return obj


def parse_config(text: str) -> list[ScenarioConfig]:
    """Parse inline YAML into validated per-scenario configs."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"could not parse config: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping of keys to values")
    _check_keys(raw, _TOP_KEYS, "top level")

    scenarios = raw.get("scenarios", list(SCENARIO_IDS))
    if not isinstance(scenarios, list) or not scenarios:
        raise ConfigError("scenarios: must be a non-empty list")
    for sid in scenarios:
        if sid not in _SCENARIO_BY_ID:
            raise ConfigError(
                f"scenarios: unknown scenario {sid!r}; choose from {list(SCENARIO_IDS)}")

    covariates = _coerce(raw.get("covariates", {}) or {}, CovariateSpec,
                         "covariates")
    outcome = _coerce(raw.get("outcome", {}) or {}, OutcomeParams, "outcome")
    rule_raw = dict(raw.get("treatment_rule", {}) or {})
    _check_keys(rule_raw, ("lower", "upper", "mid_prob"), "treatment_rule")
    try:
        rule = TreatmentRule.confounded(**rule_raw)
        rule.validate()
    except InvalidParameterError as exc:
        raise ConfigError(f"treatment_rule: {exc}") from exc
    lasso = _coerce(raw.get("lasso", {}) or {}, LassoParams, "lasso")
    forest = _coerce(raw.get("forest", {}) or {}, ForestParams, "forest")

    shared: dict[str, Any] = dict(
        ate_true_grid=tuple(float(a) for a in raw.get("ate_true_grid", DEFAULT_ATE_GRID)),
        pi_grid=tuple(float(p) for p in raw.get("pi_grid", DEFAULT_PI_GRID)),
        n_samples=int(raw.get("n_samples", 1000)),
        n_replicates=int(raw.get("n_replicates", 200)),
        master_seed=int(raw.get("master_seed", DEFAULT_MASTER_SEED)),
        methods=tuple(raw.get("methods", ("LM", "Lasso", "RF"))),
        covariates=covariates, outcome=outcome, treatment_rule=rule,
        lasso=lasso, forest=forest)

    configs = []
    for sid in scenarios:
        mode, degree = _SCENARIO_BY_ID[sid]
        cfg = ScenarioConfig(confounding=mode, degree=degree, **shared)
        try:
            cfg.validate()
        except InvalidParameterError as exc:
            raise ConfigError(str(exc)) from exc
        configs.append(cfg)
    return configs


def load_config(path: str | os.PathLike) -> list[ScenarioConfig]:
    """Read and parse a config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text)


def config_echo(configs: list[ScenarioConfig]) -> dict:
    """The canonical mapping for these configs; parses back to equal configs."""
    first = configs[0]
    return {
        "master_seed": first.master_seed,
        "n_samples": first.n_samples,
        "n_replicates": first.n_replicates,
        "ate_true_grid": [float(a) for a in first.ate_true_grid],
        "pi_grid": [float(p) for p in first.pi_grid],
        "methods": list(first.methods),
        "scenarios": [c.scenario_id for c in configs],
        "covariates": dataclasses.asdict(first.covariates),
        "outcome": dataclasses.asdict(first.outcome),
        "treatment_rule": {"lower": first.treatment_rule.lower,
                           "upper": first.treatment_rule.upper,
                           "mid_prob": first.treatment_rule.mid_prob},
        "lasso": dataclasses.asdict(first.lasso),
        "forest": dataclasses.asdict(first.forest),
    }


def emit_config(configs: list[ScenarioConfig]) -> str:
    """Serialize the canonical echo as YAML text."""
    return yaml.safe_dump(config_echo(configs), sort_keys=False)
