"""Report emission: machine-readable CSV, human-readable markdown, manifest.

The CSV holds one row per grid cell with full-precision numbers (shortest
round-trip decimal form, '.' separator, UTF-8, Unix newlines) so re-running
the same seed yields a byte-identical file.  The markdown mirrors the CSV at
two-decimal display precision and never feeds back into any computation.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass

from ._version import __version__
from .errors import InvalidParameterError, PartialReportError
from .harness import CellResult, GridReport, MethodStats, _summarize

_METHOD_COLS = (("LM", "lm"), ("Lasso", "lasso"), ("RF", "rf"))

CSV_COLUMNS = (
    ["scenario", "degree", "confounding", "ate_true", "pi_nominal",
     "pi_empirical_mean", "naive_ate", "naive_err"]
    + [f"{col}_{kind}" for _, col in _METHOD_COLS for kind in ("ate", "err")]
    + ["naive_ate_sd", "naive_err_sd"]
    + [f"{col}_{kind}" for _, col in _METHOD_COLS
       for kind in ("ate_sd", "err_sd")]
)


def _num(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def _cell_row(c: CellResult) -> list[str]:
    row = [c.scenario_id, str(c.degree), c.confounding, _num(c.ate_true),
           _num(c.pi_nominal), _num(c.mean_pi_empirical),
           _num(c.naive.mean_ate_sim), _num(c.naive.mean_error_pct)]
    for name, _ in _METHOD_COLS:
        s = c.methods.get(name)
        row += [_num(s.mean_ate_sim) if s else "",
                _num(s.mean_error_pct) if s else ""]
    row += [_num(c.naive.sd_ate_sim), _num(c.naive.sd_error_pct)]
    for name, _ in _METHOD_COLS:
        s = c.methods.get(name)
        row += [_num(s.sd_ate_sim) if s else "",
                _num(s.sd_error_pct) if s else ""]
    return row


def render_csv(report: GridReport, allow_partial: bool = False) -> str:
    if not report.complete and not allow_partial:
        raise PartialReportError(
            "report has aborted cells; pass allow_partial to emit anyway")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for c in report.cells:
        writer.writerow(_cell_row(c))
    return buf.getvalue()


def emit_csv(report: GridReport, path, allow_partial: bool = False) -> None:
    text = render_csv(report, allow_partial)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def load_csv(path) -> GridReport:
    """Rebuild a report from an emitted CSV.

    Only the tabulated values survive the round trip (replicate counts and
    retry bookkeeping live in the manifest), which is all that re-rendering
    or re-aggregating needs.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != list(CSV_COLUMNS):
            raise InvalidParameterError(f"{path} is not a grid report CSV")
        rows = list(reader)

    def stats(row, col):
        i = CSV_COLUMNS.index(f"{col}_ate")
        j = CSV_COLUMNS.index(f"{col}_ate_sd")
        if row[i] == "":
            return None
        return MethodStats(mean_ate_sim=float(row[i]),
                           sd_ate_sim=float(row[j]),
                           mean_error_pct=float(row[i + 1]),
                           sd_error_pct=float(row[j + 1]))

    cells = []
    seen_methods: list[str] = []
    for row in rows:
        methods = {}
        for name, col in _METHOD_COLS:
            s = stats(row, col)
            if s is not None:
                methods[name] = s
                if name not in seen_methods:
                    seen_methods.append(name)
        cells.append(CellResult(
            scenario_id=row[0], confounding=row[2], degree=int(row[1]),
            ate_true=float(row[3]), pi_nominal=float(row[4]),
            cell_index=-1, n_replicates=0, n_effective=0, retries=0,
            failures=0, mean_pi_empirical=float(row[5]),
            naive=stats(row, "naive"), methods=methods))

    methods = tuple(seen_methods)
    overall = _summarize(cells, methods, lambda c: True) if cells else {}
    excluded_ate = 0.1 if any(c.ate_true == 0.1 for c in cells) else None
    excluded = None
    if excluded_ate is not None and any(c.ate_true != excluded_ate for c in cells):
        excluded = _summarize(cells, methods, lambda c: c.ate_true != excluded_ate)
    return GridReport(cells=tuple(cells), overall_summary=overall,
                      excluded_summary=excluded, excluded_ate=excluded_ate,
                      methods=methods, master_seed=-1, complete=True,
                      statuses=(), total_retries=0)


# ---------------------------------------------------------------------------
# markdown
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.2f}"


def render_markdown(report: GridReport, allow_partial: bool = False) -> str:
    """Per-scenario cell tables plus the two summary tables (with and
    without the unstable placeholder true effect)."""
    if not report.complete and not allow_partial:
        raise PartialReportError(
            "report has aborted cells; pass allow_partial to render anyway")
    methods = [m for m in ("LM", "Lasso", "RF") if m in report.methods]
    lines = ["# Treatment-effect estimation grid", ""]
    if not report.complete:
        lines += ["**Warning: incomplete grid; some cells aborted.**", ""]

    by_scenario: dict[str, list[CellResult]] = {}
    for c in report.cells:
        by_scenario.setdefault(c.scenario_id, []).append(c)

    for sid, cells in by_scenario.items():
        lines.append(f"## Scenario: {sid}")
        lines.append("")
        header = ["ATE_true", "pi", "Naive", "Naive err%"]
        for m in methods:
            header += [m, f"{m} err%"]
        lines.append("| " + " | ".join(header) + " |")
        lines.append("|" + "---|" * len(header))
        for c in cells:
            row = [_fmt(c.ate_true), _fmt(c.pi_nominal),
                   _fmt(c.naive.mean_ate_sim), _fmt(c.naive.mean_error_pct)]
            for m in methods:
                s = c.methods[m]
                row += [_fmt(s.mean_ate_sim), _fmt(s.mean_error_pct)]
            lines.append("| " + " | ".join(row) + " |")
        lines.append("")

    def summary_table(title: str, summary: dict) -> None:
        lines.append(f"## {title}")
        lines.append("")
        header = ["Scenario", "Naive"] + methods
        lines.append("| " + " | ".join(header) + " |")
        lines.append("|" + "---|" * len(header))
        for sid, row in summary.items():
            cells_ = [sid, _fmt(row["naive"])] + [_fmt(row[m]) for m in methods]
            lines.append("| " + " | ".join(cells_) + " |")
        lines.append("")

    if report.overall_summary:
        summary_table("Mean percentage error by scenario",
                      report.overall_summary)
    if report.excluded_summary is not None:
        summary_table(
            f"Mean percentage error by scenario, excluding "
            f"ATE_true = {report.excluded_ate}", report.excluded_summary)
    return "\n".join(lines)


def emit_markdown(report: GridReport, path, allow_partial: bool = False) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(render_markdown(report, allow_partial))
        fh.write("\n")


# ---------------------------------------------------------------------------
# manifest
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunManifest:
    """Provenance for one simulate run; every result row traces back here."""

    config_echo: dict
    master_seed: int
    started_utc: str
    finished_utc: str
    version: str
    complete: bool
    total_retries: int
    cells: list
    outputs: list

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True)


def build_manifest(report: GridReport, config_echo: dict, started_utc: str,
                   finished_utc: str, outputs: list) -> RunManifest:
    cells = [{"cell_index": s.cell_index, "scenario": s.scenario_id,
              "ate_true": s.ate_true, "pi_nominal": s.pi_nominal,
              "status": s.status, "retries": s.retries,
              "failures": s.failures, "n_effective": s.n_effective,
              "detail": s.detail}
             for s in report.statuses]
    return RunManifest(config_echo=config_echo, master_seed=report.master_seed,
                       started_utc=started_utc, finished_utc=finished_utc,
                       version=__version__, complete=report.complete,
                       total_retries=report.total_retries, cells=cells,
                       outputs=[os.fspath(p) for p in outputs])


def emit_manifest(manifest: RunManifest, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(manifest.to_json())
        fh.write("\n")
