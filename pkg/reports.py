"""
Report rendering: plain text for people, CSV and JSON for tools.

Numbers go through the same row dictionaries for every format, so CSV and
JSON of one run carry identical values. Nothing time-dependent is written.
"""
from __future__ import annotations

import csv
import io
import json

from config import TOOL_NAME, __version__
from studies import PLAN_COLUMNS, plan_row


def metadata():
    return {"tool": TOOL_NAME, "version": __version__}


def group_rows(arch) -> list[dict]:
    return [
        {
            "group": index,
            "width": group.width,
            "tam_width": group.tam_width,
            "depth": group.depth,
            "members": ";".join(group.members),
        }
        for index, group in enumerate(arch.groups)
    ]


def module_rows(report) -> list[dict]:
    return [
        {
            "module": check.name,
            "feasible": check.feasible,
            "w_min": check.w_min,
            "k_min": check.k_min,
            "time": check.best_time,
        }
        for check in report.checks
    ]


def gain_over_step1(plan, retest) -> float:
    """Relative gain of a plan over the unwidened Step-1 architecture, on the optimized objective."""
    reference = plan.step1_objective(retest)
    return plan.objective(retest) / reference - 1.0 if reference > 0 else 0.0


def optimize_document(soc, config, result, report, oracle_arch=None) -> dict:
    """JSON-ready mirror of an OptimizationResult plus the Step-1 architecture."""
    base = result.base
    best = result.best
    document = {
        **metadata(),
        "soc": soc.name,
        "settings": config.describe(),
        "step1": {
            "k": base.k,
            "w": base.w_total,
            "erpct_ratio": 1,
            "T": base.T,
            "n_max": result.n_max,
            "groups": group_rows(base),
        },
        "modules": module_rows(report),
        "n_max": result.n_max,
        "n_opt": result.n_opt,
        "objective": "D_th_unique" if result.retest else "D_th",
        "best": plan_row(best),
        "best_groups": group_rows(best.arch),
        "gain_over_step1": gain_over_step1(best, result.retest),
        "curve": [plan_row(plan) for plan in result.curve],
    }
    if oracle_arch is not None:
        document["oracle"] = {"k": oracle_arch.k, "T": oracle_arch.T, "groups": group_rows(oracle_arch)}
    return document


def render_json(document) -> str:
    return json.dumps(document, indent=2) + "\n"


def render_csv(rows, columns=None) -> str:
    if columns is None:
        columns = []
        for row in rows:
            columns.extend(key for key in row if key not in columns)
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _csv_value(row.get(key)) for key in columns})
    return buffer.getvalue()


def _csv_value(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return value


def format_table(rows, columns, formats=None) -> str:
    """Fixed-width text table; ``formats`` maps a column to a format spec such as '.1f'."""
    formats = formats or {}

    def cell(row, column):
        value = row.get(column)
        if value is None:
            return "-"
        if column in formats:
            return format(value, formats[column])
        return str(value)

    cells = [[cell(row, column) for column in columns] for row in rows]
    widths = [max([len(column)] + [len(line[i]) for line in cells]) for i, column in enumerate(columns)]
    lines = ["  ".join(column.rjust(width) for column, width in zip(columns, widths))]
    lines += ["  ".join(value.rjust(width) for value, width in zip(line, widths)) for line in cells]
    return "\n".join(lines)


PLAN_FORMATS = {
    "t_m": ".6f", "t_a": ".6f", "D_th": ".1f", "D_th_unique": ".1f", "D_th_step1": ".1f",
    "P_c": ".6f", "P_m": ".6f", "retest_rate": ".1f",
}


def render_optimize_text(document) -> str:
    settings = document["settings"]
    step1 = document["step1"]
    best = document["best"]
    flags = [
        "broadcast" if settings["broadcast"] else "no broadcast",
        "abort-on-fail" if settings["abort_on_fail"] else "no abort-on-fail",
        "re-test" if settings["retest"] else "no re-test",
    ]
    lines = [
        f"# {document['tool']} {document['version']}",
        f"SOC {document['soc']} on N={settings['channels']} V={settings['depth']} "
        f"f={settings['freq']:g} Hz t_i={settings['index_time']:g} s t_c={settings['contact_time']:g} s "
        f"({', '.join(flags)})",
        "",
        "Modules:",
        format_table(document["modules"], ["module", "k_min", "w_min", "time"]),
        "",
        f"Step 1: k={step1['k']} w={step1['w']} (E-RPCT {step1['k'] // 2}-to-{step1['w']}) "
        f"T={step1['T']} n_max={step1['n_max']}",
        format_table(step1["groups"], ["group", "width", "tam_width", "depth", "members"]),
        "",
        f"Step 2: n_opt={document['n_opt']} k={best['k']} T={best['T']} "
        f"D_th={best['D_th']:.1f} D_th_unique={best['D_th_unique']:.1f} "
        f"(+{100 * document['gain_over_step1']:.1f}% over Step 1 at n={document['n_opt']})",
        f"  P_c={best['P_c']:.6f} P_m={best['P_m']:.6f} t_m={best['t_m']:.6f} s t_a={best['t_a']:.6f} s",
        format_table(document["best_groups"], ["group", "width", "tam_width", "depth", "members"]),
        "",
        "Throughput per site count:",
        format_table(document["curve"], list(PLAN_COLUMNS), PLAN_FORMATS),
    ]
    if "oracle" in document:
        oracle = document["oracle"]
        lines += ["", f"Oracle: k={oracle['k']} T={oracle['T']} (heuristic k={step1['k']} T={step1['T']})"]
    return "\n".join(lines) + "\n"


def render_validation_text(report) -> str:
    verdict = "feasible" if report.feasible else "infeasible"
    lines = [
        f"SOC {report.soc_name} on N={report.channels} V={report.depth}: {verdict}",
        format_table(module_rows(report), ["module", "feasible", "w_min", "k_min", "time"]),
    ]
    if not report.feasible:
        lines.append("cannot be tested: " + ", ".join(report.infeasible_modules))
    return "\n".join(lines) + "\n"


def render_bench_text(rows, summary) -> str:
    columns = ["soc", "depth_label", "depth", "k", "n_max", "T"]
    if summary["compared"]:
        columns += ["k_ref", "n_max_ref", "dk"]
    lines = [format_table(rows, columns)]
    if summary["compared"]:
        lines.append(
            f"exact k matches: {summary['exact_k']}/{summary['compared']}, max |dk| = {summary['max_abs_dk']}"
        )
    return "\n".join(lines) + "\n"


def render_upgrades_text(comparison, rows) -> str:
    lines = [
        f"Budget {comparison.budget:g}; full memory upgrade costs {comparison.full_memory_cost:g} "
        f"and reaches {comparison.full_memory_throughput:.1f} devices/hour",
        format_table(
            rows,
            ["scenario", "spent", "channels", "depth", "n_opt", "k", "throughput", "gain", "gain_per_cost", "note"],
            {"spent": "g", "throughput": ".1f", "gain": ".1f", "gain_per_cost": ".4f"},
        ),
        f"preferred: {comparison.preferred}",
    ]
    return "\n".join(lines) + "\n"
