"""
Parameter studies built on the optimizer: sweeps, benchmark tables and
the channels-versus-memory upgrade comparison.
"""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import throughput_model
from architecture import fit_step1, max_sites, optimize_step2
from config import UPGRADE_BLOCK, parse_depth
from errors import InfeasibleError, InputError, ModelInputError
from models import AteSpec

logger = logging.getLogger(__name__)

PLAN_COLUMNS = (
    "n", "k", "w", "T", "t_m", "t_a", "D_th", "D_th_unique", "D_th_step1",
    "P_c", "P_m", "retest_rate", "k_free",
)


def plan_row(plan) -> dict:
    return {
        "n": plan.n,
        "k": plan.arch.k,
        "w": plan.arch.w_total,
        "T": plan.arch.T,
        "t_m": plan.t_m,
        "t_a": plan.t_a,
        "D_th": plan.d_th,
        "D_th_unique": plan.d_th_unique,
        "D_th_step1": plan.d_th_step1,
        "P_c": plan.prob_contact,
        "P_m": plan.prob_manuf,
        "retest_rate": plan.retest_rate,
        "k_free": plan.k_free,
    }


def _blank_plan():
    return {column: None for column in PLAN_COLUMNS}


def _sweep_point(soc, config, value, base):
    name = config.sweep.name
    if name == "channels":
        config = config.model_copy(update={"channels": value})
    elif name == "depth":
        config = config.model_copy(update={"depth": value})
    elif name in ("p_c", "p_m"):
        config = config.model_copy(update={name: value})
    row = {"parameter": name, "value": value, "n_max": None, "feasible": False}
    try:
        result = optimize_step2(
            soc, config.ate(), config.params(),
            widen_policy=config.widen_policy, site_cap=config.max_sites, base=base,
        )
    except InfeasibleError as exc:
        logger.info("sweep %s=%s infeasible: %s", name, value, exc)
        row.update(_blank_plan())
        return row
    row["n_max"] = result.n_max
    if name == "sites":
        plan = next((p for p in result.curve if p.n == value), None)
        if plan is None:
            row.update(_blank_plan())
            return row
    else:
        plan = result.best
    row["feasible"] = True
    row.update(plan_row(plan))
    if name == "p_m" and config.abort_on_fail:
        row.update(_effective_test_times(result.base, config))
    return row


def _effective_test_times(base, config):
    """t_a - t_c for n = 1..n_max on the Step-1 architecture: the manufacturing time abort-on-fail leaves."""
    ate, params = config.ate(), config.params()
    n_max = max_sites(base.k, ate.channels, params.broadcast)
    columns = {}
    for n in range(1, n_max + 1):
        point = throughput_model.evaluate(n, base.k, base.T, ate, params)
        columns[f"t_m_eff_n{n}"] = point.t_a - ate.contact_time
    return columns


def run_sweep(soc, config) -> list[dict]:
    """One row per swept value, in ascending value order."""
    if config.sweep is None:
        raise InputError("sweep needs a --sweep name:from:to:step descriptor")
    values = config.sweep.values()
    base = None
    if config.sweep.name in ("p_c", "p_m", "sites"):
        # the architecture does not depend on yields or on the site count
        base = fit_step1(soc, config.ate(), config.widen_policy)
    logger.info("sweeping %s over %d values", config.sweep.name, len(values))
    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        rows = list(pool.map(lambda value: _sweep_point(soc, config, value, base), values))
    if not any(row["feasible"] for row in rows):
        raise InfeasibleError(f"no swept value of {config.sweep.name} is feasible")
    return rows


def read_expected(path, base=1024) -> dict:
    """Reference table with columns soc,depth,k,n_max -> {(soc, depth): (k, n_max)}."""
    expected = {}
    with open(path, newline="", encoding="utf8") as handle:
        for line, record in enumerate(csv.DictReader(handle), start=2):
            try:
                key = (record["soc"].strip(), parse_depth(record["depth"], base))
                expected[key] = (int(record["k"]), int(record["n_max"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise InputError(f"{path}: bad reference row ({exc})", line) from None
    return expected


def bench_table(socs, depths, ate_template: AteSpec, expected=None, depth_labels=None,
                widen_policy="minimal") -> list[dict]:
    """
    Step 1 with stimuli broadcast for every (SOC, depth): channels k and n_max.

    When ``expected`` is given each row also carries the reference k, n_max
    and the channel difference.
    """
    if not depths:
        raise InputError("empty depth list")
    rows = []
    for soc in socs:
        for index, depth in enumerate(depths):
            ate = replace(ate_template, depth=depth)
            row = {
                "soc": soc.name,
                "depth": depth,
                "depth_label": depth_labels[index] if depth_labels else str(depth),
                "k": None,
                "w": None,
                "T": None,
                "n_max": None,
            }
            try:
                arch = fit_step1(soc, ate, widen_policy)
                row.update(k=arch.k, w=arch.w_total, T=arch.T, n_max=max_sites(arch.k, ate.channels, True))
            except InfeasibleError as exc:
                logger.info("%s at depth %d: %s", soc.name, depth, exc)
            if expected is not None:
                reference = expected.get((soc.name, depth))
                row["k_ref"] = reference[0] if reference else None
                row["n_max_ref"] = reference[1] if reference else None
                row["dk"] = row["k"] - reference[0] if reference and row["k"] is not None else None
            rows.append(row)
    return rows


def bench_summary(rows) -> dict:
    compared = [row for row in rows if row.get("dk") is not None]
    return {
        "rows": len(rows),
        "compared": len(compared),
        "exact_k": sum(1 for row in compared if row["dk"] == 0),
        "max_abs_dk": max((abs(row["dk"]) for row in compared), default=None),
    }


@dataclass(frozen=True)
class UpgradeScenario:
    name: str
    spent: float
    channels: int
    depth: int
    n_opt: int
    k: int
    throughput: float
    gain: float
    gain_per_cost: float
    note: str = ""


@dataclass(frozen=True)
class UpgradeComparison:
    budget: float
    scenarios: tuple
    preferred: str
    full_memory_cost: float
    full_memory_throughput: float


def _scenario(name, soc, ate, params, spent, baseline, widen_policy, site_cap=None, note=""):
    result = optimize_step2(soc, ate, params, widen_policy=widen_policy, site_cap=site_cap)
    value = result.best.objective(params.retest)
    gain = 0.0 if baseline is None else value - baseline
    return UpgradeScenario(
        name=name,
        spent=spent,
        channels=ate.channels,
        depth=ate.depth,
        n_opt=result.n_opt,
        k=result.best.arch.k,
        throughput=value,
        gain=gain,
        gain_per_cost=gain / spent if spent > 0 else 0.0,
        note=note,
    )


def compare_upgrades(soc, ate, params, channel_block_cost, memory_upgrade_cost, budget=None,
                     widen_policy="minimal", site_cap=None) -> UpgradeComparison:
    """
    Spend ``budget`` on extra 16-channel blocks or on doubling the vector
    memory of 16-channel blocks, and compare the throughput each buys.

    Doubling only takes effect once every block of the ATE is upgraded; a
    smaller budget reports the affordable fraction, and the full-upgrade
    throughput is reported separately. ``budget`` defaults to the price of
    the full memory upgrade. ``site_cap`` applies to every scenario.
    """
    if channel_block_cost <= 0 or memory_upgrade_cost <= 0:
        raise ModelInputError("upgrade costs must be positive")
    memory_blocks = math.ceil(ate.channels / UPGRADE_BLOCK)
    full_memory_cost = memory_blocks * memory_upgrade_cost
    if budget is None:
        budget = full_memory_cost
    if budget < 0:
        raise ModelInputError(f"budget must not be negative, got {budget}")

    baseline = _scenario("baseline", soc, ate, params, 0.0, None, widen_policy, site_cap)
    base_value = baseline.throughput

    blocks = int(budget // channel_block_cost)
    channels = _scenario(
        "channels", soc, replace(ate, channels=ate.channels + UPGRADE_BLOCK * blocks), params,
        blocks * channel_block_cost, base_value, widen_policy, site_cap,
        note=f"{blocks} blocks of {UPGRADE_BLOCK} channels",
    )

    affordable = min(memory_blocks, int(budget // memory_upgrade_cost))
    full = _scenario(
        "memory-full", soc, replace(ate, depth=2 * ate.depth), params,
        full_memory_cost, base_value, widen_policy, site_cap,
    )
    if affordable == memory_blocks:
        memory = replace(full, name="memory", note="all channels doubled")
    else:
        memory = UpgradeScenario(
            name="memory",
            spent=affordable * memory_upgrade_cost,
            channels=ate.channels,
            depth=ate.depth,
            n_opt=baseline.n_opt,
            k=baseline.k,
            throughput=base_value,
            gain=0.0,
            gain_per_cost=0.0,
            note=f"partial: {affordable}/{memory_blocks} blocks affordable, depth unchanged",
        )

    contenders = [s for s in (channels, memory) if s.gain > 0]
    if contenders:
        winner = max(contenders, key=lambda s: (s.gain, s.gain_per_cost))
        ties = [s for s in contenders if (s.gain, s.gain_per_cost) == (winner.gain, winner.gain_per_cost)]
        preferred = winner.name if len(ties) == 1 else "tie"
    else:
        preferred = "baseline"
    logger.info("upgrade comparison: channels %+.1f, memory %+.1f -> %s", channels.gain, memory.gain, preferred)
    return UpgradeComparison(
        budget=budget,
        scenarios=(baseline, channels, memory),
        preferred=preferred,
        full_memory_cost=full_memory_cost,
        full_memory_throughput=full.throughput,
    )


def upgrade_rows(comparison) -> list[dict]:
    return [
        {
            "scenario": s.name,
            "spent": s.spent,
            "channels": s.channels,
            "depth": s.depth,
            "n_opt": s.n_opt,
            "k": s.k,
            "throughput": s.throughput,
            "gain": s.gain,
            "gain_per_cost": s.gain_per_cost,
            "preferred": s.name == comparison.preferred,
            "note": s.note,
        }
        for s in comparison.scenarios
    ]
