"""
Test infrastructure design for multi-site testing.

Step 1 (fit_step1) packs the modules into channel groups (TAMs) with as few
ATE channels as possible while every group's filled vector memory stays
within the depth V; among placements with equal channel cost it keeps the
most free memory. Step 2 (optimize_step2) walks the site count from n_max
down to 1, hands the channels freed by dropping sites back to the deepest
channel group and keeps the site count with the best throughput.
"""
from __future__ import annotations

import logging
from dataclasses import replace

import throughput_model
from errors import InfeasibleError, SiteBudgetError
from models import AteSpec, Architecture, ChannelGroup, OptimizationResult, SitePlan, SocDescription, ThroughputParams
from wrapper_design import min_channels, tam_time

logger = logging.getLogger(__name__)

WIDEN_POLICIES = ("minimal", "kmin")


def group_depth(modules, width):
    """Filled vector memory of a channel group of ``width`` channels serving ``modules``."""
    return sum(tam_time(module, width // 2) for module in modules)


def total_free_memory(groups, depth_limit):
    return sum(group.free_memory(depth_limit) for group in groups)


def _widen(group, module, lookup, k_min, ate, used, policy):
    """Smallest even widening of ``group`` that also admits ``module``; (width, depth) or None."""
    budget = ate.channels - used
    members = [lookup[name] for name in group.members] + [module]
    if policy == "kmin":
        deltas = [k_min] if k_min <= budget else []
    else:
        deltas = range(2, budget + 1, 2)
    useful = max(m.max_useful_width for m in members)
    for delta in deltas:
        width = group.width + delta
        depth = group_depth(members, width)
        if depth <= ate.depth:
            return width, depth
        if width // 2 >= useful:
            # wider TAMs cannot shorten any member's test any more
            break
    return None


def _place(module, groups, lookup, k_min, ate, policy):
    """Return the channel groups after adding ``module``."""
    admitting = []
    for index, group in enumerate(groups):
        depth = group.depth + tam_time(module, group.tam_width)
        if depth <= ate.depth:
            admitting.append((depth, index))
    if admitting:
        depth, index = min(admitting)
        logger.debug("module %s joins group %d (depth %d)", module.name, index, depth)
        placed = list(groups)
        placed[index] = replace(groups[index], members=groups[index].members + (module.name,), depth=depth)
        return placed

    used = sum(group.width for group in groups)
    alternatives = []
    if used + k_min <= ate.channels:
        fresh = ChannelGroup(width=k_min, members=(module.name,), depth=tam_time(module, k_min // 2))
        alternatives.append((0, "new group", list(groups) + [fresh]))
    for index, group in enumerate(groups):
        widened = _widen(group, module, lookup, k_min, ate, used, policy)
        if widened is None:
            continue
        width, depth = widened
        candidate = list(groups)
        candidate[index] = ChannelGroup(width=width, members=group.members + (module.name,), depth=depth)
        alternatives.append((index + 1, f"widen group {index} to {width}", candidate))

    if not alternatives:
        raise InfeasibleError(
            f"module {module.name} needs more than the {ate.channels - used} channels left",
            module=module.name,
            channels_needed=used + k_min,
        )
    rank, label, chosen = max(alternatives, key=lambda alt: (total_free_memory(alt[2], ate.depth), -alt[0]))
    logger.debug("module %s: %s (free memory %d)", module.name, label, total_free_memory(chosen, ate.depth))
    return chosen


def fit_step1(soc: SocDescription, ate: AteSpec, widen_policy: str = "minimal") -> Architecture:
    """
    Fit the SOC test data on the ATE with minimum channels, then minimum filling.

    Raises:
        InfeasibleError: a module fits no width up to N/2, or the channel
            groups would need more than N channels.
    """
    if widen_policy not in WIDEN_POLICIES:
        raise ValueError(f"unknown widen policy {widen_policy!r}")
    demand = {}
    for module in soc.modules:
        k_min = min_channels(module, ate)
        if k_min is None:
            raise InfeasibleError(f"module {module.name} does not fit depth {ate.depth}", module=module.name)
        demand[module.name] = k_min

    order = sorted(soc.modules, key=lambda m: (-demand[m.name], -m.test_bits, m.name))
    lookup = {module.name: module for module in soc.modules}
    first = order[0]
    groups = [ChannelGroup(
        width=demand[first.name],
        members=(first.name,),
        depth=tam_time(first, demand[first.name] // 2),
    )]
    for module in order[1:]:
        groups = _place(module, groups, lookup, demand[module.name], ate, widen_policy)
    arch = Architecture(groups=tuple(groups))
    logger.info("step 1: %d groups, k=%d, T=%d", len(arch.groups), arch.k, arch.T)
    return arch


def max_sites(k: int, channels: int, broadcast: bool) -> int:
    """n_max for k channels per site on an N-channel ATE."""
    if k < 1:
        raise ValueError(f"channels per site must be positive, got {k}")
    n_max = (2 * channels) // k - 1 if broadcast else channels // k
    if n_max < 1:
        raise SiteBudgetError(f"{k} channels per site leave no room for a single site", channels_needed=k)
    return n_max


def channels_used(k: int, n: int, broadcast: bool) -> int:
    """ATE channels occupied by n sites of k channels (stimuli shared when broadcasting)."""
    return (n + 1) * k // 2 if broadcast else n * k


def redistribute(base: Architecture, n: int, lookup, ate: AteSpec, broadcast: bool):
    """
    Grow the deepest channel group one TAM wire at a time with the channels
    that n sites leave idle. Returns (architecture, channels still idle).
    """
    k_free = ate.channels - channels_used(base.k, n, broadcast)
    # one extra wire (two channels per site) costs n + 1 with broadcast, 2n without
    step_cost = n + 1 if broadcast else 2 * n
    groups = list(base.groups)
    while k_free > step_cost:
        index = max(range(len(groups)), key=lambda i: (groups[i].depth, -i))
        group = groups[index]
        width = group.width + 2
        depth = group_depth([lookup[name] for name in group.members], width)
        groups[index] = replace(group, width=width, depth=depth)
        k_free -= step_cost
    arch = Architecture(groups=tuple(groups))
    if arch.k != base.k:
        logger.debug("n=%d: widened to k=%d, T %d -> %d", n, arch.k, base.T, arch.T)
    return arch, k_free


def plan_sites(n, arch, base, k_free, ate, params) -> SitePlan:
    point = throughput_model.evaluate(n, arch.k, arch.T, ate, params)
    step1 = point if arch == base else throughput_model.evaluate(n, base.k, base.T, ate, params)
    return SitePlan(
        n=n,
        arch=arch,
        t_m=point.t_m,
        t_a=point.t_a,
        d_th=point.d_th,
        d_th_unique=point.d_th_unique,
        prob_contact=point.prob_contact,
        prob_manuf=point.prob_manuf,
        d_th_step1=step1.d_th,
        d_th_step1_unique=step1.d_th_unique,
        retest_rate=point.retest_rate,
        k_free=k_free,
    )


def optimize_step2(soc: SocDescription, ate: AteSpec, params: ThroughputParams, *,
                   widen_policy: str = "minimal", site_cap: int | None = None,
                   base: Architecture | None = None) -> OptimizationResult:
    """
    Find the site count with maximum throughput.

    Every n is evaluated independently from the Step-1 architecture. The
    optimum maximizes D_th, or D_th^u when params.retest is set; ties go to
    the larger n. ``site_cap`` limits the search to n <= site_cap.
    """
    if base is None:
        base = fit_step1(soc, ate, widen_policy)
    n_max = max_sites(base.k, ate.channels, params.broadcast)
    top = n_max if site_cap is None else max(1, min(n_max, site_cap))
    lookup = {module.name: module for module in soc.modules}
    curve = []
    for n in range(top, 0, -1):
        arch, k_free = redistribute(base, n, lookup, ate, params.broadcast)
        curve.append(plan_sites(n, arch, base, k_free, ate, params))
    best = max(curve, key=lambda plan: (plan.objective(params.retest), plan.n))
    logger.info("step 2: n_max=%d n_opt=%d D_th=%.1f", n_max, best.n, best.d_th)
    return OptimizationResult(
        n_max=n_max,
        n_opt=best.n,
        curve=tuple(curve),
        best=best,
        base=base,
        retest=params.retest,
        site_cap=site_cap,
    )
