"""
Brute-force references for tiny instances.

These enumerate every wrapper assignment and every grouping of modules,
so they are exact but exponential; hard caps turn oversized requests into
OracleCapError instead of a hung process.
"""
from __future__ import annotations

import itertools
import logging
from functools import lru_cache

from errors import InfeasibleError, OracleCapError
from models import AteSpec, Architecture, ChannelGroup, ModuleSpec, SocDescription
from wrapper_design import scan_test_time

logger = logging.getLogger(__name__)

MAX_SCAN_CHAINS = 5
MAX_CELLS = 8
# brute_force_fit needs TAM widths up to N / 2 = 6
MAX_WRAPPER_WIDTH = 6
MAX_MODULES = 4
MAX_CHANNELS = 12


def check_module_caps(module: ModuleSpec):
    if module.scan_count > MAX_SCAN_CHAINS:
        raise OracleCapError(f"module {module.name}: {module.scan_count} scan chains > {MAX_SCAN_CHAINS}")
    cells = module.inputs + module.outputs + 2 * module.bidirs
    if cells > MAX_CELLS:
        raise OracleCapError(f"module {module.name}: {cells} terminal cells > {MAX_CELLS}")


def check_fit_caps(soc: SocDescription, ate: AteSpec):
    if len(soc.modules) > MAX_MODULES:
        raise OracleCapError(f"SOC {soc.name}: {len(soc.modules)} modules > {MAX_MODULES}")
    if ate.channels > MAX_CHANNELS:
        raise OracleCapError(f"ATE with {ate.channels} channels > {MAX_CHANNELS}")
    for module in soc.modules:
        check_module_caps(module)


def _compositions(total, parts):
    """Every way to write ``total`` identical cells as ``parts`` ordered non-negative counts."""
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        previous = -1
        counts = []
        for bar in bars:
            counts.append(bar - previous - 1)
            previous = bar
        counts.append(total + parts - 1 - previous - 1)
        yield counts


def _best_side(chain_scan, cells):
    return min(
        max(scan + extra for scan, extra in zip(chain_scan, counts))
        for counts in _compositions(cells, len(chain_scan))
    )


@lru_cache(maxsize=None)
def exhaustive_wrapper(module: ModuleSpec, width: int) -> int:
    """
    Exact minimum test time of ``module`` over all wrapper designs with ``width`` chains.

    The time grows with both si and so, so for every scan assignment the
    input and output cell spreads are optimized independently.
    """
    check_module_caps(module)
    if not 1 <= width <= MAX_WRAPPER_WIDTH:
        raise OracleCapError(f"wrapper width {width} outside 1..{MAX_WRAPPER_WIDTH}")
    loads = set()
    for assignment in itertools.product(range(width), repeat=module.scan_count):
        chain_scan = [0] * width
        for length, chain in zip(module.scan_lengths, assignment):
            chain_scan[chain] += length
        loads.add(tuple(sorted(chain_scan)))
    best = None
    for chain_scan in loads:
        si = _best_side(chain_scan, module.in_cells)
        so = _best_side(chain_scan, module.out_cells)
        time = scan_test_time(si, so, module.patterns)
        if best is None or time < best:
            best = time
    return best


def _partitions(items):
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for partition in _partitions(rest):
        yield [[head]] + partition
        for index in range(len(partition)):
            yield partition[:index] + [[head] + partition[index]] + partition[index + 1:]


def brute_force_fit(soc: SocDescription, ate: AteSpec) -> Architecture:
    """
    Exact lexicographic optimum (fewest channels, then smallest depth) over
    all groupings of the modules and all even group widths up to N.
    """
    check_fit_caps(soc, ate)
    widths = range(2, ate.channels + 1, 2)
    best_key = None
    best_groups = None
    for partition in _partitions(list(soc.modules)):
        for group_widths in itertools.product(widths, repeat=len(partition)):
            k = sum(group_widths)
            if k > ate.channels or (best_key is not None and k > best_key[0]):
                continue
            depths = [
                sum(exhaustive_wrapper(module, width // 2) for module in block)
                for block, width in zip(partition, group_widths)
            ]
            if max(depths) > ate.depth:
                continue
            groups = sorted(
                (ChannelGroup(width=width, members=tuple(sorted(m.name for m in block)), depth=depth)
                 for block, width, depth in zip(partition, group_widths, depths)),
                key=lambda g: (-g.width, g.members),
            )
            key = (k, max(depths), tuple((g.width, g.members) for g in groups))
            if best_key is None or key < best_key:
                best_key = key
                best_groups = groups
    if best_groups is None:
        raise InfeasibleError(f"no grouping of {soc.name} fits {ate.channels} channels of depth {ate.depth}")
    logger.debug("oracle optimum for %s: k=%d T=%d", soc.name, best_key[0], best_key[1])
    return Architecture(groups=tuple(best_groups))
