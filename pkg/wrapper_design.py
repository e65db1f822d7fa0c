"""
Module wrapper design.

Scan chains are balanced over the wrapper chains longest-first, then the
functional terminal cells are spread one by one over the shortest scan-in
(resp. scan-out) chain. All ties go to the lowest chain index, so a design
is a pure function of (module, width) and is cached.
"""
from __future__ import annotations

import heapq
import logging
from functools import lru_cache

from errors import ModelInputError
from models import AteSpec, ModuleSpec, WrapperDesign

logger = logging.getLogger(__name__)


def scan_test_time(si, so, patterns):
    """Cycles to apply ``patterns`` through wrapper chains of lengths si / so."""
    return (1 + max(si, so)) * patterns + min(si, so)


def _balance_scan(lengths, width):
    order = sorted(range(len(lengths)), key=lambda j: (-lengths[j], j))
    heap = [(0, chain) for chain in range(width)]
    chain_scan = [0] * width
    for j in order:
        load, chain = heapq.heappop(heap)
        chain_scan[chain] = load + lengths[j]
        heapq.heappush(heap, (chain_scan[chain], chain))
    return chain_scan


def _spread_cells(base, cells):
    heap = [(length, chain) for chain, length in enumerate(base)]
    heapq.heapify(heap)
    added = [0] * len(base)
    for _ in range(cells):
        length, chain = heapq.heappop(heap)
        added[chain] += 1
        heapq.heappush(heap, (length + 1, chain))
    return added


@lru_cache(maxsize=None)
def design_wrapper(module: ModuleSpec, width: int) -> WrapperDesign:
    """
    Build ``width`` wrapper chains for ``module``.

    Args:
        module: the module to wrap.
        width: number of wrapper chains (TAM wires), at least 1.

    Returns:
        WrapperDesign with per-chain scan, input-cell and output-cell counts,
        the longest scan-in / scan-out chains and the test time in cycles.
    """
    if width < 1:
        raise ModelInputError(f"wrapper width must be at least 1, got {width}")
    chain_scan = _balance_scan(module.scan_lengths, width)
    chain_in = _spread_cells(chain_scan, module.in_cells)
    chain_out = _spread_cells(chain_scan, module.out_cells)
    si = max(scan + cells for scan, cells in zip(chain_scan, chain_in))
    so = max(scan + cells for scan, cells in zip(chain_scan, chain_out))
    return WrapperDesign(
        module=module.name,
        width=width,
        chain_scan=tuple(chain_scan),
        chain_in_cells=tuple(chain_in),
        chain_out_cells=tuple(chain_out),
        si=si,
        so=so,
        test_time=scan_test_time(si, so, module.patterns),
    )


def test_time(module: ModuleSpec, width: int) -> int:
    return design_wrapper(module, width).test_time


# not a pytest test, despite the name
test_time.__test__ = False


@lru_cache(maxsize=None)
def best_wrapper(module: ModuleSpec, tam_width: int) -> WrapperDesign:
    """
    Fastest wrapper that fits on a TAM of ``tam_width`` wires.

    A module may leave wires of a wide TAM unused, so this is the minimum of
    design_wrapper over widths 1..tam_width (ties: narrowest). Widths past
    ``module.max_useful_width`` cannot shorten any chain and are not tried.
    """
    if tam_width < 1:
        raise ModelInputError(f"TAM width must be at least 1, got {tam_width}")
    best = design_wrapper(module, 1)
    for width in range(2, min(tam_width, module.max_useful_width) + 1):
        candidate = design_wrapper(module, width)
        if candidate.test_time < best.test_time:
            best = candidate
    return best


def tam_time(module: ModuleSpec, tam_width: int) -> int:
    """Cycles the module occupies on a TAM of ``tam_width`` wires."""
    return best_wrapper(module, tam_width).test_time


def min_tam_width(module: ModuleSpec, ate: AteSpec) -> int | None:
    """
    Smallest wrapper width whose test fits in the vector memory, or None.

    Widths are scanned upward because the heuristic time is not monotone in
    the width. The scan stops at min(N / 2, max_useful_width).
    """
    w_cap = min(ate.channels // 2, module.max_useful_width)
    for width in range(1, w_cap + 1):
        if test_time(module, width) <= ate.depth:
            return width
    logger.debug("module %s does not fit depth %d at any width up to %d", module.name, ate.depth, w_cap)
    return None


def min_channels(module: ModuleSpec, ate: AteSpec) -> int | None:
    """k_min(m): channels (two per wrapper chain) the module needs on its own; None if infeasible."""
    width = min_tam_width(module, ate)
    return None if width is None else 2 * width
