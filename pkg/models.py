from __future__ import annotations

from dataclasses import dataclass, field

from errors import DuplicateModuleError, InputError, ModelInputError


@dataclass(frozen=True)
class ModuleSpec:
    """
    One embedded module (core) of an SOC as seen by the test infrastructure.

    Attributes:
        name (str): Unique module identifier inside its SOC.
        inputs (int): Functional input terminals i(m).
        outputs (int): Functional output terminals o(m).
        bidirs (int): Functional bidirectional terminals b(m).
        scan_lengths (tuple[int, ...]): Flip-flop count of every internal scan chain.
        patterns (int): Number of test patterns p(m).

    Properties:
        scan_count: s(m), the number of internal scan chains.
        scan_flops: total flip-flops over all scan chains.
        in_cells / out_cells: wrapper cells on the scan-in / scan-out side.
            A bidirectional terminal counts once on each side.
        max_useful_width: widest wrapper that can still shorten a chain.
        test_bits: test data volume used to order equally demanding modules.
    """
    name: str
    inputs: int
    outputs: int
    bidirs: int
    scan_lengths: tuple[int, ...]
    patterns: int

    def __post_init__(self):
        object.__setattr__(self, "scan_lengths", tuple(self.scan_lengths))
        if not self.name:
            raise InputError("module name must not be empty")
        for label, value in (("Inputs", self.inputs), ("Outputs", self.outputs), ("Bidirs", self.bidirs)):
            if value < 0:
                raise InputError(f"module {self.name}: negative count for {label}")
        if any(length < 1 for length in self.scan_lengths):
            raise InputError(f"module {self.name}: scan chain lengths must be positive")
        if self.patterns < 1:
            raise InputError(f"module {self.name}: Patterns must be at least 1")
        if self.inputs + self.outputs + self.bidirs + self.scan_count < 1:
            raise InputError(f"module {self.name}: nothing to access (no terminals, no scan chains)")

    @property
    def scan_count(self):
        return len(self.scan_lengths)

    @property
    def scan_flops(self):
        return sum(self.scan_lengths)

    @property
    def in_cells(self):
        return self.inputs + self.bidirs

    @property
    def out_cells(self):
        return self.outputs + self.bidirs

    @property
    def max_useful_width(self):
        return self.scan_count + max(self.in_cells, self.out_cells)

    @property
    def test_bits(self):
        return self.patterns * (self.scan_flops + self.in_cells + self.out_cells)


@dataclass(frozen=True)
class SocDescription:
    """A modular SOC; a single module is the flat-SOC case."""
    name: str
    modules: tuple[ModuleSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "modules", tuple(self.modules))
        if not self.modules:
            raise InputError(f"SOC {self.name}: no modules")
        seen = set()
        for module in self.modules:
            if module.name in seen:
                raise DuplicateModuleError(f"SOC {self.name}: duplicate module name {module.name}")
            seen.add(module.name)

    def module(self, name):
        return next(m for m in self.modules if m.name == name)


@dataclass(frozen=True)
class AteSpec:
    """
    The fixed test cell: ATE plus probe station.

    Attributes:
        channels (int): N, ATE channels available.
        depth (int): V, vector memory depth per channel.
        freq (float): test clock frequency in Hz.
        index_time (float): t_i in seconds.
        contact_time (float): t_c in seconds.
    """
    channels: int
    depth: int
    freq: float = 5e6
    index_time: float = 0.7
    contact_time: float = 0.01

    def __post_init__(self):
        if self.channels < 2:
            raise ModelInputError(f"ATE needs at least 2 channels, got {self.channels}")
        if self.depth < 1:
            raise ModelInputError(f"vector memory depth must be positive, got {self.depth}")
        if not self.freq > 0:
            raise ModelInputError(f"test clock frequency must be positive, got {self.freq}")
        if self.index_time < 0 or self.contact_time < 0:
            raise ModelInputError("index and contact times must not be negative")


@dataclass(frozen=True)
class ThroughputParams:
    """Yield figures and the three flow variants (broadcast, abort-on-fail, re-test)."""
    p_c: float = 1.0
    p_m: float = 1.0
    broadcast: bool = False
    abort_on_fail: bool = False
    retest: bool = False

    def __post_init__(self):
        for label, value in (("p_c", self.p_c), ("p_m", self.p_m)):
            if not 0.0 <= value <= 1.0:
                raise ModelInputError(f"{label} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class ModuleCheck:
    name: str
    feasible: bool
    w_min: int | None = None
    k_min: int | None = None
    best_time: int = 0


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the early feasibility screen; infeasibility is data, not an exception."""
    soc_name: str
    channels: int
    depth: int
    checks: tuple[ModuleCheck, ...]

    @property
    def feasible(self):
        return all(check.feasible for check in self.checks)

    @property
    def infeasible_modules(self):
        return [check.name for check in self.checks if not check.feasible]


@dataclass(frozen=True)
class WrapperDesign:
    """
    Wrapper chains of one module at a given width.

    chain_scan, chain_in_cells and chain_out_cells are indexed by wrapper chain;
    si / so are the longest scan-in / scan-out chains and test_time is in cycles.
    """
    module: str
    width: int
    chain_scan: tuple[int, ...]
    chain_in_cells: tuple[int, ...]
    chain_out_cells: tuple[int, ...]
    si: int
    so: int
    test_time: int


@dataclass(frozen=True)
class ChannelGroup:
    """A TAM: ``width`` ATE channels (width / 2 wires) serving ``members`` one after the other."""
    width: int
    members: tuple[str, ...]
    depth: int

    @property
    def tam_width(self):
        return self.width // 2

    def free_memory(self, depth_limit):
        return self.width * (depth_limit - self.depth)


@dataclass(frozen=True)
class Architecture:
    """Per-site DfT: channel groups, their total channels k and filled depth T."""
    groups: tuple[ChannelGroup, ...]

    @property
    def k(self):
        return sum(group.width for group in self.groups)

    @property
    def T(self):
        return max(group.depth for group in self.groups)

    @property
    def w_total(self):
        return self.k // 2

    def group_of(self, module_name):
        return next(g for g in self.groups if module_name in g.members)


@dataclass(frozen=True)
class SitePlan:
    """
    Throughput evaluation of ``n`` sites with architecture ``arch``.

    d_th_step1 and d_th_step1_unique are the throughputs the same n would
    reach with the unwidened Step-1 architecture; k_free is the channel
    count left idle after redistribution; retest_rate is devices per hour sent back for re-test.
    """
    n: int
    arch: Architecture
    t_m: float
    t_a: float
    d_th: float
    d_th_unique: float
    prob_contact: float
    prob_manuf: float
    d_th_step1: float
    retest_rate: float
    k_free: int
    d_th_step1_unique: float = 0.0

    def objective(self, retest):
        return self.d_th_unique if retest else self.d_th

    def step1_objective(self, retest):
        return self.d_th_step1_unique if retest else self.d_th_step1


@dataclass(frozen=True)
class OptimizationResult:
    n_max: int
    n_opt: int
    curve: tuple[SitePlan, ...]
    best: SitePlan
    base: Architecture
    retest: bool = False
    site_cap: int | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)
