"""
Run configuration and defaults.

Defaults describe the reference test cell: a 5 MHz test clock, 0.7 s
index time and 10 ms contact test on a 512-channel ATE with 7 M vectors
per channel. Depths accept K (1024) and M (1024 * 1024) suffixes.
"""
from __future__ import annotations

import math
import re
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from errors import InputError
from models import AteSpec, ThroughputParams

__version__ = "1.0.0"
TOOL_NAME = "siteopt"

DEFAULT_CHANNELS = 512
DEFAULT_DEPTH = 7 * 1024 * 1024
DEFAULT_FREQ = 5e6
DEFAULT_INDEX_TIME = 0.7
DEFAULT_CONTACT_TIME = 0.01
DEFAULT_PC = 1.0
DEFAULT_PM = 1.0

# upgrade prices per block of 16 channels
UPGRADE_BLOCK = 16
DEFAULT_CHANNEL_BLOCK_COST = 8000.0
DEFAULT_MEMORY_UPGRADE_COST = 1500.0

# the depth column of the d695 benchmark table
D695_DEPTHS = ("48K", "56K", "64K", "72K", "80K", "88K", "96K", "104K", "112K", "120K", "128K")

SWEEP_PARAMETERS = ("channels", "depth", "p_c", "p_m", "sites")
INTEGER_SWEEPS = ("channels", "depth", "sites")

_DEPTH_PATTERN = re.compile(r"^\s*(\d+(?:\.\d*)?|\.\d+)\s*([kKmM]?)\s*$")


def parse_depth(text, base=1024) -> int:
    """'48K' -> 49152, '1.000M' -> 1048576, '65536' -> 65536 (base 1000 gives the decimal reading)."""
    if isinstance(text, int):
        return text
    match = _DEPTH_PATTERN.match(str(text))
    if not match:
        raise InputError(f"invalid depth {text!r}")
    number, suffix = match.groups()
    scale = {"": 1, "k": base, "m": base * base}[suffix.lower()]
    value = float(number) * scale
    if value != math.floor(value) and not suffix:
        raise InputError(f"depth must be a whole number of vectors, got {text!r}")
    return int(round(value))


def parse_depth_list(text, base=1024) -> list[int]:
    items = [item for item in (part.strip() for part in str(text).split(",")) if item]
    if not items:
        raise InputError("empty depth list")
    return [parse_depth(item, base) for item in items]


class SweepSpec(BaseModel):
    """One swept parameter: values start, start + step, ... up to stop."""
    model_config = ConfigDict(frozen=True)

    name: Literal["channels", "depth", "p_c", "p_m", "sites"]
    start: float = Field(gt=0)
    stop: float = Field(gt=0)
    step: float = Field(gt=0)

    @model_validator(mode="after")
    def _ordered(self):
        if self.start > self.stop:
            raise ValueError(f"sweep start {self.start} exceeds stop {self.stop}")
        return self

    def values(self):
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        points = [round(self.start + index * self.step, 12) for index in range(count)]
        if self.name in INTEGER_SWEEPS:
            return [int(round(point)) for point in points]
        return points


def parse_sweep(text: str, base=1024) -> SweepSpec:
    """Parse ``name:from:to:step``; depth bounds accept K/M suffixes."""
    parts = str(text).split(":")
    if len(parts) != 4:
        raise InputError(f"sweep must look like name:from:to:step, got {text!r}")
    name = parts[0].strip()
    if name not in SWEEP_PARAMETERS:
        raise InputError(f"unknown sweep parameter {name!r}; choose from {', '.join(SWEEP_PARAMETERS)}")
    try:
        if name == "depth":
            bounds = [parse_depth(part, base) for part in parts[1:]]
        else:
            bounds = [float(part) for part in parts[1:]]
    except ValueError:
        raise InputError(f"sweep bounds must be numbers, got {text!r}") from None
    return SweepSpec(name=name, start=bounds[0], stop=bounds[1], step=bounds[2])


class RunConfig(BaseModel):
    """Everything one CLI invocation needs; validated on construction."""
    model_config = ConfigDict(frozen=True)

    soc_path: Optional[Path] = None
    channels: int = Field(default=DEFAULT_CHANNELS, ge=2)
    depth: int = Field(default=DEFAULT_DEPTH, ge=1)
    freq: float = Field(default=DEFAULT_FREQ, gt=0)
    index_time: float = Field(default=DEFAULT_INDEX_TIME, ge=0)
    contact_time: float = Field(default=DEFAULT_CONTACT_TIME, ge=0)
    p_c: float = Field(default=DEFAULT_PC, ge=0, le=1)
    p_m: float = Field(default=DEFAULT_PM, ge=0, le=1)
    broadcast: bool = False
    abort_on_fail: bool = False
    retest: bool = False
    output_format: Literal["text", "csv", "json"] = "text"
    sweep: Optional[SweepSpec] = None
    widen_policy: Literal["minimal", "kmin"] = "minimal"
    max_sites: Optional[int] = Field(default=None, ge=1)
    jobs: int = Field(default=1, ge=1)

    @field_validator("p_c", "p_m")
    @classmethod
    def _finite(cls, value):
        if math.isnan(value):
            raise ValueError("probability must be a number")
        return value

    def ate(self) -> AteSpec:
        return AteSpec(
            channels=self.channels,
            depth=self.depth,
            freq=self.freq,
            index_time=self.index_time,
            contact_time=self.contact_time,
        )

    def params(self) -> ThroughputParams:
        return ThroughputParams(
            p_c=self.p_c,
            p_m=self.p_m,
            broadcast=self.broadcast,
            abort_on_fail=self.abort_on_fail,
            retest=self.retest,
        )

    def describe(self) -> dict:
        """Flat, JSON-friendly echo of the run settings for report metadata."""
        data = self.model_dump(exclude={"soc_path", "sweep", "jobs"})
        if self.sweep is not None:
            data["sweep"] = self.sweep.model_dump()
        return data
