"""
Importer for the ITC'02 SOC test benchmark syntax.

Only the per-module quantities the optimizer uses are kept:

- the module hierarchy is flattened (``Level`` is ignored);
- per module, the patterns of every test that uses the TAM (``TamUse 1``)
  are summed; BIST-only tests (``TamUse 0``) are discarded;
- modules left without TAM patterns (such as the top-level module 0 of
  most benchmarks) are dropped;
- power, placement and scheduling attributes are ignored.

Accepted lines::

    SocName d695
    Module 3 Level 1 Inputs 34 Outputs 1 Bidirs 0 ScanChains 1 : 32
    Module 3 Test 1 ScanUse 1 TamUse 1 Patterns 75

Test lines may also omit the ``Module <id>`` prefix, in which case they
belong to the last declared module.
"""
from __future__ import annotations

import logging

from errors import InputError, SocArityError, SocSyntaxError
from models import ModuleSpec, SocDescription

logger = logging.getLogger(__name__)

IGNORED_HEADERS = ("TotalModules", "Options")


def looks_like_itc02(text: str) -> bool:
    for raw in text.splitlines():
        words = raw.split("#", 1)[0].split()
        if words:
            return words[0] == "SocName"
    return False


def _pairs(words, line):
    """Split ``Key value Key value ... ScanChains n : l1 l2`` into a dict."""
    values = {}
    index = 0
    while index < len(words):
        key = words[index]
        if key == "ScanChains":
            try:
                declared = int(words[index + 1])
            except (IndexError, ValueError):
                raise SocSyntaxError("ScanChains needs a chain count", line) from None
            rest = words[index + 2:]
            if rest and rest[0] == ":":
                rest = rest[1:]
            try:
                lengths = [int(word) for word in rest]
            except ValueError:
                raise SocSyntaxError("scan chain lengths must be integers", line) from None
            if len(lengths) != declared:
                raise SocArityError(f"ScanChains declares {declared} chains but lists {len(lengths)} lengths", line)
            values[key] = lengths
            break
        if index + 1 >= len(words):
            raise SocSyntaxError(f"{key} has no value", line)
        values[key] = words[index + 1]
        index += 2
    return values


def _int(values, key, line, default=0):
    try:
        return int(values.get(key, default))
    except ValueError:
        raise SocSyntaxError(f"{key}: expected an integer, got {values[key]!r}", line) from None


def import_itc02(text: str) -> SocDescription:
    """Convert an ITC'02 benchmark into a SocDescription (see module docstring for the mapping)."""
    soc_name = None
    modules = {}
    order = []
    current = None
    for line, raw in enumerate(text.splitlines(), start=1):
        words = raw.split("#", 1)[0].replace(":", " : ").split()
        if not words:
            continue
        if words[0] == "SocName":
            if len(words) != 2:
                raise SocSyntaxError("SocName takes exactly one name", line)
            soc_name = words[1]
            continue
        if words[0] in IGNORED_HEADERS:
            continue
        if words[0] == "Module":
            if len(words) < 2:
                raise SocSyntaxError("Module needs an identifier", line)
            module_id = words[1]
            rest = words[2:]
            if rest and rest[0] in ("Test", "TotalTests"):
                if module_id not in modules:
                    raise SocSyntaxError(f"test for undeclared module {module_id}", line)
                current = module_id
                words = rest
            else:
                if module_id in modules:
                    raise SocSyntaxError(f"module {module_id} declared twice", line)
                values = _pairs(rest, line)
                modules[module_id] = {
                    "line": line,
                    "inputs": _int(values, "Inputs", line),
                    "outputs": _int(values, "Outputs", line),
                    "bidirs": _int(values, "Bidirs", line),
                    "scan": values.get("ScanChains", []),
                    "patterns": 0,
                }
                order.append(module_id)
                current = module_id
                continue
        if words[0] == "TotalTests":
            continue
        if words[0] == "Test":
            if current is None:
                raise SocSyntaxError("Test line before any Module", line)
            values = _pairs(words[2:], line)
            if _int(values, "TamUse", line, default=1) == 1:
                modules[current]["patterns"] += _int(values, "Patterns", line)
            else:
                logger.debug("module %s: dropping BIST-only test %s", current, words[1])
            continue
        raise SocSyntaxError(f"unknown ITC'02 line starting with {words[0]!r}", line)

    if soc_name is None:
        raise SocSyntaxError("missing SocName header")
    specs = []
    for module_id in order:
        data = modules[module_id]
        if data["patterns"] == 0:
            logger.info("module %s has no TAM-based test and is dropped", module_id)
            continue
        try:
            specs.append(ModuleSpec(
                name=f"m{module_id}",
                inputs=data["inputs"],
                outputs=data["outputs"],
                bidirs=data["bidirs"],
                scan_lengths=data["scan"],
                patterns=data["patterns"],
            ))
        except InputError as exc:
            raise InputError(str(exc), data["line"]) from None
    if not specs:
        raise SocSyntaxError("no modules")
    return SocDescription(name=soc_name, modules=specs)
