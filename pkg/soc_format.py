"""
Native SOC description format.

    # comment
    Soc d695
    Module s838
      Inputs 34
      Outputs 1
      Bidirs 0
      ScanChains 1 : 32
      Patterns 75

Keywords are case-sensitive, whitespace and comments are insignificant.
Inputs, Outputs, Bidirs and ScanChains default to 0; Patterns is required.
"""
from __future__ import annotations

import logging
import re
from pathlib import Path

from errors import DuplicateModuleError, InputError, SocArityError, SocSyntaxError
from itc02 import import_itc02, looks_like_itc02
from models import AteSpec, ModuleCheck, ModuleSpec, SocDescription, ValidationReport
from wrapper_design import min_tam_width, tam_time

logger = logging.getLogger(__name__)

COUNT_KEYS = ("Inputs", "Outputs", "Bidirs", "Patterns")
INTEGER = re.compile(r"-?[0-9]+")


def _tokens(text):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].replace(":", " : ")
        words = line.split()
        if words:
            yield number, words


def _count(words, line, label):
    if len(words) != 2:
        raise SocSyntaxError(f"{label} takes exactly one integer", line)
    return _integer(words[1], line, label)


def _integer(word, line, label):
    if not INTEGER.fullmatch(word):
        raise SocSyntaxError(f"{label}: expected an integer, got {word!r}", line)
    value = int(word)
    if value < 0:
        raise InputError(f"{label}: negative count {value}", line)
    return value


def _scan_chains(words, line):
    # ScanChains <count> [: <length>...]
    if len(words) < 2:
        raise SocSyntaxError("ScanChains needs a chain count", line)
    declared = _integer(words[1], line, "ScanChains")
    rest = words[2:]
    if rest and rest[0] == ":":
        rest = rest[1:]
    elif rest:
        raise SocSyntaxError("ScanChains: expected ':' before the chain lengths", line)
    lengths = [_integer(word, line, "scan chain length") for word in rest]
    if len(lengths) != declared:
        raise SocArityError(f"ScanChains declares {declared} chains but lists {len(lengths)} lengths", line)
    if any(length == 0 for length in lengths):
        raise InputError("scan chain lengths must be positive", line)
    return lengths


def _build_module(block):
    fields = block["fields"]
    line = block["line"]
    if "Patterns" not in fields:
        raise SocSyntaxError(f"module {block['name']}: missing Patterns", line)
    try:
        return ModuleSpec(
            name=block["name"],
            inputs=fields.get("Inputs", 0),
            outputs=fields.get("Outputs", 0),
            bidirs=fields.get("Bidirs", 0),
            scan_lengths=fields.get("ScanChains", ()),
            patterns=fields["Patterns"],
        )
    except InputError as exc:
        raise InputError(str(exc), line) from None


def parse_soc(text: str) -> SocDescription:
    """Parse a native SOC document; raises SocSyntaxError / SocArityError / InputError with line numbers."""
    soc_name = None
    blocks = []
    current = None
    for line, words in _tokens(text):
        keyword = words[0]
        if keyword == "Soc":
            if soc_name is not None:
                raise SocSyntaxError("second Soc header", line)
            if blocks:
                raise SocSyntaxError("Soc header must precede the modules", line)
            if len(words) != 2:
                raise SocSyntaxError("Soc takes exactly one name", line)
            soc_name = words[1]
        elif keyword == "Module":
            if len(words) != 2:
                raise SocSyntaxError("Module takes exactly one name", line)
            if any(block["name"] == words[1] for block in blocks):
                raise DuplicateModuleError(f"duplicate module name {words[1]}", line)
            current = {"name": words[1], "line": line, "fields": {}}
            blocks.append(current)
        elif keyword in COUNT_KEYS or keyword == "ScanChains":
            if current is None:
                raise SocSyntaxError(f"{keyword} outside of a Module block", line)
            if keyword in current["fields"]:
                raise SocSyntaxError(f"{keyword} given twice for module {current['name']}", line)
            if keyword == "ScanChains":
                current["fields"][keyword] = _scan_chains(words, line)
            else:
                current["fields"][keyword] = _count(words, line, keyword)
        else:
            raise SocSyntaxError(f"unknown keyword {keyword!r}", line)

    if not blocks:
        raise SocSyntaxError("no modules")
    if soc_name is None:
        raise SocSyntaxError("missing Soc header")
    modules = [_build_module(block) for block in blocks]
    logger.debug("parsed SOC %s with %d modules", soc_name, len(modules))
    return SocDescription(name=soc_name, modules=modules)


def render_soc(soc: SocDescription) -> str:
    """Canonical text of ``soc``; parse_soc(render_soc(soc)) == soc."""
    lines = [f"Soc {soc.name}"]
    for module in soc.modules:
        chains = " ".join(str(length) for length in module.scan_lengths)
        lines += [
            f"Module {module.name}",
            f"  Inputs {module.inputs}",
            f"  Outputs {module.outputs}",
            f"  Bidirs {module.bidirs}",
            f"  ScanChains {module.scan_count} : {chains}".rstrip(),
            f"  Patterns {module.patterns}",
        ]
    return "\n".join(lines) + "\n"


def load_soc(path) -> SocDescription:
    """Read a SOC file in the native format or in ITC'02 benchmark syntax."""
    try:
        text = Path(path).read_text(encoding="utf8")
    except UnicodeDecodeError:
        raise InputError(f"{path}: not a UTF-8 text file") from None
    if looks_like_itc02(text):
        logger.info("reading %s as an ITC'02 benchmark", path)
        return import_itc02(text)
    return parse_soc(text)


def validate_soc(soc: SocDescription, ate: AteSpec) -> ValidationReport:
    """Check every module for a wrapper width up to N/2 whose test fits the vector memory."""
    checks = []
    for module in soc.modules:
        width = min_tam_width(module, ate)
        if width is None:
            best = tam_time(module, max(1, ate.channels // 2))
            checks.append(ModuleCheck(name=module.name, feasible=False, best_time=best))
            logger.info("module %s cannot be tested: best time %d > depth %d", module.name, best, ate.depth)
        else:
            checks.append(ModuleCheck(
                name=module.name,
                feasible=True,
                w_min=width,
                k_min=2 * width,
                best_time=tam_time(module, width),
            ))
    return ValidationReport(soc_name=soc.name, channels=ate.channels, depth=ate.depth, checks=tuple(checks))
