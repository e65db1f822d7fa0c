"""
Error handling tests: malformed SOC files, out-of-range model inputs,
bad run settings and the infeasibility signal.
"""
import pytest
from pydantic import ValidationError

import studies
from architecture import fit_step1
from config import RunConfig, parse_depth, parse_depth_list, parse_sweep
from errors import (
    INFEASIBLE_MESSAGE,
    DuplicateModuleError,
    InfeasibleError,
    InputError,
    ModelInputError,
    OracleCapError,
    SocArityError,
    SocSyntaxError,
)
from itc02 import import_itc02
from models import AteSpec, ModuleSpec, SocDescription, ThroughputParams
from oracle import brute_force_fit, exhaustive_wrapper
from soc_format import parse_soc


@pytest.fixture
def tiny_soc():
    return SocDescription("tiny", (ModuleSpec("a", 1, 1, 0, (4,), 3),))


def test_empty_document():
    with pytest.raises(SocSyntaxError, match="no modules"):
        parse_soc("# nothing but a comment\n\n")


def test_missing_soc_header():
    with pytest.raises(SocSyntaxError, match="missing Soc header"):
        parse_soc("Module a\n  Inputs 1\n  Patterns 1\n")


def test_scan_chain_arity_mismatch_reports_line():
    """The ScanChains line is line 3; the declared count disagrees with the lengths."""
    with pytest.raises(SocArityError) as info:
        parse_soc("Soc s\nModule a\n  ScanChains 2 : 7\n  Patterns 4\n")
    assert info.value.line == 3
    assert str(info.value).startswith("line 3:")


def test_duplicate_module_name():
    text = "Soc s\nModule a\n  Inputs 1\n  Patterns 1\nModule a\n  Inputs 2\n  Patterns 2\n"
    with pytest.raises(DuplicateModuleError) as info:
        parse_soc(text)
    assert info.value.line == 5


def test_negative_count():
    with pytest.raises(InputError, match="negative count"):
        parse_soc("Soc s\nModule a\n  Inputs -3\n  Patterns 1\n")


@pytest.mark.parametrize("word", ["1_000", "+3", "٣", "4.0", "0x10"])
def test_counts_are_plain_ascii_integers(word):
    with pytest.raises(SocSyntaxError, match="expected an integer") as info:
        parse_soc(f"Soc s\nModule a\n  Inputs {word}\n  Patterns 1\n")
    assert info.value.line == 3


def test_missing_patterns():
    with pytest.raises(SocSyntaxError, match="missing Patterns"):
        parse_soc("Soc s\nModule a\n  Inputs 4\n")


def test_unknown_keyword():
    with pytest.raises(SocSyntaxError, match="unknown keyword"):
        parse_soc("Soc s\nModule a\n  Pins 4\n  Patterns 1\n")


def test_field_outside_module():
    with pytest.raises(SocSyntaxError, match="outside of a Module"):
        parse_soc("Soc s\nInputs 4\n")


def test_non_integer_value():
    with pytest.raises(SocSyntaxError, match="expected an integer"):
        parse_soc("Soc s\nModule a\n  Inputs four\n  Patterns 1\n")


def test_module_without_access():
    with pytest.raises(InputError, match="nothing to access"):
        parse_soc("Soc s\nModule a\n  Patterns 1\n")


def test_itc02_without_header():
    with pytest.raises(SocSyntaxError):
        import_itc02("Module 1 Level 1 Inputs 1 Outputs 1 Bidirs 0 ScanChains 0\n")


def test_itc02_test_for_unknown_module():
    with pytest.raises(SocSyntaxError, match="undeclared module"):
        import_itc02("SocName x\nModule 4 Test 1 ScanUse 1 TamUse 1 Patterns 3\n")


def test_input_errors_are_value_errors():
    """Callers that only know ValueError still catch every input problem."""
    for error in (SocSyntaxError("x"), SocArityError("x"), ModelInputError("x"), OracleCapError("x")):
        assert isinstance(error, ValueError)
        assert isinstance(error, InputError)


def test_ate_rejects_bad_numbers():
    with pytest.raises(ModelInputError):
        AteSpec(1, 1000)
    with pytest.raises(ModelInputError):
        AteSpec(64, 0)
    with pytest.raises(ModelInputError):
        AteSpec(64, 1000, freq=0)


def test_params_reject_bad_probabilities():
    with pytest.raises(ModelInputError):
        ThroughputParams(p_c=1.5)
    with pytest.raises(ModelInputError):
        ThroughputParams(p_m=-0.2)


def test_infeasible_error_carries_message(tiny_soc):
    with pytest.raises(InfeasibleError) as info:
        fit_step1(tiny_soc, AteSpec(4, 5))
    assert str(info.value).startswith(INFEASIBLE_MESSAGE)
    assert info.value.module == "a"
    assert not isinstance(info.value, InputError)


@pytest.mark.parametrize("text", ["", "12Q", "-4K", "K"])
def test_parse_depth_rejects(text):
    with pytest.raises(InputError):
        parse_depth(text)


def test_parse_depth_suffixes():
    assert parse_depth("48K") == 49152
    assert parse_depth("1.000M") == 1024 * 1024
    assert parse_depth("48K", base=1000) == 48000
    assert parse_depth_list("48K, 56K,") == [49152, 57344]


def test_sweep_descriptor_errors():
    with pytest.raises(InputError):
        parse_sweep("channels:1:2")
    with pytest.raises(InputError):
        parse_sweep("channels:a:b:c")
    with pytest.raises(ValidationError):
        parse_sweep("p_m:0.9:0.5:0.1")
    with pytest.raises(ValidationError):
        parse_sweep("depth:48K:64K:0")


def test_sweep_values():
    assert parse_sweep("depth:48K:64K:8K").values() == [49152, 57344, 65536]
    assert parse_sweep("p_c:0.99:1.0:0.005").values() == [0.99, 0.995, 1.0]


def test_run_config_validation():
    with pytest.raises(ValidationError):
        RunConfig(channels=1)
    with pytest.raises(ValidationError):
        RunConfig(p_c=2.0)
    with pytest.raises(ValidationError):
        RunConfig(output_format="xml")
    config = RunConfig(channels=256, depth=65536, broadcast=True)
    assert config.ate() == AteSpec(256, 65536)
    assert config.params().broadcast


def test_sweep_without_descriptor(tiny_soc):
    with pytest.raises(InputError):
        studies.run_sweep(tiny_soc, RunConfig())


def test_sweep_all_points_infeasible(tiny_soc):
    """Every swept depth is below the module's minimum test time."""
    config = RunConfig(depth=5, sweep=parse_sweep("depth:2:6:2"))
    with pytest.raises(InfeasibleError):
        studies.run_sweep(tiny_soc, config)


def test_upgrade_costs_must_be_positive(tiny_soc):
    with pytest.raises(ModelInputError):
        studies.compare_upgrades(tiny_soc, AteSpec(64, 1000), ThroughputParams(), 0, 1500)
    with pytest.raises(ModelInputError):
        studies.compare_upgrades(tiny_soc, AteSpec(64, 1000), ThroughputParams(), 8000, 1500, budget=-1)


def test_oracle_caps():
    many_chains = ModuleSpec("wide", 0, 0, 0, (1,) * 6, 1)
    with pytest.raises(OracleCapError):
        exhaustive_wrapper(many_chains, 2)
    small = ModuleSpec("small", 1, 1, 0, (3,), 2)
    with pytest.raises(OracleCapError):
        exhaustive_wrapper(small, 7)
    soc = SocDescription("five", tuple(ModuleSpec(f"m{i}", 1, 1, 0, (), 1) for i in range(5)))
    with pytest.raises(OracleCapError):
        brute_force_fit(soc, AteSpec(8, 100))
    with pytest.raises(OracleCapError):
        brute_force_fit(SocDescription("one", (small,)), AteSpec(14, 100))


def test_read_expected_bad_row(tmp_path):
    path = tmp_path / "ref.csv"
    path.write_text("soc,depth,k,n_max\nd695,48K,twenty,17\n")
    with pytest.raises(InputError) as info:
        studies.read_expected(path)
    assert info.value.line == 2
