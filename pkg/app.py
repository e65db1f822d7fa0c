"""
Command-line entry point.

    python app.py optimize fixtures/d695.soc --channels 256 --depth 64K --broadcast
    python app.py sweep fixtures/d695.soc --sweep channels:256:512:256 --depth 128K
    python app.py bench-table fixtures/d695.soc --channels 256 --expected fixtures/d695_table1.csv
    python app.py compare-upgrades fixtures/d695.soc --channels 256 --depth 64K

Exit status: 0 success, 1 the SOC cannot be tested on the ATE, 2 bad input.
"""
from __future__ import annotations

import functools
import logging
import sys

import click
from pydantic import ValidationError

import reports
import studies
from architecture import optimize_step2
from config import (
    D695_DEPTHS,
    DEFAULT_CHANNEL_BLOCK_COST,
    DEFAULT_MEMORY_UPGRADE_COST,
    RunConfig,
    __version__,
    parse_depth,
    parse_depth_list,
    parse_sweep,
)
from errors import InfeasibleError, InputError
from oracle import brute_force_fit
from soc_format import load_soc, render_soc, validate_soc

logger = logging.getLogger(__name__)

EXIT_INFEASIBLE = 1
EXIT_INPUT = 2


class DepthType(click.ParamType):
    """Vector memory depth with optional K / M suffix."""
    name = "depth"

    def convert(self, value, param, ctx):
        try:
            return parse_depth(value)
        except InputError as exc:
            self.fail(str(exc), param, ctx)


DEPTH = DepthType()


def ate_options(func):
    """Options shared by every command that runs the optimizer."""
    options = [
        click.option("--channels", type=int, default=512, show_default=True, help="ATE channels N."),
        click.option("--depth", type=DEPTH, default="7M", show_default=True, help="Vector memory depth V (K/M suffixes)."),
        click.option("--freq", type=float, default=5e6, show_default=True, help="Test clock in Hz."),
        click.option("--index-time", type=float, default=0.7, show_default=True, help="Prober index time t_i in s."),
        click.option("--contact-time", type=float, default=0.01, show_default=True, help="Contact test time t_c in s."),
        click.option("--pc", "p_c", type=float, default=1.0, show_default=True, help="Contact yield per terminal."),
        click.option("--pm", "p_m", type=float, default=1.0, show_default=True, help="Manufacturing yield per SOC."),
        click.option("--broadcast", is_flag=True, help="Share stimuli channels over all sites."),
        click.option("--abort-on-fail", is_flag=True, help="Use the abort-on-fail lower bound for t_a."),
        click.option("--retest", is_flag=True, help="Maximize unique devices per hour."),
        click.option("--widen-policy", type=click.Choice(["minimal", "kmin"]), default="minimal", show_default=True),
        click.option("--max-sites", type=int, default=None, help="Equipment limit on the number of sites."),
        click.option("--format", "output_format", type=click.Choice(["text", "csv", "json"]), default="text",
                     show_default=True),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def handle_errors(func):
    """Map package errors to exit codes with a diagnostic on stderr."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except InfeasibleError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INFEASIBLE)
        except (InputError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INPUT)
        except ValidationError as exc:
            problems = "; ".join(f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in exc.errors())
            click.echo(f"error: invalid settings: {problems}", err=True)
            sys.exit(EXIT_INPUT)
    return wrapper


def build_config(soc_path=None, **options) -> RunConfig:
    sweep = options.pop("sweep", None)
    return RunConfig(soc_path=soc_path, sweep=parse_sweep(sweep) if sweep else None, **options)


@click.group()
@click.version_option(__version__)
@click.option("-v", "--verbose", count=True, help="Log progress to stderr (-vv for placement details).")
def cli(verbose):
    """Design on-chip test infrastructure for maximum multi-site wafer-test throughput."""
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s", stream=sys.stderr)


@cli.command()
@click.argument("soc_file", type=click.Path(dir_okay=False))
@ate_options
@click.option("--oracle", is_flag=True, help="Cross-check Step 1 with the brute-force oracle (tiny SOCs only).")
@handle_errors
def optimize(soc_file, oracle, **options):
    """Run Step 1 and Step 2 and report the optimal number of sites."""
    config = build_config(soc_file, **options)
    soc = load_soc(soc_file)
    ate = config.ate()
    logger.info("optimizing %s on N=%d V=%d", soc.name, ate.channels, ate.depth)
    report = validate_soc(soc, ate)
    result = optimize_step2(soc, ate, config.params(), widen_policy=config.widen_policy, site_cap=config.max_sites)
    oracle_arch = brute_force_fit(soc, ate) if oracle else None
    document = reports.optimize_document(soc, config, result, report, oracle_arch)
    if config.output_format == "json":
        click.echo(reports.render_json(document), nl=False)
    elif config.output_format == "csv":
        click.echo(reports.render_csv(document["curve"], studies.PLAN_COLUMNS), nl=False)
    else:
        click.echo(reports.render_optimize_text(document), nl=False)


@cli.command()
@click.argument("soc_file", type=click.Path(dir_okay=False))
@click.option("--channels", type=int, default=512, show_default=True)
@click.option("--depth", type=DEPTH, default="7M", show_default=True)
@handle_errors
def validate(soc_file, channels, depth):
    """Check that every module fits the ATE on its own."""
    config = RunConfig(soc_path=soc_file, channels=channels, depth=depth)
    report = validate_soc(load_soc(soc_file), config.ate())
    click.echo(reports.render_validation_text(report), nl=False)
    if not report.feasible:
        sys.exit(EXIT_INFEASIBLE)


@cli.command()
@click.argument("soc_file", type=click.Path(dir_okay=False))
@ate_options
@click.option("--sweep", required=True, help="name:from:to:step with name in channels, depth, p_c, p_m, sites.")
@click.option("--jobs", type=int, default=1, show_default=True, help="Sweep points evaluated in parallel.")
@handle_errors
def sweep(soc_file, **options):
    """Sweep one parameter and emit one row per value (CSV by default)."""
    if options["output_format"] == "text":
        options["output_format"] = "csv"
    config = build_config(soc_file, **options)
    soc = load_soc(soc_file)
    rows = studies.run_sweep(soc, config)
    if config.output_format == "json":
        click.echo(reports.render_json({**reports.metadata(), "soc": soc.name,
                                        "settings": config.describe(), "rows": rows}), nl=False)
    else:
        click.echo(reports.render_csv(rows), nl=False)


@cli.command("bench-table")
@click.argument("soc_files", nargs=-1, required=True, type=click.Path(dir_okay=False))
@click.option("--channels", type=int, default=256, show_default=True)
@click.option("--depths", default=",".join(D695_DEPTHS), show_default=True, help="Comma-separated depths.")
@click.option("--base", type=click.Choice(["1024", "1000"]), default="1024", show_default=True,
              help="Multiplier behind the K and M suffixes.")
@click.option("--expected", type=click.Path(dir_okay=False), default=None, help="CSV with soc,depth,k,n_max.")
@click.option("--widen-policy", type=click.Choice(["minimal", "kmin"]), default="minimal", show_default=True)
@click.option("--format", "output_format", type=click.Choice(["text", "csv", "json"]), default="text",
              show_default=True)
@handle_errors
def bench_table(soc_files, channels, depths, base, expected, widen_policy, output_format):
    """Step 1 with stimuli broadcast over a list of depths: k and n_max per SOC."""
    base = int(base)
    labels = [item.strip() for item in depths.split(",") if item.strip()]
    depth_values = parse_depth_list(depths, base)
    config = RunConfig(channels=channels, depth=depth_values[0], broadcast=True, output_format=output_format)
    socs = [load_soc(path) for path in soc_files]
    reference = studies.read_expected(expected, base) if expected else None
    rows = studies.bench_table(socs, depth_values, config.ate(), reference, labels, widen_policy)
    summary = studies.bench_summary(rows)
    if output_format == "json":
        click.echo(reports.render_json({**reports.metadata(), "channels": channels, "base": base,
                                        "rows": rows, "summary": summary}), nl=False)
    elif output_format == "csv":
        click.echo(reports.render_csv(rows), nl=False)
    else:
        click.echo(reports.render_bench_text(rows, summary), nl=False)


@cli.command("compare-upgrades")
@click.argument("soc_file", type=click.Path(dir_okay=False))
@ate_options
@click.option("--channel-block-cost", type=float, default=DEFAULT_CHANNEL_BLOCK_COST, show_default=True,
              help="Price of 16 extra channels.")
@click.option("--memory-upgrade-cost", type=float, default=DEFAULT_MEMORY_UPGRADE_COST, show_default=True,
              help="Price of doubling the memory of 16 channels.")
@click.option("--budget", type=float, default=None, help="Money to spend; defaults to the full memory upgrade.")
@handle_errors
def compare_upgrades(soc_file, channel_block_cost, memory_upgrade_cost, budget, **options):
    """Compare buying channels with deepening vector memory for the same money."""
    config = build_config(soc_file, **options)
    soc = load_soc(soc_file)
    comparison = studies.compare_upgrades(
        soc, config.ate(), config.params(), channel_block_cost, memory_upgrade_cost, budget,
        widen_policy=config.widen_policy, site_cap=config.max_sites,
    )
    rows = studies.upgrade_rows(comparison)
    if config.output_format == "json":
        click.echo(reports.render_json({
            **reports.metadata(),
            "soc": soc.name,
            "settings": config.describe(),
            "budget": comparison.budget,
            "full_memory_cost": comparison.full_memory_cost,
            "full_memory_throughput": comparison.full_memory_throughput,
            "preferred": comparison.preferred,
            "scenarios": rows,
        }), nl=False)
    elif config.output_format == "csv":
        click.echo(reports.render_csv(rows), nl=False)
    else:
        click.echo(reports.render_upgrades_text(comparison, rows), nl=False)


@cli.command("convert-itc02")
@click.argument("source", type=click.Path(dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None, help="Write here instead of stdout.")
@handle_errors
def convert_itc02(source, output):
    """Rewrite an ITC'02 benchmark in the native SOC format."""
    text = render_soc(load_soc(source))
    if output:
        with open(output, "w", encoding="utf8") as handle:
            handle.write(text)
    else:
        click.echo(text, nl=False)


if __name__ == "__main__":
    cli()
