"""Command-line entry point: ``objexplore run|evaluate|interactive|priors show|export-log``."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .experiment import (
    ExperimentConfig,
    export_measurement_log,
    interactive_session,
    read_traces,
    run_experiment,
)
from .infogain import expected_information_gain
from .network import init_network, network_entropy
from .planner import OPTIMIZATION_MODES, POLICIES, target_set
from .reference import ENV_CONFIG_DIR, ValidationError, load_reference_data

config_dir_option = click.option(
    "--config-dir",
    type=click.Path(file_okay=False, exists=True),
    envvar=ENV_CONFIG_DIR,
    default=None,
    help=f"Directory with priors/actions/edges/catalog TOML files (env: {ENV_CONFIG_DIR}).",
)
mode_choice = click.Choice(list(OPTIMIZATION_MODES))


def _load(config_dir):
    try:
        return load_reference_data(config_dir)
    except (ValidationError, FileNotFoundError) as exc:
        raise click.ClickException(str(exc)) from exc


@click.group()
@click.version_option(package_name="objexplore")
def main():
    """Estimate object properties by information-gain driven exploration."""


@main.command()
@click.option("--objects", default="", help="Comma-separated object names (default: whole catalog).")
@click.option("--repetitions", default=5, show_default=True, type=click.IntRange(min=1))
@click.option("--mode", "modes", multiple=True, type=mode_choice, help="Optimization mode; repeatable. Default: Category.")
@click.option("--policy", "policies", multiple=True, type=click.Choice(POLICIES), help="Policy; repeatable. Default: both.")
@click.option("--termination/--no-termination", default=False, show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--max-steps", default=5, show_default=True, type=click.IntRange(min=0))
@click.option("--output-dir", required=True, type=click.Path(file_okay=False))
@click.option("--jobs", default=1, show_default=True, type=click.IntRange(min=1))
@config_dir_option
def run(objects, repetitions, modes, policies, termination, seed, max_steps, output_dir, jobs, config_dir):
    """Run a batch of simulated episodes and write traces, metrics and a manifest."""
    data = _load(config_dir)
    try:
        config = ExperimentConfig(
            objects=tuple(o for o in objects.split(",") if o),
            repetitions=repetitions,
            modes=tuple(modes) or ("Category",),
            policies=tuple(policies) or POLICIES,
            termination=termination,
            seed=seed,
            output_dir=output_dir,
            max_steps=max_steps,
            config_dir=config_dir,
            jobs=jobs,
        )
        result = run_experiment(config, data)
    except (ValueError, OSError) as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"{len(result.traces)} traces written to {result.output_dir}")
    for mode in config.modes:
        for policy in config.policies:
            curve = result.metrics.series(mode, policy, "target_entropy_mean_bits")
            click.echo(f"  {mode:<18} {policy:<6} " + " ".join(f"{v:.3f}" for v in curve))


@main.command()
@click.option("--mode", default="Category", show_default=True, type=mode_choice)
@config_dir_option
def evaluate(mode, config_dir):
    """Print the expected information gain of every action on the fresh network."""
    data = _load(config_dir)
    state = init_network(data.tables, data.edges)
    targets = target_set(mode)
    click.echo(f"{mode}: current entropy {network_entropy(state, targets):.4f} bits")
    evals = [expected_information_gain(state, a, targets) for a in data.actions]
    for ev in sorted(evals, key=lambda e: -e.expected_ig):
        click.echo(f"  {ev.action:<12} {ev.expected_ig:+.4f} bits")


@main.command()
@click.option("--mode", default="Category", show_default=True, type=mode_choice)
@click.option("--terminate/--no-terminate", default=True, show_default=True)
@config_dir_option
def interactive(mode, terminate, config_dir):
    """Recommend actions and update beliefs from measurements you type in."""
    data = _load(config_dir)
    trace = interactive_session(data, mode, terminate=terminate, read=click.prompt, write=click.echo)
    click.echo(f"{len(trace.executed)} measurement(s) recorded.")


@main.group()
def priors():
    """Inspect the reference prior tables."""


@priors.command("show")
@config_dir_option
def priors_show(config_dir):
    """Print volume, density and elasticity reference values."""
    t = _load(config_dir).tables
    click.echo("Volume [cm3] by category")
    for lab, (m, s) in zip(t.category_labels, t.volume_by_category):
        click.echo(f"  {lab:<12} {m:9.1f} +- {s:.1f}")
    click.echo("Density [kg/m3] and elasticity [kPa] by material")
    for lab, (dm, ds), (em, es) in zip(t.material_labels, t.density_by_material, t.elasticity_by_material):
        click.echo(f"  {lab:<12} {dm:9.1f} +- {ds:<7.1f} {em:7.1f} +- {es:.1f}")


@main.command("export-log")
@click.argument("traces_file", type=click.Path(dir_okay=False, exists=True))
@click.argument("output_dir", type=click.Path(file_okay=False))
def export_log(traces_file, output_dir):
    """Write one record file per measurement found in a traces.jsonl file."""
    try:
        traces = read_traces(traces_file)
        out = export_measurement_log(traces, output_dir)
    except (ValueError, KeyError, OSError) as exc:
        raise click.ClickException(str(exc)) from exc
    n = sum(len(t.executed) for t in traces)
    click.echo(f"{n} records written under {Path(out)}")


if __name__ == "__main__":
    sys.exit(main())
