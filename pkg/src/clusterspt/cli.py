"""``clusterspt`` command line."""
from __future__ import annotations

import json
import sys

import click

from .classical import ISING_JC, P_C2, P_CINF, couplings_from_errors
from .config import ConfigError, ExperimentConfig, load_config
from .experiments import run


def _config(path, kind, seed, out, defaults):
    over = {"seed": seed, "out": out}
    if path:
        cfg = load_config(path, over)
        if kind and cfg.kind != kind:
            raise click.UsageError(f"config kind is {cfg.kind!r}, this command runs {kind!r}")
        return cfg
    data = {"kind": kind, **defaults}
    data.update({k: v for k, v in over.items() if v is not None})
    return ExperimentConfig.from_dict(data)


def _execute(path, kind, seed, out, workers, defaults):
    try:
        cfg = _config(path, kind, seed, out, defaults)
    except ConfigError as exc:
        raise click.ClickException(f"invalid config: {exc}") from exc
    status = run(cfg, workers)
    click.echo(f"{cfg.kind}: wrote {cfg.out} (exit {status})")
    sys.exit(status)


def common(f):
    f = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     help="YAML experiment config.")(f)
    f = click.option("--seed", type=int, default=None, help="Master seed (overrides the config).")(f)
    f = click.option("--workers", type=int, default=1, show_default=True, help="Worker processes.")(f)
    f = click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory.")(f)
    return f


@click.group()
def main():
    """Decohered 2D cluster state: oracles, classical maps and Monte Carlo."""


@main.command("map")
@click.option("--p-x", type=float, required=True, help="Bit-flip rate.")
@click.option("--p-z", type=float, default=0.0, show_default=True, help="Phase-flip rate.")
def map_cmd(p_x, p_z):
    """Print the couplings J, h, U, t for the given rates and the critical values."""
    try:
        J, h, U, t = couplings_from_errors(p_x, p_z)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(json.dumps({"J": J, "h": h, "U": U, "t": t, "J_c": ISING_JC,
                           "p_c2": P_C2, "p_c_inf": P_CINF}, indent=2))


@main.command()
@common
def oracle(config_path, seed, workers, out):
    """Cross-oracle identity suite (nonzero exit if any identity fails)."""
    _execute(config_path, "oracle-suite", seed, out, workers,
             {"lattice": {"N": 2, "boundary": "open"}, "p_grid": [0.0, 0.05, 0.1782, 0.28, 0.45],
              "p_z": 0.1, "out": "results/oracle"})


@main.command()
@common
def mc(config_path, seed, workers, out):
    """Binder-cumulant scan for the critical point."""
    _execute(config_path, "critical-scan", seed, out, workers,
             {"p_grid": [0.165, 0.17, 0.175, 0.18, 0.185, 0.19], "sizes": [16, 24, 32],
              "schedule": {"thermalization": 2000, "sweeps": 20000},
              "out": "results/critical"})


@main.command()
@common
@click.option("--symmetry", is_flag=True, help="Produce the channel symmetry table instead.")
def diagnose(config_path, seed, workers, out, symmetry):
    """Diagnostics scan across p_x (or the symmetry table)."""
    if symmetry:
        _execute(config_path, "symmetry-table", seed, out, workers,
                 {"lattice": {"N": 2}, "out": "results/symmetry"})
    _execute(config_path, "diagnostics-scan", seed, out, workers,
             {"p_grid": [0.05, 0.1, 0.2, 0.28], "loops": [[1, 1], [2, 2], [3, 3]],
              "separations": [1, 2, 3], "out": "results/diagnostics"})


@main.command()
@common
def figure3(config_path, seed, workers, out):
    """Free-energy excess of cut loops on the 20x20 torus."""
    _execute(config_path, "figure3", seed, out, workers,
             {"lattice": {"N": 20}, "loops": [[6, 6], [10, 10]],
              "p_grid": [0.05, 0.1, 0.15, 0.2, 0.25, 0.3],
              "out": "results/figure3"})


@main.command("run")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=1)
@click.option("--out", type=click.Path(file_okay=False), default=None)
def run_cmd(config_path, seed, workers, out):
    """Run any config, dispatching on its kind."""
    _execute(config_path, None, seed, out, workers, {})


if __name__ == "__main__":
    main()
