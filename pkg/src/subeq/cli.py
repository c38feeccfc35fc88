"""The ``subeq`` command line front end.

``subeq run CONFIG.json`` executes a full pipeline; the per-analysis
subcommands run a single operation against a system config and print the
JSON result to stdout.
"""

from __future__ import annotations

import csv
import sys

import click

from .config import ConfigError, load_config
from .mixing import MixingError, dbar
from .pipeline import PipelineContext, run_analysis, run_pipeline
from .report import dumps

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


@click.group()
@click.version_option()
def main():
    """Subadditive equilibrium state diagnostics on subshifts of finite type."""


@main.command("run")
@click.argument("config_path", type=click.Path())
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Output directory for report, CSV tables, and figures.")
@click.option("--figures/--no-figures", default=True,
              help="Render matplotlib figures alongside the CSV output.")
@click.option("--seed", type=int, default=None,
              help="Override the config seed (recorded in the report).")
def run_cmd(config_path, out_dir, figures, seed):
    """Run every analysis in CONFIG_PATH and persist the report."""
    try:
        cfg = load_config(config_path)
    except ConfigError as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    if seed is not None:
        cfg.seed = seed
        cfg.semantic["seed"] = seed
    report, code = run_pipeline(cfg, out_dir, render_figures=figures)
    if code != 0:
        fa = report["failed_after"]
        click.echo(f"numeric failure in analysis {fa['index']} "
                   f"({fa['op']}): {fa['error']}", err=True)
    elif out_dir is None:
        click.echo(dumps(report))
    sys.exit(code)


def _single(config_path, analysis: dict):
    try:
        cfg = load_config(config_path)
    except ConfigError as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    ctx = PipelineContext(cfg)
    try:
        result = run_analysis(ctx, analysis)
    except Exception as e:
        click.echo(f"numeric failure: {e}", err=True)
        sys.exit(EXIT_NUMERIC)
    click.echo(dumps(result))


_config_opt = click.option("--config", "config_path", required=True,
                           type=click.Path(), help="System config JSON.")


@main.command()
@_config_opt
@click.option("--n-max", type=int, required=True)
def pressure(config_path, n_max):
    """Partition-sum pressure estimates with rigorous bounds."""
    _single(config_path, {"op": "pressure", "n_max": n_max})


@main.command()
@_config_opt
@click.option("--n", type=int, required=True)
@click.option("--pressure", "pressure_value", type=float, default=None)
def gibbs(config_path, n, pressure_value):
    """Gibbs cylinder weights at level n."""
    _single(config_path, {"op": "gibbs", "n": n, "pressure": pressure_value})


@main.command()
@_config_opt
@click.option("--n", type=int, required=True)
@click.option("--k-max", type=int, required=True)
def qm(config_path, n, k_max):
    """Quasi-multiplicativity certificate over all pairs of n-words."""
    _single(config_path, {"op": "qm", "n": n, "k_max": k_max})


@main.command()
@_config_opt
@click.option("--n", type=int, required=True)
def lps(config_path, n):
    """Local-product-structure ratio check at half-level n."""
    _single(config_path, {"op": "lps", "n": n})


@main.command()
@_config_opt
@click.option("--mode", type=click.Choice(["fiber", "strong"]),
              default="fiber")
def bunching(config_path, mode):
    """Fiber/strong bunching margin over all generator windows."""
    _single(config_path, {"op": "bunching", "mode": mode})


@main.command()
@_config_opt
@click.option("--cycle", required=True, help="Periodic word, e.g. 01.")
@click.option("--bridge", default="", help="Bridge word of the homoclinic point.")
@click.option("--side", type=click.Choice(["s", "u"]), default="u")
@click.option("--n", type=int, default=40)
def holonomy(config_path, cycle, bridge, side, n):
    """Canonical holonomy approximants along a periodic/homoclinic pair."""
    _single(config_path, {"op": "holonomy", "cycle": cycle, "bridge": bridge,
                          "side": side, "n": n})


@main.command()
@_config_opt
@click.option("--p", "p_word", required=True, help="Periodic word.")
@click.option("--bridge", required=True, help="Bridge word.")
@click.option("--n", type=int, default=40)
def typicality(config_path, p_word, bridge, n):
    """Pinching and twisting verdicts for all exterior powers."""
    _single(config_path, {"op": "typicality", "p": p_word, "bridge": bridge,
                          "n": n})


@main.command()
@_config_opt
def irreducibility(config_path):
    """Burnside span-growth irreducibility of the generator family."""
    _single(config_path, {"op": "irreducibility"})


@main.command()
@_config_opt
@click.option("--n", type=int, required=True)
def lyapunov(config_path, n):
    """Lyapunov spectrum estimate under Gibbs weights."""
    _single(config_path, {"op": "lyapunov", "n": n})


@main.command()
@_config_opt
@click.option("--m1", type=int, required=True)
@click.option("--m2", type=int, required=True)
@click.option("--eps", type=float, required=True)
def kscan(config_path, m1, m2, eps):
    """Conditional-measure K-property scan."""
    _single(config_path, {"op": "kscan", "m1": m1, "m2": m2, "eps": eps})


@main.command()
@_config_opt
@click.option("--n", type=int, required=True)
@click.option("--m1", type=int, required=True)
@click.option("--m2", type=int, required=True)
@click.option("--eps", type=float, required=True)
def vwbscan(config_path, n, m1, m2, eps):
    """Very Weak Bernoulli scan at finite depth."""
    _single(config_path, {"op": "vwbscan", "n": n, "m1": m1, "m2": m2,
                          "eps": eps})


def _read_distribution(path, n):
    dist = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#") or row[0] == "sequence":
                continue
            seq, mass = row[0], float(row[1])
            dist[tuple(seq.split("|")) if "|" in seq else tuple(seq)] = mass
    return dist


@main.command("dbar")
@click.option("--left", "left_path", required=True, type=click.Path())
@click.option("--right", "right_path", required=True, type=click.Path())
@click.option("--n", type=int, required=True)
def dbar_cmd(left_path, right_path, n):
    """Exact d-bar distance between two CSV distributions (sequence,mass)."""
    try:
        left = _read_distribution(left_path, n)
        right = _read_distribution(right_path, n)
        res = dbar(left, right, n)
    except (OSError, ValueError, MixingError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_CONFIG if isinstance(e, OSError) else EXIT_NUMERIC)
    out = {
        "value": res.value,
        "dual_value": res.dual_value,
        "gap": res.gap,
        "n": res.n,
        "coupling": {f"{'|'.join(map(str, x))}->{'|'.join(map(str, y))}": m
                     for (x, y), m in sorted(res.coupling.pairs.items())},
    }
    click.echo(dumps(out))


if __name__ == "__main__":
    main()
