# src/percolab/api/analysis.py
import json
from pathlib import Path

import click

from percolab.api.experiments import EXIT_CONFIG_ERROR, fail
from percolab.models.results import ExpansionFit
from percolab.services.estimation import clt_check
from percolab.services.runner import fit_summary_file, read_samples, write_json
from percolab.utils.errors import ConfigError


@click.command('fit')
@click.argument('summary_path', type=click.Path(dir_okay=False))
@click.option('--degree', type=int, required=True, help='Polynomial degree, usually the dimension')
@click.option('--sign', type=click.Choice(['minus', 'plus']), default='minus', show_default=True,
              help="'plus' for the cluster-count expansion")
@click.option('--output', 'output_path', type=click.Path(dir_okay=False), default=None,
              help='Where to write fit.json (default: next to the summary)')
@click.pass_context
def fit(ctx, summary_path, degree, sign, output_path):
    """Fit the finite-size expansion to the per-side means in SUMMARY_PATH"""
    try:
        result = fit_summary_file(summary_path, degree, sign)
    except (ConfigError, ValueError) as e:
        fail(ctx, f"Error fitting expansion: {str(e)}", EXIT_CONFIG_ERROR)
        return
    target = Path(output_path) if output_path else Path(summary_path).with_name('fit.json')
    write_json(target, result.to_dict())
    click.echo(f"leading {result.leading:.8g} +/- {result.leading_stderr:.3g}")
    for i, (tau, stderr) in enumerate(zip(result.tau, result.tau_stderr), start=1):
        click.echo(f"tau_{i} {tau:.8g} +/- {stderr:.3g}")
    click.echo(f"R^2 {result.r_squared:.6f}; wrote {target}")


@click.command('clt')
@click.argument('samples_path', type=click.Path(dir_okay=False))
@click.option('--side', type=float, required=True, help='Side whose replicas are checked')
@click.option('--exponent', type=float, required=True, help='Scaling exponent, d/2 for the CLTs')
@click.pass_context
def clt(ctx, samples_path, side, exponent):
    """Kolmogorov-Smirnov normality check of the replicas at one side"""
    try:
        grouped = read_samples(samples_path, side)
        if not grouped:
            raise ConfigError(f"No samples at side {side} in {samples_path}", key='side')
        values = next(iter(grouped.values()))
        report = clt_check(values, side, exponent)
    except (ConfigError, ValueError) as e:
        fail(ctx, f"Error checking normality: {str(e)}", EXIT_CONFIG_ERROR)
        return
    click.echo(json.dumps(report.to_dict(), indent=2, sort_keys=True))


@click.command('predict')
@click.argument('fit_path', type=click.Path(dir_okay=False))
@click.option('--side', type=float, required=True, help='Side to evaluate the fitted expansion at')
@click.pass_context
def predict(ctx, fit_path, side):
    """Evaluate a fitted expansion at another side"""
    try:
        with open(fit_path) as handle:
            result = ExpansionFit.from_dict(json.load(handle))
    except (OSError, KeyError, ValueError) as e:
        fail(ctx, f"Error reading fit: {str(e)}", EXIT_CONFIG_ERROR)
        return
    value, stderr = result.predict(side)
    click.echo(f"{value:.8g} +/- {stderr:.3g}")


commands = [fit, clt, predict]
