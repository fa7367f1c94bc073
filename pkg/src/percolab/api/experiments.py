# src/percolab/api/experiments.py
import logging

import click

from percolab.config.config import get_config
from percolab.config.experiment import load_config
from percolab.services.runner import ExperimentService
from percolab.utils.errors import ConfigError, ReplicaInvariantError

logger = logging.getLogger(__name__)

EXIT_CONFIG_ERROR = 1
EXIT_INVARIANT_ERROR = 2


def fail(ctx: click.Context, message: str, code: int) -> None:
    click.echo(f"Error: {message}", err=True)
    ctx.exit(code)


@click.command('run')
@click.argument('config_path', type=click.Path(dir_okay=False))
@click.pass_context
def run(ctx, config_path):
    """Run every replica of the experiment in CONFIG_PATH"""
    app_config = get_config()
    try:
        config = load_config(config_path, app_config)
        manifest = ExperimentService(app_config).run(config)
    except ConfigError as e:
        where = f" [{e.key}]" if e.key else ''
        fail(ctx, f"{str(e)}{where}", EXIT_CONFIG_ERROR)
    except ReplicaInvariantError as e:
        logger.error(f"Replica invariant violated: {str(e)}")
        fail(ctx, f"Replica invariant violated: {str(e)}", EXIT_INVARIANT_ERROR)
    else:
        click.echo(f"{config.experiment}: wrote {', '.join(sorted(manifest.outputs.values()))} "
                   f"to {config.output_dir}")


@click.command('validate')
@click.argument('config_path', type=click.Path(dir_okay=False))
@click.pass_context
def validate(ctx, config_path):
    """Check CONFIG_PATH without running anything"""
    try:
        config = load_config(config_path, get_config())
    except ConfigError as e:
        where = f" [{e.key}]" if e.key else ''
        fail(ctx, f"{str(e)}{where}", EXIT_CONFIG_ERROR)
    else:
        click.echo(f"ok: {config.experiment} d={config.dim} sides={list(config.sides)} "
                   f"replicas={config.replicas}")


commands = [run, validate]
