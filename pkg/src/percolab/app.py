# src/percolab/app.py
import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path

import click

from percolab import __version__
from percolab.config.config import get_config

logger = logging.getLogger('percolab')


def setup_logging(config):
    """Configure logging"""
    if logger.handlers:
        return logger
    level = getattr(logging, str(config.LOG_LEVEL).upper(), logging.INFO)

    if config.LOG_FILE:
        # Ensure log directory exists
        Path(config.LOG_FILE).parent.mkdir(parents=True, exist_ok=True)

        # Create file handler
        file_handler = RotatingFileHandler(
            config.LOG_FILE,
            maxBytes=config.LOG_MAX_BYTES,
            backupCount=config.LOG_BACKUP_COUNT
        )
        file_handler.setFormatter(logging.Formatter(config.LOG_FORMAT))
        file_handler.setLevel(logging.INFO)
        logger.addHandler(file_handler)

    # Create console handler
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(logging.Formatter(config.LOG_FORMAT))
    console_handler.setLevel(level)
    logger.addHandler(console_handler)

    logger.setLevel(min(level, logging.INFO) if config.LOG_FILE else level)
    logger.debug(f"percolab {__version__} startup")
    return logger


def register_commands(cli_group):
    """Register CLI commands"""
    try:
        from percolab.api import init_app

        init_app(cli_group)
        for name in sorted(cli_group.commands):
            logger.debug(f"Registered command: {name}")
    except Exception as e:
        logger.error(f"Error registering commands: {str(e)}")
        raise


@click.group()
@click.version_option(__version__, prog_name='percolab')
def cli():
    """Monte Carlo toolkit for random geometric graph and lattice percolation"""


register_commands(cli)


def main():
    config = get_config()
    setup_logging(config)
    cli()


if __name__ == "__main__":
    main()
