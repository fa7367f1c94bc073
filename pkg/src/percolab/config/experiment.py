# src/percolab/config/experiment.py
import logging
from pathlib import Path
from typing import Optional

from dotenv import dotenv_values

from percolab.config.config import Config, get_config
from percolab.models.experiment import DEFAULT_TAIL_THRESHOLDS, ExperimentConfig
from percolab.utils.errors import ConfigError
from percolab.utils.validators import parse_list, validate_experiment_data

logger = logging.getLogger(__name__)


def read_entries(path) -> dict:
    """Raw `key = value` entries of an experiment file, keys lower-cased"""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Configuration file not found: {path}", key='path')
    raw = dotenv_values(path, interpolate=False)
    return {key.strip().lower(): (value.strip() if value is not None else None)
            for key, value in raw.items()}


def load_config(path, app_config: Optional[Config] = None) -> ExperimentConfig:
    """
    Load and validate an experiment file
    Args:
        path: `key = value` file, lists comma-separated
        app_config: process configuration supplying defaults and the worker override
    Returns: ExperimentConfig with defaults filled in
    """
    app_config = app_config or get_config()
    data = read_entries(path)
    error = validate_experiment_data(data)
    if error:
        key, message = error
        logger.error(f"Invalid configuration {path}: {message}")
        raise ConfigError(message, key=key)

    def value(key):
        entry = data.get(key)
        return entry if entry not in (None, '') else None

    experiment = data['experiment']
    target = value('target')
    sampling = (target or 'l1-poisson') if experiment in ('fit', 'clt') else experiment
    lattice = sampling in ('lattice-h', 'lattice-count', 'theta', 'kappa')
    sides = parse_list(value('sides') or '')
    if lattice:
        sides = [int(s) for s in sides]

    config = ExperimentConfig(
        experiment=experiment,
        dim=int(float(data['dim'])),
        param=float(value('param')) if value('param') else None,
        sides=tuple(sides),
        replicas=int(float(value('replicas'))) if value('replicas') else 0,
        master_seed=int(float(value('master_seed'))) if value('master_seed')
        else app_config.DEFAULT_MASTER_SEED,
        workers=app_config.resolve_workers(value('workers')),
        embed_factor=float(value('embed_factor')) if value('embed_factor')
        else app_config.DEFAULT_EMBED_FACTOR,
        output_dir=value('output_dir') or app_config.OUTPUT_DIR,
        target=target,
        summary_path=value('summary_path'),
        degree=int(float(value('degree'))) if value('degree') else None,
        sign=value('sign'),
        exponent=float(value('exponent')) if value('exponent') else None,
        thresholds=tuple(parse_list(value('thresholds'))) if value('thresholds')
        else DEFAULT_TAIL_THRESHOLDS,
        tail_target=value('tail_target') or 'defect',
    )
    logger.debug(f"Loaded configuration {path}: {config}")
    return config
