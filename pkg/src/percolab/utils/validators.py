# src/percolab/utils/validators.py
from typing import Dict, List, Optional, Tuple

from percolab.models.experiment import (CONTINUUM_EXPERIMENTS, DECOMPOSITION_EXPERIMENTS,
                                        DERIVED_EXPERIMENTS, EXPANSION_TARGETS, EXPERIMENTS,
                                        LATTICE_EXPERIMENTS)

KNOWN_KEYS = {'experiment', 'dim', 'param', 'sides', 'replicas', 'master_seed', 'workers',
              'embed_factor', 'output_dir', 'target', 'summary_path', 'degree', 'sign',
              'exponent', 'thresholds', 'tail_target'}

MIN_CLT_REPLICAS = 500


def parse_list(raw: str) -> List[float]:
    return [float(item) for item in raw.split(',') if item.strip()]


def _parse_int(raw: str) -> int:
    value = float(raw)
    if not value.is_integer():
        raise ValueError(raw)
    return int(value)


def _is_blank(data: Dict, key: str) -> bool:
    return data.get(key) is None or str(data.get(key)).strip() == ''


def validate_experiment_data(data: Dict) -> Optional[Tuple[str, str]]:
    """
    Validate raw experiment-file entries
    Args:
        data: key -> raw string value
    Returns: (offending key, error message) if validation fails, None otherwise
    """
    if not data:
        return 'experiment', "No configuration entries provided"

    unknown = sorted(set(data) - KNOWN_KEYS)
    if unknown:
        return unknown[0], f"Unknown configuration key '{unknown[0]}'"

    if _is_blank(data, 'experiment'):
        return 'experiment', "Missing required key 'experiment'"
    experiment = data['experiment'].strip()
    if experiment not in EXPERIMENTS:
        return 'experiment', (f"Unknown experiment '{experiment}'; expected one of "
                              f"{', '.join(EXPERIMENTS)}")

    target = experiment
    if experiment in DERIVED_EXPERIMENTS:
        target = (data.get('target') or 'l1-poisson').strip()
        if target not in EXPANSION_TARGETS:
            return 'target', (f"'target' must be one of {', '.join(EXPANSION_TARGETS)}, "
                              f"got '{target}'")
    elif not _is_blank(data, 'target'):
        return 'target', "'target' only applies to fit and clt experiments"

    fit_from_file = experiment == 'fit' and not _is_blank(data, 'summary_path')
    required = ['dim'] if fit_from_file else ['dim', 'param', 'sides', 'replicas']
    missing = [key for key in required if _is_blank(data, key)]
    if missing:
        return missing[0], f"Missing required key '{missing[0]}'"

    try:
        dim = _parse_int(data['dim'])
    except ValueError:
        return 'dim', f"'dim' must be an integer, got '{data['dim']}'"
    if dim < 2:
        return 'dim', f"'dim' must be at least 2, got {dim}"
    if experiment == 'xi-symmetry' and dim not in (2, 3):
        return 'dim', "'dim' must be 2 or 3 for xi-symmetry"

    error = _validate_options(data, dim)
    if error:
        return error
    if fit_from_file:
        return None

    try:
        param = float(data['param'])
    except ValueError:
        return 'param', f"'param' must be a number, got '{data['param']}'"
    if target in CONTINUUM_EXPERIMENTS and not param > 0:
        return 'param', f"'param' (intensity) must be positive, got {param}"
    if target in LATTICE_EXPERIMENTS and not 0.0 <= param <= 1.0:
        return 'param', f"'param' (open probability) must lie in [0, 1], got {param}"

    try:
        sides = parse_list(data['sides'])
    except ValueError:
        return 'sides', f"'sides' must be a comma-separated list of numbers, got '{data['sides']}'"
    if not sides:
        return 'sides', "'sides' must list at least one side"
    if any(s <= 0 for s in sides):
        return 'sides', "'sides' must all be positive"
    if any(b <= a for a, b in zip(sides, sides[1:])):
        return 'sides', "'sides' must be strictly increasing"
    if target in LATTICE_EXPERIMENTS and any(not float(s).is_integer() for s in sides):
        return 'sides', "'sides' must be integers for lattice experiments"
    if target in DECOMPOSITION_EXPERIMENTS and any(s <= 2 for s in sides):
        return 'sides', "'sides' must exceed 2 so the boundary shell has an interior"

    try:
        replicas = _parse_int(data['replicas'])
    except ValueError:
        return 'replicas', f"'replicas' must be an integer, got '{data['replicas']}'"
    if replicas < 1:
        return 'replicas', f"'replicas' must be at least 1, got {replicas}"
    if experiment == 'clt' and replicas < MIN_CLT_REPLICAS:
        return 'replicas', f"'replicas' must be at least {MIN_CLT_REPLICAS} for clt"
    if experiment == 'fit':
        degree = _parse_int(data['degree']) if not _is_blank(data, 'degree') else dim
        if len(sides) < degree + 2:
            return 'sides', f"'sides' needs at least {degree + 2} entries to fit degree {degree}"
        if replicas < 2:
            return 'replicas', "'replicas' must be at least 2 to fit standard errors"
    return None


def _validate_options(data: Dict, dim: int) -> Optional[Tuple[str, str]]:
    """Optional keys shared by every experiment"""
    integer_keys = {'master_seed': 0, 'workers': 1, 'degree': 1}
    for key, minimum in integer_keys.items():
        if _is_blank(data, key):
            continue
        try:
            value = _parse_int(data[key])
        except ValueError:
            return key, f"'{key}' must be an integer, got '{data[key]}'"
        if value < minimum:
            return key, f"'{key}' must be at least {minimum}, got {value}"
        if key == 'master_seed' and value >= 2 ** 64:
            return key, "'master_seed' must fit in 64 bits"

    for key in ('embed_factor', 'exponent'):
        if _is_blank(data, key):
            continue
        try:
            value = float(data[key])
        except ValueError:
            return key, f"'{key}' must be a number, got '{data[key]}'"
        if key == 'embed_factor' and value < 1.0:
            return key, f"'embed_factor' must be at least 1, got {value}"
        if key == 'exponent' and not value > 0:
            return key, f"'exponent' must be positive, got {value}"

    if not _is_blank(data, 'sign') and data['sign'].strip() not in ('minus', 'plus'):
        return 'sign', f"'sign' must be 'minus' or 'plus', got '{data['sign']}'"

    if not _is_blank(data, 'tail_target'):
        if data['tail_target'].strip() not in ('defect', 'vx'):
            return 'tail_target', (f"'tail_target' must be 'defect' or 'vx', "
                                   f"got '{data['tail_target']}'")
        if data.get('experiment', '').strip() != 'tail':
            return 'tail_target', "'tail_target' only applies to the tail experiment"

    if not _is_blank(data, 'thresholds'):
        try:
            thresholds = parse_list(data['thresholds'])
        except ValueError:
            return 'thresholds', "'thresholds' must be a comma-separated list of numbers"
        if len(thresholds) < 3 or any(b <= a for a, b in zip(thresholds, thresholds[1:])):
            return 'thresholds', "'thresholds' must list at least 3 increasing values"
    return None
