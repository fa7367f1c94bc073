# src/percolab/utils/__init__.py
from .errors import ConfigError, ReplicaInvariantError, SubcriticalWarning
from .validators import validate_experiment_data

__all__ = ['ConfigError', 'ReplicaInvariantError', 'SubcriticalWarning', 'validate_experiment_data']
