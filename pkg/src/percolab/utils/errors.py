# src/percolab/utils/errors.py


class ConfigError(ValueError):
    """Invalid experiment configuration; `key` names the offending entry"""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class ReplicaInvariantError(RuntimeError):
    """A replica violated an exact structural invariant"""


class SubcriticalWarning(UserWarning):
    """The embedding giant is too small to stand in for the infinite cluster"""
