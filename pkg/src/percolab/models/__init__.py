# src/percolab/models/__init__.py
from .experiment import ExperimentConfig, RunManifest
from .geometry import BoxSpec, EmbeddingPlan, PointCloud, RegionSpec
from .lattice import LatticeConfig, LatticeEmbedding, LatticeLabeling
from .results import ExpansionFit, MonteCarloSummary, NormalityReport, TailFit

__all__ = ['BoxSpec', 'EmbeddingPlan', 'ExpansionFit', 'ExperimentConfig', 'LatticeConfig',
           'LatticeEmbedding', 'LatticeLabeling', 'MonteCarloSummary', 'NormalityReport',
           'PointCloud', 'RegionSpec', 'RunManifest', 'TailFit']
