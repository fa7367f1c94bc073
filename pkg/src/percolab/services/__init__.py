# src/percolab/services/__init__.py
from .geometric_graph import GeometricGraph, build_graph, component_orders, components
from .point_process import RngSubstream, derive_substream, sample_binomial_cube, sample_poisson_box
from .runner import ExperimentService, run_experiment

__all__ = ['ExperimentService', 'GeometricGraph', 'RngSubstream', 'build_graph',
           'component_orders', 'components', 'derive_substream', 'run_experiment',
           'sample_binomial_cube', 'sample_poisson_box']
