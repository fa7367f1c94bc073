# tests/conftest.py
import numpy as np
import pytest

from percolab.models.geometry import BoxSpec, EmbeddingPlan, PointCloud
from percolab.models.lattice import LatticeConfig, LatticeEmbedding


@pytest.fixture(autouse=True)
def testing_env(monkeypatch):
    monkeypatch.setenv('PERCOLAB_ENV', 'testing')
    monkeypatch.delenv('PERCOLAB_WORKERS', raising=False)
    monkeypatch.delenv('PERCOLAB_OUTPUT_DIR', raising=False)


@pytest.fixture
def branch_plan():
    """Inner box of side 4 centred in an embedding box of side 10 (margin 3)"""
    return EmbeddingPlan(inner_side=4.0, embed_side=10.0)


@pytest.fixture
def branch_cloud():
    """
    One connected cloud: a chain along y=1 outside the inner box feeding a
    vertical line at x=6 (C_1, order 5) and a branch at x=4 (C_2, order 3)
    whose only exit is (4.0, 3.5) -> (4.0, 2.6).
    """
    chain = [(0.9 * k, 1.0) for k in range(12)]
    connectors = [(4.0, 1.8), (4.0, 2.6), (6.0, 1.6), (6.0, 2.4)]
    line = [(6.0, y) for y in (3.2, 4.0, 4.8, 5.6, 6.4)]
    branch = [(4.0, 3.5), (4.0, 4.4), (4.0, 5.3)]
    points = np.array(chain + connectors + line + branch)
    return PointCloud(box=BoxSpec(dim=2, side=10.0), points=points)


@pytest.fixture
def lattice_branch():
    """
    6x6 box with the 4x4 target at offset (1, 1). Row 0 of the outer box is
    open; inner column (0..2, 0) hangs off it, and inner site (0, 3) is a
    second piece of the same cluster.
    """
    occupancy = np.zeros((6, 6), dtype=bool)
    occupancy[0, :] = True
    occupancy[1:4, 1] = True
    occupancy[1, 4] = True
    outer = LatticeConfig(dim=2, side=6, occupancy=occupancy, p=0.5)
    return LatticeEmbedding(outer=outer, inner_side=4, offset=(1, 1))
