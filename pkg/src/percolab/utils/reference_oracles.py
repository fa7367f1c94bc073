# src/percolab/utils/reference_oracles.py
"""
Slow reference implementations used to cross-check the cell-list graph,
the union-find labellings and the lattice expectations. They share no
adjacency code with the services.
"""
import itertools
from collections import deque
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from percolab.models.geometry import PointCloud

MAX_ORACLE_POINTS = 5000
MAX_ENUMERATION_SITES = 20


def naive_graph(cloud: PointCloud, radius: float) -> List[Tuple[int, int]]:
    """All pairs i < j with squared distance <= radius^2"""
    if len(cloud) > MAX_ORACLE_POINTS:
        raise ValueError(f"naive_graph is limited to {MAX_ORACLE_POINTS} points, got {len(cloud)}")
    points = cloud.points
    dist_sq = ((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=-1)
    rows, cols = np.triu_indices(len(cloud), k=1)
    close = dist_sq[rows, cols] <= radius * radius
    return [(int(i), int(j)) for i, j in zip(rows[close], cols[close])]


def bfs_components(vertices: Iterable[int], edges: Iterable[Tuple[int, int]]) -> List[List[int]]:
    """Breadth-first partition, each part sorted, parts ordered by smallest member"""
    vertices = list(vertices)
    adjacency = {v: [] for v in vertices}
    for a, b in edges:
        adjacency[a].append(b)
        adjacency[b].append(a)
    seen = set()
    parts = []
    for start in sorted(vertices):
        if start in seen:
            continue
        seen.add(start)
        part = [start]
        queue = deque([start])
        while queue:
            current = queue.popleft()
            for nxt in adjacency[current]:
                if nxt not in seen:
                    seen.add(nxt)
                    part.append(nxt)
                    queue.append(nxt)
        parts.append(sorted(part))
    return parts


def bfs_lattice_clusters(occupancy: np.ndarray) -> List[List[Tuple[int, ...]]]:
    """Open clusters of a boolean site array by breadth-first search over l1 neighbours"""
    occupancy = np.asarray(occupancy, dtype=bool)
    shape = occupancy.shape
    seen = np.zeros(shape, dtype=bool)
    clusters = []
    for start in itertools.product(*(range(n) for n in shape)):
        if not occupancy[start] or seen[start]:
            continue
        seen[start] = True
        cluster = [start]
        queue = deque([start])
        while queue:
            current = queue.popleft()
            for axis in range(len(shape)):
                for step in (-1, 1):
                    nxt = list(current)
                    nxt[axis] += step
                    nxt = tuple(nxt)
                    if 0 <= nxt[axis] < shape[axis] and occupancy[nxt] and not seen[nxt]:
                        seen[nxt] = True
                        cluster.append(nxt)
                        queue.append(nxt)
        clusters.append(sorted(cluster))
    return clusters


def exact_lattice_expectation(dim: int, side: int, p: Fraction, statistic: str) -> Fraction:
    """
    Exact E_p of the largest cluster order ('H') or the cluster count ('count')
    by enumerating all 2^(side^dim) configurations
    """
    sites = side ** dim
    if sites > MAX_ENUMERATION_SITES:
        raise ValueError(f"enumeration is limited to {MAX_ENUMERATION_SITES} sites, got {sites}")
    if statistic not in ('H', 'count'):
        raise ValueError(f"statistic must be 'H' or 'count', got {statistic!r}")
    p = Fraction(p)
    q = 1 - p
    total = Fraction(0)
    for bits in itertools.product((False, True), repeat=sites):
        opened = sum(bits)
        weight = p ** opened * q ** (sites - opened)
        if weight == 0:
            continue
        clusters = bfs_lattice_clusters(np.array(bits, dtype=bool).reshape((side,) * dim))
        if statistic == 'H':
            value = max((len(c) for c in clusters), default=0)
        else:
            value = len(clusters)
        total += weight * value
    return total


def partition_of(labels: Sequence[int]) -> List[List[int]]:
    """Turn a per-vertex label array into the oracle's partition format"""
    groups = {}
    for vertex, label in enumerate(labels):
        groups.setdefault(int(label), []).append(vertex)
    return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])
