# src/percolab/services/geometric_graph.py
import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, Tuple

import numpy as np

from percolab.models.geometry import PointCloud
from percolab.utils.disjoint_set import DisjointSet

logger = logging.getLogger(__name__)

EdgeChunk = Tuple[np.ndarray, np.ndarray]


class GeometricGraph:
    """
    G(X; r) over a point cloud. Adjacency is never stored; it is queried through
    a cell list of side r, so only the 3^d cells around a point are examined.
    Pairs at distance exactly r are edges.
    """

    def __init__(self, cloud: PointCloud, radius: float):
        if not radius > 0:
            raise ValueError(f"radius must be positive, got {radius}")
        self.cloud = cloud
        self.radius = float(radius)
        self._radius_sq = self.radius * self.radius

        dim = cloud.dim
        points = cloud.points
        per_axis = int(np.floor(cloud.box.side / self.radius)) + 1
        self._dims = np.full(dim, per_axis, dtype=np.int64)
        self._strides = np.array([per_axis ** (dim - 1 - k) for k in range(dim)], dtype=np.int64)

        cells = np.floor((points - cloud.box.lower) / self.radius).astype(np.int64)
        self._cells = np.clip(cells, 0, per_axis - 1)
        keys = self._cells @ self._strides
        self._order = np.argsort(keys, kind='stable')
        self._sorted_keys = keys[self._order]
        self._cell_grid = None

    def __len__(self) -> int:
        return len(self.cloud)

    @property
    def cell_grid(self) -> Dict[Tuple[int, ...], np.ndarray]:
        """Map from integer cell coordinates to the indices of the points inside"""
        if self._cell_grid is None:
            grid = {}
            if len(self):
                boundaries = np.flatnonzero(np.diff(self._sorted_keys)) + 1
                for chunk in np.split(self._order, boundaries):
                    grid[tuple(int(c) for c in self._cells[chunk[0]])] = np.sort(chunk)
            self._cell_grid = grid
        return self._cell_grid

    def _candidates(self, offset) -> EdgeChunk:
        """All (i, j) with j in the cell at cell(i) + offset"""
        n = len(self)
        shifted = self._cells + np.asarray(offset, dtype=np.int64)
        valid = np.all((shifted >= 0) & (shifted < self._dims), axis=1)
        keys = shifted @ self._strides
        lo = np.searchsorted(self._sorted_keys, keys, side='left')
        hi = np.searchsorted(self._sorted_keys, keys, side='right')
        counts = np.where(valid, hi - lo, 0)
        total = int(counts.sum())
        src = np.repeat(np.arange(n, dtype=np.int64), counts)
        starts = np.cumsum(counts) - counts
        positions = np.arange(total, dtype=np.int64) - np.repeat(starts - lo, counts)
        return src, self._order[positions]

    def iter_edges(self) -> Iterator[EdgeChunk]:
        """Yield edge chunks (i, j) with i < j; each edge appears exactly once"""
        if len(self) < 2:
            return
        points = self.cloud.points
        for offset in itertools.product((-1, 0, 1), repeat=self.cloud.dim):
            src, dst = self._candidates(offset)
            keep = src < dst
            src, dst = src[keep], dst[keep]
            dist_sq = ((points[src] - points[dst]) ** 2).sum(axis=1)
            close = dist_sq <= self._radius_sq
            if np.any(close):
                yield src[close], dst[close]

    def edges(self) -> np.ndarray:
        """All edges as a lexicographically sorted (m, 2) array"""
        chunks = list(self.iter_edges())
        if not chunks:
            return np.zeros((0, 2), dtype=np.int64)
        pairs = np.column_stack([np.concatenate([c[0] for c in chunks]),
                                 np.concatenate([c[1] for c in chunks])])
        return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]

    def neighbors(self, index: int) -> np.ndarray:
        """Sorted indices within distance r of point `index`"""
        points = self.cloud.points
        cell = self._cells[index]
        found = []
        for offset in itertools.product((-1, 0, 1), repeat=self.cloud.dim):
            target = cell + np.asarray(offset)
            if np.any(target < 0) or np.any(target >= self._dims):
                continue
            key = int(target @ self._strides)
            lo = np.searchsorted(self._sorted_keys, key, side='left')
            hi = np.searchsorted(self._sorted_keys, key, side='right')
            found.append(self._order[lo:hi])
        if not found:
            return np.zeros(0, dtype=np.int64)
        candidates = np.concatenate(found)
        candidates = candidates[candidates != index]
        dist_sq = ((points[candidates] - points[index]) ** 2).sum(axis=1)
        return np.sort(candidates[dist_sq <= self._radius_sq])


@dataclass(frozen=True, eq=False)
class ComponentLabeling:
    """
    label[i] is the component of point i; component ids follow each
    component's smallest member. ranking lists ids by decreasing order,
    ties by smallest member.
    """
    label: np.ndarray
    orders: np.ndarray
    ranking: np.ndarray

    @property
    def count(self) -> int:
        return int(len(self.orders))

    def members(self, component_id: int) -> np.ndarray:
        return np.flatnonzero(self.label == component_id)


def build_graph(cloud: PointCloud, radius: float) -> GeometricGraph:
    return GeometricGraph(cloud, radius)


def components_from_edges(n_vertices: int, edge_chunks: Iterable[EdgeChunk]) -> ComponentLabeling:
    """Union-find labelling of 0..n_vertices-1 under the given edges"""
    forest = DisjointSet(n_vertices)
    for src, dst in edge_chunks:
        forest.union_pairs(src, dst)
    labels, orders = forest.component_labels()
    ranking = np.argsort(-orders, kind='stable')
    return ComponentLabeling(label=labels, orders=orders, ranking=ranking)


def components(graph: GeometricGraph) -> ComponentLabeling:
    labeling = components_from_edges(len(graph), graph.iter_edges())
    logger.debug(f"{len(graph)} points, {labeling.count} components")
    return labeling


def component_orders(labeling: ComponentLabeling, j: int) -> int:
    """Order L_j of the j-th largest component, 0 when there are fewer than j"""
    if j < 1:
        raise ValueError(f"j must be at least 1, got {j}")
    if j > labeling.count:
        return 0
    return int(labeling.orders[labeling.ranking[j - 1]])


def component_extent(labeling: ComponentLabeling, graph: GeometricGraph, component_id: int) -> float:
    """l-infinity diameter of a component: the widest coordinate range"""
    if not 0 <= component_id < labeling.count:
        raise ValueError(f"component id {component_id} outside 0..{labeling.count - 1}")
    return coordinate_extent(graph.cloud.points[labeling.label == component_id])


def coordinate_extent(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    return float(np.max(points.max(axis=0) - points.min(axis=0)))
