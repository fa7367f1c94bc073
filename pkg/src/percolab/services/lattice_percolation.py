# src/percolab/services/lattice_percolation.py
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import numpy as np

from percolab.models.lattice import LatticeConfig, LatticeEmbedding, LatticeLabeling
from percolab.models.results import MonteCarloSummary
from percolab.services.estimation import summarize
from percolab.services.point_process import RngSubstream
from percolab.utils.disjoint_set import DisjointSet
from percolab.utils.errors import ReplicaInvariantError

logger = logging.getLogger(__name__)

Site = Tuple[int, ...]


def _check_lattice_args(dim: int, side: int, p: float) -> None:
    if dim < 2:
        raise ValueError(f"dim must be at least 2, got {dim}")
    if side < 1:
        raise ValueError(f"side must be at least 1, got {side}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")


def sample_lattice(rng: RngSubstream, dim: int, side: int, p: float) -> LatticeConfig:
    """Bernoulli(p) site percolation on {0,...,side-1}^dim"""
    _check_lattice_args(dim, side, p)
    uniforms = rng.random((side,) * dim)
    return LatticeConfig(dim=dim, side=side, occupancy=uniforms < p, p=p)


def coupled_largest_orders(rng: RngSubstream, dim: int, side: int,
                           ps: Sequence[float]) -> List[int]:
    """Largest cluster order at each p under one shared uniform field"""
    for p in ps:
        _check_lattice_args(dim, side, p)
    uniforms = rng.random((side,) * dim)
    return [largest_cluster_order(label_clusters(
        LatticeConfig(dim=dim, side=side, occupancy=uniforms < p, p=p))) for p in ps]


def _neighbour_pairs(occupancy: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Flat index pairs of open sites at l1-distance 1"""
    shape = occupancy.shape
    flat_open = occupancy.ravel()
    index = np.arange(flat_open.size).reshape(shape)
    firsts, seconds = [], []
    for axis in range(len(shape)):
        lower = [slice(None)] * len(shape)
        upper = [slice(None)] * len(shape)
        lower[axis] = slice(0, -1)
        upper[axis] = slice(1, None)
        a = index[tuple(lower)].ravel()
        b = index[tuple(upper)].ravel()
        both = flat_open[a] & flat_open[b]
        firsts.append(a[both])
        seconds.append(b[both])
    if not firsts:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    return np.concatenate(firsts), np.concatenate(seconds)


def _label_occupancy(occupancy: np.ndarray) -> LatticeLabeling:
    flat_open = occupancy.ravel()
    open_sites = np.flatnonzero(flat_open)
    local = np.full(flat_open.size, -1, dtype=np.int64)
    local[open_sites] = np.arange(len(open_sites))
    a, b = _neighbour_pairs(occupancy)
    forest = DisjointSet(len(open_sites))
    forest.union_pairs(local[a], local[b])
    cluster_of_open, sizes = forest.component_labels()
    labels = np.full(flat_open.size, -1, dtype=np.int64)
    labels[open_sites] = cluster_of_open
    return LatticeLabeling(labels=labels, sizes=sizes)


def label_clusters(config: LatticeConfig) -> LatticeLabeling:
    """Open clusters by union-find over nearest-neighbour open pairs"""
    labeling = _label_occupancy(config.occupancy)
    logger.debug(f"{config.open_count} open sites in {labeling.count} clusters")
    return labeling


def largest_cluster_order(labeling: LatticeLabeling) -> int:
    return int(labeling.sizes.max()) if labeling.count else 0


def _reciprocal_sum(site_sizes: np.ndarray) -> Fraction:
    """Exact sum of 1/size over the given per-site cluster sizes"""
    if site_sizes.size == 0:
        return Fraction(0)
    sizes, multiplicity = np.unique(site_sizes, return_counts=True)
    return sum((Fraction(int(m), int(k)) for k, m in zip(sizes, multiplicity)), Fraction(0))


def cluster_count(labeling: LatticeLabeling, config: LatticeConfig) -> Tuple[int, Fraction]:
    """
    Number of open clusters with the residual of the reciprocal identity
    Args:
        labeling: output of label_clusters(config)
        config: the labelled configuration
    Returns: (count, count - sum over open x of 1/|C_x|), the residual being exactly 0
    """
    open_labels = labeling.labels[config.occupancy.ravel()]
    residual = labeling.count - _reciprocal_sum(labeling.sizes[open_labels])
    if residual != 0:
        raise ReplicaInvariantError(f"cluster counting identity residual {residual} is not zero")
    return labeling.count, residual


def sample_lattice_embedding(rng: RngSubstream, dim: int, side: int, p: float,
                             embed_factor: float = 2.0) -> LatticeEmbedding:
    """Sample a box of side embed_factor*side with the target box centred in it"""
    outer_side = max(int(round(embed_factor * side)), side)
    outer = sample_lattice(rng, dim, outer_side, p)
    offset = ((outer_side - side) // 2,) * dim
    return LatticeEmbedding(outer=outer, inner_side=side, offset=offset)


def sample_theta_indicator(rng: RngSubstream, dim: int, side: int, p: float,
                           embed_factor: float = 2.0) -> int:
    """1 when the centre of the embedding box is open and in its largest cluster"""
    embedding = sample_lattice_embedding(rng, dim, side, p, embed_factor)
    outer = embedding.outer
    labeling = label_clusters(outer)
    if labeling.count == 0:
        return 0
    centre = np.ravel_multi_index((outer.side // 2,) * dim, outer.occupancy.shape)
    return int(labeling.labels[centre] == int(np.argmax(labeling.sizes)))


def estimate_theta(p: float, dim: int, side: int, embed_factor: float, replicas: int,
                   rng: RngSubstream) -> MonteCarloSummary:
    """Finite-size proxy for theta(p): how often the centre joins the largest cluster"""
    return summarize([sample_theta_indicator(rng, dim, side, p, embed_factor)
                      for _ in range(replicas)])


def sample_cluster_density(rng: RngSubstream, dim: int, side: int, p: float) -> float:
    """Cluster count in B(n-1) divided by n^d for one replica"""
    config = sample_lattice(rng, dim, side, p)
    count, _ = cluster_count(label_clusters(config), config)
    return count / config.site_count


def estimate_kappa(p: float, dim: int, side: int, replicas: int,
                   rng: RngSubstream) -> MonteCarloSummary:
    """Finite-volume estimate of kappa(p), the open clusters per vertex"""
    return summarize([sample_cluster_density(rng, dim, side, p) for _ in range(replicas)])


def _shell_mask(dim: int, side: int) -> np.ndarray:
    """Flat mask of L(n-1): sites with some coordinate 0 or side-1"""
    grids = np.indices((side,) * dim).reshape(dim, -1)
    return np.any((grids == 0) | (grids == side - 1), axis=0)


def _indicated_vertices(labeling: LatticeLabeling, shell: np.ndarray) -> Dict[int, int]:
    """Cluster id -> smallest shell site of that cluster (row-major = lexicographic)"""
    shell_sites = np.flatnonzero(shell & (labeling.labels >= 0))
    clusters, first = np.unique(labeling.labels[shell_sites], return_index=True)
    return {int(c): int(shell_sites[i]) for c, i in zip(clusters, first)}


def _check_embedding(config: LatticeConfig, embedding: LatticeEmbedding) -> None:
    if config.side != embedding.inner_side or config.dim != embedding.outer.dim:
        raise ValueError("configuration does not match the embedding window")
    if not np.array_equal(config.occupancy, embedding.outer.occupancy[embedding.window]):
        raise ValueError("configuration occupancy differs from the embedding window")


def _outer_flat(embedding: LatticeEmbedding, inner_flat: np.ndarray) -> np.ndarray:
    coords = np.unravel_index(inner_flat, (embedding.inner_side,) * embedding.outer.dim)
    shifted = tuple(c + o for c, o in zip(coords, embedding.offset))
    return np.ravel_multi_index(shifted, embedding.outer.occupancy.shape)


def lattice_xi_field(config: LatticeConfig, embedding: LatticeEmbedding) -> Dict[Site, Fraction]:
    """Nonzero values of xi(x, B(n-1)) over the shell, keyed by site"""
    _check_embedding(config, embedding)
    inner = label_clusters(config)
    outer = label_clusters(embedding.outer)
    indicated = _indicated_vertices(inner, _shell_mask(config.dim, config.side))
    values = {}
    for cluster, flat in indicated.items():
        outer_label = outer.labels[_outer_flat(embedding, np.array([flat]))[0]]
        value = 1 - Fraction(int(inner.sizes[cluster]), int(outer.sizes[outer_label]))
        if value:
            site = tuple(int(c) for c in np.unravel_index(flat, config.occupancy.shape))
            values[site] = value
    return values


def lattice_boundary_xi(site: Site, config: LatticeConfig, embedding: LatticeEmbedding) -> Fraction:
    """
    xi(x, B(n-1)) = 1 - |C_x(B(n-1))| / |C_x| at the indicated vertex of C_x(B(n-1)), else 0
    Args:
        site: shell site x in box coordinates
        config: the box B(n-1)
        embedding: larger box whose cluster of x stands in for C_x
    Returns: exact rational value
    """
    site = tuple(int(c) for c in site)
    side = config.side
    if len(site) != config.dim or any(c < 0 or c >= side for c in site):
        raise ValueError(f"site {site} is outside B({side - 1})")
    if all(0 < c < side - 1 for c in site):
        raise ValueError(f"site {site} is not in the shell L({side - 1})")
    _check_embedding(config, embedding)
    if not config.occupancy[site]:
        return Fraction(0)
    return lattice_xi_field(config, embedding).get(site, Fraction(0))


def decomposition_residual(config: LatticeConfig, embedding: LatticeEmbedding) -> Fraction:
    """
    sum_B 1/|C_x(B)| - sum_B 1/|C_x| - sum_L xi(x, B); exactly 0 on every configuration
    """
    _check_embedding(config, embedding)
    inner = label_clusters(config)
    outer = label_clusters(embedding.outer)
    open_flat = np.flatnonzero(config.occupancy.ravel())
    inner_sum = _reciprocal_sum(inner.sizes[inner.labels[open_flat]])
    outer_sum = _reciprocal_sum(outer.sizes[outer.labels[_outer_flat(embedding, open_flat)]])
    xi_sum = sum(lattice_xi_field(config, embedding).values(), Fraction(0))
    return inner_sum - outer_sum - xi_sum


@dataclass
class LatticeBoundaryDecomposition:
    """
    Components C_1..C_M of (embedding giant ∩ B(n-1)) and the out-connect
    site of each C_i, i >= 2
    """
    dim: int
    inner_side: int
    orders: List[int]
    out_connect: List[Site]
    xi_values: Dict[Site, int] = field(default_factory=dict)

    @property
    def xi_total(self) -> int:
        return sum(self.xi_values.values())


def decompose_lattice_boundary(embedding: LatticeEmbedding) -> LatticeBoundaryDecomposition:
    """Split the restricted giant and pick lexicographically smallest out-connect sites"""
    dim, side = embedding.outer.dim, embedding.inner_side
    outer = label_clusters(embedding.outer)
    config = embedding.inner_config()
    if outer.count == 0:
        return LatticeBoundaryDecomposition(dim=dim, inner_side=side, orders=[], out_connect=[])
    giant = int(np.argmax(outer.sizes))
    outer_labels = outer.labels.reshape(embedding.outer.occupancy.shape)

    inner = label_clusters(config)
    open_flat = np.flatnonzero(config.occupancy.ravel())
    in_giant = outer.labels[_outer_flat(embedding, open_flat)] == giant
    pieces = np.unique(inner.labels[open_flat[in_giant]])
    # decreasing order, ties by smallest site (cluster ids follow smallest site)
    ranked = sorted((int(c) for c in pieces), key=lambda c: (-int(inner.sizes[c]), c))

    shell = _shell_mask(dim, side)
    offset = np.asarray(embedding.offset)
    decomposition = LatticeBoundaryDecomposition(dim=dim, inner_side=side,
                                                 orders=[int(inner.sizes[c]) for c in ranked],
                                                 out_connect=[])
    for rank, cluster in enumerate(ranked[1:], start=2):
        candidates = np.flatnonzero((inner.labels == cluster) & shell)
        chosen = None
        for flat in candidates:
            site = np.array(np.unravel_index(flat, config.occupancy.shape))
            if _touches_outside_giant(site, offset, side, outer_labels, giant):
                chosen = tuple(int(c) for c in site)
                break
        if chosen is None:
            raise ReplicaInvariantError(f"lattice component C_{rank} has no out-connect site")
        decomposition.out_connect.append(chosen)
        decomposition.xi_values[chosen] = int(inner.sizes[cluster])
    return decomposition


def _touches_outside_giant(site: np.ndarray, offset: np.ndarray, side: int,
                           outer_labels: np.ndarray, giant: int) -> bool:
    outer_side = outer_labels.shape[0]
    for axis in range(len(site)):
        for step in (-1, 1):
            neighbour = site.copy()
            neighbour[axis] += step
            if 0 <= neighbour[axis] < side:
                continue
            target = neighbour + offset
            if np.any(target < 0) or np.any(target >= outer_side):
                continue
            if outer_labels[tuple(target)] == giant:
                return True
    return False


def sample_lattice_largest(rng: RngSubstream, dim: int, side: int, p: float) -> int:
    return largest_cluster_order(label_clusters(sample_lattice(rng, dim, side, p)))


def sample_lattice_count(rng: RngSubstream, dim: int, side: int, p: float) -> int:
    config = sample_lattice(rng, dim, side, p)
    count, _ = cluster_count(label_clusters(config), config)
    return count
