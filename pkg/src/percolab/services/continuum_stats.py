# src/percolab/services/continuum_stats.py
import itertools
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from percolab.models.geometry import BoxSpec, EmbeddingPlan, PointCloud, RegionSpec
from percolab.models.results import (DePoissonizationReport, GapReport, MonteCarloSummary,
                                     SymmetryReport, joint_z)
from percolab.services.estimation import summarize, survival_pairs
from percolab.services.geometric_graph import (ComponentLabeling, build_graph, component_orders,
                                               components, components_from_edges,
                                               coordinate_extent)
from percolab.services.point_process import (RngSubstream, sample_binomial_cube,
                                             sample_poisson_box)
from percolab.utils.errors import ReplicaInvariantError, SubcriticalWarning

logger = logging.getLogger(__name__)

SUBCRITICAL_FRACTION = 0.10


@dataclass(eq=False)
class BoundaryDecomposition:
    """
    The embedding giant restricted to the inner box B(s), split into
    components C_1..C_M (decreasing order). Local indices refer to rows of
    `points`, which are in inner-box coordinates.
    """
    dim: int
    inner_side: float
    points: np.ndarray
    giant_ids: np.ndarray
    restricted_ids: np.ndarray
    restricted_components: List[np.ndarray]
    out_connect: List[int]
    embed_point_count: int
    shell_width: float = 1.0
    xi_cache: Dict[RegionSpec, int] = field(default_factory=dict)
    defect_diameter_cache: Dict[RegionSpec, float] = field(default_factory=dict)
    _extents: Optional[List[float]] = field(default=None, repr=False)

    @property
    def component_count(self) -> int:
        return len(self.restricted_components)

    @property
    def orders(self) -> List[int]:
        return [len(c) for c in self.restricted_components]

    @property
    def c1_order(self) -> int:
        return len(self.restricted_components[0]) if self.restricted_components else 0

    @property
    def restricted_mass(self) -> int:
        return int(len(self.restricted_ids))

    @property
    def out_connect_points(self) -> np.ndarray:
        if not self.out_connect:
            return np.zeros((0, self.dim))
        return self.points[np.asarray(self.out_connect)]

    @property
    def extents(self) -> List[float]:
        """l-infinity diameter of each C_i"""
        if self._extents is None:
            self._extents = [coordinate_extent(self.points[c]) for c in self.restricted_components]
        return self._extents

    def in_shell(self, points: np.ndarray) -> np.ndarray:
        low = self.shell_width
        high = self.inner_side - self.shell_width
        return np.any((points < low) | (points > high), axis=1)


class _EmbeddingSample(NamedTuple):
    cloud: PointCloud
    labeling: ComponentLabeling
    src: np.ndarray
    dst: np.ndarray
    inner: np.ndarray
    inner_mask: np.ndarray


def _resolve_plan(side: float, plan: Optional[EmbeddingPlan]) -> EmbeddingPlan:
    if plan is None:
        return EmbeddingPlan.for_side(side)
    if not math.isclose(plan.inner_side, side):
        raise ValueError(f"plan inner side {plan.inner_side} does not match side {side}")
    return plan


def _embedding_sample(cloud: PointCloud, plan: EmbeddingPlan) -> _EmbeddingSample:
    graph = build_graph(cloud, 1.0)
    chunks = list(graph.iter_edges())
    labeling = components_from_edges(len(cloud), chunks)
    if chunks:
        src = np.concatenate([c[0] for c in chunks])
        dst = np.concatenate([c[1] for c in chunks])
    else:
        src = dst = np.zeros(0, dtype=np.int64)
    inner = cloud.points - plan.offset(cloud.dim)
    inner_mask = np.all((inner >= 0.0) & (inner <= plan.inner_side), axis=1)
    return _EmbeddingSample(cloud, labeling, src, dst, inner, inner_mask)


def _sample_embedding(intensity: float, plan: EmbeddingPlan, rng: RngSubstream,
                      dim: int) -> _EmbeddingSample:
    cloud = sample_poisson_box(rng, intensity, BoxSpec(dim=dim, side=plan.embed_side))
    return _embedding_sample(cloud, plan)


def _group_members(labels: np.ndarray, count: int) -> List[np.ndarray]:
    order = np.argsort(labels, kind='stable')
    bounds = np.cumsum(np.bincount(labels, minlength=count))[:-1]
    return np.split(order, bounds)


def _decompose(sample: _EmbeddingSample, plan: EmbeddingPlan) -> BoundaryDecomposition:
    cloud, labeling = sample.cloud, sample.labeling
    dim, side = cloud.dim, plan.inner_side
    empty = np.zeros(0, dtype=np.int64)
    if labeling.count == 0:
        return BoundaryDecomposition(dim=dim, inner_side=side, points=np.zeros((0, dim)),
                                     giant_ids=empty, restricted_ids=empty,
                                     restricted_components=[], out_connect=[],
                                     embed_point_count=0, shell_width=plan.shell_width)

    giant = labeling.label == labeling.ranking[0]
    restricted = giant & sample.inner_mask
    restricted_ids = np.flatnonzero(restricted)
    local = np.full(len(cloud), -1, dtype=np.int64)
    local[restricted_ids] = np.arange(len(restricted_ids))

    src, dst, inner_mask = sample.src, sample.dst, sample.inner_mask
    # an edge never joins two components, so giant[src] implies giant[dst]
    kept = inner_mask[src] & inner_mask[dst] & giant[src]
    sub = components_from_edges(len(restricted_ids), [(local[src[kept]], local[dst[kept]])])

    crossing = giant[src] & (inner_mask[src] != inner_mask[dst])
    inner_end = np.where(inner_mask[src[crossing]], src[crossing], dst[crossing])
    direct_out = np.zeros(len(restricted_ids), dtype=bool)
    direct_out[local[inner_end]] = True

    points = sample.inner[restricted_ids]
    grouped = _group_members(sub.label, sub.count) if sub.count else []
    restricted_components = [grouped[c] for c in sub.ranking]

    decomposition = BoundaryDecomposition(dim=dim, inner_side=side, points=points,
                                          giant_ids=np.flatnonzero(giant),
                                          restricted_ids=restricted_ids,
                                          restricted_components=restricted_components,
                                          out_connect=[], embed_point_count=len(cloud),
                                          shell_width=plan.shell_width)
    for rank, members in enumerate(restricted_components[1:], start=2):
        candidates = members[direct_out[members]]
        if len(candidates) == 0:
            raise ReplicaInvariantError(
                f"restricted component C_{rank} of order {len(members)} has no direct edge "
                f"to the giant outside the inner box")
        coords = points[candidates]
        to_boundary = np.minimum(coords, side - coords).min(axis=1)
        # np.lexsort sorts by the last key first
        keys = tuple(coords[:, k] for k in reversed(range(dim))) + (to_boundary,)
        chosen = int(candidates[np.lexsort(keys)[0]])
        if not decomposition.in_shell(points[chosen:chosen + 1])[0]:
            raise ReplicaInvariantError(
                f"out-connect point of C_{rank} at {points[chosen]} lies outside the shell")
        decomposition.out_connect.append(chosen)
    return decomposition


def _inner_l1(sample: _EmbeddingSample) -> int:
    """L1 of G(H restricted to the inner box; 1), reusing the embedding edges"""
    inner_ids = np.flatnonzero(sample.inner_mask)
    local = np.full(len(sample.cloud), -1, dtype=np.int64)
    local[inner_ids] = np.arange(len(inner_ids))
    kept = sample.inner_mask[sample.src] & sample.inner_mask[sample.dst]
    labeling = components_from_edges(len(inner_ids),
                                     [(local[sample.src[kept]], local[sample.dst[kept]])])
    return component_orders(labeling, 1)


def sample_L1(intensity: float, side: float, dim: int, rng: RngSubstream) -> int:
    """One draw of L1(G(H_{lambda,s}; 1)) on B(s)"""
    cloud = sample_poisson_box(rng, intensity, BoxSpec(dim=dim, side=side))
    return component_orders(components(build_graph(cloud, 1.0)), 1)


def sample_L1_binomial(n: int, intensity: float, dim: int, rng: RngSubstream) -> int:
    """One draw of L1(G(X_n; (n/lambda)^(-1/d))) on the unit cube"""
    if not intensity > 0:
        raise ValueError(f"intensity must be positive, got {intensity}")
    cloud = sample_binomial_cube(rng, n, dim)
    radius = (n / intensity) ** (-1.0 / dim)
    return component_orders(components(build_graph(cloud, radius)), 1)


def sample_giant_fraction(intensity: float, plan: EmbeddingPlan, rng: RngSubstream,
                          dim: int) -> Tuple[float, float]:
    """
    One replica of the percolation-probability estimator
    Returns: (giant points inside the centred inner box / (lambda s^d),
              share of all embedding points in the giant)
    """
    sample = _sample_embedding(intensity, plan, rng, dim)
    labeling = sample.labeling
    if labeling.count == 0:
        return 0.0, 0.0
    giant = labeling.label == labeling.ranking[0]
    inside = int(np.count_nonzero(giant & sample.inner_mask))
    expected = intensity * plan.inner_side ** dim
    return inside / expected, float(np.count_nonzero(giant)) / len(sample.cloud)


def estimate_p_infinity(intensity: float, dim: int, plan: EmbeddingPlan, replicas: int,
                        rng: RngSubstream) -> MonteCarloSummary:
    """
    Estimate p_inf(lambda) as E|C_inf ∩ B(s)| / (lambda s^d), using the largest
    component of B(S) as C_inf
    Args:
        intensity: lambda, meant to be supercritical
        dim: dimension d
        plan: inner/embedding box geometry
        replicas: number of replicas (at least 2)
        rng: substream consumed by all replicas in turn
    Returns: MonteCarloSummary with mean and interval clamped to [0, 1]
    """
    draws = [sample_giant_fraction(intensity, plan, rng, dim) for _ in range(replicas)]
    return p_infinity_summary(intensity, [r for r, _ in draws], [g for _, g in draws])


def p_infinity_summary(intensity: float, ratios: Sequence[float], giant_shares: Sequence[float],
                       subcritical_fraction: float = SUBCRITICAL_FRACTION) -> MonteCarloSummary:
    """Summarize giant-fraction replicas, warning when the giant looks subcritical"""
    replicas = len(ratios)
    flagged = sum(1 for share in giant_shares if share < subcritical_fraction)
    if flagged:
        message = (f"embedding giant held under {subcritical_fraction:.0%} of the points in "
                   f"{flagged}/{replicas} replicas at lambda={intensity}; "
                   f"the percolation estimate is unreliable (likely subcritical)")
        logger.warning(message)
        warnings.warn(message, SubcriticalWarning, stacklevel=2)
    summary = summarize(ratios)
    return MonteCarloSummary(count=summary.count, mean=min(max(summary.mean, 0.0), 1.0),
                             variance=summary.variance, stderr=summary.stderr,
                             ci_low=max(summary.ci_low, 0.0), ci_high=min(summary.ci_high, 1.0))


def decompose_embedding(cloud: PointCloud, plan: EmbeddingPlan) -> BoundaryDecomposition:
    """Boundary decomposition of a given embedding cloud (box origin must be 0)"""
    if not math.isclose(cloud.box.side, plan.embed_side):
        raise ValueError(f"cloud side {cloud.box.side} does not match plan side {plan.embed_side}")
    return _decompose(_embedding_sample(cloud, plan), plan)


def decompose_boundary(intensity: float, side: float, plan: Optional[EmbeddingPlan],
                       rng: RngSubstream, dim: int = 2) -> BoundaryDecomposition:
    """
    Sample B(S) and split its giant, restricted to the centred B(s), into
    C_1..C_M with one out-connect point for each C_i, i >= 2
    Args:
        intensity: lambda, meant to be supercritical
        side: inner side s
        plan: embedding geometry, default S = 2s + 8
        rng: replica substream
        dim: dimension d
    Returns: BoundaryDecomposition
    """
    plan = _resolve_plan(side, plan)
    return _decompose(_sample_embedding(intensity, plan, rng, dim), plan)


def _check_region(decomp: BoundaryDecomposition, region: RegionSpec) -> None:
    if region.dim != decomp.dim:
        raise ValueError(f"region has dim {region.dim}, decomposition has dim {decomp.dim}")
    if not region.within(decomp.inner_side):
        raise ValueError(f"region {region.bounds} is not inside B({decomp.inner_side})")


def _components_connected_in(decomp: BoundaryDecomposition, region: RegionSpec) -> List[int]:
    """Ranks (0-based into restricted_components) whose out-connect point lies in region"""
    if not decomp.out_connect:
        return []
    inside = region.contains(decomp.out_connect_points)
    return [rank + 1 for rank in np.flatnonzero(inside)]


def xi(decomp: BoundaryDecomposition, region: RegionSpec) -> int:
    """Total order of the C_i, i >= 2, whose out-connect point lies in region"""
    _check_region(decomp, region)
    if region not in decomp.xi_cache:
        ranks = _components_connected_in(decomp, region)
        decomp.xi_cache[region] = int(sum(len(decomp.restricted_components[r]) for r in ranks))
    return decomp.xi_cache[region]


def defect_diameter(decomp: BoundaryDecomposition, region: RegionSpec) -> float:
    """Largest l-infinity diameter among the C_i with out-connect point in region"""
    _check_region(decomp, region)
    if region not in decomp.defect_diameter_cache:
        ranks = _components_connected_in(decomp, region)
        extents = decomp.extents
        decomp.defect_diameter_cache[region] = max((extents[r] for r in ranks), default=0.0)
    return decomp.defect_diameter_cache[region]


def corner_regions(dim: int, side: float) -> List[RegionSpec]:
    """The 2^d congruent boxes of side s/2 tiling B(s)"""
    half = side / 2.0
    halves = ((0.0, half), (half, float(side)))
    return [RegionSpec(bounds) for bounds in itertools.product(halves, repeat=dim)]


def symmetry_regions(dim: int, side: float) -> List[RegionSpec]:
    """R_i = [0,1] x [0,s/2]^(d-1-i) x [1,s/2]^i for i = 0..d-1"""
    half = side / 2.0
    regions = []
    for i in range(dim):
        bounds = [(0.0, 1.0)] + [(0.0, half)] * (dim - 1 - i) + [(1.0, half)] * i
        regions.append(RegionSpec(tuple(bounds)))
    return regions


def default_shell_region(dim: int, side: float) -> RegionSpec:
    """Unit box against the x_1 = 0 face, centred on the face"""
    centre = side / 2.0
    return RegionSpec(((0.0, 1.0),) + ((centre - 0.5, centre + 0.5),) * (dim - 1))


def xi_symmetry_values(decomp: BoundaryDecomposition) -> Tuple[int, int, bool]:
    """
    Per-realization pieces of the symmetry identity
    Returns: (xi(B(s)), 2^d * sum_i xi(R_i), whether xi(B(s)) equals the corner-box sum)
    """
    dim, side = decomp.dim, decomp.inner_side
    total = xi(decomp, RegionSpec.full(dim, side))
    corner_sum = sum(xi(decomp, region) for region in corner_regions(dim, side))
    symmetric = 2 ** dim * sum(xi(decomp, region) for region in symmetry_regions(dim, side))
    return total, symmetric, corner_sum == total


def xi_symmetry_decomposition(intensity: float, side: float, dim: int,
                              plan: Optional[EmbeddingPlan], replicas: int,
                              rng: RngSubstream) -> SymmetryReport:
    """
    Compare E[xi(B(s))] with 2^d * sum_i E[xi(R_i)]
    Args:
        intensity: lambda
        side: inner side s
        dim: 2 or 3
        plan: embedding geometry
        replicas: number of replicas
        rng: substream consumed by all replicas in turn
    Returns: SymmetryReport with both estimates and the per-realization additivity failures
    """
    if dim not in (2, 3):
        raise ValueError(f"the corner-region decomposition supports d = 2 or 3, got {dim}")
    plan = _resolve_plan(side, plan)
    draws = [xi_symmetry_values(decompose_boundary(intensity, side, plan, rng, dim))
             for _ in range(replicas)]
    return symmetry_report([t for t, _, _ in draws], [c for _, c, _ in draws],
                           sum(1 for _, _, additive in draws if not additive))


def symmetry_report(totals: Sequence[int], symmetric: Sequence[int], failures: int) -> SymmetryReport:
    replicas = len(totals)
    if failures:
        logger.warning(f"xi additivity over corner boxes failed in {failures}/{replicas} replicas")
    total_summary, corner_summary = summarize(totals), summarize(symmetric)
    return SymmetryReport(total=total_summary, corner_regions=corner_summary,
                          z_score=joint_z(total_summary, corner_summary),
                          additivity_failures=failures)


def sample_gap(intensity: float, side: float, plan: Optional[EmbeddingPlan], rng: RngSubstream,
               dim: int = 2) -> Tuple[int, int]:
    """
    Paired draw on one configuration
    Returns: (L1 of the inner-box graph, |C_1| of the restricted giant)
    """
    plan = _resolve_plan(side, plan)
    sample = _sample_embedding(intensity, plan, rng, dim)
    l1 = _inner_l1(sample)
    c1 = _decompose(sample, plan).c1_order
    if l1 < c1:
        raise ReplicaInvariantError(f"inner L1 {l1} is smaller than |C_1| {c1}")
    return l1, c1


def gap_L1_vs_C1(intensity: float, side: float, plan: Optional[EmbeddingPlan], replicas: int,
                 rng: RngSubstream, dim: int = 2) -> GapReport:
    """Mean of L1 - |C_1| over paired replicas"""
    return gap_report([sample_gap(intensity, side, plan, rng, dim) for _ in range(replicas)])


def gap_report(pairs: Sequence[Tuple[int, int]]) -> GapReport:
    l1 = [a for a, _ in pairs]
    c1 = [b for _, b in pairs]
    return GapReport(l1=summarize(l1), c1=summarize(c1),
                     gap=summarize([a - b for a, b in pairs]))


def sample_defect_diameter(intensity: float, side: float, plan: Optional[EmbeddingPlan],
                           rng: RngSubstream, dim: int = 2,
                           region: Optional[RegionSpec] = None) -> float:
    """D(R) for one replica, R defaulting to the unit shell box"""
    decomp = decompose_boundary(intensity, side, plan, rng, dim)
    return defect_diameter(decomp, region or default_shell_region(dim, side))


def defect_diameter_survival(intensity: float, side: float, dim: int,
                             plan: Optional[EmbeddingPlan], region: Optional[RegionSpec],
                             thresholds: Sequence[float], replicas: int,
                             rng: RngSubstream) -> List[Tuple[float, float]]:
    """Empirical P[D(R) >= n] for each threshold n"""
    values = [sample_defect_diameter(intensity, side, plan, rng, dim, region)
              for _ in range(replicas)]
    return survival_pairs(values, thresholds)


def sample_vx_extent(intensity: float, side: float, dim: int, rng: RngSubstream,
                     x: Optional[Sequence[float]] = None) -> float:
    """
    l-infinity diameter of the component of x in G(H_{lambda,s} ∪ {x}; 1)
    Args:
        x: the added point, default the centre of B(s)
    """
    box = BoxSpec(dim=dim, side=side)
    cloud = sample_poisson_box(rng, intensity, box)
    anchor = np.full(dim, side / 2.0) if x is None else np.asarray(x, dtype=float)
    if anchor.shape != (dim,) or np.any(anchor < 0) or np.any(anchor > side):
        raise ValueError(f"x must be a point of B({side})")
    joined = PointCloud(box=box, points=np.vstack([cloud.points, anchor]))
    graph = build_graph(joined, 1.0)
    labeling = components(graph)
    return coordinate_extent(joined.points[labeling.label == labeling.label[-1]])


def binomial_vs_poisson(intensity: float, side: float, dim: int, replicas: int,
                        rng: RngSubstream) -> DePoissonizationReport:
    """Binomial L1 at n = ceil(lambda s^d) against Poisson L1 at s"""
    n = int(math.ceil(intensity * side ** dim))
    binomial = summarize([sample_L1_binomial(n, intensity, dim, rng) for _ in range(replicas)])
    poisson = summarize([sample_L1(intensity, side, dim, rng) for _ in range(replicas)])
    sd_ratio = math.sqrt(binomial.variance / poisson.variance) if poisson.variance > 0 else math.inf
    return DePoissonizationReport(binomial=binomial, poisson=poisson, points=n,
                                  z_score=joint_z(binomial, poisson), sd_ratio=sd_ratio)
