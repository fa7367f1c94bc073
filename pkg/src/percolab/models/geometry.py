# src/percolab/models/geometry.py
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class BoxSpec:
    """Axis-aligned cube origin + [0, side]^dim"""
    dim: int
    side: float
    origin: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"dim must be at least 2, got {self.dim}")
        if not self.side > 0:
            raise ValueError(f"side must be positive, got {self.side}")
        if self.origin is None:
            object.__setattr__(self, 'origin', (0.0,) * self.dim)
        elif len(self.origin) != self.dim:
            raise ValueError(f"origin has {len(self.origin)} coordinates for dim {self.dim}")
        else:
            object.__setattr__(self, 'origin', tuple(float(v) for v in self.origin))

    @property
    def volume(self) -> float:
        return float(self.side) ** self.dim

    @property
    def lower(self) -> np.ndarray:
        return np.asarray(self.origin, dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return self.lower + self.side


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Points stored row-major as an (n, dim) float array"""
    box: BoxSpec
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, self.box.dim)
        object.__setattr__(self, 'points', pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.box.dim

    def contains_all(self) -> bool:
        """Every coordinate inside the closed box"""
        if len(self) == 0:
            return True
        return bool(np.all(self.points >= self.box.lower) and np.all(self.points <= self.box.upper))

    def count_in(self, lower, upper) -> int:
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        inside = np.all((self.points >= lower) & (self.points <= upper), axis=1)
        return int(np.count_nonzero(inside))


@dataclass(frozen=True)
class RegionSpec:
    """Closed axis-aligned box in inner-box coordinates"""
    bounds: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        for axis, (lo, hi) in enumerate(bounds):
            if lo > hi:
                raise ValueError(f"region axis {axis} has lo {lo} > hi {hi}")
        object.__setattr__(self, 'bounds', bounds)

    @classmethod
    def full(cls, dim: int, side: float) -> 'RegionSpec':
        return cls(tuple((0.0, float(side)) for _ in range(dim)))

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def within(self, side: float) -> bool:
        return all(lo >= 0.0 and hi <= side for lo, hi in self.bounds)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Closed-box membership mask for an (m, dim) array"""
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        return np.all((pts >= lo) & (pts <= hi), axis=1)


@dataclass(frozen=True)
class EmbeddingPlan:
    """
    Inner box B(s) centred in an embedding box B(S).
    The largest component of B(S) stands in for the infinite cluster.
    """
    inner_side: float
    embed_side: float
    shell_width: float = 1.0

    def __post_init__(self):
        if not self.inner_side > 0:
            raise ValueError(f"inner_side must be positive, got {self.inner_side}")
        if not self.embed_side > self.inner_side + 2 * self.shell_width:
            raise ValueError(
                f"embed_side {self.embed_side} leaves no margin around inner_side {self.inner_side}")

    @classmethod
    def for_side(cls, inner_side: float, embed_factor: float = 2.0) -> 'EmbeddingPlan':
        """Default embedding S = embed_factor*s + 8, i.e. a margin of at least max(4, s/2)"""
        return cls(inner_side=float(inner_side), embed_side=float(embed_factor) * inner_side + 8.0)

    @property
    def margin(self) -> float:
        return (self.embed_side - self.inner_side) / 2.0

    def offset(self, dim: int) -> np.ndarray:
        return np.full(dim, self.margin)
