# src/percolab/models/lattice.py
from dataclasses import dataclass
from typing import Tuple

import numpy as np


@dataclass(frozen=True, eq=False)
class LatticeConfig:
    """Site occupancy of the box {0,...,side-1}^dim, row-major"""
    dim: int
    side: int
    occupancy: np.ndarray
    p: float

    def __post_init__(self):
        occupancy = np.asarray(self.occupancy, dtype=bool)
        if occupancy.shape != (self.side,) * self.dim:
            occupancy = occupancy.reshape((self.side,) * self.dim)
        object.__setattr__(self, 'occupancy', occupancy)

    @property
    def site_count(self) -> int:
        return self.side ** self.dim

    @property
    def open_count(self) -> int:
        return int(np.count_nonzero(self.occupancy))


@dataclass(frozen=True, eq=False)
class LatticeLabeling:
    """Cluster ids per flat site index (-1 for closed sites), numbered by smallest site"""
    labels: np.ndarray
    sizes: np.ndarray

    @property
    def count(self) -> int:
        return int(len(self.sizes))


@dataclass(frozen=True, eq=False)
class LatticeEmbedding:
    """A target box of side `inner_side` placed at `offset` inside a larger sampled box"""
    outer: LatticeConfig
    inner_side: int
    offset: Tuple[int, ...]

    def __post_init__(self):
        if len(self.offset) != self.outer.dim:
            raise ValueError("offset must have one entry per axis")
        for o in self.offset:
            if o < 0 or o + self.inner_side > self.outer.side:
                raise ValueError(f"inner box of side {self.inner_side} at {self.offset} "
                                 f"does not fit in outer side {self.outer.side}")

    @property
    def window(self) -> Tuple[slice, ...]:
        return tuple(slice(o, o + self.inner_side) for o in self.offset)

    def inner_config(self) -> LatticeConfig:
        return LatticeConfig(dim=self.outer.dim, side=self.inner_side,
                             occupancy=self.outer.occupancy[self.window].copy(),
                             p=self.outer.p)
