# src/percolab/services/point_process.py
import hashlib
import logging
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from percolab.models.geometry import BoxSpec, PointCloud

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1


def _mix64(z: int) -> int:
    """splitmix64 finaliser"""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _label_hash(label: Union[bytes, str]) -> int:
    if isinstance(label, str):
        label = label.encode('utf-8')
    return int.from_bytes(hashlib.blake2b(label, digest_size=8).digest(), 'little')


@dataclass(frozen=True)
class RngSubstream:
    """
    One replica's random stream. The PCG64 state is the only mutable part;
    a substream must not be shared between replicas.
    """
    master_seed: int
    stream_id: int
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'generator',
                           np.random.Generator(np.random.PCG64(self.stream_id)))

    def random(self, size=None):
        return self.generator.random(size)


def derive_substream(master_seed: int, label: Union[bytes, str], replica: int) -> RngSubstream:
    """
    Derive the substream for (master seed, experiment label, replica index)
    Args:
        master_seed: 64-bit run seed
        label: experiment label, e.g. b"L1" or "l1-poisson:40"
        replica: replica index
    Returns: fresh RngSubstream, identical for identical inputs
    """
    stream_id = _mix64(int(master_seed) & _MASK64)
    stream_id = _mix64(stream_id ^ _label_hash(label))
    stream_id = _mix64(stream_id ^ (int(replica) & _MASK64))
    return RngSubstream(master_seed=int(master_seed), stream_id=stream_id)


def sample_poisson_box(rng: RngSubstream, intensity: float, box: BoxSpec) -> PointCloud:
    """
    Homogeneous Poisson process of the given intensity restricted to `box`
    Args:
        rng: replica substream
        intensity: points per unit volume
        box: sampling window
    Returns: PointCloud with Poisson(intensity * volume) uniform points
    """
    if not intensity > 0:
        raise ValueError(f"intensity must be positive, got {intensity}")
    # numpy's Poisson sampler is exact: inversion for small means, PTRS rejection above
    count = int(rng.generator.poisson(intensity * box.volume))
    points = box.lower + box.side * rng.generator.random((count, box.dim))
    return PointCloud(box=box, points=points)


def sample_binomial_cube(rng: RngSubstream, n: int, dim: int) -> PointCloud:
    """Exactly n i.i.d. uniform points in [0,1]^dim"""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    box = BoxSpec(dim=dim, side=1.0)
    return PointCloud(box=box, points=rng.generator.random((int(n), dim)))
