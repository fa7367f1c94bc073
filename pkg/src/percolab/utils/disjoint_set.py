# src/percolab/utils/disjoint_set.py
from typing import Iterable, Tuple

import numpy as np


class DisjointSet:
    """
    Union-find over 0..n-1 with path halving and union by size.

    Roots carry no meaning outside this class; callers relabel through
    `component_labels`, which numbers components by their smallest member.
    """

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.size = [1] * size

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def union_pairs(self, first: Iterable[int], second: Iterable[int]) -> None:
        """Merge every (first[k], second[k]) pair"""
        if isinstance(first, np.ndarray):
            first = first.tolist()
        if isinstance(second, np.ndarray):
            second = second.tolist()
        parent = self.parent
        size = self.size
        for a, b in zip(first, second):
            # inlined find with path halving
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            if a == b:
                continue
            if size[a] < size[b]:
                a, b = b, a
            parent[b] = a
            size[a] += size[b]

    def component_labels(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Label every element by component.
        Returns: (labels, orders) where component ids follow the order of each
        component's smallest member and orders[k] is the size of component k
        """
        n = len(self.parent)
        if n == 0:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        roots = np.fromiter((self.find(i) for i in range(n)), dtype=np.int64, count=n)
        _, first_index, inverse = np.unique(roots, return_index=True, return_inverse=True)
        relabel = np.empty(len(first_index), dtype=np.int64)
        relabel[np.argsort(first_index, kind='stable')] = np.arange(len(first_index))
        labels = relabel[inverse.reshape(-1)]
        orders = np.bincount(labels, minlength=len(first_index))
        return labels, orders
