from __future__ import annotations

import itertools

import numpy as np
import pytest

from evocd.graph import Partition, Snapshot


@pytest.fixture
def triangle() -> Snapshot:
    return Snapshot.build(0, [0, 1, 2], [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


@pytest.fixture
def two_triangles() -> Snapshot:
    edges = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0),
             (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0)]
    return Snapshot.build(0, range(6), edges)


def random_snapshot(rng: np.random.Generator, n_max: int = 12, p: float = 0.4) -> Snapshot:
    """Random weighted graph with at least one edge."""
    while True:
        n = int(rng.integers(2, n_max + 1))
        edges = []
        for u, v in itertools.combinations(range(n), 2):
            if rng.random() < p:
                edges.append((u, v, 1.0 - float(rng.random())))
        if edges:
            return Snapshot.build(0, range(n), edges)


def random_partition(rng: np.random.Generator, nodes, k_max: int = 5) -> Partition:
    k = int(rng.integers(1, k_max + 1))
    return Partition.build({n: int(rng.integers(k)) for n in nodes})


def all_set_partitions(items: list[int]):
    """Every partition of ``items`` as a list of assignment dicts."""
    if not items:
        yield {}
        return
    first, rest = items[0], items[1:]
    for sub in all_set_partitions(rest):
        k = max(sub.values(), default=-1) + 1
        for c in range(k + 1):
            out = dict(sub)
            out[first] = c
            yield out
