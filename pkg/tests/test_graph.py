from __future__ import annotations

import itertools
import json

import numpy as np
import pytest

from evocd.graph import (
    DynamicGraph,
    Partition,
    Snapshot,
    community_modularity,
    from_json_dict,
    modularity,
    restrict,
    to_json_dict,
    total_weight,
    weighted_degree,
)

from conftest import random_partition, random_snapshot


def brute_force_modularity(s: Snapshot, p: Partition) -> float:
    """Pairwise definition: sum_ij (A_ij - k_i k_j / 2w*) delta(c_i, c_j) / 2w*."""
    nodes = sorted(s.nodes)
    adj = {(u, v): 0.0 for u in nodes for v in nodes}
    for u, v, w in s.edges:
        adj[(u, v)] = w
        adj[(v, u)] = w
    k = {n: sum(adj[(n, m)] for m in nodes) for n in nodes}
    two_w = sum(k.values())
    q = 0.0
    for u in nodes:
        for v in nodes:
            if p[u] == p[v]:
                q += (adj[(u, v)] - k[u] * k[v] / two_w) / two_w
    return q


class TestConstruction:
    def test_self_loop_rejected(self):
        with pytest.raises(ValueError, match="self-loop"):
            Snapshot.build(0, [0, 1], [(0, 0, 0.5)])

    def test_bad_weight_rejected(self):
        for w in (0.0, -0.2, 1.5):
            with pytest.raises(ValueError, match="weight"):
                Snapshot.build(0, [0, 1], [(0, 1, w)])

    def test_duplicate_edge_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            Snapshot.build(0, [0, 1], [(0, 1, 0.5), (1, 0, 0.7)])

    def test_endpoint_outside_nodes_rejected(self):
        with pytest.raises(ValueError, match="outside"):
            Snapshot.build(0, [0, 1], [(0, 2, 0.5)])

    def test_canonical_ordering(self):
        s1 = Snapshot.build(0, [0, 1, 2], [(2, 0, 0.5), (1, 0, 0.3)])
        s2 = Snapshot.build(0, [0, 1, 2], [(0, 1, 0.3), (0, 2, 0.5)])
        assert s1 == s2

    def test_dynamic_graph_index_check(self):
        s = Snapshot.build(0, [0], [])
        with pytest.raises(ValueError, match="index"):
            DynamicGraph(snapshots=(s, s))

    def test_ground_truth_coverage_check(self):
        s = Snapshot.build(0, [0, 1], [(0, 1, 1.0)])
        with pytest.raises(ValueError, match="cover"):
            DynamicGraph(snapshots=(s,), ground_truth=(Partition({0: 0}),))


class TestWeights:
    def test_triangle_total(self, triangle):
        assert total_weight(triangle) == 3.0

    def test_empty_total(self):
        assert total_weight(Snapshot.build(0, [0, 1], [])) == 0.0

    def test_two_triangles_total(self, two_triangles):
        assert total_weight(two_triangles) == 6.0

    def test_triangle_degree(self, triangle):
        assert weighted_degree(triangle, 0) == 2.0

    def test_isolated_degree(self):
        s = Snapshot.build(0, [0, 1, 2], [(0, 1, 0.5)])
        assert weighted_degree(s, 2) == 0.0

    def test_fractional_degree(self):
        s = Snapshot.build(0, [0, 1, 2], [(0, 1, 0.2), (0, 2, 0.5)])
        assert weighted_degree(s, 0) == pytest.approx(0.7, abs=1e-15)

    def test_unknown_node_raises(self, triangle):
        with pytest.raises(ValueError):
            weighted_degree(triangle, 99)


class TestModularity:
    def test_triangle_single_community(self, triangle):
        p = Partition({0: 0, 1: 0, 2: 0})
        assert community_modularity(triangle, p, 0) == pytest.approx(0.0, abs=1e-15)
        assert modularity(triangle, p) == pytest.approx(0.0, abs=1e-15)

    def test_two_triangles_one_community_each(self, two_triangles):
        p = Partition({0: 0, 1: 0, 2: 0, 3: 1, 4: 1, 5: 1})
        assert community_modularity(two_triangles, p, 0) == pytest.approx(0.25, abs=1e-15)
        assert modularity(two_triangles, p) == pytest.approx(0.5, abs=1e-15)

    def test_singleton_community_of_triangle(self, triangle):
        p = Partition({0: 0, 1: 1, 2: 1})
        assert community_modularity(triangle, p, 0) == pytest.approx(-1.0 / 9.0, abs=1e-15)

    def test_all_singletons_triangle(self, triangle):
        p = Partition({0: 0, 1: 1, 2: 2})
        assert modularity(triangle, p) == pytest.approx(-1.0 / 3.0, abs=1e-15)

    def test_edgeless_raises(self):
        s = Snapshot.build(0, [0, 1], [])
        with pytest.raises(ValueError, match="edgeless"):
            modularity(s, Partition({0: 0, 1: 0}))

    def test_partition_must_cover(self, triangle):
        with pytest.raises(ValueError):
            modularity(triangle, Partition({0: 0, 1: 0}))

    def test_matches_brute_force_on_random_graphs(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            s = random_snapshot(rng)
            p = random_partition(rng, s.nodes)
            assert modularity(s, p) == pytest.approx(
                brute_force_modularity(s, p), abs=1e-10
            )

    def test_bounds_and_relabel_invariance(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            s = random_snapshot(rng)
            p = random_partition(rng, s.nodes)
            q = modularity(s, p)
            assert -0.5 - 1e-12 <= q <= 1.0 + 1e-12
            shifted = Partition({n: c + 1000 for n, c in p.assignment.items()})
            assert modularity(s, shifted) == q

    def test_all_in_one_community_is_zero(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            s = random_snapshot(rng)
            p = Partition({n: 0 for n in s.nodes})
            assert modularity(s, p) == pytest.approx(0.0, abs=1e-12)

    def test_degree_sum_is_twice_total_weight(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            s = random_snapshot(rng)
            total = sum(weighted_degree(s, n) for n in s.nodes)
            assert total == pytest.approx(2.0 * total_weight(s), rel=1e-12)


class TestRestrict:
    def test_full_domain_identity(self):
        p = Partition({0: 1, 1: 1, 2: 2})
        assert restrict(p, [0, 1, 2]) == p

    def test_empty(self):
        assert restrict(Partition({0: 1}), []) == Partition({})

    def test_subset(self):
        p = Partition({0: 1, 1: 1, 2: 2})
        assert restrict(p, [0, 2]).assignment == {0: 1, 2: 2}


class TestSerialization:
    def test_round_trip(self, two_triangles):
        gt = Partition({n: n // 3 for n in range(6)})
        g = DynamicGraph(snapshots=(two_triangles,), ground_truth=(gt,), meta={"kind": "static"})
        doc = json.loads(json.dumps(to_json_dict(g)))
        back = from_json_dict(doc)
        assert back.snapshots == g.snapshots
        assert back.ground_truth == g.ground_truth
        assert back.meta == g.meta

    def test_weight_precision_preserved(self):
        w = 0.123456789123456
        s = Snapshot.build(0, [0, 1], [(0, 1, w)])
        doc = json.loads(json.dumps(to_json_dict(DynamicGraph(snapshots=(s,)))))
        assert from_json_dict(doc).snapshots[0].edges[0][2] == w

    def test_no_ground_truth(self):
        s = Snapshot.build(0, [0], [])
        back = from_json_dict(to_json_dict(DynamicGraph(snapshots=(s,))))
        assert back.ground_truth is None
