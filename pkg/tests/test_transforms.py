from __future__ import annotations

import math
from collections import Counter

import numpy as np
import pytest

from evocd.graph import Partition, Snapshot, modularity, restrict
from evocd.lfr import LfrParams, generate
from evocd.transforms import (
    EPS_W,
    SCENARIOS,
    TransformConfig,
    TransformKind,
    evolve,
    plan,
    scenario_of,
    step,
)
from evocd.validation import EvolutionError


@pytest.fixture(scope="module")
def base_pair():
    return generate(LfrParams(n=120, min_comm=12, max_comm=40,
                              avg_degree=8, max_degree=20, seed=42))


def weighted_degrees(s: Snapshot) -> dict[int, float]:
    deg = {n: 0.0 for n in s.nodes}
    for u, v, w in s.edges:
        deg[u] += w
        deg[v] += w
    return deg


def cfg_for(kind, **kw) -> TransformConfig:
    defaults = dict(kind=kind, n_snapshots=20, start=5, end=15, tau=0.05, seed=9)
    defaults.update(kw)
    return TransformConfig(**defaults)


class TestConfig:
    def test_scenarios_partition_the_kinds(self):
        all_kinds = [k for kinds in SCENARIOS.values() for k in kinds]
        assert sorted(all_kinds) == sorted(TransformKind)
        assert scenario_of(TransformKind.SWITCH) == "noise"
        assert scenario_of(TransformKind.DEATH) == "morphing"
        assert scenario_of(TransformKind.REMOVAL) == "disruptive"

    def test_window_validation(self):
        with pytest.raises(ValueError):
            cfg_for("merge", start=10, end=5)
        with pytest.raises(ValueError):
            cfg_for("merge", start=0)
        with pytest.raises(ValueError):
            cfg_for("merge", end=25)

    def test_fraction_validation(self):
        with pytest.raises(ValueError):
            cfg_for("merge", tau=1.5)
        with pytest.raises(ValueError):
            cfg_for("removal", phi_rem=(0.5, 0.1))


class TestCommonInvariants:
    @pytest.mark.parametrize("kind", [k.value for k in TransformKind])
    def test_weights_in_unit_interval_and_gt_aligned(self, base_pair, kind):
        base, gt0 = base_pair
        dg = evolve(base, gt0, cfg_for(kind, targets=1))
        assert len(dg) == 21
        for s, p in zip(dg.snapshots, dg.ground_truth):
            assert all(0.0 < w <= 1.0 for _, _, w in s.edges)
            assert p.domain == s.nodes

    @pytest.mark.parametrize("kind", [k.value for k in TransformKind])
    def test_determinism(self, base_pair, kind):
        base, gt0 = base_pair
        cfg = cfg_for(kind, targets=1)
        assert evolve(base, gt0, cfg) == evolve(base, gt0, cfg)

    @pytest.mark.parametrize("kind", ["expansion", "intermittence", "switch"])
    def test_noise_preserves_ground_truth(self, base_pair, kind):
        base, gt0 = base_pair
        dg = evolve(base, gt0, cfg_for(kind))
        survivors_of_v0 = set(base.nodes)
        for s, p in zip(dg.snapshots, dg.ground_truth):
            active_v0 = survivors_of_v0 & s.nodes
            assert restrict(p, active_v0) == restrict(gt0, active_v0)

    def test_step_outside_window_is_copy(self, base_pair):
        base, gt0 = base_pair
        cfg = cfg_for("merge")
        state = plan("merge", base, gt0, cfg)
        out = step(state, 2, cfg)
        assert out.current.edges == base.edges
        assert out.current.t == 2


class TestPlan:
    def test_merge_targets(self, base_pair):
        base, gt0 = base_pair
        n0 = gt0.n_communities()
        state = plan("merge", base, gt0, cfg_for("merge", targets=2))
        assert state.gt_final.n_communities() == n0 - 2

    def test_split_targets(self, base_pair):
        base, gt0 = base_pair
        n0 = gt0.n_communities()
        state = plan("split", base, gt0, cfg_for("split", targets=1))
        assert state.gt_final.n_communities() == n0 + 1

    def test_death_maps_every_dead_node(self, base_pair):
        base, gt0 = base_pair
        state = plan("death", base, gt0, cfg_for("death", targets=1))
        gt_n = state.gt_final
        assert gt_n.n_communities() == gt0.n_communities() - 1
        dead = {n for n in base.nodes if gt0[n] not in gt_n.labels()}
        assert dead  # the dissolved community's members moved elsewhere
        for n in base.nodes:
            assert gt_n[n] in gt_n.labels()

    def test_too_few_communities_is_config_error(self, two_triangles):
        gt = Partition({n: n // 3 for n in range(6)})
        with pytest.raises(ValueError, match="communities"):
            plan("merge", two_triangles, gt, cfg_for("merge", targets=2))


class TestIntermittence:
    def test_counts_and_return(self, base_pair):
        base, gt0 = base_pair
        cfg = cfg_for("intermittence", phi_int=0.2)
        dg = evolve(base, gt0, cfg)
        n = base.n_nodes
        first = dg.snapshots[cfg.start]
        assert first.n_nodes == n - math.ceil(0.2 * n)
        removed_first = base.nodes - first.nodes
        # the whole first batch is active again at t+1
        assert removed_first <= dg.snapshots[cfg.start + 1].nodes

    def test_reinstated_edges_are_exact(self, base_pair):
        base, gt0 = base_pair
        cfg = cfg_for("intermittence", phi_int=0.2)
        dg = evolve(base, gt0, cfg)
        base_edges = {(u, v): w for u, v, w in base.edges}
        for s in dg.snapshots:
            for u, v, w in s.edges:
                assert base_edges[(u, v)] == w  # induced subgraph of the base

    def test_batches_do_not_repeat_immediately(self, base_pair):
        base, gt0 = base_pair
        cfg = cfg_for("intermittence", phi_int=0.2)
        dg = evolve(base, gt0, cfg)
        for t in range(cfg.start, cfg.end):
            off_t = base.nodes - dg.snapshots[t].nodes
            off_next = base.nodes - dg.snapshots[t + 1].nodes
            assert not (off_t & off_next)


class TestSwitch:
    def test_return_is_certain_at_gamma(self, base_pair):
        base, gt0 = base_pair
        # gamma=0 makes the return probability min(1, e^{t_off}) = 1 at t_off=1,
        # so every snapshot's off-set is exactly that snapshot's fresh batch
        cfg = cfg_for("switch", gamma=0, phi_swi=0.05)
        dg = evolve(base, gt0, cfg)
        n = base.n_nodes
        for t in range(cfg.start, cfg.end + 1):
            assert dg.snapshots[t].n_nodes == n - math.ceil(cfg.phi_swi * n)

    def test_nodes_stay_out_with_large_gamma(self, base_pair):
        base, gt0 = base_pair
        cfg = cfg_for("switch", gamma=50, phi_swi=0.05)
        dg = evolve(base, gt0, cfg)
        off_counts = [base.n_nodes - s.n_nodes for s in dg.snapshots[cfg.start: cfg.end + 1]]
        assert off_counts == sorted(off_counts)  # nobody returns before gamma


class TestMerge:
    def test_instantaneous_merge(self, base_pair):
        base, gt0 = base_pair
        cfg = cfg_for("merge", start=5, end=5, tau=1.0, targets=1)
        state = plan("merge", base, gt0, cfg)
        planned = list(state.engine.pairs[0]["planned"])
        after = step(state, 5, cfg)
        weights = {(u, v): w for u, v, w in after.current.edges}
        assert planned and all(weights[k] == 1.0 for k in planned)
        # the merged ground truth beats the original on the morphed graph
        assert modularity(after.current, state.gt_final) > modularity(after.current, gt0)

    def test_gradual_merge_schedule(self, base_pair):
        base, gt0 = base_pair
        cfg = cfg_for("merge", tau=0.05, targets=1)
        dg = evolve(base, gt0, cfg)
        assert cfg.start <= dg.meta["switchover_t"] <= cfg.end
        # tightening raises the merged pair's cross weight monotonically
        totals = [sum(w for _, _, w in s.edges) for s in dg.snapshots]
        assert all(b >= a - 1e-12 for a, b in zip(totals, totals[1:]))


class TestSplit:
    def test_crossing_weights_floor_and_delete(self, base_pair):
        base, gt0 = base_pair
        cfg = cfg_for("split", tau=0.2, targets=1)
        state = plan("split", base, gt0, cfg)
        crossing = set(state.engine.crossing)
        assert crossing
        dg = evolve(base, gt0, cfg)
        mid = {(u, v): w for u, v, w in dg.snapshots[cfg.start + 1].edges}
        for k in crossing:
            if k in mid:
                assert mid[k] >= EPS_W
        final = {(u, v) for u, v, _ in dg.snapshots[cfg.end].edges}
        assert not (crossing & final)  # floored edges deleted at the end snapshot

    def test_instantaneous_split_detectable(self, base_pair):
        base, gt0 = base_pair
        cfg = cfg_for("split", start=5, end=5, tau=1.0, targets=1)
        dg = evolve(base, gt0, cfg)
        assert modularity(dg.snapshots[5], dg.gt_final) > modularity(dg.snapshots[5], gt0)


class TestBirth:
    def test_new_communities_formed(self, base_pair):
        base, gt0 = base_pair
        cfg = cfg_for("birth", birth_fraction=0.2)
        dg = evolve(base, gt0, cfg)
        gt_n = dg.gt_final
        fresh = gt_n.labels() - gt0.labels()
        assert fresh
        sizes = Counter(gt_n.assignment.values())
        assert all(sizes[c] >= 2 for c in fresh)

    def test_min_two_emigrants_per_community(self, base_pair):
        base, gt0 = base_pair
        cfg = cfg_for("birth", birth_fraction=0.01)
        dg = evolve(base, gt0, cfg)
        emigrants = {n for n in base.nodes if dg.gt_final[n] != gt0[n]}
        per_comm = Counter(gt0[n] for n in emigrants)
        assert all(v >= 2 for v in per_comm.values())


class TestDeath:
    def test_dying_nodes_connect_to_destination(self, base_pair):
        base, gt0 = base_pair
        cfg = cfg_for("death", tau=0.2, targets=1)
        dg = evolve(base, gt0, cfg)
        gt_n = dg.gt_final
        dead = [n for n in base.nodes if gt0[n] not in gt_n.labels()]
        final = dg.snapshots[-1]
        adj = final.adjacency()
        connected = sum(
            1 for n in dead
            if any(gt_n[m] == gt_n[n] for m in adj[n])
        )
        assert connected >= 0.9 * len(dead)


class TestMixing:
    def test_weighted_degree_conserved_exactly(self, base_pair):
        base, gt0 = base_pair
        cfg = cfg_for("mixing", phi_mix=0.05)
        dg = evolve(base, gt0, cfg)
        before = weighted_degrees(base)
        for s in dg.snapshots:
            after = weighted_degrees(s)
            for n, k in after.items():
                assert k == pytest.approx(before[n], abs=1e-9)

    def test_structure_decays(self, base_pair):
        base, gt0 = base_pair
        cfg = cfg_for("mixing", phi_mix=0.3, n_snapshots=30, end=28)
        dg = evolve(base, gt0, cfg)
        assert modularity(dg.snapshots[-1], restrict(gt0, dg.snapshots[-1].nodes)) < \
            modularity(base, gt0) - 0.1


class TestRemoval:
    def test_monotone_decrease(self, base_pair):
        base, gt0 = base_pair
        cfg = cfg_for("removal", phi_rem=0.05)
        dg = evolve(base, gt0, cfg)
        counts = [s.n_nodes for s in dg.snapshots]
        assert counts[cfg.start - 1] == base.n_nodes
        for a, b in zip(counts[cfg.start - 1: cfg.end], counts[cfg.start: cfg.end + 1]):
            assert b < a
        assert dg.meta["phi_rem_drawn"] == 0.05

    def test_range_sampled_once(self, base_pair):
        base, gt0 = base_pair
        cfg = cfg_for("removal", phi_rem=(0.01, 0.05))
        dg = evolve(base, gt0, cfg)
        assert 0.01 <= dg.meta["phi_rem_drawn"] <= 0.05

    def test_exhaustion_error(self, two_triangles):
        gt = Partition({n: n // 3 for n in range(6)})
        cfg = TransformConfig(kind="removal", n_snapshots=30, start=1, end=30,
                              phi_rem=0.9, seed=0)
        with pytest.raises(EvolutionError, match="exhausted"):
            evolve(two_triangles, gt, cfg)


class TestMorphingGroundTruth:
    @pytest.mark.parametrize("kind", ["merge", "split", "birth", "death"])
    def test_gt_flips_at_switchover(self, base_pair, kind):
        base, gt0 = base_pair
        dg = evolve(base, gt0, cfg_for(kind, targets=1))
        sw = dg.meta["switchover_t"]
        assert dg.ground_truth[sw - 1] == gt0
        assert dg.ground_truth[sw] == dg.gt_final
        assert dg.ground_truth[-1] == dg.gt_final
