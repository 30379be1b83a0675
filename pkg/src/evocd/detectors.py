"""The four detection algorithms: GMA, alpha-GMA, sGMA and NeGMA.

Each detector is an sklearn-style estimator (``get_params``/``set_params``
compatible) processing a dynamic graph snapshot by snapshot via ``step``;
``fit`` drives a whole sequence and records partitions, per-snapshot wall
times and optimizer statistics.  All of them share the Louvain core and
differ only in what they feed it:

* GMA        — singleton init, no cross-snapshot state
* alpha-GMA  — GMA on a memory-smoothed graph (edge weights blended with
               their previous values through a memory term alpha)
* sGMA       — warm start from the previous snapshot's communities
* NeGMA      — warm start, neighbor majority voting for new nodes, and a
               local-modularity gate that dissolves degraded communities
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .graph import DynamicGraph, Partition, Snapshot, _community_weights, total_weight
from .louvain import LouvainStats, louvain
from .validation import check_fraction, derive_seed

ALGORITHMS = ("gma", "alpha_gma", "sgma", "negma")


@dataclass
class AlgoConfig:
    """Declarative algorithm selection used by the harness and CLI."""

    algorithm: str = "gma"
    alpha: float = 0.8
    theta_q: float = 0.0
    seed: int | None = None
    alpha_evict: bool = True
    alpha_fresh_edge_full: bool = False

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; pick one of {ALGORITHMS}")


def _step_seed(seed: int | None, t: int) -> int:
    # Advancing per-snapshot randomness (like successive calls into one RNG
    # stream), shared across algorithms so alpha=0 alpha-GMA is *identical*
    # to GMA and warm-started detectors match GMA at t=0.
    return derive_seed("louvain", seed, t)


# ---------------------------------------------------------------------------
# alpha-GMA memory store


class MemoryGraph:
    """Persistent edge-weight store carrying smoothed weights across snapshots."""

    def __init__(self, evict: bool = True, evict_threshold: float = 1e-4):
        self.evict = evict
        self.evict_threshold = evict_threshold
        self.store: dict[tuple[int, int], float] = {}
        self._primed = False

    def __len__(self) -> int:
        return len(self.store)

    def update(self, s_hat: Snapshot, alpha: float, fresh_edge_full: bool = False) -> Snapshot:
        """Blend the observed snapshot into memory and return the smoothed graph.

        Blended weight is (1-alpha) * observed + alpha * remembered, with the
        remembered weight taken as 0 for never-seen edges (so fresh edges enter
        damped) and the observed weight taken as 0 for remembered edges absent
        from the snapshot.  ``fresh_edge_full=True`` restores the variant where
        never-seen edges enter at their full observed weight.
        """
        check_fraction("alpha", alpha)
        if alpha >= 1.0:
            raise ValueError("alpha must lie in [0, 1)")
        current = {(u, v): w for u, v, w in s_hat.edges}
        if not self._primed:
            self.store = dict(current)
            self._primed = True
            return s_hat
        out: dict[tuple[int, int], float] = {}
        for key, w_hat in current.items():
            if key in self.store:
                out[key] = (1.0 - alpha) * w_hat + alpha * self.store[key]
            else:
                out[key] = w_hat if fresh_edge_full else (1.0 - alpha) * w_hat
        for key, w_prev in self.store.items():
            if key in current:
                continue
            w = alpha * w_prev
            if self.evict and w < self.evict_threshold:
                continue
            if w > 0.0:
                out[key] = w
        self.store = out
        nodes = set(s_hat.nodes)
        for u, v in out:
            nodes.add(u)
            nodes.add(v)
        return Snapshot.build(s_hat.t, nodes, [(u, v, w) for (u, v), w in out.items()])


def memory_update(mem: MemoryGraph, s_hat: Snapshot, alpha: float) -> Snapshot:
    return mem.update(s_hat, alpha)


# ---------------------------------------------------------------------------
# NeGMA initialization


def _fresh_label_start(s: Snapshot, used: set[int]) -> int:
    top = max(used) if used else -1
    if s.nodes:
        top = max(top, max(s.nodes))
    return top + 1


def negma_init(
    s: Snapshot,
    s_prev: Snapshot,
    prev: Partition,
    theta_q: float = 0.0,
    seed: int | None = None,
    prev_qc: dict[int, float] | None = None,
) -> Partition:
    """Carry-over + neighbor majority voting + local-modularity unbind gate.

    Surviving nodes keep their previous community; new nodes take the
    weighted-majority community of their already-labeled neighbors (processed
    in seeded-shuffled order, seeing same-pass assignments; ties break toward
    the highest total edge weight, then the smallest community id); then any
    community present in both snapshots whose local modularity dropped below
    ``theta_q`` is dissolved into singletons.
    """
    assigned = {n: prev.assignment[n] for n in s.nodes if n in prev.assignment}
    new_nodes = sorted(n for n in s.nodes if n not in prev.assignment)
    rng = np.random.default_rng(seed)
    rng.shuffle(new_nodes)

    adj = s.adjacency()
    used = set(prev.assignment.values())
    next_label = _fresh_label_start(s, used)
    for i in new_nodes:
        votes: dict[int, float] = {}
        for j, w in adj[i].items():
            c = assigned.get(j)
            if c is not None:
                votes[c] = votes.get(c, 0.0) + w
        if votes:
            best = max(votes.items(), key=lambda kv: (kv[1], -kv[0]))[0]
            assigned[i] = best
        else:
            assigned[i] = next_label
            next_label += 1

    init = Partition(assigned)
    shared = prev.labels() & init.labels()
    if shared and total_weight(s) > 0.0 and total_weight(s_prev) > 0.0:
        if prev_qc is None:
            prev_qc = community_qc(s_prev, prev)
        cur_qc = community_qc(s, init)
        dissolved = {c for c in shared if cur_qc[c] - prev_qc[c] < theta_q}
        if dissolved:
            final = dict(assigned)
            for n in sorted(n for n, c in assigned.items() if c in dissolved):
                final[n] = next_label
                next_label += 1
            init = Partition(final)
    return init


def community_qc(s: Snapshot, p: Partition) -> dict[int, float]:
    """Q_c for every community of ``p`` in one pass over the edges."""
    w_in, w_deg, wstar = _community_weights(s, p)
    if wstar <= 0.0:
        raise ValueError("community modularity undefined for an edgeless snapshot")
    return {c: w_in[c] / wstar - (w_deg[c] / (2.0 * wstar)) ** 2 for c in w_in}


# ---------------------------------------------------------------------------
# estimators


class BaseDetector(BaseEstimator):
    """Shared sequence-driving machinery; subclasses implement ``_step``."""

    algorithm = "base"

    def __init__(self, seed: int | None = None):
        self.seed = seed

    def reset(self) -> None:
        self._resolved_seed = (
            self.seed
            if self.seed is not None
            else int(np.random.default_rng().integers(2**32))
        )

    def _step(self, s: Snapshot, seed_t: int) -> tuple[Partition, LouvainStats]:
        raise NotImplementedError

    def step(self, s: Snapshot) -> Partition:
        """Detect communities on the next snapshot, advancing internal state."""
        if not hasattr(self, "_resolved_seed"):
            self.reset()
        part, _ = self._step(s, _step_seed(self._resolved_seed, s.t))
        return part

    def fit(self, graph: DynamicGraph | Sequence[Snapshot]):
        """Run over the whole snapshot sequence; stores per-snapshot outputs."""
        snapshots = graph.snapshots if isinstance(graph, DynamicGraph) else tuple(graph)
        self.reset()
        partitions: list[Partition] = []
        stats: list[LouvainStats] = []
        wall: list[float] = []
        for s in snapshots:
            t0 = time.perf_counter()
            part, st = self._step(s, _step_seed(self._resolved_seed, s.t))
            wall.append(time.perf_counter() - t0)
            partitions.append(part)
            stats.append(st)
        self.partitions_ = partitions
        self.series_ = [(s.t, p) for s, p in zip(snapshots, partitions)]
        self.stats_ = stats
        self.wall_times_ = wall
        return self

    def fit_predict(self, graph) -> list[Partition]:
        return self.fit(graph).partitions_


class GMA(BaseDetector):
    """Independent Louvain per snapshot (the baseline)."""

    algorithm = "gma"

    def _step(self, s, seed_t):
        return louvain(s, None, seed_t)


class AlphaGMA(BaseDetector):
    """GMA on a memory-smoothed graph; alpha weighs the past."""

    algorithm = "alpha_gma"

    def __init__(
        self,
        alpha: float = 0.8,
        seed: int | None = None,
        evict: bool = True,
        evict_threshold: float = 1e-4,
        fresh_edge_full: bool = False,
    ):
        super().__init__(seed=seed)
        self.alpha = alpha
        self.evict = evict
        self.evict_threshold = evict_threshold
        self.fresh_edge_full = fresh_edge_full

    def reset(self) -> None:
        super().reset()
        self.memory_ = MemoryGraph(evict=self.evict, evict_threshold=self.evict_threshold)

    def _step(self, s, seed_t):
        smoothed = self.memory_.update(s, self.alpha, fresh_edge_full=self.fresh_edge_full)
        return louvain(smoothed, None, seed_t)


def sgma_init(s: Snapshot, prev: Partition | None) -> Partition:
    """Carried-over labels for surviving nodes, fresh singletons for new ones."""
    if prev is None:
        return Partition.singletons(s.nodes)
    carried = {n: prev.assignment[n] for n in s.nodes if n in prev.assignment}
    next_label = _fresh_label_start(s, set(prev.assignment.values()))
    for n in sorted(s.nodes - prev.domain):
        carried[n] = next_label
        next_label += 1
    return Partition(carried)


class SGMA(BaseDetector):
    """Louvain warm-started from the previous snapshot's communities."""

    algorithm = "sgma"

    def reset(self) -> None:
        super().reset()
        self.prev_: Partition | None = None

    def _step(self, s, seed_t):
        init = sgma_init(s, self.prev_) if self.prev_ is not None else None
        part, st = louvain(s, init, seed_t)
        self.prev_ = part
        return part, st


class NeGMA(BaseDetector):
    """Warm start + neighborhood voting + local-modularity unbind gate."""

    algorithm = "negma"

    def __init__(self, theta_q: float = 0.0, seed: int | None = None):
        super().__init__(seed=seed)
        self.theta_q = theta_q

    def reset(self) -> None:
        super().reset()
        self.prev_: Partition | None = None
        self.prev_snapshot_: Snapshot | None = None
        self._prev_qc: dict[int, float] | None = None

    def _step(self, s, seed_t):
        if self.prev_ is None:
            init = None
        else:
            init = negma_init(
                s, self.prev_snapshot_, self.prev_, self.theta_q,
                seed=derive_seed("negma-init", self._resolved_seed, s.t),
                prev_qc=self._prev_qc,
            )
        part, st = louvain(s, init, seed_t)
        self.prev_ = part
        self.prev_snapshot_ = s
        self._prev_qc = community_qc(s, part) if total_weight(s) > 0.0 else None
        return part, st


def make_detector(cfg: AlgoConfig) -> BaseDetector:
    if cfg.algorithm == "gma":
        return GMA(seed=cfg.seed)
    if cfg.algorithm == "alpha_gma":
        return AlphaGMA(
            alpha=cfg.alpha, seed=cfg.seed, evict=cfg.alpha_evict,
            fresh_edge_full=cfg.alpha_fresh_edge_full,
        )
    if cfg.algorithm == "sgma":
        return SGMA(seed=cfg.seed)
    return NeGMA(theta_q=cfg.theta_q, seed=cfg.seed)


# ---------------------------------------------------------------------------
# functional entry points


def run_gma(s: Snapshot, cfg: AlgoConfig) -> Partition:
    """Louvain with singleton initialization; no cross-snapshot state."""
    part, _ = louvain(s, None, _step_seed(cfg.seed, s.t))
    return part


def run_alpha_gma(mem: MemoryGraph, s_hat: Snapshot, cfg: AlgoConfig) -> tuple[MemoryGraph, Partition]:
    smoothed = mem.update(s_hat, cfg.alpha, fresh_edge_full=cfg.alpha_fresh_edge_full)
    part, _ = louvain(smoothed, Partition.singletons(smoothed.nodes), _step_seed(cfg.seed, s_hat.t))
    return mem, part


def run_sgma(s: Snapshot, prev: Partition | None, cfg: AlgoConfig) -> Partition:
    init = sgma_init(s, prev) if prev is not None else None
    part, _ = louvain(s, init, _step_seed(cfg.seed, s.t))
    return part


def run_negma(
    s: Snapshot, s_prev: Snapshot | None, prev: Partition | None, cfg: AlgoConfig
) -> Partition:
    if prev is None or s_prev is None:
        return run_gma(s, cfg)
    init = negma_init(
        s, s_prev, prev, cfg.theta_q, seed=derive_seed("negma-init", cfg.seed, s.t)
    )
    part, _ = louvain(s, init, _step_seed(cfg.seed, s.t))
    return part
