"""Louvain greedy modularity optimization with pluggable initialization.

The optimizer alternates (a) local moving — visiting nodes in a seeded
shuffled order and applying the best strictly-positive modularity gain —
and (b) aggregation of communities into super-nodes, until a level yields
no improvement.  Community labels are persistent: an output community
keeps the label of the init community its nodes coalesced into, which is
what lets warm-started detectors track communities across snapshots.

``LouvainState``/``move_gain`` are a direct, dictionary-based reference
implementation of the incremental gain used in tests as the from-scratch
oracle's counterpart; the optimizer itself runs on CSR arrays via numba
(see ``_louvain_impl``) and can export its accepted moves for replay.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._louvain_impl import local_move
from .graph import Partition, Snapshot
from .validation import check_partition_covers


@dataclass
class LevelTrace:
    """One aggregation level's graph, init and accepted moves (for replay)."""

    level: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    selfw: np.ndarray
    k: np.ndarray
    init_comm: np.ndarray
    moves: list[tuple[int, int, int, float]] = field(default_factory=list)


@dataclass
class LouvainStats:
    levels: int = 0
    sweeps: int = 0
    moves: int = 0
    q_init: float = 0.0
    q_final: float = 0.0
    gain_sum: float = 0.0
    min_gain: float = float("inf")
    q_drift: float = 0.0
    level_q: list[float] = field(default_factory=list)
    trace: list[LevelTrace] | None = None


def _array_modularity(
    indptr: np.ndarray,
    indices: np.ndarray,
    weights: np.ndarray,
    selfw: np.ndarray,
    k: np.ndarray,
    comm: np.ndarray,
    wtot: float,
) -> float:
    """Q from the CSR representation (self-loop weight counts once in w_in)."""
    n_comm = int(comm.max()) + 1 if comm.size else 0
    src = np.repeat(np.arange(comm.shape[0]), np.diff(indptr))
    same = comm[src] == comm[indices]
    w_in = np.bincount(comm[src[same]], weights=weights[same], minlength=n_comm) / 2.0
    w_in += np.bincount(comm, weights=selfw, minlength=n_comm)
    s_tot = np.bincount(comm, weights=k, minlength=n_comm)
    return float((w_in / wtot - (s_tot / (2.0 * wtot)) ** 2).sum())


def _aggregate(
    indptr: np.ndarray,
    indices: np.ndarray,
    weights: np.ndarray,
    selfw: np.ndarray,
    comm: np.ndarray,
    n_comm: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Collapse communities into super-nodes; intra weight becomes self-loop weight."""
    src = np.repeat(np.arange(comm.shape[0]), np.diff(indptr))
    cu = comm[src]
    cv = comm[indices]
    key = cu * n_comm + cv
    uniq, inverse = np.unique(key, return_inverse=True)
    wsum = np.bincount(inverse, weights=weights, minlength=uniq.shape[0])
    au = (uniq // n_comm).astype(np.int64)
    av = (uniq % n_comm).astype(np.int64)
    diag = au == av
    new_selfw = np.bincount(comm, weights=selfw, minlength=n_comm)
    new_selfw += np.bincount(au[diag], weights=wsum[diag] / 2.0, minlength=n_comm)
    au, av, wsum = au[~diag], av[~diag], wsum[~diag]
    new_indptr = np.zeros(n_comm + 1, dtype=np.int64)
    np.cumsum(np.bincount(au, minlength=n_comm), out=new_indptr[1:])
    # uniq keys are already sorted row-major, so av/wsum line up with indptr
    return new_indptr, av, wsum, new_selfw


def _seed_state(seed: int | None) -> np.ndarray:
    if seed is None:
        seed = int(np.random.default_rng().integers(1, 2**62))
    # splitmix64 finalizer spreads low-entropy seeds over the xorshift state
    mask = (1 << 64) - 1
    z = (int(seed) + 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    z = z ^ (z >> 31)
    if z == 0:
        z = 0x9E3779B97F4A7C15
    return np.array([z], dtype=np.uint64)


def louvain(
    s: Snapshot,
    init: Partition | None = None,
    seed: int | None = None,
    collect_trace: bool = False,
) -> tuple[Partition, LouvainStats]:
    """Greedy modularity optimization starting from ``init``.

    ``init=None`` means singleton initialization (every node its own
    community).  Returns the flattened node-level partition (modularity >=
    the init's) and run statistics; every accepted move has strictly
    positive gain.
    """
    if init is not None:
        check_partition_covers(init, s)
    stats = LouvainStats(trace=[] if collect_trace else None)
    if not s.nodes:
        return Partition({}), stats
    csr = s.csr
    nodes, indptr, indices = csr.nodes, csr.indptr, csr.indices
    weights, k = csr.weights, csr.k.copy()
    n = nodes.shape[0]
    wtot = float(weights.sum()) / 2.0
    if wtot <= 0.0:
        out = dict(init.assignment) if init is not None else {int(v): int(v) for v in nodes}
        return Partition(out), stats

    if init is None:
        pid = nodes.copy()
        comm = np.arange(n, dtype=np.int64)
    else:
        labels = np.fromiter((init.assignment[int(v)] for v in nodes), dtype=np.int64, count=n)
        pid, comm = np.unique(labels, return_inverse=True)
        comm = comm.astype(np.int64)
    selfw = np.zeros(n)
    stats.q_init = _array_modularity(indptr, indices, weights, selfw, k, comm, wtot)

    rng_state = _seed_state(seed)
    flat = None  # original node -> community index at current level

    trace_cap = 64 * n + 64
    while True:
        stats.levels += 1
        sigma_tot = np.bincount(comm, weights=k, minlength=pid.shape[0])
        t_node = np.empty(trace_cap if collect_trace else 1, dtype=np.int64)
        t_from = np.empty_like(t_node)
        t_to = np.empty_like(t_node)
        t_gain = np.empty(t_node.shape[0], dtype=np.float64)
        init_comm_copy = comm.copy() if collect_trace else None

        sweeps, moves, gain_sum, min_gain, t_len, overflow = local_move(
            indptr, indices, weights, k, comm, sigma_tot, wtot, rng_state,
            t_node, t_from, t_to, t_gain, collect_trace,
        )
        stats.sweeps += sweeps
        stats.moves += moves
        stats.gain_sum += gain_sum
        stats.min_gain = min(stats.min_gain, min_gain)
        if collect_trace:
            if overflow:
                raise RuntimeError("louvain move trace overflow; use a smaller graph")
            stats.trace.append(
                LevelTrace(
                    level=stats.levels - 1,
                    indptr=indptr.copy(), indices=indices.copy(),
                    weights=weights.copy(), selfw=selfw.copy(), k=k.copy(),
                    init_comm=init_comm_copy,
                    moves=[(int(t_node[i]), int(t_from[i]), int(t_to[i]), float(t_gain[i])) for i in range(t_len)],
                )
            )

        survivors, comm = np.unique(comm, return_inverse=True)
        comm = comm.astype(np.int64)
        pid = pid[survivors]
        flat = comm.copy() if flat is None else comm[flat]
        if collect_trace:
            stats.level_q.append(
                _array_modularity(indptr, indices, weights, selfw, k, comm, wtot)
            )
        if moves == 0:
            break
        n_comm = pid.shape[0]
        if n_comm == comm.shape[0]:
            break
        indptr, indices, weights, selfw = _aggregate(indptr, indices, weights, selfw, comm, n_comm)
        k = np.bincount(
            np.repeat(np.arange(n_comm), np.diff(indptr)), weights=weights, minlength=n_comm
        ) + 2.0 * selfw
        comm = np.arange(n_comm, dtype=np.int64)

    stats.q_final = (
        stats.level_q[-1]
        if collect_trace
        else _array_modularity(indptr, indices, weights, selfw, k, comm, wtot)
    )
    stats.q_drift = abs(stats.q_final - (stats.q_init + stats.gain_sum))
    out = {int(node): int(pid[flat[i]]) for i, node in enumerate(nodes)}
    return Partition(out), stats


# ---------------------------------------------------------------------------
# reference incremental-gain implementation


class LouvainState:
    """Dictionary-based move bookkeeping over one snapshot.

    Tracks per-community Sigma_tot (summed weighted degree) and Sigma_in
    (twice the intra weight) so single-node move gains can be evaluated
    incrementally and checked against from-scratch modularity.
    """

    def __init__(self, s: Snapshot, p: Partition):
        check_partition_covers(p, s)
        self.adj = s.adjacency()
        self.wtot = sum(w for _, _, w in s.edges)
        self.k = {n: sum(nbrs.values()) for n, nbrs in self.adj.items()}
        self.comm = dict(p.assignment)
        self.sigma_tot: dict[int, float] = {}
        self.sigma_in: dict[int, float] = {}
        for n, c in self.comm.items():
            self.sigma_tot[c] = self.sigma_tot.get(c, 0.0) + self.k[n]
            self.sigma_in.setdefault(c, 0.0)
        for u, v, w in s.edges:
            if self.comm[u] == self.comm[v]:
                self.sigma_in[self.comm[u]] += 2.0 * w

    def weight_to(self, i: int, c: int) -> float:
        """Total edge weight from ``i`` into community ``c`` (excluding ``i``)."""
        return sum(w for j, w in self.adj[i].items() if self.comm[j] == c)

    def neighbor_communities(self, i: int) -> set[int]:
        return {self.comm[j] for j in self.adj[i]}

    def move_gain(self, i: int, target: int) -> float:
        """Modularity change of moving ``i`` from its community to ``target``."""
        ci = self.comm[i]
        if target == ci:
            return 0.0
        if target not in self.sigma_tot:
            raise ValueError(f"community {target} not present")
        ki = self.k[i]
        if self.wtot <= 0.0:
            return 0.0
        k_home = self.weight_to(i, ci)
        k_target = self.weight_to(i, target)
        sig_home = self.sigma_tot[ci] - ki
        sig_target = self.sigma_tot[target]
        return (k_target - k_home) / self.wtot - ki * (sig_target - sig_home) / (
            2.0 * self.wtot**2
        )

    def apply_move(self, i: int, target: int) -> None:
        ci = self.comm[i]
        if target == ci:
            return
        ki = self.k[i]
        self.sigma_tot[ci] -= ki
        self.sigma_in[ci] -= 2.0 * self.weight_to(i, ci)
        self.comm[i] = target
        self.sigma_tot[target] += ki
        self.sigma_in[target] += 2.0 * self.weight_to(i, target)

    def partition(self) -> Partition:
        return Partition(dict(self.comm))


def move_gain(state: LouvainState, i: int, target: int) -> float:
    return state.move_gain(i, target)
