"""Immutable snapshot/partition data model and modularity arithmetic.

A dynamic graph is an ordered sequence of undirected weighted snapshots
G^t = (V^t, E^t) with edge weights in (0, 1].  Partition quality is the
weighted modularity

    Q = sum_c Q_c,   Q_c = w_in_c / w* - (w_c / (2 w*))^2

where w* is the total edge weight, w_in_c the intra-community weight
(each edge counted once) and w_c the summed weighted degree of the
community's members.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

Edge = tuple[int, int, float]

#: weights may exceed 1.0 by at most this much before construction fails
#: (guards against float noise from repeated blending/clipping)
_W_SLACK = 1e-9


@dataclass
class SnapshotCSR:
    """Array view of a snapshot: sorted node ids and compressed adjacency."""

    nodes: np.ndarray    # node ids, sorted
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    k: np.ndarray        # weighted degrees aligned with ``nodes``


def canonical_edge(u: int, v: int, w: float) -> Edge:
    """Order endpoints so each undirected edge has one representation."""
    if u == v:
        raise ValueError(f"self-loop on node {u}")
    if not 0.0 < w <= 1.0 + _W_SLACK:
        raise ValueError(f"edge weight {w!r} outside (0, 1]")
    w = min(float(w), 1.0)
    return (u, v, w) if u < v else (v, u, w)


@dataclass(frozen=True)
class Snapshot:
    """One undirected weighted graph at snapshot index ``t``.

    Instances are immutable after construction; transformations always
    build new snapshots.  Edges are stored once, canonically ordered
    (min id, max id) and sorted, so equal graphs compare and serialize
    identically.
    """

    t: int
    nodes: frozenset[int]
    edges: tuple[Edge, ...]

    @classmethod
    def build(cls, t: int, nodes: Iterable[int], edges: Iterable[tuple[int, int, float]]) -> "Snapshot":
        node_set = frozenset(int(n) for n in nodes)
        seen: dict[tuple[int, int], float] = {}
        for u, v, w in edges:
            e = canonical_edge(int(u), int(v), w)
            key = (e[0], e[1])
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen[key] = e[2]
        for u, v in seen:
            if u not in node_set or v not in node_set:
                raise ValueError(f"edge ({u}, {v}) has endpoint outside the node set")
        ordered = tuple((u, v, seen[(u, v)]) for u, v in sorted(seen))
        return cls(t=int(t), nodes=node_set, edges=ordered)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def _degrees(self) -> dict[int, float]:
        deg = {n: 0.0 for n in self.nodes}
        for u, v, w in self.edges:
            deg[u] += w
            deg[v] += w
        return deg

    @cached_property
    def csr(self) -> SnapshotCSR:
        """Compressed adjacency over sorted nodes (cached; the graph is immutable)."""
        node_arr = np.fromiter(sorted(self.nodes), dtype=np.int64, count=len(self.nodes))
        n = node_arr.shape[0]
        m = len(self.edges)
        if m == 0:
            return SnapshotCSR(
                nodes=node_arr,
                indptr=np.zeros(n + 1, dtype=np.int64),
                indices=np.empty(0, dtype=np.int64),
                weights=np.empty(0, dtype=np.float64),
                k=np.zeros(n),
            )
        raw = np.asarray(self.edges, dtype=np.float64)
        iu = np.searchsorted(node_arr, raw[:, 0].astype(np.int64))
        iv = np.searchsorted(node_arr, raw[:, 1].astype(np.int64))
        w = raw[:, 2]
        src = np.concatenate([iu, iv])
        dst = np.concatenate([iv, iu])
        wgt = np.concatenate([w, w])
        k = np.bincount(src, weights=wgt, minlength=n)
        order = np.argsort(src, kind="stable")
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return SnapshotCSR(
            nodes=node_arr, indptr=indptr, indices=dst[order], weights=wgt[order], k=k
        )

    def adjacency(self) -> dict[int, dict[int, float]]:
        """Adjacency view {node: {neighbor: weight}} including isolated nodes."""
        adj: dict[int, dict[int, float]] = {n: {} for n in self.nodes}
        for u, v, w in self.edges:
            adj[u][v] = w
            adj[v][u] = w
        return adj

    def with_t(self, t: int) -> "Snapshot":
        """Same graph re-indexed at a different snapshot position."""
        return Snapshot(t=t, nodes=self.nodes, edges=self.edges)


@dataclass(frozen=True)
class Partition:
    """Non-overlapping assignment of nodes to integer community ids."""

    assignment: dict[int, int]

    @classmethod
    def build(cls, assignment: Mapping[int, int]) -> "Partition":
        return cls({int(n): int(c) for n, c in assignment.items()})

    @classmethod
    def singletons(cls, nodes: Iterable[int]) -> "Partition":
        return cls({int(n): int(n) for n in nodes})

    def __getitem__(self, node: int) -> int:
        return self.assignment[node]

    def __len__(self) -> int:
        return len(self.assignment)

    @property
    def domain(self) -> frozenset[int]:
        return frozenset(self.assignment)

    @cached_property
    def _domain_arr(self) -> np.ndarray:
        return np.fromiter(sorted(self.assignment), dtype=np.int64, count=len(self.assignment))

    @cached_property
    def _label_arr(self) -> np.ndarray:
        dom = self._domain_arr
        return np.fromiter((self.assignment[int(v)] for v in dom), dtype=np.int64, count=dom.shape[0])

    def labels(self) -> frozenset[int]:
        return frozenset(self.assignment.values())

    def communities(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for n, c in self.assignment.items():
            out.setdefault(c, []).append(n)
        return out

    def n_communities(self) -> int:
        return len(set(self.assignment.values()))

    def relabel(self, mapping: Mapping[int, int]) -> "Partition":
        return Partition({n: mapping.get(c, c) for n, c in self.assignment.items()})


@dataclass(frozen=True)
class DynamicGraph:
    """Ordered snapshot sequence plus optional aligned ground-truth partitions."""

    snapshots: tuple[Snapshot, ...]
    ground_truth: tuple[Partition, ...] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for i, s in enumerate(self.snapshots):
            if s.t != i:
                raise ValueError(f"snapshot at position {i} has index t={s.t}")
        if self.ground_truth is not None:
            if len(self.ground_truth) != len(self.snapshots):
                raise ValueError("ground_truth length does not match snapshots")
            for s, p in zip(self.snapshots, self.ground_truth):
                if p.domain != s.nodes:
                    raise ValueError(f"ground truth at t={s.t} does not cover the snapshot's nodes")

    def __len__(self) -> int:
        return len(self.snapshots)

    @property
    def gt0(self) -> Partition:
        if self.ground_truth is None:
            raise ValueError("dynamic graph carries no ground truth")
        return self.ground_truth[0]

    @property
    def gt_final(self) -> Partition:
        if self.ground_truth is None:
            raise ValueError("dynamic graph carries no ground truth")
        return self.ground_truth[-1]


# ---------------------------------------------------------------------------
# modularity arithmetic


def total_weight(s: Snapshot) -> float:
    """Sum of all edge weights w*; 0 for an edgeless snapshot."""
    return sum(w for _, _, w in s.edges)


def weighted_degree(s: Snapshot, n: int) -> float:
    """Sum of weights of edges incident to ``n``."""
    if n not in s.nodes:
        raise ValueError(f"node {n} not in snapshot {s.t}")
    return s._degrees[n]


def _community_weights(s: Snapshot, p: Partition) -> tuple[dict[int, float], dict[int, float], float]:
    """Per-community (w_in, w_deg) and the graph total w*."""
    w_in: dict[int, float] = {}
    w_deg: dict[int, float] = {}
    for c in set(p.assignment.values()):
        w_in[c] = 0.0
        w_deg[c] = 0.0
    wstar = 0.0
    assign = p.assignment
    for u, v, w in s.edges:
        wstar += w
        cu, cv = assign[u], assign[v]
        w_deg[cu] += w
        w_deg[cv] += w
        if cu == cv:
            w_in[cu] += w
    return w_in, w_deg, wstar


def community_modularity(s: Snapshot, p: Partition, c: int) -> float:
    """Q_c = w_in_c / w* - (w_c / (2 w*))^2 for one community."""
    if c not in p.labels():
        raise ValueError(f"community {c} not present in partition")
    wstar = total_weight(s)
    if wstar <= 0.0:
        raise ValueError("modularity undefined for an edgeless snapshot (w* = 0)")
    members = {n for n, cc in p.assignment.items() if cc == c}
    w_in = 0.0
    w_deg = 0.0
    for u, v, w in s.edges:
        in_u = u in members
        in_v = v in members
        if in_u and in_v:
            w_in += w
        if in_u:
            w_deg += w
        if in_v:
            w_deg += w
    return w_in / wstar - (w_deg / (2.0 * wstar)) ** 2


def modularity(s: Snapshot, p: Partition) -> float:
    """Graph modularity Q = sum over communities of Q_c."""
    if p.domain != s.nodes:
        raise ValueError("partition does not cover the snapshot's node set")
    w_in, w_deg, wstar = _community_weights(s, p)
    if wstar <= 0.0:
        raise ValueError("modularity undefined for an edgeless snapshot (w* = 0)")
    q = 0.0
    for c in w_in:
        q += w_in[c] / wstar - (w_deg[c] / (2.0 * wstar)) ** 2
    return q


def restrict(p: Partition, nodes: Iterable[int]) -> Partition:
    """Partition restricted to ``nodes``; empty communities drop out."""
    keep = set(nodes)
    return Partition({n: c for n, c in p.assignment.items() if n in keep})


# ---------------------------------------------------------------------------
# JSON serialization
#
# Schema: {"snapshots": [{"t": int, "nodes": [int], "edges": [[u, v, w]]}],
#          "ground_truth": [{"t": int, "assignment": {"node": community}}],
#          "meta": {...}}  (ground_truth and meta optional)


def to_json_dict(g: DynamicGraph) -> dict:
    doc: dict = {
        "snapshots": [
            {"t": s.t, "nodes": sorted(s.nodes), "edges": [[u, v, w] for u, v, w in s.edges]}
            for s in g.snapshots
        ]
    }
    if g.ground_truth is not None:
        doc["ground_truth"] = [
            {"t": s.t, "assignment": {str(n): c for n, c in sorted(p.assignment.items())}}
            for s, p in zip(g.snapshots, g.ground_truth)
        ]
    if g.meta:
        doc["meta"] = g.meta
    return doc


def from_json_dict(doc: Mapping) -> DynamicGraph:
    snapshots = tuple(
        Snapshot.build(rec["t"], rec["nodes"], [(u, v, w) for u, v, w in rec["edges"]])
        for rec in doc["snapshots"]
    )
    gt = None
    if "ground_truth" in doc and doc["ground_truth"] is not None:
        gt = tuple(
            Partition.build({int(n): int(c) for n, c in rec["assignment"].items()})
            for rec in doc["ground_truth"]
        )
    return DynamicGraph(snapshots=snapshots, ground_truth=gt, meta=dict(doc.get("meta", {})))


def save_json(g: DynamicGraph, path) -> None:
    with open(path, "w") as fh:
        # default float repr keeps >= 9 significant digits
        json.dump(to_json_dict(g), fh)


def load_json(path) -> DynamicGraph:
    with open(path) as fh:
        return from_json_dict(json.load(fh))
