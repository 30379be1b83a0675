"""LFR-style weighted benchmark graphs with planted community structure.

Degrees and community sizes follow truncated power laws; each node places
round((1-mu) * degree) stubs inside its community and the rest across
communities, matched configuration-model style with conflict repair.
Edge weights are uniform on (0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Partition, Snapshot
from .validation import GenerationError, check_fraction


@dataclass(frozen=True)
class LfrParams:
    n: int = 500
    mu: float = 0.2
    deg_exponent: float = 2.5
    comm_exponent: float = 1.5
    avg_degree: float = 10.0
    max_degree: int = 50
    min_comm: int = 10
    max_comm: int = 60
    seed: int | None = None

    def __post_init__(self) -> None:
        check_fraction("mu", self.mu, closed_low=False)
        if not 0.0 < self.mu < 1.0:
            raise ValueError(f"mu must lie in (0, 1), got {self.mu}")
        if self.deg_exponent <= 1.0 or self.comm_exponent <= 1.0:
            raise ValueError("power-law exponents must be > 1")
        if self.n < 2 * self.min_comm:
            raise ValueError(
                f"n={self.n} cannot host two communities of min_comm={self.min_comm}"
            )
        floor_internal = max(3, int(self.avg_degree * (1.0 - self.mu)))
        if self.min_comm < floor_internal:
            raise ValueError(
                f"min_comm={self.min_comm} below {floor_internal}; "
                "nodes could not place their internal stubs"
            )
        if self.max_comm > self.n:
            raise ValueError("max_comm exceeds n")
        if self.min_comm > self.max_comm:
            raise ValueError("min_comm exceeds max_comm")
        if not 1 <= self.avg_degree < self.max_degree:
            raise ValueError("need 1 <= avg_degree < max_degree")


# ---------------------------------------------------------------------------
# truncated power-law sampling


def _truncated_powerlaw_mean(xmin: float, xmax: float, exponent: float) -> float:
    # mean of density ~ x^(-exponent) on [xmin, xmax]
    def integral(power: float) -> float:
        if abs(power + 1.0) < 1e-12:
            return math.log(xmax / xmin)
        return (xmax ** (power + 1.0) - xmin ** (power + 1.0)) / (power + 1.0)

    return integral(1.0 - exponent) / integral(-exponent)


def _solve_xmin(target_mean: float, xmax: float, exponent: float) -> float:
    lo, hi = 1.0, float(xmax)
    if _truncated_powerlaw_mean(lo, xmax, exponent) >= target_mean:
        return lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _truncated_powerlaw_mean(mid, xmax, exponent) < target_mean:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _sample_powerlaw(rng: np.random.Generator, size: int, xmin: float, xmax: float, exponent: float) -> np.ndarray:
    u = rng.random(size)
    p = 1.0 - exponent
    return (xmin ** p + u * (xmax ** p - xmin ** p)) ** (1.0 / p)


def _sample_degrees(rng: np.random.Generator, params: LfrParams) -> np.ndarray:
    xmin = _solve_xmin(params.avg_degree, params.max_degree, params.deg_exponent)
    raw = _sample_powerlaw(rng, params.n, xmin, params.max_degree, params.deg_exponent)
    return np.clip(np.rint(raw).astype(int), 1, params.max_degree)


def _sample_community_sizes(rng: np.random.Generator, params: LfrParams) -> list[int]:
    sizes: list[int] = []
    total = 0
    while total < params.n:
        remaining = params.n - total
        if remaining < params.min_comm:
            # fold the remainder into existing communities with spare capacity
            for _ in range(remaining):
                open_idx = [i for i, s in enumerate(sizes) if s < params.max_comm]
                if not open_idx:
                    raise GenerationError(
                        "community sizes cannot absorb the remaining nodes "
                        f"(remainder {remaining} below min_comm={params.min_comm})"
                    )
                sizes[int(rng.choice(open_idx))] += 1
            total = params.n
            break
        s = int(round(_sample_powerlaw(rng, 1, params.min_comm, params.max_comm, params.comm_exponent)[0]))
        s = min(max(s, params.min_comm), params.max_comm, remaining)
        if 0 < remaining - s < params.min_comm:
            s = remaining if remaining <= params.max_comm else remaining - params.min_comm
        sizes.append(s)
        total += s
    return sizes


# ---------------------------------------------------------------------------
# stub matching


def _pair_stubs(
    rng: np.random.Generator,
    stubs: list[int],
    taken: set[tuple[int, int]],
    same_comm_forbidden: dict[int, int] | None,
    label: str,
    max_passes: int = 400,
) -> list[tuple[int, int]]:
    """Pair a stub multiset into edges, repairing conflicts by pair swaps.

    A pair is invalid if it is a self-loop, duplicates an edge in ``taken``
    or in the current pairing, or (when ``same_comm_forbidden`` maps nodes to
    communities) stays inside one community.
    """
    if len(stubs) % 2 != 0:
        raise GenerationError(f"odd number of {label} stubs")
    stubs = list(stubs)
    rng.shuffle(stubs)
    pairs = [(stubs[i], stubs[i + 1]) for i in range(0, len(stubs), 2)]

    def key(a: int, b: int) -> tuple[int, int]:
        return (a, b) if a < b else (b, a)

    def invalid(a: int, b: int, counts: dict[tuple[int, int], int]) -> bool:
        if a == b:
            return True
        if same_comm_forbidden is not None and same_comm_forbidden[a] == same_comm_forbidden[b]:
            return True
        k = key(a, b)
        return k in taken or counts.get(k, 0) > 1

    for _ in range(max_passes):
        counts: dict[tuple[int, int], int] = {}
        for a, b in pairs:
            if a != b:
                counts[key(a, b)] = counts.get(key(a, b), 0) + 1
        bad = [i for i, (a, b) in enumerate(pairs) if invalid(a, b, counts)]
        if not bad:
            return pairs
        for i in bad:
            j = int(rng.integers(len(pairs)))
            if i == j:
                continue
            a, b = pairs[i]
            c, d = pairs[j]
            if rng.random() < 0.5:
                pairs[i], pairs[j] = (a, d), (c, b)
            else:
                pairs[i], pairs[j] = (a, c), (b, d)
    raise GenerationError(f"{label} stub matching failed after {max_passes} repair passes")


def _havel_hakimi(nodes: list[int], loads: list[int]) -> list[tuple[int, int]] | None:
    """Simple graph realizing the degree sequence, or None if not graphical."""
    remaining = {v: d for v, d in zip(nodes, loads)}
    edges: list[tuple[int, int]] = []
    while True:
        order = sorted(remaining, key=lambda v: (-remaining[v], v))
        u = order[0]
        d = remaining[u]
        if d == 0:
            return edges
        partners = [v for v in order[1:] if remaining[v] > 0][:d]
        if len(partners) < d:
            return None
        for v in partners:
            edges.append((u, v) if u < v else (v, u))
            remaining[v] -= 1
        remaining[u] = 0


def _randomize_edges(
    rng: np.random.Generator, edges: list[tuple[int, int]], rounds: int = 10
) -> list[tuple[int, int]]:
    """Degree-preserving double-edge swaps to shuffle a Havel-Hakimi layout."""
    edge_set = set(edges)
    edges = list(edges)
    for _ in range(rounds * len(edges)):
        if len(edges) < 2:
            break
        i, j = rng.integers(len(edges)), rng.integers(len(edges))
        if i == j:
            continue
        a, b = edges[i]
        c, d = edges[j]
        if rng.random() < 0.5:
            a, b = b, a
        if len({a, b, c, d}) < 4:
            continue
        new1 = (a, d) if a < d else (d, a)
        new2 = (c, b) if c < b else (b, c)
        if new1 in edge_set or new2 in edge_set:
            continue
        edge_set.discard(edges[i])
        edge_set.discard(edges[j])
        edge_set.add(new1)
        edge_set.add(new2)
        edges[i], edges[j] = new1, new2
    return edges


def _internal_graph(
    rng: np.random.Generator, nodes: list[int], internal: np.ndarray, label: str
) -> list[tuple[int, int]]:
    """Intra-community edges realizing (and, if needed, trimming) the loads."""
    loads = [int(internal[v]) for v in nodes]
    if sum(loads) % 2 != 0:
        order = list(rng.permutation(len(nodes)))
        for idx in order:
            if loads[idx] < len(nodes) - 1:
                loads[idx] += 1
                internal[nodes[idx]] += 1
                break
        else:
            idx = order[0]
            loads[idx] -= 1
            internal[nodes[idx]] -= 1
    for _ in range(2 * len(nodes) + 10):
        edges = _havel_hakimi(nodes, loads)
        if edges is not None:
            return _randomize_edges(rng, edges)
        # not graphical: shave two stubs off the heaviest loads (they move
        # back to the external pool via degree - internal)
        for _ in range(2):
            idx = max(range(len(loads)), key=lambda i: (loads[i], -i))
            if loads[idx] > 0:
                loads[idx] -= 1
                internal[nodes[idx]] -= 1
    raise GenerationError(f"{label}: internal degree sequence not realizable")


def _assign_communities(
    rng: np.random.Generator, sizes: list[int], internal: np.ndarray
) -> list[list[int]]:
    """Place each node into a community with room for its internal stubs."""
    n = len(internal)
    members: list[list[int]] = [[] for _ in sizes]
    pool = list(rng.permutation(n))
    guard = 0
    while pool:
        guard += 1
        if guard > 60 * n:
            raise GenerationError("community assignment did not converge (eviction loop)")
        node = pool.pop()
        fits = [i for i, s in enumerate(sizes) if internal[node] <= s - 1]
        if not fits:
            raise GenerationError(
                f"internal degree {internal[node]} exceeds every community capacity"
            )
        open_fits = [i for i in fits if len(members[i]) < sizes[i]]
        if open_fits:
            members[int(rng.choice(open_fits))].append(node)
        else:
            c = int(rng.choice(fits))
            evicted = members[c].pop(int(rng.integers(len(members[c]))))
            members[c].append(node)
            pool.append(evicted)
    return members


def generate(params: LfrParams) -> tuple[Snapshot, Partition]:
    """Generate snapshot 0 and its planted ground-truth partition."""
    rng = np.random.default_rng(params.seed)
    degrees = _sample_degrees(rng, params)
    sizes = _sample_community_sizes(rng, params)

    internal = np.rint((1.0 - params.mu) * degrees).astype(int)
    # rare hubs whose internal demand exceeds the largest sampled community:
    # cap the internal part, excess shifts to external stubs
    cap = max(sizes) - 1
    internal = np.minimum(internal, cap)

    members = _assign_communities(rng, sizes, internal)
    comm_of = {node: c for c, nodes in enumerate(members) for node in nodes}

    edges: dict[tuple[int, int], float] = {}
    taken: set[tuple[int, int]] = set()

    def draw_weight() -> float:
        return 1.0 - float(rng.random())  # uniform on (0, 1]

    internal = internal.copy()
    for c, nodes in enumerate(members):
        for a, b in _internal_graph(rng, sorted(nodes), internal, f"community {c}"):
            k = (a, b) if a < b else (b, a)
            taken.add(k)
            edges[k] = draw_weight()

    external = degrees - internal
    external = np.maximum(external, 0)
    if int(external.sum()) % 2 != 0:
        external[int(rng.integers(params.n))] += 1
    ext_stubs = [v for v in range(params.n) for _ in range(int(external[v]))]
    if ext_stubs:
        for a, b in _pair_stubs(rng, ext_stubs, taken, comm_of, "external"):
            k = (a, b) if a < b else (b, a)
            taken.add(k)
            edges[k] = draw_weight()

    snapshot = Snapshot.build(0, range(params.n), [(u, v, w) for (u, v), w in edges.items()])
    return snapshot, Partition.build(comm_of)


def empirical_mixing(s: Snapshot, p: Partition) -> float:
    """Degree-weighted fraction of edge endpoints on community-crossing edges."""
    if p.domain != s.nodes:
        raise ValueError("partition does not cover the snapshot's node set")
    if not s.edges:
        return 0.0
    cross = sum(1 for u, v, _ in s.edges if p[u] != p[v])
    return cross / len(s.edges)
