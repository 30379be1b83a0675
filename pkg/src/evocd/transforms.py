"""The nine scripted graph transformations and the evolution driver.

Three scenarios:

* Noise       — expansion, intermittence, switch: perturb the graph without
                touching the planted communities.
* Morphing    — merge, split, death, birth: steer the graph from GT^0 toward
                a different target ground truth GT^N at speed tau per snapshot.
* Disruptive  — mixing, removal: progressively destroy community structure.

Every weight update is w^t = w^{t-1} +/- tau clipped into (0, 1]; loosened
edges rest on the floor EPS_W and are deleted at the transformation's final
snapshot.  All randomness flows from the config seed, so evolution is a pure
function of (base, gt0, config).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .graph import DynamicGraph, Partition, Snapshot, restrict
from .lfr import empirical_mixing
from .validation import EvolutionError, check_fraction, check_partition_covers

#: loosened edges never drop below this weight; they are deleted at the end
#: snapshot instead (the weight domain (0, 1] excludes 0)
EPS_W = 0.001


class TransformKind(str, Enum):
    EXPANSION = "expansion"
    INTERMITTENCE = "intermittence"
    SWITCH = "switch"
    MERGE = "merge"
    SPLIT = "split"
    DEATH = "death"
    BIRTH = "birth"
    MIXING = "mixing"
    REMOVAL = "removal"


SCENARIOS: dict[str, tuple[TransformKind, ...]] = {
    "noise": (TransformKind.EXPANSION, TransformKind.INTERMITTENCE, TransformKind.SWITCH),
    "morphing": (TransformKind.MERGE, TransformKind.SPLIT, TransformKind.DEATH, TransformKind.BIRTH),
    "disruptive": (TransformKind.MIXING, TransformKind.REMOVAL),
}


def scenario_of(kind: TransformKind) -> str:
    for name, kinds in SCENARIOS.items():
        if kind in kinds:
            return name
    raise ValueError(f"unknown transformation {kind!r}")


@dataclass(frozen=True)
class TransformConfig:
    kind: TransformKind = TransformKind.MERGE
    n_snapshots: int = 150
    start: int = 25
    end: int = 125
    tau: float = 0.01
    phi_int: float = 0.2
    phi_swi: float = 0.005
    gamma: int = 10
    phi_rem: float | tuple[float, float] = (0.005, 0.02)
    phi_mix: float = 0.005
    targets: int = 2
    birth_fraction: float = 0.1
    growth: float = 0.005
    seed: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", TransformKind(self.kind))
        if not 1 <= self.start <= self.end <= self.n_snapshots:
            raise ValueError(
                f"need 1 <= start <= end <= n_snapshots, got "
                f"start={self.start} end={self.end} n={self.n_snapshots} "
                "(snapshot 0 is always the unmodified base)"
            )
        check_fraction("tau", self.tau)
        check_fraction("phi_int", self.phi_int)
        check_fraction("phi_swi", self.phi_swi)
        check_fraction("phi_mix", self.phi_mix)
        check_fraction("birth_fraction", self.birth_fraction)
        if isinstance(self.phi_rem, tuple):
            lo, hi = self.phi_rem
            check_fraction("phi_rem low", lo)
            check_fraction("phi_rem high", hi)
            if lo > hi:
                raise ValueError("phi_rem range inverted")
        else:
            check_fraction("phi_rem", self.phi_rem)
        if self.gamma < 0:
            raise ValueError("gamma must be a natural number")
        if self.targets < 1:
            raise ValueError("targets must be >= 1")

    @property
    def scenario(self) -> str:
        return scenario_of(self.kind)


# ---------------------------------------------------------------------------
# working-graph helpers (canonical (u < v) edge keys)


def _edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


def _wdict(s: Snapshot) -> dict[tuple[int, int], float]:
    return {(u, v): w for u, v, w in s.edges}


def _induced(wdict: dict, active: set[int]) -> dict:
    return {(u, v): w for (u, v), w in wdict.items() if u in active and v in active}


def _snapshot(t: int, nodes, wdict: dict) -> Snapshot:
    return Snapshot.build(t, nodes, [(u, v, w) for (u, v), w in wdict.items()])


def _degree_counts(wdict: dict, nodes) -> dict[int, int]:
    deg = {n: 0 for n in nodes}
    for u, v in wdict:
        deg[u] += 1
        deg[v] += 1
    return deg


def _weighted_degrees(wdict: dict, nodes) -> dict[int, float]:
    deg = {n: 0.0 for n in nodes}
    for (u, v), w in wdict.items():
        deg[u] += w
        deg[v] += w
    return deg


def _sample_weighted(rng: np.random.Generator, items: list[int], weights: list[float], size: int, replace: bool = False) -> list[int]:
    if size <= 0 or not items:
        return []
    size = min(size, len(items)) if not replace else size
    w = np.asarray(weights, dtype=float)
    if w.sum() <= 0:
        w = np.ones(len(items))
    elif not replace and int((w > 0).sum()) < size:
        # zero-weight items must stay reachable when the sample is that large
        w = w + w.max() * 1e-9
    idx = rng.choice(len(items), size=size, replace=replace, p=w / w.sum())
    return [items[i] for i in np.atleast_1d(idx)]


# ---------------------------------------------------------------------------
# per-kind transformation engines


class _Engine:
    """One transformation bound to a base snapshot; ``apply`` advances it."""

    scenario = ""

    def __init__(self, base: Snapshot, gt0: Partition, cfg: TransformConfig, rng: np.random.Generator):
        self.base = base
        self.gt0 = gt0
        self.cfg = cfg
        self.rng = rng
        self.wdict = _wdict(base)
        self.nodes: set[int] = set(base.nodes)

    def gt_final(self) -> Partition:
        return self.gt0

    def inactive_map(self) -> dict[int, int]:
        return {}

    def apply(self, t: int) -> tuple[Snapshot, Partition, float]:
        raise NotImplementedError


class _Expansion(_Engine):
    scenario = "noise"

    def __init__(self, base, gt0, cfg, rng):
        super().__init__(base, gt0, cfg, rng)
        self.base_degrees = [d for d in _degree_counts(self.wdict, self.nodes).values()]
        self.mu_hat = empirical_mixing(base, gt0)
        self.gt = dict(gt0.assignment)
        self.next_id = max(self.nodes) + 1
        self.per_step = math.ceil(cfg.growth * base.n_nodes)

    def apply(self, t):
        wdeg = _weighted_degrees(self.wdict, self.nodes)
        comms: dict[int, list[int]] = {}
        for n, c in self.gt.items():
            comms.setdefault(c, []).append(n)
        labels = sorted(comms)
        sizes = np.array([len(comms[c]) for c in labels], dtype=float)
        for _ in range(self.per_step):
            node = self.next_id
            self.next_id += 1
            d = int(self.rng.choice(self.base_degrees))
            d = min(d, len(self.nodes))
            host = labels[int(self.rng.choice(len(labels), p=sizes / sizes.sum()))]
            members = comms[host]
            n_int = min(int(round((1.0 - self.mu_hat) * d)), len(members))
            outsiders = [n for n in self.nodes if self.gt[n] != host]
            n_ext = min(d - n_int, len(outsiders))
            targets = _sample_weighted(self.rng, members, [wdeg[m] for m in members], n_int)
            targets += _sample_weighted(self.rng, outsiders, [wdeg[o] for o in outsiders], n_ext)
            for v in targets:
                w = 1.0 - float(self.rng.random())
                self.wdict[_edge_key(node, v)] = w
                wdeg[v] = wdeg.get(v, 0.0) + w
            wdeg[node] = sum(self.wdict[_edge_key(node, v)] for v in targets)
            self.nodes.add(node)
            self.gt[node] = host
            comms[host].append(node)
            sizes[labels.index(host)] += 1
        return _snapshot(t, self.nodes, self.wdict), Partition.build(self.gt), 0.0


class _Intermittence(_Engine):
    scenario = "noise"

    def __init__(self, base, gt0, cfg, rng):
        super().__init__(base, gt0, cfg, rng)
        self.deg = _degree_counts(self.wdict, self.nodes)
        self.off: set[int] = set()

    def inactive_map(self):
        return {n: 1 for n in self.off}

    def apply(self, t):
        # every snapshot: yesterday's batch returns, a fresh batch leaves;
        # just-returned nodes are exempt so each batch is back by t+1.
        # The batch is phi_int of the restored pool, so e.g. 100 nodes at
        # phi=0.2 give snapshots of 80 active nodes throughout.
        returned = self.off
        candidates = sorted(self.nodes - returned)
        m = min(math.ceil(self.cfg.phi_int * len(self.nodes)), len(candidates))
        weights = [1.0 / max(self.deg[n], 0.5) for n in candidates]
        self.off = set(_sample_weighted(self.rng, candidates, weights, m))
        active = self.nodes - self.off
        return (
            _snapshot(t, active, _induced(self.wdict, active)),
            restrict(self.gt0, active),
            0.0,
        )


class _Switch(_Engine):
    scenario = "noise"

    def __init__(self, base, gt0, cfg, rng):
        super().__init__(base, gt0, cfg, rng)
        self.deg = _degree_counts(self.wdict, self.nodes)
        self.removed_at: dict[int, int] = {}

    def inactive_map(self):
        return dict(self.removed_at)

    def apply(self, t):
        for n in sorted(self.removed_at):
            t_off = t - self.removed_at[n]
            p = min(1.0, math.exp(t_off - self.cfg.gamma))
            if self.rng.random() < p:
                del self.removed_at[n]
        active = sorted(self.nodes - set(self.removed_at))
        m = math.ceil(self.cfg.phi_swi * len(active))
        weights = [1.0 / max(self.deg[n], 0.5) for n in active]
        for n in _sample_weighted(self.rng, active, weights, m):
            self.removed_at[n] = t
        keep = self.nodes - set(self.removed_at)
        return (
            _snapshot(t, keep, _induced(self.wdict, keep)),
            restrict(self.gt0, keep),
            0.0,
        )


def _intra_weight_density(wdict: dict, members_a: list[int], members_b: list[int], gt: Partition) -> float:
    in_a = set(members_a)
    in_b = set(members_b)
    w_in = sum(
        w for (u, v), w in wdict.items()
        if (u in in_a and v in in_a) or (u in in_b and v in in_b)
    )
    pairs = len(in_a) * (len(in_a) - 1) // 2 + len(in_b) * (len(in_b) - 1) // 2
    return w_in / pairs if pairs else 0.0


class _Merge(_Engine):
    scenario = "morphing"

    def __init__(self, base, gt0, cfg, rng):
        super().__init__(base, gt0, cfg, rng)
        comms = gt0.communities()
        labels = sorted(comms)
        if len(labels) < 2 * cfg.targets:
            raise ValueError(
                f"merge needs {2 * cfg.targets} communities, graph has {len(labels)}"
            )
        chosen = [labels[i] for i in self.rng.choice(len(labels), size=2 * cfg.targets, replace=False)]
        deg = _degree_counts(self.wdict, self.nodes)
        self.pairs = []
        gt_n = dict(gt0.assignment)
        for c1, c2 in zip(chosen[0::2], chosen[1::2]):
            a, b = sorted(comms[c1]), sorted(comms[c2])
            d_intra = _intra_weight_density(self.wdict, a, b, gt0)
            w_target = d_intra * len(a) * len(b)
            cross = {k for k in (_edge_key(u, v) for u in a for v in b) if k in self.wdict}
            w_exist = sum(self.wdict[k] for k in cross)
            absent = [(u, v) for u in a for v in b if _edge_key(u, v) not in self.wdict]
            k_new = min(int(math.ceil(max(0.0, w_target - w_exist))), len(absent))
            probs = np.array([max(deg[u], 1) * max(deg[v], 1) for u, v in absent], dtype=float)
            planned: list[tuple[int, int]] = []
            if absent and k_new > 0:
                idx = self.rng.choice(len(absent), size=k_new, replace=False, p=probs / probs.sum())
                planned = [_edge_key(*absent[i]) for i in np.atleast_1d(idx)]
            merged_label = min(c1, c2)
            for n in a + b:
                gt_n[n] = merged_label
            self.pairs.append({
                "cross": cross, "planned": planned, "w_target": w_target,
                "n_pairs": len(a) * len(b), "done": False,
            })
        self.gt_n = Partition(gt_n)

    def gt_final(self):
        return self.gt_n

    def apply(self, t):
        tau = self.cfg.tau
        delta = 0.0
        for pair in self.pairs:
            if pair["done"]:
                continue
            for k in pair["cross"]:
                w = self.wdict[k]
                nw = min(1.0, w + tau)
                delta += nw - w
                self.wdict[k] = nw
            for k in pair["planned"]:
                if k not in self.wdict:
                    w = min(1.0, max(tau, EPS_W))
                    self.wdict[k] = w
                    pair["cross"].add(k)
                    delta += w
            w_cross = sum(self.wdict[k] for k in pair["cross"])
            if w_cross >= pair["w_target"]:
                pair["done"] = True
        return _snapshot(t, self.nodes, self.wdict), self.gt0, delta


class _Split(_Engine):
    scenario = "morphing"

    def __init__(self, base, gt0, cfg, rng):
        super().__init__(base, gt0, cfg, rng)
        comms = gt0.communities()
        labels = sorted(comms)
        if len(labels) < cfg.targets:
            raise ValueError(f"split needs {cfg.targets} communities, graph has {len(labels)}")
        # prefer communities whose halves stay at least as large as the smallest
        # planted community (halves below that sit under the resolution limit);
        # top up from the largest remaining ones when too few qualify
        min_size = min(len(v) for v in comms.values())
        eligible = [c for c in labels if len(comms[c]) >= max(6, 2 * min_size)]
        eligible = [eligible[i] for i in self.rng.permutation(len(eligible))]
        rest = sorted(
            (c for c in labels if c not in eligible and len(comms[c]) >= 6),
            key=lambda c: (-len(comms[c]), c),
        )
        candidates = eligible + rest
        if len(candidates) < cfg.targets:
            raise ValueError(
                f"split needs {cfg.targets} communities of size >= 6, "
                f"graph has {len(candidates)}"
            )
        chosen = candidates[: cfg.targets]
        gt_n = dict(gt0.assignment)
        next_label = max(labels) + 1
        self.crossing: set[tuple[int, int]] = set()
        for c in chosen:
            members = sorted(comms[c])
            perm = list(self.rng.permutation(members))
            half_b = set(perm[len(perm) // 2:])
            for n in half_b:
                gt_n[n] = next_label
            next_label += 1
            for (u, v) in self.wdict:
                if gt0.assignment.get(u) == c and gt0.assignment.get(v) == c:
                    if (u in half_b) != (v in half_b):
                        self.crossing.add((u, v))
        self.gt_n = Partition(gt_n)

    def gt_final(self):
        return self.gt_n

    def apply(self, t):
        tau = self.cfg.tau
        delta = 0.0
        for k in self.crossing:
            if k in self.wdict:
                w = self.wdict[k]
                nw = max(EPS_W, w - tau)
                delta += w - nw
                self.wdict[k] = nw
        if t == self.cfg.end:
            for k in self.crossing:
                if self.wdict.get(k, 1.0) <= EPS_W:
                    del self.wdict[k]
        return _snapshot(t, self.nodes, self.wdict), self.gt0, delta


class _Death(_Engine):
    scenario = "morphing"

    def __init__(self, base, gt0, cfg, rng):
        super().__init__(base, gt0, cfg, rng)
        comms = gt0.communities()
        labels = sorted(comms)
        if len(labels) <= cfg.targets:
            raise ValueError(
                f"death needs more than {cfg.targets} communities, graph has {len(labels)}"
            )
        chosen = {labels[i] for i in self.rng.choice(len(labels), size=cfg.targets, replace=False)}
        survivors = [c for c in labels if c not in chosen]
        wdeg = _weighted_degrees(self.wdict, self.nodes)
        surv_weight = [sum(wdeg[n] for n in comms[c]) for c in survivors]
        gt_n = dict(gt0.assignment)
        self.dying_intra: set[tuple[int, int]] = set()
        self.members: dict[int, dict] = {}
        for c in sorted(chosen):
            for n in sorted(comms[c]):
                dest = _sample_weighted(self.rng, survivors, surv_weight, 1)[0]
                gt_n[n] = dest
                intra_w = sum(
                    w for (u, v), w in self.wdict.items()
                    if (u == n and gt0.assignment.get(v) == c) or (v == n and gt0.assignment.get(u) == c)
                )
                self.members[n] = {
                    "dest": dest, "target": intra_w, "added": [], "frozen": intra_w <= 0.0,
                }
            for (u, v) in self.wdict:
                if gt0.assignment.get(u) == c and gt0.assignment.get(v) == c:
                    self.dying_intra.add((u, v))
        self.dest_members = {c: sorted(comms[c]) for c in survivors}
        self.gt_n = Partition(gt_n)

    def gt_final(self):
        return self.gt_n

    def apply(self, t):
        tau = self.cfg.tau
        delta = 0.0
        for k in self.dying_intra:
            if k in self.wdict:
                w = self.wdict[k]
                nw = max(EPS_W, w - tau)
                delta += w - nw
                self.wdict[k] = nw
        wdeg = _weighted_degrees(self.wdict, self.nodes)
        for n in sorted(self.members):
            rec = self.members[n]
            if rec["frozen"]:
                continue
            for k in rec["added"]:
                w = self.wdict[k]
                nw = min(1.0, w + tau)
                delta += nw - w
                self.wdict[k] = nw
            added_w = sum(self.wdict[k] for k in rec["added"])
            if added_w < rec["target"]:
                candidates = [
                    v for v in self.dest_members[rec["dest"]]
                    if v != n and _edge_key(n, v) not in self.wdict
                ]
                if candidates:
                    v = _sample_weighted(self.rng, candidates, [wdeg[c] for c in candidates], 1)[0]
                    k = _edge_key(n, v)
                    w = min(1.0, max(tau, EPS_W))
                    self.wdict[k] = w
                    rec["added"].append(k)
                    delta += w
                    added_w += w
            if added_w >= rec["target"]:
                rec["frozen"] = True
        if t == self.cfg.end:
            for k in self.dying_intra:
                if self.wdict.get(k, 1.0) <= EPS_W:
                    del self.wdict[k]
        return _snapshot(t, self.nodes, self.wdict), self.gt0, delta


class _Birth(_Engine):
    scenario = "morphing"

    def __init__(self, base, gt0, cfg, rng):
        super().__init__(base, gt0, cfg, rng)
        comms = gt0.communities()
        labels = sorted(comms)
        mu_hat = empirical_mixing(base, gt0)
        mean_w = (sum(w for _, _, w in base.edges) / len(base.edges)) if base.edges else 0.5
        deg = _degree_counts(self.wdict, self.nodes)

        pool: list[int] = []
        for c in labels:
            members = sorted(comms[c])
            k_c = max(2, int(round(cfg.birth_fraction * len(members))))
            k_c = min(k_c, max(0, len(members) - 2))
            pool.extend(_sample_weighted(self.rng, members, [1.0] * len(members), k_c))
        if len(pool) < 2:
            raise ValueError("birth fraction leaves fewer than 2 emigrant nodes")
        pool = list(self.rng.permutation(sorted(pool)))

        sizes0 = [len(comms[c]) for c in labels]
        groups: list[list[int]] = []
        while pool:
            s = int(self.rng.choice(sizes0))
            s = min(s, len(pool))
            if len(pool) - s < 2:
                s = len(pool)
            groups.append(pool[:s])
            pool = pool[s:]

        gt_n = dict(gt0.assignment)
        next_label = max(labels) + 1
        self.groups: list[dict] = []
        self.loosen: set[tuple[int, int]] = set()
        emigrant_group: dict[int, int] = {}
        for gi, g in enumerate(groups):
            for n in g:
                gt_n[n] = next_label
                emigrant_group[n] = gi
            next_label += 1
        for gi, g in enumerate(groups):
            members = sorted(g)
            w_target = sum((1.0 - mu_hat) * deg[n] / 2.0 for n in members) * mean_w
            existing = {
                _edge_key(u, v)
                for i, u in enumerate(members) for v in members[i + 1:]
                if _edge_key(u, v) in self.wdict
            }
            perm = list(self.rng.permutation(members))
            ring = set()
            if len(perm) > 2:
                ring = {_edge_key(perm[i], perm[(i + 1) % len(perm)]) for i in range(len(perm))}
            elif len(perm) == 2:
                ring = {_edge_key(perm[0], perm[1])}
            planned = set(existing) | ring
            absent = [
                _edge_key(u, v)
                for i, u in enumerate(members) for v in members[i + 1:]
                if _edge_key(u, v) not in planned
            ]
            extra = max(0, int(math.ceil(w_target)) - len(planned))
            if absent and extra > 0:
                probs = np.array([max(deg[u], 1) * max(deg[v], 1) for u, v in absent], dtype=float)
                idx = self.rng.choice(len(absent), size=min(extra, len(absent)), replace=False, p=probs / probs.sum())
                planned |= {absent[i] for i in np.atleast_1d(idx)}
            self.groups.append({"planned": planned, "w_target": w_target, "done": False})
        for n in sorted(emigrant_group):
            c = gt0.assignment[n]
            for v in comms[c]:
                if v == n:
                    continue
                k = _edge_key(n, v)
                if k in self.wdict and emigrant_group.get(v) != emigrant_group[n]:
                    self.loosen.add(k)
        self.gt_n = Partition(gt_n)

    def gt_final(self):
        return self.gt_n

    def apply(self, t):
        tau = self.cfg.tau
        delta = 0.0
        for k in self.loosen:
            if k in self.wdict:
                w = self.wdict[k]
                nw = max(EPS_W, w - tau)
                delta += w - nw
                self.wdict[k] = nw
        for g in self.groups:
            if g["done"]:
                continue
            for k in g["planned"]:
                if k in self.wdict:
                    w = self.wdict[k]
                    nw = min(1.0, w + tau)
                    delta += nw - w
                    self.wdict[k] = nw
                else:
                    w = min(1.0, max(tau, EPS_W))
                    self.wdict[k] = w
                    delta += w
            if sum(self.wdict[k] for k in g["planned"]) >= g["w_target"]:
                g["done"] = True
        if t == self.cfg.end:
            for k in self.loosen:
                if self.wdict.get(k, 1.0) <= EPS_W:
                    del self.wdict[k]
        return _snapshot(t, self.nodes, self.wdict), self.gt0, delta


class _Mixing(_Engine):
    scenario = "disruptive"

    def __init__(self, base, gt0, cfg, rng):
        super().__init__(base, gt0, cfg, rng)
        self.swaps_done = 0

    def apply(self, t):
        n_swaps = math.ceil(self.cfg.phi_mix * len(self.wdict) / 2.0)
        attempts = 0
        done = 0
        while done < n_swaps and attempts < 60 * max(n_swaps, 1):
            attempts += 1
            keys = list(self.wdict)
            i, j = self.rng.choice(len(keys), size=2, replace=False)
            k1, k2 = keys[i], keys[j]
            (a, b), (c, d) = k1, k2
            if len({a, b, c, d}) < 4:
                continue
            w1, w2 = self.wdict[k1], self.wdict[k2]
            if self.rng.random() < 0.5:
                a, b = b, a  # which endpoint of the first edge keeps its partner
            # move the smaller weight: (a,b,w1),(c,d,w2) -> (a,d),(c,b) carrying
            # wm each plus residual (a,b,w1-wm); per-node sums are conserved
            new1, new2 = _edge_key(a, d), _edge_key(c, b)
            wm = min(w1, w2)
            if self.wdict.get(new1, 0.0) + wm > 1.0 or self.wdict.get(new2, 0.0) + wm > 1.0:
                continue
            for k, w in ((k1, w1), (k2, w2)):
                if w - wm <= 0.0:
                    del self.wdict[k]
                else:
                    self.wdict[k] = w - wm
            self.wdict[new1] = self.wdict.get(new1, 0.0) + wm
            self.wdict[new2] = self.wdict.get(new2, 0.0) + wm
            done += 1
        self.swaps_done += done
        return _snapshot(t, self.nodes, self.wdict), restrict(self.gt0, self.nodes), 0.0


class _Removal(_Engine):
    scenario = "disruptive"

    def __init__(self, base, gt0, cfg, rng):
        super().__init__(base, gt0, cfg, rng)
        if isinstance(cfg.phi_rem, tuple):
            lo, hi = cfg.phi_rem
            self.phi = float(lo + (hi - lo) * self.rng.random())
        else:
            self.phi = float(cfg.phi_rem)

    def apply(self, t):
        m = math.ceil(self.phi * len(self.nodes))
        if m >= len(self.nodes):
            raise EvolutionError(
                f"removal exhausted the graph at snapshot {t} "
                f"({len(self.nodes)} nodes left, {m} to remove)"
            )
        order = sorted(self.nodes)
        victims = {order[i] for i in self.rng.choice(len(order), size=m, replace=False)}
        self.nodes -= victims
        self.wdict = {k: w for k, w in self.wdict.items() if k[0] not in victims and k[1] not in victims}
        return _snapshot(t, self.nodes, self.wdict), restrict(self.gt0, self.nodes), 0.0


_ENGINES = {
    TransformKind.EXPANSION: _Expansion,
    TransformKind.INTERMITTENCE: _Intermittence,
    TransformKind.SWITCH: _Switch,
    TransformKind.MERGE: _Merge,
    TransformKind.SPLIT: _Split,
    TransformKind.DEATH: _Death,
    TransformKind.BIRTH: _Birth,
    TransformKind.MIXING: _Mixing,
    TransformKind.REMOVAL: _Removal,
}


# ---------------------------------------------------------------------------
# public surface


@dataclass
class EvolutionState:
    """Current snapshot + ground truth plus the transformation's static plan."""

    current: Snapshot
    gt: Partition
    inactive: dict[int, int]
    engine: _Engine

    @property
    def gt_final(self) -> Partition:
        return self.engine.gt_final()


def plan(kind: TransformKind | str, base: Snapshot, gt0: Partition, cfg: TransformConfig) -> EvolutionState:
    """Select affected communities/nodes up front and fix the target GT^N."""
    kind = TransformKind(kind)
    check_partition_covers(gt0, base)
    rng = np.random.default_rng(cfg.seed)
    engine = _ENGINES[kind](base, gt0, cfg, rng)
    return EvolutionState(current=base.with_t(0), gt=gt0, inactive={}, engine=engine)


def step(state: EvolutionState, t: int, cfg: TransformConfig) -> EvolutionState:
    """Produce snapshot ``t`` from the previous state; a no-op copy outside the window."""
    if not cfg.start <= t <= cfg.end:
        return replace(state, current=state.current.with_t(t))
    snap, gt_t, _ = state.engine.apply(t)
    return EvolutionState(current=snap, gt=gt_t, inactive=state.engine.inactive_map(), engine=state.engine)


def evolve(base: Snapshot, gt0: Partition, cfg: TransformConfig) -> DynamicGraph:
    """Run the full transformation, returning N+1 snapshots with aligned ground truth.

    For morphing, the per-snapshot ground truth flips from GT^0 to GT^N at the
    snapshot where the applied weight schedule crosses its midpoint (reported
    in meta as ``switchover_t``); GT^N is always the final entry.
    """
    check_partition_covers(gt0, base)
    rng = np.random.default_rng(cfg.seed)
    engine = _ENGINES[cfg.kind](base, gt0, cfg, rng)

    snapshots = [base.with_t(0)]
    gts = [gt0]
    deltas = [0.0]
    for t in range(1, cfg.n_snapshots + 1):
        if cfg.start <= t <= cfg.end:
            snap, gt_t, delta = engine.apply(t)
        else:
            snap, gt_t, delta = snapshots[-1].with_t(t), gts[-1], 0.0
        snapshots.append(snap)
        gts.append(gt_t)
        deltas.append(delta)

    meta = {
        "kind": cfg.kind.value,
        "scenario": cfg.scenario,
        "start": cfg.start,
        "end": cfg.end,
        "tau": cfg.tau,
        "seed": cfg.seed,
        "eps_w": EPS_W,
        "n_snapshots": cfg.n_snapshots,
    }
    if cfg.scenario == "morphing":
        total = sum(deltas)
        switchover = cfg.start
        if total > 0:
            acc = 0.0
            for t, d in enumerate(deltas):
                acc += d
                if acc >= total / 2.0:
                    switchover = t
                    break
        gt_n = engine.gt_final()
        gts = [gt0 if t < switchover else gt_n for t in range(cfg.n_snapshots + 1)]
        meta["switchover_t"] = switchover
    if cfg.kind == TransformKind.REMOVAL:
        meta["phi_rem_drawn"] = engine.phi
    if cfg.kind == TransformKind.MIXING:
        meta["swaps_done"] = engine.swaps_done
    return DynamicGraph(snapshots=tuple(snapshots), ground_truth=tuple(gts), meta=meta)
