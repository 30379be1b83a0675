"""Turn timestamped contact logs into dynamic graphs.

Input is a CSV of ``timestamp,node_a,node_b`` rows (header optional).
Contacts are bucketed into consecutive fixed-length windows; each window
becomes one snapshot whose edge weights are contact counts normalized by
the window's maximum count (so weights land in (0, 1]).  Windows without
contacts stay in the sequence as empty snapshots to preserve the time axis.
"""

from __future__ import annotations

import csv
import logging
import math

from .graph import DynamicGraph, Snapshot

log = logging.getLogger("evocd")


def ingest_contacts(path, window_seconds: float) -> DynamicGraph:
    if window_seconds <= 0:
        raise ValueError("window_seconds must be positive")
    contacts: list[tuple[float, str, str]] = []
    rejected = 0
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 3:
                rejected += 1
                log.warning("line %d: expected 3 columns, got %d", lineno, len(row))
                continue
            try:
                ts = float(row[0])
            except ValueError:
                if lineno == 1:
                    continue  # header row
                rejected += 1
                log.warning("line %d: bad timestamp %r", lineno, row[0])
                continue
            a, b = row[1].strip(), row[2].strip()
            if not a or not b or a == b:
                rejected += 1
                log.warning("line %d: bad endpoints %r, %r", lineno, row[1], row[2])
                continue
            contacts.append((ts, a, b))
    if not contacts:
        raise ValueError(f"no valid contact rows in {path}")

    labels = sorted({a for _, a, _ in contacts} | {b for _, _, b in contacts})
    try:
        ids = {lab: int(lab) for lab in labels}
        if len(set(ids.values())) != len(labels):
            raise ValueError
    except ValueError:
        ids = {lab: i for i, lab in enumerate(labels)}

    t0 = min(ts for ts, _, _ in contacts)
    t1 = max(ts for ts, _, _ in contacts)
    n_windows = int(math.floor((t1 - t0) / window_seconds)) + 1
    counts: list[dict[tuple[int, int], int]] = [{} for _ in range(n_windows)]
    for ts, a, b in contacts:
        w = min(int((ts - t0) // window_seconds), n_windows - 1)
        u, v = ids[a], ids[b]
        key = (u, v) if u < v else (v, u)
        counts[w][key] = counts[w].get(key, 0) + 1

    snapshots = []
    for t, bucket in enumerate(counts):
        if bucket:
            cmax = max(bucket.values())
            edges = [(u, v, c / cmax) for (u, v), c in bucket.items()]
            nodes = {u for u, _, _ in edges} | {v for _, v, _ in edges}
        else:
            edges, nodes = [], set()
        snapshots.append(Snapshot.build(t, nodes, edges))

    meta = {
        "source": str(path),
        "window_seconds": window_seconds,
        "rejected_rows": rejected,
        "label_map": {lab: ids[lab] for lab in labels},
        "weighting": "per-window max-count normalization",
    }
    return DynamicGraph(snapshots=tuple(snapshots), ground_truth=None, meta=meta)
