"""Evaluation metrics: AMI, Stability, Correctness, Delay and aggregation.

All cross-partition comparisons are computed on the intersection of the two
partitions' node sets, so sequences with node churn compare cleanly without
inventing labels.  AMI uses the exact hypergeometric expectation of the
mutual information and normalizes by the arithmetic mean of the entropies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .graph import Partition
from .validation import check_series_aligned

PartitionSeries = list[tuple[int, Partition]]


def _entropy(counts: np.ndarray, n: int) -> float:
    c = counts[counts > 0].astype(float)
    return float(((c / n) * (np.log(float(n)) - np.log(c))).sum())


def _canon_codes(labels: np.ndarray) -> np.ndarray:
    """Compact codes numbered by first occurrence: exactly label-permutation invariant."""
    _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    remap = np.empty(first.shape[0], dtype=np.int64)
    remap[np.argsort(first, kind="stable")] = np.arange(first.shape[0])
    return remap[inv]


@njit(cache=True)
def _emi_kernel(a_counts: np.ndarray, b_counts: np.ndarray, n: int) -> float:
    # lgf[x] = log(x!), lg[x] = log(x), tabulated once per call
    lgf = np.empty(n + 2)
    lg = np.empty(n + 2)
    lgf[0] = 0.0
    lg[0] = 0.0
    for x in range(1, n + 2):
        lg[x] = math.log(x)
        lgf[x] = lgf[x - 1] + lg[x]
    lg_n = lgf[n]
    emi = 0.0
    for i in range(a_counts.shape[0]):
        ai = a_counts[i]
        for j in range(b_counts.shape[0]):
            bj = b_counts[j]
            lg_outside = lgf[ai] + lgf[bj] + lgf[n - ai] + lgf[n - bj] - lg_n
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            for nij in range(lo, hi + 1):
                log_term = lg[nij] + lg[n] - lg[ai] - lg[bj]
                log_prob = (
                    lg_outside
                    - lgf[nij] - lgf[ai - nij] - lgf[bj - nij] - lgf[n - ai - bj + nij]
                )
                emi += (nij / n) * log_term * math.exp(log_prob)
    return emi


def expected_mutual_information(a_counts, b_counts) -> float:
    """Exact E[MI] of two labelings with fixed marginals (hypergeometric model)."""
    a = np.asarray(a_counts, dtype=np.int64)
    b = np.asarray(b_counts, dtype=np.int64)
    n = int(a.sum())
    if n != int(b.sum()):
        raise ValueError("marginals disagree on the number of elements")
    return float(_emi_kernel(a, b, n))


def ami(a: Partition, b: Partition) -> float:
    """Adjusted Mutual Information on the common node set of ``a`` and ``b``.

    (MI - E[MI]) / (mean(H(a), H(b)) - E[MI]); 1.0 when both partitions are
    single-community over the same nodes (zero-entropy agreement), 0.0 when
    exactly one side has zero entropy.
    """
    da, db = a._domain_arr, b._domain_arr
    if da.shape[0] == db.shape[0] and np.array_equal(da, db):
        la, lb = a._label_arr, b._label_arr
    else:
        common = np.intersect1d(da, db, assume_unique=True)
        if common.shape[0] == 0:
            raise ValueError("partitions share no nodes")
        la = a._label_arr[np.searchsorted(da, common)]
        lb = b._label_arr[np.searchsorted(db, common)]
    n = la.shape[0]
    ca = _canon_codes(la)
    cb = _canon_codes(lb)
    if np.array_equal(ca, cb):
        return 1.0  # identical set partitions (covers the zero-entropy agreement case)
    na = int(ca.max()) + 1
    nb = int(cb.max()) + 1
    cont = np.bincount(ca * nb + cb, minlength=na * nb).reshape(na, nb)
    a_counts = cont.sum(axis=1)
    b_counts = cont.sum(axis=0)
    h_a = _entropy(a_counts, n)
    h_b = _entropy(b_counts, n)
    if h_a == 0.0 or h_b == 0.0:
        return 0.0
    nz = cont > 0
    nij = cont[nz].astype(float)
    ai_nz = np.broadcast_to(a_counts[:, None], cont.shape)[nz].astype(float)
    bj_nz = np.broadcast_to(b_counts[None, :], cont.shape)[nz].astype(float)
    log_n = np.log(float(n))
    mi = float(((nij / n) * (log_n + np.log(nij) - np.log(ai_nz) - np.log(bj_nz))).sum())
    emi = expected_mutual_information(a_counts, b_counts)
    denominator = 0.5 * (h_a + h_b) - emi
    # guard against cancellation when MI is already at its expectation
    eps = np.finfo(float).eps
    if denominator < 0:
        denominator = min(denominator, -eps)
    else:
        denominator = max(denominator, eps)
    return float((mi - emi) / denominator)


# ---------------------------------------------------------------------------
# sequence metrics


@dataclass
class MetricReport:
    """Per-run metric values plus their per-snapshot series."""

    stability: float
    correctness: float | None = None
    delay: float | None = None
    crossing_point: int | None = None
    s_series: list[float] = field(default_factory=list)
    k_series: list[float] = field(default_factory=list)


def stability(series: PartitionSeries) -> tuple[float, list[float]]:
    """Mean AMI between consecutive partitions (on common active nodes)."""
    items = check_series_aligned(series)
    if len(items) < 2:
        raise ValueError("stability needs a series of at least 2 partitions")
    s_t = [ami(p_prev, p_cur) for (_, p_prev), (_, p_cur) in zip(items, items[1:])]
    return float(np.mean(s_t)), s_t


def correctness_noise(gt0: Partition, series: PartitionSeries) -> tuple[float, list[float]]:
    """Mean AMI against the initial ground truth over the series."""
    items = check_series_aligned(series)
    if not items:
        raise ValueError("empty partition series")
    k_t = [ami(gt0, p) for _, p in items]
    return float(np.mean(k_t)), k_t


def correctness_morphing(gt_n: Partition, series: PartitionSeries) -> float:
    """AMI against the final ground truth at the final snapshot (K = K^N)."""
    items = check_series_aligned(series)
    if not items:
        raise ValueError("empty partition series")
    return ami(gt_n, items[-1][1])


def crossing_point(gt0: Partition, gt_n: Partition, series: PartitionSeries) -> int | None:
    """First t whose partition is strictly closer to GT^N than to GT^0."""
    for t, p in check_series_aligned(series):
        if ami(gt_n, p) > ami(gt0, p):
            return t
    return None


def delay(cp: int | None, start: int, max_t: int) -> float:
    """Snapshots from transformation start to the crossing point.

    Missing crossing point maps to the maximum possible value.
    """
    if start > max_t:
        raise ValueError(f"start {start} beyond final snapshot {max_t}")
    if cp is None:
        return float(max_t - start)
    if cp < start:
        raise ValueError(f"crossing point {cp} precedes transformation start {start}")
    return float(cp - start)


def bootstrap_median_ci(
    values,
    level: float = 0.99,
    resamples: int = 10_000,
    seed: int | None = None,
) -> tuple[float, float, float]:
    """Sample median with a percentile-bootstrap confidence interval."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise ValueError("bootstrap over an empty value list")
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must lie in (0, 1), got {level}")
    if resamples < 1000:
        raise ValueError("need at least 1000 bootstrap resamples")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, arr.size, size=(resamples, arr.size))
    medians = np.median(arr[idx], axis=1)
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(medians, [alpha, 1.0 - alpha])
    return float(np.median(arr)), float(lo), float(hi)
