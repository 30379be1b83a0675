"""Numba kernels for the Louvain local-moving phase.

Kept free of Python objects: CSR arrays in, move statistics out.  The RNG is
a self-contained xorshift64* so shuffles are reproducible across platforms
and processes.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_MULT = np.uint64(0x2545F4914F6CDD1D)


@njit(cache=True)
def _rand_below(state: np.ndarray, bound: int) -> int:
    x = state[0]
    x ^= x >> np.uint64(12)
    x ^= x << np.uint64(25)
    x ^= x >> np.uint64(27)
    state[0] = x
    return int((x * _MULT) % np.uint64(bound))


@njit(cache=True)
def _shuffle(order: np.ndarray, state: np.ndarray) -> None:
    for i in range(order.shape[0] - 1, 0, -1):
        j = _rand_below(state, i + 1)
        tmp = order[i]
        order[i] = order[j]
        order[j] = tmp


@njit(cache=True)
def local_move(
    indptr: np.ndarray,
    indices: np.ndarray,
    weights: np.ndarray,
    k: np.ndarray,
    comm: np.ndarray,
    sigma_tot: np.ndarray,
    wtot: float,
    rng_state: np.ndarray,
    trace_node: np.ndarray,
    trace_from: np.ndarray,
    trace_to: np.ndarray,
    trace_gain: np.ndarray,
    record_trace: bool,
    max_sweeps: int = 10_000,
):
    """Sweep nodes in shuffled order, applying best strictly-positive moves.

    Mutates ``comm`` and ``sigma_tot`` in place.  Returns
    (sweeps, moves, gain_sum, min_gain, trace_len, trace_overflow).
    """
    n = comm.shape[0]
    n_comm = sigma_tot.shape[0]
    scratch = np.zeros(n_comm)
    touched = np.empty(n_comm, dtype=np.int64)
    order = np.arange(n)
    two_w = 2.0 * wtot

    sweeps = 0
    moves = 0
    gain_sum = 0.0
    min_gain = np.inf
    trace_len = 0
    overflow = False

    while sweeps < max_sweeps:
        sweeps += 1
        _shuffle(order, rng_state)
        moved_this_sweep = 0
        for idx in range(n):
            i = order[idx]
            ci = comm[i]
            n_touch = 0
            for e in range(indptr[i], indptr[i + 1]):
                cj = comm[indices[e]]
                if scratch[cj] == 0.0:
                    touched[n_touch] = cj
                    n_touch += 1
                scratch[cj] += weights[e]
            ki = k[i]
            sigma_tot[ci] -= ki
            g_stay = scratch[ci] - ki * sigma_tot[ci] / two_w
            best_c = ci
            best_g = g_stay
            for t in range(n_touch):
                c = touched[t]
                if c == ci:
                    continue
                g = scratch[c] - ki * sigma_tot[c] / two_w
                if g > best_g:
                    best_g = g
                    best_c = c
            for t in range(n_touch):
                scratch[touched[t]] = 0.0
            delta_q = (best_g - g_stay) / wtot
            if best_c != ci and delta_q > 0.0:
                comm[i] = best_c
                sigma_tot[best_c] += ki
                moved_this_sweep += 1
                gain_sum += delta_q
                if delta_q < min_gain:
                    min_gain = delta_q
                if record_trace:
                    if trace_len < trace_node.shape[0]:
                        trace_node[trace_len] = i
                        trace_from[trace_len] = ci
                        trace_to[trace_len] = best_c
                        trace_gain[trace_len] = delta_q
                        trace_len += 1
                    else:
                        overflow = True
            else:
                sigma_tot[ci] += ki
        moves += moved_this_sweep
        if moved_this_sweep == 0:
            break

    return sweeps, moves, gain_sum, min_gain, trace_len, overflow
