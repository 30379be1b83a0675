"""Input-validation helpers shared by generators, detectors and the harness."""

from __future__ import annotations

import hashlib
from typing import Iterable

import numpy as np

from .graph import DynamicGraph, Partition, Snapshot


class GenerationError(RuntimeError):
    """Synthetic graph generation failed (names the violated constraint)."""


class EvolutionError(RuntimeError):
    """A transformation step could not be applied."""


def check_partition_covers(p: Partition, s: Snapshot) -> None:
    if p.domain != s.nodes:
        missing = s.nodes - p.domain
        extra = p.domain - s.nodes
        raise ValueError(
            f"partition does not cover snapshot t={s.t} "
            f"({len(missing)} nodes missing, {len(extra)} extra)"
        )


def check_fraction(name: str, value: float, *, closed_low: bool = True) -> float:
    value = float(value)
    lo_ok = value >= 0.0 if closed_low else value > 0.0
    if not (lo_ok and value <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def check_series_aligned(series: Iterable[tuple[int, Partition]]) -> list[tuple[int, Partition]]:
    items = list(series)
    for (t0, _), (t1, _) in zip(items, items[1:]):
        if t1 <= t0:
            raise ValueError(f"partition series indices not strictly increasing ({t0} -> {t1})")
    return items


def check_has_ground_truth(g: DynamicGraph) -> None:
    if g.ground_truth is None:
        raise ValueError("dynamic graph carries no ground truth")


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from a tuple of labels/ints (documented scheme).

    sha256 over the ':'-joined string representations, truncated to 8 bytes.
    Platform- and process-independent, so parallel and serial runs agree.
    """
    key = ":".join(str(p) for p in parts).encode()
    digest = hashlib.sha256(key).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def rng_from(*parts) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))
