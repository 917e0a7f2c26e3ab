"""Streaming Monte-Carlo estimates over deterministic counter-based streams.

The sample index range [0, n_samples) is split into fixed-size blocks.
Block ``b`` draws from a Philox generator keyed by ``(seed, b)``, so the
set of samples is a pure function of (seed, n_samples) and is independent
of scheduling.  Per-block statistics are folded in block order, which makes
the final estimate bit-identical for any number of workers.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

BLOCK_SIZE = 4096
FLAGGED_WARN_FRACTION = 1e-3

# kernel(rng, count) -> (values kept, number of flagged/excluded samples)
Kernel = Callable[[np.random.Generator, int], tuple[np.ndarray, int]]


def sample_stream(seed: int, block: int) -> np.random.Generator:
    """Independent generator for one block of the sample index range.

    The block index is placed in the high word of the Philox counter, so
    distinct blocks are separated by 2**192 draws and never overlap.
    """
    bg = np.random.Philox(key=np.uint64(seed),
                          counter=[0, 0, 0, np.uint64(block)])
    return np.random.Generator(bg)


@dataclass(frozen=True)
class MCEstimate:
    """Mean, standard error and provenance of a Monte-Carlo functional.

    ``count`` is the number of contributing samples; ``flagged`` counts
    samples excluded by numerical guards (never clamped into the mean).
    ``count == 0`` denotes the empty estimate, the identity for merging.
    """

    mean: float
    stderr: float
    count: int
    seed: int
    flagged: int = 0
    provenance: Optional[tuple] = None

    @property
    def m2(self) -> float:
        """Sum of squared deviations, recovered from the standard error."""
        if self.count < 2:
            return 0.0
        return self.stderr ** 2 * self.count * (self.count - 1)

    @staticmethod
    def empty(seed: int = 0, provenance: Optional[tuple] = None) -> "MCEstimate":
        return MCEstimate(0.0, 0.0, 0, seed, 0, provenance)


def _finalize(count: int, mean: float, m2: float, flagged: int,
              seed: int, provenance: Optional[tuple]) -> MCEstimate:
    stderr = math.sqrt(m2 / (count * (count - 1))) if count >= 2 else 0.0
    return MCEstimate(mean, stderr, count, seed, flagged, provenance)


def _merge_raw(a: tuple[int, float, float], b: tuple[int, float, float]):
    """Chan's parallel combination of (count, mean, m2) accumulators."""
    na, ma, sa = a
    nb, mb, sb = b
    if na == 0:
        return b
    if nb == 0:
        return a
    n = na + nb
    delta = mb - ma
    mean = ma + delta * nb / n
    m2 = sa + sb + delta * delta * na * nb / n
    return (n, mean, m2)


def merge_estimates(a: MCEstimate, b: MCEstimate) -> MCEstimate:
    """Pool two estimates of the same functional over disjoint index ranges."""
    if a.count == 0:
        return b
    if b.count == 0:
        return a
    if a.provenance is not None and b.provenance is not None \
            and a.provenance != b.provenance:
        raise ValueError(f"provenance mismatch: {a.provenance} vs {b.provenance}")
    if a.seed != b.seed:
        raise ValueError(f"seed mismatch: {a.seed} vs {b.seed}")
    n, mean, m2 = _merge_raw((a.count, a.mean, a.m2), (b.count, b.mean, b.m2))
    return _finalize(n, mean, m2, a.flagged + b.flagged, a.seed,
                     a.provenance if a.provenance is not None else b.provenance)


def _block_stats(values: np.ndarray) -> tuple[int, float, float]:
    n = values.size
    if n == 0:
        return (0, 0.0, 0.0)
    mean = float(values.mean())
    m2 = float(((values - mean) ** 2).sum())
    return (n, mean, m2)


def run_blocked(kernel: Kernel, n_samples: int, seed: int, *,
                workers: int = 1,
                provenance: Optional[tuple] = None) -> MCEstimate:
    """Estimate E[kernel] over n_samples index-derived samples.

    Results are reproducible for any ``workers``: block b always consumes
    stream (seed, b) and the per-block statistics are folded in block order.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    n_blocks = (n_samples + BLOCK_SIZE - 1) // BLOCK_SIZE

    def one_block(b: int):
        count = min(BLOCK_SIZE, n_samples - b * BLOCK_SIZE)
        values, flagged = kernel(sample_stream(seed, b), count)
        return _block_stats(np.asarray(values, dtype=np.float64)), flagged

    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_block, range(n_blocks)))
    else:
        results = [one_block(b) for b in range(n_blocks)]

    acc = (0, 0.0, 0.0)
    flagged_total = 0
    for stats, flagged in results:
        acc = _merge_raw(acc, stats)
        flagged_total += flagged

    if flagged_total > FLAGGED_WARN_FRACTION * n_samples:
        warnings.warn(
            f"flagged-sample fraction {flagged_total / n_samples:.2e} exceeds "
            f"{FLAGGED_WARN_FRACTION:.0e}; estimate may be unreliable",
            RuntimeWarning,
        )
    return _finalize(acc[0], acc[1], acc[2], flagged_total, seed, provenance)
