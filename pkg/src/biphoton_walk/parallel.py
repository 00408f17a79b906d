"""Deterministic chunked execution shared by the search and disorder loops.

Work over n items is always split into fixed-size chunks and reduced in
chunk order, whether one worker or many runs the chunks.  Combined with
compensated summation for the floating-point reductions this makes every
result byte-identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

CHUNK_SIZE = 512


def iter_chunks(total: int, chunk_size: int = CHUNK_SIZE):
    """Yield (start, stop) index pairs covering range(total) in order."""
    if total < 0:
        raise ValueError(f"total must be non-negative, got {total}")
    for start in range(0, total, chunk_size):
        yield start, min(start + chunk_size, total)


def run_chunked(worker, common_args: tuple, total: int, workers: int = 1,
                chunk_size: int = CHUNK_SIZE, progress=None) -> list:
    """Run ``worker(start, stop, *common_args)`` over all chunks.

    Returns per-chunk results in chunk order.  ``workers > 1`` fans the
    chunks out to a process pool; the merge order (and therefore any
    downstream floating-point reduction) is unchanged.  ``progress``, if
    given, is called as ``progress(done_items, total)`` after each chunk.
    """
    if workers < 1:
        raise ValueError(f"worker count must be >= 1, got {workers}")
    bounds = list(iter_chunks(total, chunk_size))
    results = []
    if workers == 1 or len(bounds) <= 1:
        for start, stop in bounds:
            results.append(worker(start, stop, *common_args))
            if progress is not None:
                progress(stop, total)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(worker, start, stop, *common_args)
                       for start, stop in bounds]
            for (start, stop), fut in zip(bounds, futures):
                results.append(fut.result())
                if progress is not None:
                    progress(stop, total)
    return results


class KahanAccumulator:
    """Compensated (Kahan) summation for scalars or same-shape arrays."""

    def __init__(self, shape=None):
        if shape is None:
            self._sum = 0.0
            self._c = 0.0
        else:
            self._sum = np.zeros(shape, dtype=float)
            self._c = np.zeros(shape, dtype=float)

    def add(self, value) -> None:
        y = value - self._c
        t = self._sum + y
        self._c = (t - self._sum) - y
        self._sum = t

    @property
    def total(self):
        return self._sum
