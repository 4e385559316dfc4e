"""
Per-n evaluation over index grids, serially or across a process pool.

Workers must return picklable values; extended-precision numbers travel as
raw mpf tuples (`value._mpf_`) and are rebuilt with `from_raw`. Pool.map keeps
index order, so reductions over the result are independent of worker count.
"""

import logging
from multiprocessing import Pool

import mpmath

from eseries import config

logger = logging.getLogger(__name__)


def resolve_workers(workers=None) -> int:
    workers = config.WORKERS if workers is None else workers
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    return workers


def evaluate_grid(func, indices, workers=None) -> list:
    """[func(n) for n in indices], in order."""
    indices = list(indices)
    workers = resolve_workers(workers)
    if workers == 1 or len(indices) < config.MIN_PARALLEL_GRID:
        return [func(n) for n in indices]

    chunksize = max(1, len(indices) // (workers * 8))
    logger.info(f"Evaluating {len(indices):,} points on {workers} workers (chunks of {chunksize})")
    with Pool(processes=workers) as pool:
        return pool.map(func, indices, chunksize=chunksize)


def from_raw(raw):
    return mpmath.mp.make_mpf(raw)
