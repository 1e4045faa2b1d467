"""
Deterministic parallel helpers.

Work is split into items whose results do not depend on scheduling: a thread
pool maps them in input order, and random streams are keyed by block index so
a Monte-Carlo estimate depends only on (seed, sample count).
"""

import os
from typing import Callable, Iterable, List, Optional, TypeVar

import numpy as np
from joblib import Parallel, delayed

T = TypeVar("T")
R = TypeVar("R")

# Samples per random-stream block; fixed so results never depend on thread count
SAMPLE_BLOCK = 16384


def resolve_threads(threads: Optional[int] = None) -> int:
    """Explicit value, else WTKIN_THREADS, else 1"""
    if threads is None:
        threads = int(os.getenv("WTKIN_THREADS", "1"))
    return max(1, int(threads))


def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """Apply fn to every item and return results in input order"""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    return Parallel(n_jobs=threads, backend="threading")(delayed(fn)(item) for item in items)


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Counter-based generator for one sample block"""
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(block),))
    return np.random.Generator(np.random.Philox(sequence))


def block_sizes(n_samples: int, block: int = SAMPLE_BLOCK) -> List[int]:
    full, rest = divmod(int(n_samples), block)
    return [block] * full + ([rest] if rest else [])
