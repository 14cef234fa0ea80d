"""Counter-based random streams and deterministic chunked Monte Carlo.

Each chunk of a Monte Carlo run draws from its own Philox stream keyed by
``(seed, purpose, chunk_index)``.  Chunk results are always gathered in
chunk order, so the output depends on the seed and the chunk size but never
on how many workers executed the chunks.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

DEFAULT_CHUNK = 65_536


def _purpose_key(purpose: str | int) -> int:
    if isinstance(purpose, int):
        return purpose
    return zlib.crc32(purpose.encode("utf-8"))


def substream(seed: int, *key: str | int) -> np.random.Generator:
    """Independent generator for ``seed`` and a hierarchical key."""
    spawn_key = tuple(_purpose_key(k) for k in key)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(ss))


def chunk_sizes(n_total: int, chunk: int = DEFAULT_CHUNK) -> list[int]:
    if n_total < 0:
        raise ValueError("n_total must be nonnegative")
    full, rest = divmod(n_total, chunk)
    return [chunk] * full + ([rest] if rest else [])


def run_chunked(
    fn: Callable[[int, np.random.Generator], T],
    n_total: int,
    seed: int,
    purpose: str | int,
    *,
    chunk: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> list[T]:
    """Evaluate ``fn(size, rng)`` over fixed-size chunks; results in chunk order."""
    sizes = chunk_sizes(n_total, chunk)
    jobs = [(size, substream(seed, purpose, i)) for i, size in enumerate(sizes)]
    if workers <= 1 or len(jobs) <= 1:
        return [fn(size, rng) for size, rng in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def concat(parts: Sequence[np.ndarray]) -> np.ndarray:
    if not parts:
        return np.empty(0)
    return np.concatenate(parts, axis=0)
