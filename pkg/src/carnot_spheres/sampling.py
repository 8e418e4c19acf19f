"""Deterministic, worker-count independent sampling.

Work is cut into fixed-size chunks and every chunk draws from its own
generator seeded by ``(seed, stream, chunk_index)``.  Chunks are reduced in
index order, so results do not depend on how many workers ran them.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

CHUNK = 4096
T = TypeVar("T")


def chunk_rng(seed: int, chunk: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(stream), int(chunk)]))


def chunk_sizes(total: int, chunk: int = CHUNK) -> list[int]:
    full, rest = divmod(int(total), chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_chunks(func: Callable[[int, int], T], total: int, workers: int = 1,
               chunk: int = CHUNK) -> list[T]:
    """Call ``func(chunk_index, size)`` for every chunk; results in chunk order."""
    sizes = chunk_sizes(total, chunk)
    if workers <= 1 or len(sizes) <= 1:
        return [func(i, s) for i, s in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda args: func(*args), enumerate(sizes)))


def map_items(func: Callable[[T], object], items: Sequence[T], workers: int = 1) -> list:
    if workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def unit_vectors(rng: np.random.Generator, size: int, dim: int) -> np.ndarray:
    v = rng.normal(size=(size, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def fibonacci_sphere(count: int) -> np.ndarray:
    """Nearly uniform points on the unit 2-sphere."""
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = np.pi * (1.0 + 5**0.5) * i
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def sphere_directions(dim: int, count: int, seed: int = 0) -> np.ndarray:
    """Deterministic direction set on ``S^{dim-1}``; exact grids for dim <= 3."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        a = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(a), np.sin(a)])
    if dim == 3:
        return fibonacci_sphere(count)
    return unit_vectors(np.random.default_rng(seed), count, dim)
