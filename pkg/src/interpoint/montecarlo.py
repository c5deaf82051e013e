"""Deterministic chunked Monte Carlo on counter-based substreams.

Work of size ``n`` is cut into fixed-size chunks; chunk ``i`` draws from a
Philox generator keyed by ``(seed, tag, i)``.  Per-chunk partial results are
summed in chunk order, so the outcome does not depend on the thread count.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 1 << 16


def substream(seed, *key):
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(k) for k in key)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def chunk_sizes(n, chunk=CHUNK):
    full, rest = divmod(int(n), chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_chunks(func, n, seed, tag=0, threads=1, chunk=CHUNK):
    """Sum ``func(rng, size)`` over the chunks of ``n`` draws."""
    sizes = chunk_sizes(n, chunk)
    jobs = [(substream(seed, tag, i), size) for i, size in enumerate(sizes)]
    if threads and threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda job: func(*job), jobs))
    else:
        parts = [func(*job) for job in jobs]
    return sum(np.asarray(p, dtype=float) for p in parts)


def uniform_sphere(rng, size, dim):
    z = rng.standard_normal((size, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)
