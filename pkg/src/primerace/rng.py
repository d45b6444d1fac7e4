"""Counter-based random streams with a thread-count-independent layout.

Every sampling job is cut into fixed chunks of CHUNK draws; chunk i uses its
own Philox stream keyed by (seed, i).  Workers can process chunks in any
order and the concatenated output is bit-identical.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 8192
GENERATOR = "Philox4x64"


def chunk_rng(seed, index):
    key = (int(seed) % 2**64) + (int(index) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def chunk_sizes(n, chunk=CHUNK):
    full, rest = divmod(int(n), chunk)
    return [chunk] * full + ([rest] if rest else [])


def chunked_map(fn, n, seed, threads=1, chunk=CHUNK):
    """Call fn(rng, size) per chunk and return the list of results in order."""
    sizes = chunk_sizes(n, chunk)
    jobs = [(chunk_rng(seed, i), s) for i, s in enumerate(sizes)]
    if threads <= 1 or len(jobs) <= 1:
        return [fn(r, s) for r, s in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))
