import numpy as np

from primerace.rng import CHUNK, chunk_rng, chunk_sizes, chunked_map


def test_chunk_sizes():
    assert chunk_sizes(0) == []
    assert chunk_sizes(CHUNK) == [CHUNK]
    assert sum(chunk_sizes(3 * CHUNK + 5)) == 3 * CHUNK + 5


def test_streams_distinct_and_reproducible():
    a = chunk_rng(7, 0).random(4)
    assert np.array_equal(a, chunk_rng(7, 0).random(4))
    assert not np.array_equal(a, chunk_rng(7, 1).random(4))
    assert not np.array_equal(a, chunk_rng(8, 0).random(4))


def test_thread_count_does_not_change_output():
    f = lambda r, n: r.normal(size=n)
    one = np.concatenate(chunked_map(f, 50_000, seed=3, threads=1))
    many = np.concatenate(chunked_map(f, 50_000, seed=3, threads=8))
    assert np.array_equal(one, many) and one.size == 50_000
