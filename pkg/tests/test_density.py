import math

import numpy as np
import pytest

from primerace.density import (log_density, log_density_of_steps, natural_density, sieve_primes,
                               weighted_prime_density)
from primerace.errors import ValidationError


def test_natural_density_examples():
    K = 10**5
    assert natural_density(lambda k: np.ones(k.size, bool), K).point == 1.0
    even = natural_density(lambda k: k % 2 == 0, K)
    assert abs(even.point - 0.5) <= 1 / K
    assert abs(natural_density(lambda k: np.cos(k) > 0, K).point - 0.5) <= 0.01


def test_natural_density_bounds_order():
    rng = np.random.default_rng(0)
    d = natural_density(rng.random(5000) < 0.3)
    assert d.lower <= d.point <= d.upper


def test_log_density_examples():
    Y = 1e4
    assert log_density(lambda y: y >= 0, Y).point == pytest.approx(1.0)
    sq = log_density(lambda y: np.floor(y) % 2 == 0, Y)
    assert abs(sq.point - 0.5) <= 2 / Y
    arc = log_density(lambda y: np.cos(y) > 0.5, Y)
    assert abs(arc.point - 1 / 3) <= 0.01


def test_log_density_against_direct_integration():
    # oracle: fine Riemann sum in y
    Y = 200.0
    f = lambda y: np.sin(y) + 0.3 * np.sin(math.sqrt(2) * y) > 0.2
    y = np.linspace(0, Y, 2_000_001)
    ref = f(0.5 * (y[1:] + y[:-1])).mean()
    assert abs(log_density(f, Y).point - ref) < 1e-4


def test_log_density_of_steps_matches_grid():
    breaks = np.array([2.0, 5.0, 11.0, 40.0])
    states = np.array([True, False, True, False])
    X = 100.0
    ref = (math.log(5 / 2) + math.log(40 / 11)) / math.log(X)
    assert log_density_of_steps(breaks, states, X).point == pytest.approx(ref)


def test_sieve():
    p = sieve_primes(100)
    assert p.tolist()[:10] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29] and p.size == 25
    assert sieve_primes(10**6).size == 78498


def test_weighted_examples():
    X = 10**7
    primes = sieve_primes(X)
    full = weighted_prime_density(np.ones(primes.size, bool), X, primes)
    assert abs(full - 1) <= 2 / math.log(X)
    assert weighted_prime_density(np.zeros(primes.size, bool), X, primes) == 0.0
    # oracle: plain summation
    assert full == pytest.approx(sum(math.log(p) / p for p in primes[:1000].tolist()) / math.log(X)
                                 + float(np.sum(np.log(primes[1000:]) / primes[1000:])) / math.log(X))


def test_validation():
    with pytest.raises(ValidationError):
        log_density(lambda y: y > 0, -1)
    with pytest.raises(ValidationError):
        weighted_prime_density([], 2)
