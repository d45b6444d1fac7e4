import math

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from primerace import ffpoly as ff
from primerace.errors import PrecisionError
from primerace.lfunc import ZeroEntry, ZeroMultiset, ingest_classical_zeros, zero_multiset
from primerace.relations import (is_rational_multiple_of_pi, pi_order, relation_lattice,
                                 relation_residual, self_sufficient_zeros)

F2 = ff.FieldSpec.parse("2")
F3 = ff.FieldSpec.parse("3")


def test_rational_multiple_examples():
    assert is_rational_multiple_of_pi(math.pi / 2, 12)
    assert is_rational_multiple_of_pi(math.pi / 3, 12)
    assert not is_rational_multiple_of_pi(math.atan2(1, -math.sqrt(2)), 12)


@pytest.mark.parametrize("num,den", [(1, 1), (1, 5), (2, 7), (3, 8), (5, 12), (1, 9)])
def test_pi_order_recovers_denominator(num, den):
    with mp.workdps(60):
        g = mp.pi * num / den
        # e^{i g} is a primitive root of unity of order 2 den / gcd(num, 2 den)
        assert pi_order(g, 12, dps=60) == 2 * den // math.gcd(num, 2 * den)


def test_relation_lattice_examples():
    with mp.workdps(70):
        lat = relation_lattice([mp.mpf(1), mp.mpf(2)], mode="real", precision=60)
    assert [list(v) for v in lat.basis] == [[2, -1]]
    with mp.workdps(70):
        lat = relation_lattice([mp.pi / 2], mode="integer", precision=60)
    assert [list(v) for v in lat.basis] == [[4, -1]]
    with mp.workdps(70):
        g = mp.atan2(1, -mp.sqrt(2))
        lat = relation_lattice([g], mode="integer", precision=60, H=10**6)
    assert lat.basis == [] or len(lat.basis) == 0


@settings(max_examples=25, deadline=None)
@given(st.integers(-6, 6), st.integers(-6, 6))
def test_planted_relation_found(a, b):
    # frequencies log 2, log 3 and a planted combination a log 2 + b log 3
    with mp.workdps(80):
        base = [mp.log(2), mp.log(3)]
        planted = abs(a * base[0] + b * base[1])
        if planted < 1e-10 or (a, b) in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            return
        freqs = base + [planted]
        lat = relation_lattice(freqs, mode="real", precision=60, H=100)
        assert lat.rank == 1
        (v,) = lat.basis
        assert abs(relation_residual(v, freqs, "real", dps=60)) < 1e-40


def test_precision_guard():
    with pytest.raises(PrecisionError):
        relation_lattice([1.0, 2.0, 3.0, 5.0], mode="real", precision=10, H=10**6)


def test_hypothesis_examples():
    rep = self_sufficient_zeros(zero_multiset(ff.MonicPoly.parse("t^2+1", F3), F3))
    assert rep.verdict == "satisfied"
    rep = self_sufficient_zeros(zero_multiset(ff.MonicPoly.parse("t^2", F2), F2))
    assert rep.verdict == "violated"
    shared = ZeroMultiset("synthetic", "ff", [ZeroEntry(1.0, "a"), ZeroEntry(1.0, "b")],
                          q=3, labels=["a", "b"])
    assert self_sufficient_zeros(shared).verdict == "violated"


def test_prime_modulus_frobenius_sharing():
    # chi and chi^q have the same zeros for prime Q, so no zero is self-sufficient
    rep = self_sufficient_zeros(zero_multiset(ff.MonicPoly.parse("t^3+2t+1", F3), F3))
    assert rep.verdict == "violated"


def test_classical_inconclusive(chi4_zeros):
    rep = self_sufficient_zeros(ingest_classical_zeros(chi4_zeros))
    assert rep.verdict == "inconclusive"
    assert rep.to_json()["height"] == 10**6
