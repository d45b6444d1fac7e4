import cmath
import math

import numpy as np
import pytest

from primerace import ffpoly as ff
from primerace.characters import characters, chi_eval, unit_group
from primerace.errors import ValidationError
from primerace.lfunc import (ingest_classical_zeros, inverse_roots, l_polynomial, l_polynomials,
                             psi_by_enumeration, psi_from_roots, zero_multiset)

F2 = ff.FieldSpec.parse("2")
F3 = ff.FieldSpec.parse("3")


def Q(text, fs):
    return ff.MonicPoly.parse(text, fs)


def nonprincipal(text, fs):
    return [c for c in characters(unit_group(Q(text, fs), fs)) if not c.is_principal]


def brute_coeffs(chi):
    fs = chi.group.fs
    return [sum(chi_eval(chi, m.coeffs) for m in ff.enumerate_monic(n, fs))
            for n in range(chi.modulus.degree)]


def test_l_polynomial_examples():
    (chi,) = nonprincipal("t", F3)
    L = l_polynomial(chi)
    assert L.degree == 0 and np.allclose(L.coeffs, [1])
    (chi,) = nonprincipal("t^2", F2)
    assert np.allclose(l_polynomial(chi).coeffs, [1, -1])
    chi = next(c for c in nonprincipal("t^2+1", F3) if abs(c((1, 1)) - cmath.exp(1j * math.pi / 4)) < 1e-12)
    assert np.allclose(l_polynomial(chi).coeffs, [1, math.sqrt(2) - 1j])


@pytest.mark.parametrize("fs,text", [(F2, "t^3+t+1"), (F3, "t^2+1"), (F3, "t^3+2t+1"), (F2, "t^4+t")])
def test_batched_matches_brute_force(fs, text):
    for L in l_polynomials(unit_group(Q(text, fs), fs)):
        ref = brute_coeffs(L.chi)
        ref = ref[:L.degree + 1] + [0] * max(0, L.degree + 1 - len(ref))
        assert np.allclose(L.coeffs, ref[:L.degree + 1], atol=1e-12)
        assert all(abs(c) < 1e-12 for c in brute_coeffs(L.chi)[L.degree + 1:])


def test_inverse_root_examples():
    (chi,) = nonprincipal("t^2", F2)
    roots = inverse_roots(l_polynomial(chi))
    assert len(roots) == 1 and abs(roots[0][0] - 1) < 1e-12
    chi = next(c for c in nonprincipal("t^2+1", F3) if abs(c((1, 1)) - cmath.exp(1j * math.pi / 4)) < 1e-12)
    ((alpha, k),) = inverse_roots(l_polynomial(chi))
    assert abs(alpha - (-math.sqrt(2) + 1j)) < 1e-12 and k == 1
    assert abs(abs(alpha) - math.sqrt(3)) < 1e-12
    (chi,) = nonprincipal("t", F3)
    assert inverse_roots(l_polynomial(chi)) == []


def test_zero_multiset_examples():
    Z = zero_multiset(Q("t^2+1", F3), F3)
    target = math.atan2(1, -math.sqrt(2))
    assert any(abs(e.gamma - target) < 1e-9 for e in Z.entries)
    assert abs(target - 2.52611) < 1e-5
    Z = zero_multiset(Q("t^2", F2), F2)
    assert len(Z) == 0 and len(Z.trivial) == 1
    assert len(zero_multiset(Q("t", F3), F3)) == 0


def test_angles_in_upper_half_and_rh():
    Z = zero_multiset(Q("t^3+t+1", F3), F3)
    assert all(0 <= e.gamma <= math.pi for e in Z.entries)
    assert Z.max_rh_deviation() < 1e-9


@pytest.mark.parametrize("fs,text", [(F2, "t^3+t+1"), (F3, "t^2+1")])
def test_psi_bridge(fs, text):
    Z = zero_multiset(Q(text, fs), fs)
    for chi in nonprincipal(text, fs):
        for n in range(1, 7):
            assert abs(psi_by_enumeration(chi, n) - psi_from_roots(Z.roots[chi.label], n)) < 1e-6


def write(tmp_path, text):
    p = tmp_path / "z.csv"
    p.write_text(text)
    return str(p)


def test_ingest_examples(tmp_path):
    Z = ingest_classical_zeros(write(tmp_path, "chi_label,gamma,multiplicity\nchi4,6.0209489,1\n"))
    assert len(Z) == 1 and Z.entries[0].gamma == pytest.approx(6.0209489)
    assert len(ingest_classical_zeros(write(tmp_path, ""))) == 0
    with pytest.raises(ValidationError):
        ingest_classical_zeros(write(tmp_path, "chi_label,gamma,multiplicity\nchi4,-1.0,1\n"))


@pytest.mark.parametrize("body", [
    "chi4,abc,1\n",
    "chi4,6.02,0\n",
    "chi4,6.02,1\nchi4,6.02,1\n",
    "chi4,10.2,1\nchi4,6.02,1\n",
    "chi4,6.02\n",
])
def test_ingest_rejects_malformed(tmp_path, body):
    with pytest.raises(ValidationError):
        ingest_classical_zeros(write(tmp_path, "chi_label,gamma,multiplicity\n" + body))


def test_bundled_zero_file(chi4_zeros):
    Z = ingest_classical_zeros(chi4_zeros)
    assert len(Z) >= 500
    assert Z.entries[0].gamma == pytest.approx(6.020948904697596, abs=1e-9)
    g = np.array(Z.gammas)
    assert np.all(np.diff(g) > 0)


def test_zero_csv_round_trip(tmp_path):
    Z = zero_multiset(Q("t^2+1", F3), F3)
    path = Z.to_csv(str(tmp_path / "z.csv"))
    rows = open(path).read().splitlines()
    assert rows[0].startswith("chi_label,gamma")
    assert len(rows) - 1 == len(Z.entries) + len(Z.trivial)
