import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from primerace import ffpoly as ff
from primerace import races
from primerace.errors import ValidationError
from primerace.lfunc import ingest_classical_zeros, zero_multiset

F3 = ff.FieldSpec.parse("3")


def ff_race(mod, classes, **kw):
    return races.RaceSpec.function_field("3^1", mod, classes, **kw)


def test_prime_count_examples():
    spec = ff_race("t", ["1", "2"])
    t = races.prime_counts(spec, 2)
    assert t.pi(2, (1,)) == 2 and t.pi(2, (2,)) == 3
    assert t.pi(1, (1,)) == 1 and t.pi(1, (2,)) == 1
    assert t.pi(0, (1,)) == 0 and t.pi(0, (2,)) == 0


def test_prime_counts_against_direct_enumeration():
    spec = ff_race("t^2+1", ["1", "t+1"])
    t = races.prime_counts(spec, 5)
    Q = spec.Q.coeffs
    for a in [(1,), (1, 1), (0, 1)]:
        direct = sum(1 for n in range(1, 6) for m in ff.enumerate_monic(n, F3)
                     if ff.is_irreducible(m.coeffs, F3) and ff.poly_mod(m.coeffs, Q, F3) == a)
        assert t.pi(5, a) == direct


def test_conservation_small():
    spec = ff_race("t^2+1", ["1", "2"])
    assert races.conservation_gap(races.prime_counts(spec, 8), spec) == 0


def test_pi_k_examples():
    spec = ff_race("t", ["1", "2"])
    t = races.prime_counts(spec, 3)
    A = [(1,), (2,)]
    for x in range(4):
        assert races.pi_k_counts(spec, A, x, omega=1) == Fraction(t.pi(x, (1,)) + t.pi(x, (2,)), 2)
    assert races.pi_k_counts(spec, [(1,)], 2, omega=2) == 2
    assert races.pi_k_counts(spec, A, 1, omega=1) == Fraction(2, 2)


def test_pi_k_mod2_against_enumeration():
    spec = ff_race("t", ["1", "2"])
    direct = sum(1 for n in range(0, 4) for m in ff.enumerate_monic(n, F3)
                 if ff.omega(m.coeffs, F3) % 2 == 0 and m.coeffs[0] == 1)
    assert races.pi_k_counts(spec, [(1,)], 3, omega=0, mod2=True) == direct


def test_normalized_error_examples():
    spec = ff_race("t", ["2", "1"])
    assert races.normalized_error(spec, 2)[0] == pytest.approx(-2 / 3)
    cl = races.RaceSpec.classical(4, [3, 1])
    assert np.all(races.normalized_error(cl, np.array([2.0, 2.5])) == 0)


def test_explicit_vanishes_for_indistinguishable_classes():
    # over F_3 mod t(t+1)(t+2), 1 and t^2+1 agree on every character carrying a zero
    spec = ff_race("t^3+2t", ["1", "t^2+1"])
    Z = zero_multiset(spec.Q, F3)
    assert Z.entries
    es = races.explicit_spec(spec, Z)
    G = es.spec
    live = np.abs(G.coeffs[:, 0]) > 1e-14
    # only the prime-square term at frequency pi can remain
    assert np.all(np.isclose(G.gammas[live], math.pi))


def test_explicit_matches_enumeration():
    spec = ff_race("t^2+1", ["1", "t+1"])
    ks = np.arange(1, 9)
    E = races.normalized_error(spec, ks)
    exact = races.explicit_error(spec, ks)
    assert np.max(np.abs(exact - E)) < 1e-12
    main = races.explicit_error(spec, ks, correction="none")
    tol = races.main_term_tolerance(spec, ks)
    assert np.all(np.abs(main - E)[:, 0] <= tol)


def test_main_term_error_is_order_one_over_k():
    spec = ff_race("t^2+1", ["1", "t+1"])
    ks = np.array([50, 100, 200, 400])
    gap = np.abs(races.explicit_error(spec, ks, correction="none") - races.explicit_error(spec, ks))[:, 0]
    assert np.all(ks * gap < 5)


def test_classical_single_zero_sinusoid(tmp_path):
    p = tmp_path / "z.csv"
    p.write_text("chi_label,gamma,multiplicity\nchi4,6.0209489,1\n")
    spec = races.RaceSpec.classical(4, [3, 1], str(p))
    ys = np.linspace(5, 30, 4001)
    E = races.explicit_error(spec, np.exp(ys))[:, 0]
    # explicit formula with its 1/phi(q) factor: amplitude 2 |Delta| / (phi |rho|)
    amp = 2 * abs((-1) - 1) / (2 * abs(complex(0.5, 6.0209489)))
    centred = E - E.mean()
    assert (centred.max() - centred.min()) / 2 == pytest.approx(amp, rel=1e-3)


def test_race_spec_validation():
    with pytest.raises(ValidationError):
        ff_race("t", ["0", "1"])
    with pytest.raises(ValidationError):
        ff_race("t", ["1", "1"])
    with pytest.raises(ValidationError):
        races.RaceSpec.classical(4, [2, 1])
    with pytest.raises(ValidationError):
        races.RaceSpec.classical(4, [1, 3, 5])


def test_empty_zero_race_report():
    rep = races.race_report(ff_race("t", ["2", "1"]), k_max=14, samples=1000)
    assert "no critical zeros: E is eventually one-sided" in rep.notes
    nd = rep.empirical["natural_density"]
    assert nd["point"] >= 13 / 14
    assert rep.checks["count_conservation_gap"] == 0


def test_symmetric_orderings_complement():
    a = races.race_report(ff_race("t^2+1", ["1", "2"]), k_max=2000, samples=20000, seed=4)
    b = races.race_report(ff_race("t^2+1", ["2", "1"]), k_max=2000, samples=20000, seed=4)
    tie = max(a.predicted["tie_mass_bounds"])
    total = a.predicted["density"] + b.predicted["density"]
    assert 1 - tie - 4 * a.predicted["sigma"] <= total <= 1 + 4 * a.predicted["sigma"]


def test_ordering_exhaustive():
    # a tie is any pair of equal counts; every pair is adjacent in some ordering
    base = ff_race("t^2+1", ["1", "t", "2"])
    total, tie = 0.0, None
    for perm in itertools.permutations(range(3)):
        E = races.explicit_trajectory(base.permuted(perm), 3000)
        mask, tmask = races.ordering_mask(E, races.ff_ties(E, 3))
        total += mask.mean()
        tie = tmask if tie is None else tie | tmask
    assert tie.mean() > 0
    assert abs(total - 1) <= tie.mean() + 1e-12


def test_tie_fit_rule():
    etas = np.array(races.TIE_ETAS)
    C, ok = races.fit_tie_constant(etas, 0.9 * etas, 10**5)
    assert ok and C == pytest.approx(0.9)
    C, ok = races.fit_tie_constant(etas, np.array([0.2, 0.2, 0.2, 0.2]), 10**5)
    assert not ok


def test_classical_truncation_reported(chi4_zeros):
    spec = races.RaceSpec.classical(4, [3, 1], chi4_zeros)
    cs = races.classical_spec(spec, ingest_classical_zeros(chi4_zeros))
    assert cs.n_zeros >= 500 and cs.height > 700 and cs.tail_variance > 0


@pytest.fixture(scope="module")
def mod4_empirical(chi4_zeros):
    spec = races.RaceSpec.classical(4, [3, 1], chi4_zeros)
    return {X: races.classical_empirical(spec, X)[0] for X in (10**5, 10**6, 10**7)}


@pytest.mark.xfail(strict=True, reason="weighted prime sum and log density differ by about 0.67/log X; "
                                        "at X = 1e7 the gap is 0.042")
def test_weighted_within_002_of_log_density(mod4_empirical):
    e = mod4_empirical[10**7]
    assert abs(e["weighted_prime_density"] - e["log_density"]["point"]) <= 0.02


def test_weighted_log_density_gap_scales_like_inverse_log(mod4_empirical):
    scaled = [abs(e["weighted_prime_density"] - e["log_density"]["point"]) * math.log(X)
              for X, e in mod4_empirical.items()]
    assert max(scaled) - min(scaled) < 0.05
    assert abs(mod4_empirical[10**7]["weighted_prime_density"]
               - mod4_empirical[10**7]["log_density"]["point"]) <= 2 / math.log(10**7)
