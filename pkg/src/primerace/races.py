"""Prime races: exact counts, normalized errors, explicit formulas, and reports.

Conventions used throughout:

* A race with classes (a_0, ..., a_D) has error vector
  E_d = w * (pi(a_d) - pi(a_{d-1})), d = 1..D, with weight
  w = k q^{-k/2} over F_q[t] (deg N <= k, i.e. x = q^k) and
  w = log x / sqrt x over the integers.
* The ordering event is pi(a_0) > pi(a_1) > ... > pi(a_D), i.e. every
  coordinate of E is strictly negative.  Predictions are made for the
  ordering function G = -E, whose positivity is the event.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp
import numpy as np
from scipy.signal import lfilter

from . import ffpoly as ff
from . import torus
from .characters import DirichletGroup, characters, unit_group
from .cyclotomic import euler_phi
from .density import (log_density_of_steps, natural_density, running_average, sieve_primes,
                      weighted_prime_density)
from .errors import ComputationError, ResourceError, ValidationError
from .lfunc import ingest_classical_zeros, zero_multiset
from .relations import MAX_SEARCH_DIM, relation_lattice, self_sufficient_zeros

FF_NORMALIZATION = "E_d(k) = k q^(-k/2) (pi(k;Q,a_d) - pi(k;Q,a_(d-1))), pi(k) counting deg <= k"
CLASSICAL_NORMALIZATION = "E_d(x) = (log x / sqrt x) (pi(x;q,a_d) - pi(x;q,a_(d-1)))"
ORDERING = "pi(a_0) > pi(a_1) > ... > pi(a_D), i.e. E_d < 0 for every d (strict)"
EPSILON = 0.01
TIE_ETAS = (0.2, 0.1, 0.05, 0.02)
NEGLIGIBLE = 1e-20


@dataclass
class RaceSpec:
    mode: str
    classes: tuple
    fs: ff.FieldSpec | None = None
    Q: ff.MonicPoly | None = None
    q: int | None = None
    zeros: str | None = None
    omega: int | None = None
    omega_mod2: bool = False

    def __post_init__(self):
        if self.mode not in ("ff", "classical"):
            raise ValidationError(f"mode must be 'ff' or 'classical', got {self.mode!r}")
        if self.mode == "ff":
            if self.fs is None or self.Q is None:
                raise ValidationError("function-field races need a field and a modulus")
            if self.Q.degree < 1:
                raise ValidationError("modulus must have positive degree")
            Qc = self.Q.coeffs
            cls = []
            for a in self.classes:
                r = ff.poly_mod(tuple(a), Qc, self.fs)
                if not r or ff.degree(ff.gcd(r, Qc, self.fs)) != 0:
                    raise ValidationError(f"class {ff.poly_str(tuple(a))} is not invertible mod {self.Q}")
                cls.append(r)
            self.classes = tuple(cls)
            phi = self.group.size
        else:
            if self.q is None or self.q < 3:
                raise ValidationError("classical races need an integer modulus q >= 3")
            cls = []
            for a in self.classes:
                a = int(a) % self.q
                if math.gcd(a, self.q) != 1:
                    raise ValidationError(f"class {a} is not coprime to {self.q}")
                cls.append(a)
            self.classes = tuple(cls)
            phi = euler_phi(self.q)
        if len(set(self.classes)) != len(self.classes):
            raise ValidationError("race classes must be pairwise distinct")
        if not 1 <= self.D <= phi - 1:
            raise ValidationError(f"a race needs between 2 and {phi} classes")
        if self.omega is not None and self.omega < 0:
            raise ValidationError("omega must be nonnegative")

    @classmethod
    def function_field(cls, field_tag, modulus, classes, omega=None, omega_mod2=False):
        fs = field_tag if isinstance(field_tag, ff.FieldSpec) else ff.FieldSpec.parse(field_tag)
        Q = modulus if isinstance(modulus, ff.MonicPoly) else ff.MonicPoly.parse(modulus, fs)
        cl = [ff.parse_poly(c, fs) if isinstance(c, str) else tuple(c) for c in classes]
        return cls("ff", tuple(cl), fs=fs, Q=Q, omega=omega, omega_mod2=omega_mod2)

    @classmethod
    def classical(cls, q, classes, zeros=None):
        return cls("classical", tuple(int(a) for a in classes), q=int(q), zeros=zeros)

    @property
    def D(self):
        return len(self.classes) - 1

    @property
    def group(self):
        return unit_group(self.Q, self.fs)

    def permuted(self, perm):
        return RaceSpec(self.mode, tuple(self.classes[i] for i in perm), self.fs, self.Q, self.q,
                        self.zeros, self.omega, self.omega_mod2)

    def class_labels(self):
        if self.mode == "ff":
            return [ff.poly_str(a) for a in self.classes]
        return [str(a) for a in self.classes]

    def to_json(self):
        out = {"mode": self.mode, "classes": self.class_labels()}
        if self.mode == "ff":
            out.update(field=self.fs.tag, modulus=str(self.Q))
            if self.omega is not None:
                out.update(omega=self.omega, omega_mod2=self.omega_mod2)
        else:
            out.update(q=self.q, zeros=self.zeros)
        return out


# --------------------------------------------------------------------------
# exact counts over F_q[t]


@dataclass
class CountTable:
    k_max: int
    residues: np.ndarray            # unit residue codes, ascending
    per_degree: np.ndarray          # (k_max + 1, n_units) irreducibles of degree k in each class
    q: int
    d: int

    @property
    def cumulative(self):
        return np.cumsum(self.per_degree, axis=0)

    def column(self, poly):
        code = ff.residue_code(poly, self.q, self.d)
        i = np.searchsorted(self.residues, code)
        if i >= self.residues.size or self.residues[i] != code:
            raise ValidationError(f"{ff.poly_str(poly)} is not an invertible class")
        return int(i)

    def pi(self, k, poly):
        return int(self.cumulative[k, self.column(poly)])

    def class_counts(self, classes):
        """Cumulative counts (k_max + 1, len(classes))."""
        cols = [self.column(a) for a in classes]
        return self.cumulative[:, cols]

    def totals(self):
        return self.cumulative.sum(axis=1)


def _ramified(Q, fs):
    """Degrees of the distinct irreducible factors of Q."""
    return [P.degree for P, _ in ff.factor(Q, fs)]


def prime_counts(spec, k_max):
    """Exact pi(k; Q, a) for every invertible class a and k <= k_max."""
    if spec.mode != "ff":
        raise ValidationError("prime_counts needs a function-field race")
    fs, Q = spec.fs, spec.Q
    ff.check_cap(k_max, fs)
    group = spec.group
    units = np.sort(group.units)
    size = fs.q ** Q.degree
    pos = np.full(size, -1, dtype=np.int64)
    pos[units] = np.arange(units.size)
    per = np.zeros((k_max + 1, units.size), dtype=np.int64)
    for n in range(1, k_max + 1):
        res = ff.residues_of_codes(ff.irreducible_codes(n, fs), n, Q, fs)
        idx = pos[res]
        per[n] = np.bincount(idx[idx >= 0], minlength=units.size)
    return CountTable(k_max, units, per, fs.q, Q.degree)


def conservation_gap(table, spec):
    """Largest |sum_a pi(k;Q,a) - #{irreducible P, deg P <= k, P not dividing Q}| over k."""
    ram = _ramified(spec.Q, spec.fs)
    expect = np.array([sum(ff.count_irreducible(n, spec.fs) - ram.count(n) for n in range(1, k + 1))
                       for k in range(table.k_max + 1)])
    return int(np.abs(table.totals() - expect).max())


def pi_k_counts(spec, A_set, x, omega=None, mod2=None):
    """(1/|A|) #{N monic, deg N <= x, Omega(N) = omega, N mod Q in A} as a Fraction.

    With ``mod2`` the condition is Omega(N) = omega (mod 2) instead.
    """
    if spec.mode != "ff":
        raise ValidationError("pi_k_counts needs a function-field race")
    omega = spec.omega if omega is None else omega
    omega = 1 if omega is None else omega
    mod2 = spec.omega_mod2 if mod2 is None else mod2
    fs, Q = spec.fs, spec.Q
    ff.check_cap(x, fs)
    A = [ff.poly_mod(ff.parse_poly(a, fs) if isinstance(a, str) else tuple(a), Q.coeffs, fs) for a in A_set]
    if not A:
        raise ValidationError("the class set A must be nonempty")
    group = spec.group
    codes = set()
    for a in A:
        if group.dlog(a) is None:
            raise ValidationError(f"class {ff.poly_str(a)} is not invertible")
        codes.add(group.residue_code(a))
    want = np.array(sorted(codes))
    total = 0
    for n in range(0, x + 1):
        om = ff.omega_array(n, fs)
        ok = (om % 2 == omega % 2) if mod2 else (om == omega)
        if not ok.any():
            continue
        sel = np.flatnonzero(ok)
        res = ff.residues_of_codes(sel, n, Q, fs)
        total += int(np.isin(res, want).sum())
    return Fraction(total, len(codes))


def omega_counts(spec, k_max):
    """Cumulative Pi-counts (k_max + 1, D + 1) for the race's omega and classes."""
    out = np.zeros((k_max + 1, len(spec.classes)), dtype=object)
    for j, a in enumerate(spec.classes):
        for k in range(k_max + 1):
            out[k, j] = pi_k_counts(spec, [a], k)
    return out


# --------------------------------------------------------------------------
# normalized errors


def _differences(counts):
    c = np.asarray(counts, dtype=float)
    return c[..., 1:] - c[..., :-1]


def ff_weight(k, q):
    k = np.asarray(k, dtype=float)
    return k * np.exp(-0.5 * k * math.log(q))


def normalized_error(spec, k, table=None, primes=None):
    """E(k) (function field) or E(x) (classical) for scalar or array argument."""
    if spec.mode == "ff":
        k = np.asarray(k)
        kmax = int(k.max()) if k.size else 0
        if table is None or table.k_max < kmax:
            table = prime_counts(spec, kmax)
        counts = table.class_counts(spec.classes)[k]
        return ff_weight(k, spec.fs.q)[..., None] * _differences(counts)
    x = np.asarray(k, dtype=float)
    X = int(max(3, x.max())) if x.size else 3
    if primes is None or primes.size == 0 or primes[-1] < X and X > 2:
        primes = sieve_primes(X)
    counts = np.stack([np.searchsorted(primes[primes % spec.q == a], x, side="right")
                       for a in spec.classes], axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(x > 1, np.log(np.maximum(x, 1.0)) / np.sqrt(np.maximum(x, 1.0)), 0.0)
    return w[..., None] * _differences(counts)


# --------------------------------------------------------------------------
# explicit formula over F_q[t]


def _chi_eval_residue(chi, a):
    k = int(chi.exponent_table[chi.group.residue_code(a)])
    return 0j if k < 0 else complex(np.exp(2j * np.pi * k / chi.m))


def _deltas(spec, chars):
    vals = np.array([[np.conj(_chi_eval_residue(c, a)) for a in spec.classes] for c in chars])
    if not chars:
        return np.zeros((0, spec.D), complex)
    return vals[:, 1:] - vals[:, :-1]


def bias_constants(q):
    """Constant and (-1)^k parts of the prime-square term, k q^{-k/2} sum_{2m <= k} q^m / (2m) -> A + B (-1)^k."""
    s = math.sqrt(q)
    return (q + s) / (2 * (q - 1)), (q - s) / (2 * (q - 1))


@dataclass
class ExplicitSpec:
    spec: torus.APFunctionSpec
    hp_gammas: list
    sources: list


def explicit_spec(race, Z, dps=60):
    """APFunctionSpec of the asymptotic explicit formula for E (integer mode).

    Each critical inverse root alpha = sqrt(q) e^{i theta} of L(u, chi)
    contributes -(1/phi) (conj chi(a_d) - conj chi(a_{d-1})) m alpha/(alpha - 1)
    e^{i k theta}; real characters add the prime-square term
    -(1/phi) Delta (A + B (-1)^k).
    """
    group = race.group
    phi = group.size
    chars = [c for c in characters(group) if not c.is_principal]
    delta = {c.label: row for c, row in zip(chars, _deltas(race, chars))}
    real = [c for c in chars if c.is_real]
    D = race.D
    offset = np.zeros(D, complex)
    gam, coef, hp, src = [], [], [], []
    entries = list(Z.entries)
    mp_angles = Z.gammas_mp(dps) if entries else []
    for e, g_hp in zip(entries, mp_angles):
        a = e.alpha
        c = -(1.0 / phi) * delta[e.chi_label] * e.multiplicity * (a / (a - 1))
        if e.gamma == 0.0:
            offset += c
            continue
        if e.gamma >= math.pi:
            c = c / 2
        gam.append(min(e.gamma, math.pi))
        coef.append(c)
        hp.append(mp.pi if e.gamma >= math.pi else g_hp)
        src.append(e.chi_label)
    A, B = bias_constants(race.fs.q)
    for c in real:
        offset += -(1.0 / phi) * delta[c.label] * A
        if B and np.any(delta[c.label]):
            gam.append(math.pi)
            coef.append(-(1.0 / phi) * delta[c.label] * B / 2)
            hp.append(mp.pi)
            src.append(f"{c.label}:prime-squares")
    G = torus.APFunctionSpec.gather(np.array(gam), np.array(coef).reshape(len(gam), D), "integer",
                                    offset.real)
    # high-precision representative of each gathered frequency
    reps = []
    for g in G.gammas:
        i = int(np.argmin([abs(float(h) - g) for h in hp]))
        reps.append(hp[i])
    return ExplicitSpec(G, reps, src)


def explicit_error(race, k, Z=None, correction="exact"):
    """E(k) from the zeros.

    ``correction="exact"`` evaluates the complete explicit formula (all
    prime powers, ramified primes and trivial zeros), which reproduces
    normalized_error to rounding; ``"none"`` evaluates only the almost
    periodic main part, which differs from it by O(1/k).  In classical mode
    the truncated main sum is returned.
    """
    if race.mode == "classical":
        if Z is None:
            Z = ingest_classical_zeros(race.zeros)
        es = classical_spec(race, Z)
        return es.spec.evaluate(np.log(np.asarray(k, dtype=float)))
    if Z is None:
        Z = zero_multiset(race.Q, race.fs)
    k = np.asarray(k)
    if correction == "none":
        return explicit_spec(race, Z).spec.evaluate(k)
    if correction != "exact":
        raise ValidationError("correction must be 'exact' or 'none'")
    traj = explicit_trajectory(race, int(k.max()), Z)
    return traj[k - 1]


def main_term_tolerance(race, k):
    """Declared bound for |main part - E(k)|: the O(1/k) tail of the zero sum."""
    Z = zero_multiset(race.Q, race.fs)
    deg = max((L.degree for L in Z.lpolys.values()), default=0)
    q = race.fs.q
    s = math.sqrt(q)
    # |sum_{n<=k} a^n/n - a^{k+1}/(k(a-1))| <= |a|^k (2/k^2) s/(s-1)^2 per root, plus the
    # prime-square tail and lower prime-power terms
    k = np.asarray(k, dtype=float)
    return (deg + 2) * (s / (s - 1)) ** 2 / np.maximum(k, 1) + 4.0 * k * q ** (-k / 6)


def explicit_trajectory(race, k_max, Z=None):
    """E(k) for k = 1..k_max from the full explicit formula.

    Works with s_n(chi) = pi_n(chi) q^{-n/2} where pi_n(chi) is the sum of
    chi(P) over irreducible P of degree n, using
    n pi_n(chi) = psi_n(chi) - sum_{d | n, d < n} d pi_d(chi^{n/d})
    and psi_n(chi) = -sum alpha^n over all inverse roots of L(u, chi).
    Terms below 1e-20 relative size are dropped.
    """
    if race.mode != "ff":
        raise ValidationError("explicit_trajectory needs a function-field race")
    if Z is None:
        Z = zero_multiset(race.Q, race.fs)
    if not Z.complete:
        raise ComputationError("the zero multiset is incomplete")
    group = race.group
    fs, Q = race.fs, race.Q
    q = fs.q
    lq = math.log(q)
    chars = characters(group)
    nchar = len(chars)
    orders = group.orders
    index = {c.exps: i for i, c in enumerate(chars)}
    exponent = group.exponent
    # pw[i, j] = index of chi_i^j
    pw = np.array([[index[tuple((e * j) % n for e, n in zip(c.exps, orders))] for j in range(exponent)]
                   for c in chars], dtype=np.int64)
    principal = np.array([c.is_principal for c in chars])
    # psi_n(chi) q^{-n/2} as a sum over normalized roots
    root_w, root_z, root_c = [], [], []
    sq = math.sqrt(q)
    for i, c in enumerate(chars):
        if c.is_principal:
            continue
        for a, m in Z.roots.get(c.label, []):
            z = a / sq
            if abs(abs(a) - sq) < 1e-6:
                z = z / abs(z)
            root_w.append(m)
            root_z.append(z)
            root_c.append(i)
    root_w = np.array(root_w, float)
    root_z = np.array(root_z, complex)
    root_c = np.array(root_c, dtype=np.int64)
    ram = _ramified(Q, fs)
    s = np.zeros((k_max + 1, nchar), complex)      # nonprincipal: pi_n q^{-n/2}
    r0 = np.zeros(k_max + 1)                         # principal: pi_n q^{-n}
    zpow = np.ones_like(root_z)
    cutoff = -math.log(NEGLIGIBLE)
    divs = [[] for _ in range(k_max + 1)]
    for d in range(1, k_max // 2 + 1):
        for n in range(2 * d, k_max + 1, d):
            divs[n].append(d)
    for n in range(1, k_max + 1):
        zpow = zpow * root_z
        psi = np.zeros(nchar, complex)
        if root_c.size:
            np.add.at(psi, root_c, -root_w * zpow)
        acc = psi
        for d in divs[n]:
            # principal terms scale like q^{d - n/2}, the others like q^{(d - n)/2}
            pe, ne = (d - n / 2) * lq, (d - n) / 2 * lq
            if pe < -cutoff and ne < -cutoff:
                continue
            tgt = pw[:, (n // d) % exponent]
            p_term = d * r0[d] * math.exp(pe) if pe > -cutoff else 0.0
            term = np.where(principal[tgt], p_term, d * s[d, tgt] * math.exp(ne))
            acc = acc - term
        s[n] = acc / n
        s[n, principal] = 0.0
        # principal character: exact count of irreducibles of degree n coprime to Q
        tot = (1.0 + sum(ff.mobius(n // d) * math.exp((d - n) * lq) for d in divs[n]
                         if (n - d) * lq < cutoff)) / n
        r0[n] = tot - ram.count(n) * math.exp(-n * lq)
    chars_np = [c for c in chars if not c.is_principal]
    delta = _deltas(race, chars_np)
    phi = group.size
    cols = np.flatnonzero(~principal)
    ds = (s[1:, cols] @ delta).real / phi          # (k_max, D): Delta pi_n q^{-n/2}
    # S_k = sum_{n<=k} Delta pi_n q^{-k/2} = q^{-1/2} S_{k-1} + ds_k
    S = lfilter([1.0], [1.0, -math.exp(-0.5 * lq)], ds, axis=0)
    ks = np.arange(1, k_max + 1, dtype=float)
    return ks[:, None] * S


# --------------------------------------------------------------------------
# classical explicit formula


@dataclass
class ClassicalSpec:
    spec: torus.APFunctionSpec
    height: float
    n_zeros: int
    tail_variance: float


def classical_spec(race, Z):
    """Real-mode spec for E(e^y): offset -(1/phi) sum_{chi real} Delta(chi) and
    c = -(1/phi) Delta(chi) m / (1/2 + i gamma) for every listed zero gamma > 0.
    """
    G = DirichletGroup(race.q)
    phi = G.size
    if not Z.entries:
        raise ValidationError("classical explicit formula needs a nonempty zero file")
    lookup = {}
    for lab in {e.chi_label for e in Z.entries}:
        lookup[lab] = G.character(lab)
    chars = [c for c in G.characters() if not c.is_principal]

    def delta(c):
        v = [np.conj(c(a)) for a in race.classes]
        return np.array([v[d] - v[d - 1] for d in range(1, len(v))])

    offset = np.zeros(race.D)
    for c in chars:
        if c.is_real:
            offset += -(1.0 / phi) * delta(c).real
    gam, coef = [], []
    for e in Z.entries:
        if e.gamma <= 0:
            continue
        c = lookup[e.chi_label]
        gam.append(e.gamma)
        coef.append(-(1.0 / phi) * delta(c) * e.multiplicity / complex(0.5, e.gamma))
    spec = torus.APFunctionSpec.gather(np.array(gam), np.array(coef).reshape(len(gam), race.D), "real", offset)
    T = float(max(gam))
    # variance of the omitted zeros gamma > T, using N'(t) ~ log(q t / 2 pi) / 2 pi per character
    amp = max(float(np.abs(delta(c)).max()) for c in chars) / phi
    nc = len({e.chi_label for e in Z.entries})
    tail = nc * 2 * amp**2 * (math.log(race.q * T / (2 * math.pi)) + 1) / (2 * math.pi * T)
    return ClassicalSpec(spec, T, len(Z.entries), tail)


# --------------------------------------------------------------------------
# orderings and ties


def ordering_mask(E, ties=None):
    """Strict ordering event per time step, and the tie indicator."""
    E = np.atleast_2d(E)
    tie = np.zeros(E.shape[0], bool) if ties is None else np.any(ties, axis=1)
    return np.all(E < 0, axis=1) & ~tie, tie


def ff_ties(E, q):
    """|E_d(k)| < (1/2) k q^{-k/2} means the integer count difference is 0."""
    ks = np.arange(1, E.shape[0] + 1, dtype=float)
    return np.abs(E) < 0.5 * ff_weight(ks, q)[:, None]


def tie_fractions(E, etas=TIE_ETAS):
    """Fraction of steps with |E_d| < eta for each eta and coordinate: (len(etas), D)."""
    E = np.atleast_2d(E)
    return np.array([[float(np.mean(np.abs(E[:, d]) < eta)) for d in range(E.shape[1])] for eta in etas])


def fit_tie_constant(etas, fracs, n):
    """Least-squares C for frac ~ C eta, and whether every point obeys frac <= 1.25 C eta + 3 sigma."""
    etas = np.asarray(etas, float)
    fracs = np.asarray(fracs, float)
    C = float(np.dot(etas, fracs) / np.dot(etas, etas))
    sig = np.sqrt(np.maximum(fracs * (1 - fracs), 1.0 / n) / n)
    ok = bool(np.all(fracs <= 1.25 * C * etas + 3 * sig))
    return C, ok


# --------------------------------------------------------------------------
# reports


@dataclass
class DensityReport:
    spec: dict
    ordering: str
    normalization: str
    empirical: dict
    predicted: dict | None
    ties: dict
    hypothesis: dict | None
    subtorus: dict | None
    checks: dict
    notes: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict, repr=False)

    def to_json(self):
        out = {
            "spec": self.spec,
            "ordering": self.ordering,
            "normalization": self.normalization,
            "empirical": self.empirical,
            "predicted": self.predicted,
            "ties": self.ties,
            "hypothesis": self.hypothesis,
            "subtorus": self.subtorus,
            "checks": self.checks,
            "notes": self.notes,
        }
        out.update(self.extra)
        return out


def _mu_bracket(measure, eps):
    G = measure.samples
    p_hi = measure.probability(np.all(G > -eps, axis=1))
    p_lo = measure.probability(np.all(G > eps, axis=1))
    p0 = measure.probability(np.all(G > 0, axis=1))
    n = measure.n_samples
    sig = (lambda p: 0.0 if measure.exact else math.sqrt(max(p * (1 - p), 1.0 / n) / n))
    return p0, p_lo, p_hi, sig(p_lo), sig(p_hi), sig(p0)


def _hp_lattice(es, H=10**6):
    """Relation lattice of the gathered frequencies at sufficient precision."""
    n = len(es.hp_gammas) + 1
    prec = max(50, int(math.ceil((n - 1) * math.log10(H) + 8)))
    with mp.workdps(prec + 10):
        freqs = [mp.mpf(g) for g in es.hp_gammas]
    return relation_lattice(freqs, mode="integer", precision=prec, H=H)


def ordering_function(spec, Z=None, H=10**6):
    """(G, subtorus, checks, notes) for the ordering function G = -E of a race."""
    checks, notes = {}, []
    if spec.mode == "classical":
        Z = Z if Z is not None else ingest_classical_zeros(spec.zeros)
        cs = classical_spec(spec, Z)
        G = torus.APFunctionSpec(cs.spec.gammas, -cs.spec.coeffs, "real", -cs.spec.offset)
        return G, torus.build_subtorus(G.gammas, "real", assume_independent=True), checks, notes
    Z = Z if Z is not None else zero_multiset(spec.Q, spec.fs)
    es = explicit_spec(spec, Z)
    G = torus.APFunctionSpec(es.spec.gammas, -es.spec.coeffs, "integer", -es.spec.offset) \
        if es.spec.N else torus.APFunctionSpec(np.zeros(0), np.zeros((0, spec.D)), "integer", -es.spec.offset)
    if G.N > MAX_SEARCH_DIM:
        sub = torus.build_subtorus(G.gammas, "integer", assume_independent=True)
        notes.append(f"{G.N} frequencies exceed the relation search limit; full torus assumed, "
                     "prediction unreliable")
    else:
        lat = _hp_lattice(es, H)
        sub = torus.build_subtorus(G.gammas.tolist(), "integer", lattice=lat)
        checks["orbit_on_subtorus"] = torus.check_orbit(G.gammas, sub) if G.N else True
    return G, sub, checks, notes


def race_report(spec, k_max=None, X_max=None, samples=10**5, seed=0, threads=1, eps=EPSILON,
                count_check=12, H=10**6, precision=50):
    """Full pipeline from zeros to an empirical-versus-predicted density report."""
    if spec.mode == "ff":
        return _ff_report(spec, k_max or 12, samples, seed, threads, eps, count_check, H, precision)
    return _classical_report(spec, X_max or 10**7, samples, seed, threads, eps, H, precision)


def _prediction(G, sub, samples, seed, threads, eps):
    meas = torus.sample_measure(G, sub, samples, seed, threads)
    p0, p_lo, p_hi, s_lo, s_hi, s0 = _mu_bracket(meas, eps)
    ties = torus.tie_bounds(G, sub, np.zeros(G.D), 100, n_samples=min(samples, 10**5), seed=seed)
    ci = (p0, p0) if meas.exact else torus.wilson_interval(p0, meas.n_samples)
    pred = {
        "density": p0,
        "ci95": list(ci),
        "sigma": s0,
        "mu_above_plus_eps": p_lo,
        "mu_above_minus_eps": p_hi,
        "sigma_plus_eps": s_lo,
        "sigma_minus_eps": s_hi,
        "epsilon": eps,
        "samples": meas.n_samples,
        "exact_finite_measure": meas.exact,
        "seed": seed,
        "generator": meas.generator,
        "tie_mass_bounds": ties,
    }
    return pred, meas


def _ff_report(spec, k_max, samples, seed, threads, eps, count_check, H, precision):
    notes = [f"normalization convention: {FF_NORMALIZATION}"]
    fs = spec.fs
    if spec.omega is not None:
        k_max = min(k_max, ff.enumeration_cap(fs))
        counts = omega_counts(spec, k_max)
        diff = np.array([[float(counts[k, j] - counts[k, j - 1]) for j in range(1, counts.shape[1])]
                         for k in range(1, k_max + 1)])
        E = ff_weight(np.arange(1, k_max + 1), fs.q)[:, None] * diff
        tie = diff == 0
        mask, tmask = ordering_mask(E, tie)
        nd = natural_density(mask)
        notes.append("omega races: empirical counts only, no torus prediction")
        return DensityReport(
            spec.to_json(), ORDERING, FF_NORMALIZATION,
            {"source": "enumeration", "k_max": k_max, "natural_density": nd.to_json(),
             "tie_frequency": float(tmask.mean()),
             "counts": [[str(c) for c in row] for row in counts[1:]]},
            None, {}, None, None, {}, notes, series={"E": E})
    Z = zero_multiset(spec.Q, fs)
    hyp = self_sufficient_zeros(Z, H=H, precision=precision)
    G, sub, checks, extra_notes = ordering_function(spec, Z, H)
    notes += extra_notes
    pred, meas = _prediction(G, sub, samples, seed, threads, eps)
    # empirical side: exact explicit formula, cross-checked against enumeration
    E = explicit_trajectory(spec, k_max, Z)
    kc = min(count_check, k_max, ff.enumeration_cap(fs))
    if kc >= 1:
        table = prime_counts(spec, kc)
        Ec = normalized_error(spec, np.arange(1, kc + 1), table)
        checks["explicit_vs_enumeration_max_dev"] = float(np.abs(Ec - E[:kc]).max())
        checks["enumeration_k"] = kc
        checks["count_conservation_gap"] = conservation_gap(table, spec)
        cc = table.class_counts(spec.classes)
        counts = {lab: cc[1:, j].tolist() for j, lab in enumerate(spec.class_labels())}
    else:
        counts = {}
    tie = ff_ties(E, fs.q)
    mask, tmask = ordering_mask(E, tie)
    nd = natural_density(mask)
    lo = pred["mu_above_plus_eps"] - 3 * pred["sigma_plus_eps"]
    hi = pred["mu_above_minus_eps"] + 3 * pred["sigma_minus_eps"]
    checks["prop7_bracket"] = [lo, hi]
    checks["prop7_holds"] = bool(lo <= nd.point <= hi)
    fr = tie_fractions(E)
    fits = [fit_tie_constant(TIE_ETAS, fr[:, d], k_max) for d in range(spec.D)]
    ties = {
        "tie_frequency": float(tmask.mean()),
        "etas": list(TIE_ETAS),
        "fractions": fr.T.tolist(),
        "fitted_C": [c for c, _ in fits],
        "linear_decay": [ok for _, ok in fits],
    }
    reliable = hyp.verdict == "satisfied" and all(t <= torus.TIE_THRESHOLD for t in pred["tie_mass_bounds"])
    if hyp.verdict == "violated":
        notes.append("hypothesis violated: prediction unreliable")
    if not Z.entries:
        notes.append("no critical zeros: E is eventually one-sided")
    pred["reliable"] = reliable
    empirical = {
        "source": "explicit formula (exact), checked against enumeration",
        "k_max": k_max,
        "natural_density": nd.to_json(),
        "tie_frequency": float(tmask.mean()),
        "max_rh_deviation": Z.max_rh_deviation(),
        "critical_zeros": len(Z.entries),
        "exact_counts": counts,
    }
    running = running_average(mask)
    return DensityReport(
        spec.to_json(), ORDERING, FF_NORMALIZATION, empirical, pred, ties, hyp.to_json(),
        sub.to_json(), checks, notes,
        extra={"ordering_function": G.to_json()},
        series={"E": E, "running": running, "measure": meas, "G": G, "subtorus": sub},
    )


def classical_empirical(spec, X_max, primes=None):
    """Sieve-side densities of the ordering event up to X_max.

    Returns (summary, primes, race primes, strict state after each race prime).
    """
    primes = sieve_primes(X_max) if primes is None else primes
    q = spec.q
    cls = spec.classes
    in_race = np.isin(primes % q, cls)
    pr = primes[in_race]
    cnt = np.zeros((pr.size, len(cls)), dtype=np.int64)
    for j, a in enumerate(cls):
        cnt[:, j] = np.cumsum(pr % q == a)
    diff = cnt[:, :-1] - cnt[:, 1:]          # pi(a_{d-1}) - pi(a_d) = -E_d / weight
    state = np.all(diff > 0, axis=1)
    ld = log_density_of_steps(pr.astype(float), state, X_max)
    lengths = np.diff(np.append(pr, X_max + 1).astype(float))
    nat = float(np.sum(lengths * state) / X_max)
    all_state = np.zeros(primes.size, bool)
    all_state[np.flatnonzero(in_race)] = state
    # the state at a prime outside the race classes is inherited from the previous race prime
    idx = np.maximum.accumulate(np.where(in_race, np.arange(primes.size), -1))
    inherited = np.where(idx >= 0, all_state[np.maximum(idx, 0)], False)
    wd = weighted_prime_density(inherited, X_max, primes)
    tie_steps = np.any(diff == 0, axis=1)
    log_tie = log_density_of_steps(pr.astype(float), tie_steps, X_max)
    empirical = {
        "source": "sieve",
        "X_max": X_max,
        "log_density": ld.to_json(),
        "natural_density_over_integers": nat,
        "weighted_prime_density": wd,
        "log_tie_density": log_tie.point,
    }
    return empirical, primes, pr, state


def _classical_report(spec, X_max, samples, seed, threads, eps, H, precision):
    if not spec.zeros:
        raise ValidationError("classical races need a zero file")
    Z = ingest_classical_zeros(spec.zeros)
    if not Z.entries:
        raise ValidationError("the zero file is empty")
    hyp = self_sufficient_zeros(Z, H=H, precision=precision)
    cs = classical_spec(spec, Z)
    E_spec = cs.spec
    G = torus.APFunctionSpec(E_spec.gammas, -E_spec.coeffs, "real", -E_spec.offset)
    sub = torus.build_subtorus(G.gammas, "real", assume_independent=True)
    notes = [f"normalization convention: {CLASSICAL_NORMALIZATION}",
             "finite zero table: linear independence assumed, torus taken to be full",
             f"sharp truncation at height T = {cs.height:.12g}"]
    pred, meas = _prediction(G, sub, samples, seed, threads, eps)
    # truncation drift: the same prediction from the zeros below T/2
    half = G.gammas <= cs.height / 2
    Gh = torus.APFunctionSpec(G.gammas[half], G.coeffs[half], "real", G.offset)
    sub_h = torus.build_subtorus(Gh.gammas, "real", assume_independent=True)
    mh = torus.sample_measure(Gh, sub_h, samples, seed, threads)
    p_half = mh.probability(np.all(mh.samples > 0, axis=1))
    truncation = {
        "height_T": cs.height,
        "zeros_used": cs.n_zeros,
        "tail_variance_bound": cs.tail_variance,
        "density_with_zeros_below_T_over_2": p_half,
        "drift_T_over_2_to_T": pred["density"] - p_half,
    }
    empirical, primes, pr, state = classical_empirical(spec, X_max)
    # the explicit main sum on a log grid, for plots
    ys = np.linspace(math.log(10.0), math.log(X_max), 2000)
    xs = np.exp(ys)
    E_emp = normalized_error(spec, xs, primes=primes)
    E_zero = E_spec.evaluate(ys)
    return DensityReport(
        spec.to_json(), ORDERING, CLASSICAL_NORMALIZATION, empirical, pred,
        {"tie_mass_bounds": pred["tie_mass_bounds"]}, hyp.to_json(), sub.to_json(),
        {"truncation": truncation}, notes,
        extra={"ordering_function": {"N": G.N, "D": G.D, "offset": G.offset.tolist()}},
        series={"x": xs, "E": E_emp, "E_main": E_zero, "measure": meas, "G": G, "subtorus": sub,
                "running_x": pr, "running_state": state},
    )
