"""Integer relations among zero angles and the self-sufficiency test.

A relation among gamma_1..gamma_N is an integer vector m with
sum m_j gamma_j = 0 (real-parameter mode) or sum m_j gamma_j + m_0 2 pi = 0
(integer-parameter mode, where angles only matter mod 2 pi).  Relations are
found by LLL on the lattice [I | round(10^P x)].  An empty basis is only a
certificate for the stated (height, precision); it never proves independence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import mpmath as mp

from .cyclotomic import euler_phi
from .errors import PrecisionError, ValidationError
from .lattice import lll_reduce, reduced_lattice_basis

DEFAULT_HEIGHT = 10**6
DEFAULT_PRECISION = 50
FLOAT_DIGITS = 15
ANGLE_TOL = 1e-9
MAX_SEARCH_DIM = 12


def _is_float_input(x):
    return isinstance(x, float) or (hasattr(x, "dtype") and x.dtype.kind == "f")


def _effective_precision(values, precision):
    # a double carries ~16 significant digits; asking for more is meaningless
    if any(_is_float_input(v) for v in values):
        return min(precision, FLOAT_DIGITS)
    return precision


def orders_to_test(degree_bound):
    """All n >= 1 with phi(n) <= 2 * degree_bound."""
    limit = 2 * degree_bound
    # phi(n) >= sqrt(n / 2), so n <= 2 limit^2 covers every candidate
    return [n for n in range(1, 2 * limit * limit + 2) if euler_phi(n) <= limit]


def _tolerance(gamma, dps):
    return mp.mpf("1e-12") if _is_float_input(gamma) else mp.mpf(10) ** (-(dps - 10))


def pi_order(gamma, degree_bound=12, dps=DEFAULT_PRECISION):
    """Smallest n with n gamma in 2 pi Z and phi(n) <= 2*degree_bound, else None.

    If gamma / 2 pi = p/r in lowest terms then n gamma lies in 2 pi Z iff r | n,
    and phi(r) <= phi(n), so only the reduced denominator r needs testing.  A
    rational that close to x is necessarily a continued-fraction convergent.
    """
    limit = 2 * degree_bound
    nmax = 2 * limit * limit + 1
    tol = _tolerance(gamma, dps)
    with mp.workdps(dps + 10):
        x = mp.mpf(gamma) / (2 * mp.pi)
        p0, q0, p1, q1 = 0, 1, 1, 0
        y = x
        while True:
            a = int(mp.floor(y))
            p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
            if q1 > nmax:
                return None
            if abs(x * q1 - p1) < tol:
                return q1 if euler_phi(q1) <= limit else None
            frac = y - a
            if frac == 0:
                return None
            y = 1 / frac


def is_rational_multiple_of_pi(gamma, degree_bound=12, dps=DEFAULT_PRECISION):
    """True iff e^{i gamma} is a root of unity of order n with phi(n) <= 2*degree_bound.

    With an mpmath input the test is carried out at ``dps`` digits; a float
    input is tested at 1e-12.
    """
    return pi_order(gamma, degree_bound, dps) is not None


@dataclass
class RelationLattice:
    frequencies: list
    basis: list
    mode: str
    height: int
    precision: int

    @property
    def rank(self):
        return len(self.basis)

    def gamma_part(self):
        """Relation rows restricted to the gamma coordinates."""
        n = len(self.frequencies)
        return [v[:n] for v in self.basis]

    def to_json(self):
        return {
            "mode": self.mode,
            "frequencies": [float(g) for g in self.frequencies],
            "basis": [list(v) for v in self.basis],
            "height": self.height,
            "precision": self.precision,
        }


def _normalize_sign(v):
    for x in v:
        if x:
            return v if x > 0 else [-y for y in v]
    return v


def relation_lattice(gammas, mode="integer", precision=DEFAULT_PRECISION, H=DEFAULT_HEIGHT):
    """Reduced basis of integer relations of height <= H among the gammas.

    In integer mode the vector 2 pi is appended, so basis vectors have
    N + 1 entries (m_1, ..., m_N, m_0).
    """
    if mode not in ("integer", "real"):
        raise ValidationError(f"unknown relation mode {mode!r}")
    gammas = list(gammas)
    for g in gammas:
        if not g > 0:
            raise ValidationError("relation frequencies must be positive")
    P = _effective_precision(gammas, precision)
    n = len(gammas) + (1 if mode == "integer" else 0)
    if n == 0:
        return RelationLattice(gammas, [], mode, H, P)
    needed = (n - 1) * math.log10(max(H, 2)) + 2
    if P - 4 < needed:
        raise PrecisionError(
            f"precision {P} digits is too low for height {H} with {n} coordinates; "
            f"need at least {math.ceil(needed + 4)}"
        )
    with mp.workdps(P + 20):
        x = [mp.mpf(g) for g in gammas]
        if mode == "integer":
            x.append(2 * mp.pi)
        for i, a in enumerate(x):
            for b in x[i + 1:]:
                if abs(a - b) < mp.mpf(10) ** (-(P - 4)):
                    raise ValidationError("relation frequencies must be distinct")
        scale = mp.mpf(10) ** P
        rows = [[int(i == j) for j in range(n)] + [int(mp.nint(scale * x[i]))] for i in range(n)]
        reduced = lll_reduce(rows)
        tol = mp.mpf(10) ** (-(P - 4))
        found = []
        for v in reduced:
            coeffs = v[:n]
            if not any(coeffs) or max(abs(c) for c in coeffs) > H:
                continue
            resid = abs(mp.fsum(c * xi for c, xi in zip(coeffs, x)))
            if resid < tol:
                found.append(coeffs)
    basis = [_normalize_sign(v) for v in reduced_lattice_basis(found)] if found else []
    basis = [v for v in basis if max(abs(c) for c in v) <= H]
    return RelationLattice(gammas, basis, mode, H, P)


def relation_residual(vec, gammas, mode, dps):
    """|sum m_j gamma_j (+ m_0 2 pi)| at dps digits."""
    with mp.workdps(dps):
        x = [mp.mpf(g) for g in gammas]
        if mode == "integer":
            x.append(2 * mp.pi)
        return abs(mp.fsum(c * xi for c, xi in zip(vec, x)))


# --------------------------------------------------------------------------
# self-sufficient zeros


@dataclass
class HypothesisReport:
    verdict: str
    mode: str
    witnesses: dict
    exempt: list
    rational_pi: dict
    relative_independence: bool | None
    lattice: RelationLattice | None
    certificate: str
    height: int
    precision: int
    notes: list = field(default_factory=list)

    def to_json(self):
        return {
            "verdict": self.verdict,
            "mode": self.mode,
            "witnesses": self.witnesses,
            "exempt_trivial_only": self.exempt,
            "rational_multiple_of_pi": self.rational_pi,
            "relative_independence": self.relative_independence,
            "relation_lattice": self.lattice.to_json() if self.lattice else None,
            "certificate": self.certificate,
            "height": self.height,
            "precision": self.precision,
            "notes": self.notes,
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _conjugate_label(Z, label):
    L = Z.lpolys.get(label)
    if L is None or L.chi is None:
        return label
    return L.chi.conj().label


def _class_key(Z, label):
    return tuple(sorted({label, _conjugate_label(Z, label)}))


def _degree_bound(Z, label):
    L = Z.lpolys.get(label)
    if L is None:
        return 12
    return max(1, L.degree) * euler_phi(L.m)


def self_sufficient_zeros(Z, H=DEFAULT_HEIGHT, precision=DEFAULT_PRECISION):
    """Check that every character with critical zeros owns a witnessing angle.

    A witness for the conjugate class {chi, conj chi} is an angle of that
    class outside Q pi that no other class shares.  Classes whose
    L-polynomials have only trivial zeros contribute nothing to the race
    and are listed as exempt.  The relative independence of the chosen
    witnesses from the remaining angles is certified by a relation search.
    """
    mode = Z.mode
    entries = list(Z.entries)
    if not entries:
        return HypothesisReport(
            verdict="violated", mode=mode, witnesses={}, exempt=list(Z.labels), rational_pi={},
            relative_independence=None, lattice=None,
            certificate="no critical zeros: there is no angle to witness any character",
            height=H, precision=precision,
        )
    gam_hp = Z.gammas_mp(precision)
    flags = []
    for e, g in zip(entries, gam_hp):
        if mode == "classical":
            flag = is_rational_multiple_of_pi(g, 12, precision)
        else:
            flag = g <= 0 or g >= mp.pi - mp.mpf(10) ** (-(precision - 5)) or \
                is_rational_multiple_of_pi(g, _degree_bound(Z, e.chi_label), precision)
        flags.append(bool(flag))
    rational = {f"{e.chi_label}@{e.gamma:.12g}": f for e, f in zip(entries, flags)}

    keys = [_class_key(Z, e.chi_label) for e in entries]
    all_keys = {_class_key(Z, lab) for lab in Z.labels} | set(keys)
    # angles shared with another class, found by a sweep over sorted gammas
    shared = [False] * len(entries)
    order = sorted(range(len(entries)), key=lambda i: entries[i].gamma)
    for a, i in enumerate(order):
        for b in range(a + 1, len(order)):
            j = order[b]
            if entries[j].gamma - entries[i].gamma >= ANGLE_TOL:
                break
            if keys[i] != keys[j]:
                shared[i] = shared[j] = True
    best = {}
    for idx, e in enumerate(entries):
        if flags[idx] or shared[idx]:
            continue
        if keys[idx] not in best or e.gamma < entries[best[keys[idx]]].gamma:
            best[keys[idx]] = idx
    owners = set(keys)
    witnesses, exempt, missing, chosen = {}, [], [], []
    for key in sorted(all_keys):
        if key not in owners:
            exempt.extend(key)
        elif key in best:
            witnesses["|".join(key)] = float(entries[best[key]].gamma)
            chosen.append(best[key])
        else:
            missing.append("|".join(key))

    # relative independence of the witnesses from the remaining angles
    distinct, reps = [], []
    for idx in order:
        g = gam_hp[idx]
        if g <= 0:
            continue
        if not distinct or abs(g - distinct[-1]) > mp.mpf(10) ** (-(precision - 5)):
            distinct.append(g)
            reps.append(idx)
        elif idx in chosen:
            reps[-1] = idx
    lattice = None
    rel_indep = None
    notes = []
    if chosen and len(distinct) > MAX_SEARCH_DIM:
        notes.append(f"relative independence not searched: {len(distinct)} distinct angles exceed "
                     f"the search limit of {MAX_SEARCH_DIM}")
    elif chosen and distinct:
        n = len(distinct)
        need = (n - 1) * math.log10(max(H, 2)) + 6
        prec = max(precision, int(math.ceil(need)) + 1)
        if prec > precision:
            hp = Z.gammas_mp(prec)
            distinct = [hp[i] for i in reps]
            notes.append(f"relation search raised precision to {prec} digits for {n} angles")
        lattice = relation_lattice(distinct, mode="real", precision=prec, H=H)
        chosen_set = set(chosen)
        wmask = [i in chosen_set for i in reps]
        rel_indep = True
        with mp.workdps(prec):
            for v in lattice.basis:
                wpart = mp.fsum(c * g for c, g, w in zip(v, distinct, wmask) if w)
                if abs(wpart) > mp.mpf(10) ** (-(prec - 10)):
                    rel_indep = False
    if mode != "classical" and rel_indep is not None:
        notes.append("relative independence is reported but not required over F_q[t]")

    if missing:
        verdict = "violated"
        cert = "no witnessing angle for " + ", ".join(missing)
    else:
        verdict = "satisfied"
        cert = (f"every class with critical zeros has a unique non-Q*pi angle; "
                f"relation search height {H}, precision {lattice.precision if lattice else precision}")
    if mode == "classical":
        notes.append("zero table is finite: independence from the omitted zeros cannot be tested")
        if verdict == "satisfied" or rel_indep is False:
            cert = "partial data; " + cert
        verdict = "inconclusive"
    return HypothesisReport(
        verdict=verdict, mode=mode, witnesses=witnesses, exempt=sorted(exempt),
        rational_pi=rational, relative_independence=rel_indep, lattice=lattice,
        certificate=cert, height=H, precision=precision, notes=notes,
    )
