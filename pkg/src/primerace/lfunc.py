"""L-polynomials of Dirichlet characters over F_q[t] and their zeros.

For a non-principal chi mod Q the series L(u, chi) = sum_N chi(N) u^{deg N}
is a polynomial of degree <= deg Q - 1 whose coefficients are the character
sums c_n = sum_{deg N = n} chi(N).  Writing L(u) = prod (1 - alpha_j u), every
inverse root has |alpha| = sqrt(q) (critical) or |alpha| = 1 (trivial).  A
critical root alpha = sqrt(q) e^{i gamma} contributes its angle gamma to the
zero multiset when gamma lies in [0, pi].
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import mpmath as mp
import numpy as np

from . import ffpoly as ff
from .characters import Character, characters, unit_group
from .cyclotomic import CycInt, reduction_matrix
from .errors import ComputationError, RHViolation, RootFindingError, ValidationError

CLUSTER_TOL = 1e-9
MODULUS_TOL = 1e-6


class LPolynomial:
    """L(u, chi) = sum_n c_n u^n with c_n exact in Z[zeta_m].

    ``matrix`` row n holds the power-basis coordinates of c_n; ``shadow`` is
    the complex value of each coefficient.
    """

    def __init__(self, label, m, matrix, chi=None, shadow=None):
        self.label = label
        self.m = m
        self.matrix = np.asarray(matrix, dtype=np.int64)
        self.chi = chi
        if shadow is None:
            shadow = self.matrix @ _power_basis(m)
        self.shadow = np.asarray(shadow, dtype=complex)

    @classmethod
    def from_exact(cls, label, coeffs, chi=None):
        m = coeffs[0].m
        return cls(label, m, [c._lift(m).coeffs for c in coeffs], chi)

    def __repr__(self):
        return f"LPolynomial({self.label}, {np.round(self.shadow, 6).tolist()})"

    def __eq__(self, other):
        return (isinstance(other, LPolynomial) and self.label == other.label
                and self.exact == other.exact)

    __hash__ = None

    @property
    def degree(self):
        return self.matrix.shape[0] - 1

    @cached_property
    def exact(self):
        return tuple(CycInt(self.m, tuple(int(x) for x in row)) for row in self.matrix)

    @property
    def coeffs(self):
        return self.shadow

    def coeffs_mp(self):
        """Coefficients at the current mpmath precision."""
        return _exact_to_mp(self.exact)

    def __call__(self, u):
        return np.polyval(self.coeffs[::-1], u)


@lru_cache(maxsize=None)
def _power_basis(m):
    """Complex values of the power basis 1, zeta_m, ..., zeta_m^{phi(m)-1}."""
    deg = reduction_matrix(m).shape[1]
    return np.exp(2j * np.pi * np.arange(deg) / m)


def _residue_counts(n, Q, fs):
    """How many monic polynomials of degree n fall in each residue class mod Q."""
    ff.check_cap(n, fs)
    res = ff.residues_of_codes(np.arange(fs.q**n, dtype=np.int64), n, Q, fs)
    return np.bincount(res, minlength=fs.q**Q.degree)


def _trim(coeffs):
    coeffs = list(coeffs)
    while len(coeffs) > 1 and coeffs[-1].is_zero():
        coeffs.pop()
    return tuple(coeffs)


def l_polynomial(chi, check=True):
    """Exact L-polynomial of a non-principal character, by character sums."""
    if chi.is_principal:
        raise ValidationError("the principal character has no L-polynomial")
    Q, fs = chi.modulus, chi.group.fs
    d = Q.degree
    m = chi.m
    K = chi.exponent_table
    coeffs = []
    for n in range(d + (1 if check else 0)):
        cnt = _residue_counts(n, Q, fs)
        units = K >= 0
        hist = np.bincount(K[units], weights=cnt[units], minlength=m).astype(np.int64)
        coeffs.append(CycInt.from_histogram(hist, m))
    if check:
        if not coeffs[d].is_zero():
            raise ComputationError(f"character sum of degree {d} is nonzero for {chi.label}")
        coeffs = coeffs[:d]
    return LPolynomial.from_exact(chi.label, _trim(coeffs), chi)


def l_polynomials(group, check=True):
    """L-polynomials of all non-principal characters, batched over the group."""
    chars = [c for c in characters(group) if not c.is_principal]
    if not chars:
        return []
    Q, fs = group.modulus, group.fs
    d = Q.degree
    m = group.exponent
    K = np.stack([c.exponent_table for c in chars])  # (nchar, q^d)
    units = K[0] >= 0
    Ku = K[:, units]
    nchar = len(chars)
    offset = (np.arange(nchar, dtype=np.int64) * m)[:, None]
    # float matmul is exact here: every partial sum is far below 2^53
    R = reduction_matrix(m).astype(np.float64)
    rows = []
    for n in range(d + (1 if check else 0)):
        cnt = _residue_counts(n, Q, fs)[units]
        w = np.broadcast_to(cnt, Ku.shape).ravel()
        hist = np.bincount((Ku + offset).ravel(), weights=w, minlength=nchar * m)
        rows.append(np.rint(hist.reshape(nchar, m) @ R).astype(np.int64))
    exact = np.stack(rows, axis=1)  # (nchar, n, phi(m))
    if check:
        bad = np.flatnonzero(np.any(exact[:, d] != 0, axis=1))
        if bad.size:
            raise ComputationError(f"character sum of degree {d} is nonzero for {chars[bad[0]].label}")
        exact = exact[:, :d]
    nonzero = np.any(exact != 0, axis=2)
    degs = d - 1 - np.argmax(nonzero[:, ::-1], axis=1)
    shadow = exact @ _power_basis(m)
    return [LPolynomial(chi.label, m, exact[i, :degs[i] + 1], chi, shadow[i, :degs[i] + 1])
            for i, chi in enumerate(chars)]


def _cluster(roots, tol):
    groups = []
    for r in sorted(roots, key=lambda z: (z.real, z.imag)):
        for g in groups:
            if abs(g[0] - r) < tol:
                g.append(r)
                break
        else:
            groups.append([r])
    return [(complex(np.mean(g)), len(g)) for g in groups]


def _roots_mp(coeffs, dps=60):
    with mp.workdps(dps):
        try:
            roots = mp.polyroots(coeffs, maxsteps=2000, extraprec=4 * dps)
        except mp.NoConvergence as exc:
            raise RootFindingError("high-precision root refinement did not converge", float("nan")) from exc
        return [complex(r) for r in roots]


def _deflate(exact, zeta):
    """Divide sum c_n u^n by (1 - zeta u) exactly, or return None if it does not divide."""
    quot = [exact[0]]
    for c in exact[1:-1]:
        quot.append(c + zeta * quot[-1])
    if not (exact[-1] + zeta * quot[-1]).is_zero():
        return None
    return quot


def _unit_roots(L):
    """Split off the inverse roots that are roots of unity, exactly.

    Such roots come from imprimitive factors (1 - chi*(P) u^{deg P}) and from
    the factor (1 - u) of characters trivial on the constants, so their
    orders divide m * lcm(1..deg L).
    """
    exact = list(L.exact)
    deg = len(exact) - 1
    if deg <= 0:
        return [], exact
    M = L.m * math.lcm(*range(1, deg + 1))
    w = np.exp(2j * np.pi * np.arange(M) / M)
    c = L.coeffs
    # screen L(1/w) = 0 in floats, then confirm each hit by exact division
    hits = np.flatnonzero(np.abs(np.polyval(c[::-1], 1 / w)) < 1e-6 * float(np.abs(c).sum()))
    found = []
    for j in hits:
        zeta = CycInt.root(int(j), M)
        while len(exact) > 1:
            quot = _deflate(exact, zeta)
            if quot is None:
                break
            exact = quot
            found.append(complex(w[j]))
    return found, exact


def inverse_roots(L):
    """Inverse roots with multiplicities: list of (alpha, multiplicity)."""
    m = L.degree
    if m <= 0:
        return []
    unit, rest = _unit_roots(L)
    c = L.coeffs if not unit else np.array([complex(x) for x in rest])
    polished = list(unit)
    if len(rest) > 1:
        raw = np.roots(c)
        dc = np.polyder(c)
        found = []
        for r in raw:
            for _ in range(4):
                fp = np.polyval(dc, r)
                if fp == 0:
                    break
                step = np.polyval(c, r) / fp
                r = r - step
                if abs(step) < 1e-15 * max(1.0, abs(r)):
                    break
            found.append(complex(r))
        tight = min((abs(a - b) for i, a in enumerate(found) for b in found[i + 1:]), default=np.inf)
        if tight < 1e-4:
            with mp.workdps(60):
                cm = _exact_to_mp(rest)
            found = _roots_mp(cm)
        polished += found
    clusters = _cluster(polished, CLUSTER_TOL)
    full = L.coeffs
    scale = float(np.max(np.abs(full)))
    residual = max(abs(np.polyval(full, a)) / (scale * max(1.0, abs(a)) ** m) for a, _ in clusters)
    if sum(k for _, k in clusters) != m or residual > 1e-9:
        raise RootFindingError(f"inverse roots of {L.label} did not converge", residual)
    return clusters


def _horner(C, x):
    val = np.repeat(C[:, :1], x.shape[1], axis=1)
    for j in range(1, C.shape[1]):
        val = val * x + C[:, j:j + 1]
    return val


def _batch_inverse_roots(lps):
    """Fast path for many L-polynomials with simple inverse roots.

    Companion-matrix eigenvalues, polished by vectorised Newton steps.
    Polynomials with nearly coincident roots or a large residual get None
    and go through ``inverse_roots`` individually.
    """
    out = [None] * len(lps)
    by_deg = {}
    for i, L in enumerate(lps):
        by_deg.setdefault(L.degree, []).append(i)
    for deg, idx in by_deg.items():
        if deg == 0:
            for i in idx:
                out[i] = []
            continue
        C = np.stack([lps[i].shadow for i in idx])
        k = C.shape[0]
        comp = np.zeros((k, deg, deg), dtype=complex)
        comp[:, 0, :] = -C[:, 1:]
        if deg > 1:
            comp[:, np.arange(1, deg), np.arange(deg - 1)] = 1
        roots = np.linalg.eigvals(comp)
        dC = C[:, :-1] * np.arange(deg, 0, -1)
        for _ in range(3):
            fp = _horner(dC, roots)
            step = np.where(fp != 0, _horner(C, roots) / np.where(fp != 0, fp, 1), 0)
            roots = roots - step
        if deg > 1:
            gaps = np.abs(roots[:, :, None] - roots[:, None, :])
            gaps[:, np.arange(deg), np.arange(deg)] = np.inf
            sep = gaps.min(axis=(1, 2))
        else:
            sep = np.full(k, np.inf)
        scale = np.abs(C).max(axis=1)[:, None] * np.maximum(1.0, np.abs(roots)) ** deg
        resid = (np.abs(_horner(C, roots)) / scale).max(axis=1)
        for row, i in enumerate(idx):
            if sep[row] >= 1e-4 and resid[row] <= 1e-9:
                out[i] = [(complex(r), 1) for r in roots[row]]
    return out


def refine_root(L, alpha, multiplicity=1):
    """Newton refinement of one inverse root at the working mpmath precision.

    A root of multiplicity k is a simple root of the (k-1)-th derivative of
    the reversed polynomial.
    """
    c = L.coeffs_mp()
    for _ in range(multiplicity - 1):
        n = len(c) - 1
        c = [ci * (n - i) for i, ci in enumerate(c[:-1])]
    tol = mp.mpf(10) ** (-mp.mp.dps + 3)
    x = mp.mpc(alpha)
    for _ in range(200):
        f = mp.polyval(c, x)
        fp = mp.polyval([ci * (len(c) - 1 - i) for i, ci in enumerate(c[:-1])], x)
        step = f / fp
        x -= step
        if abs(step) < tol * abs(x):
            break
    else:
        raise RootFindingError(f"refinement of root {alpha} did not converge", float(abs(f)))
    return x


def _exact_to_mp(exact):
    out = []
    for c in exact:
        w = mp.expjpi(mp.mpf(2) / c.m)
        out.append(mp.fsum(mp.mpf(x) * w**k for k, x in enumerate(c.coeffs) if x))
    return out


@dataclass(frozen=True)
class ZeroEntry:
    gamma: float
    chi_label: str
    multiplicity: int = 1
    kind: str = "critical"
    alpha: complex | None = None
    gamma_text: str | None = field(default=None, compare=False)


@dataclass
class ZeroMultiset:
    modulus: str
    mode: str
    entries: list
    trivial: list = field(default_factory=list)
    q: int | None = None
    labels: list = field(default_factory=list)
    lpolys: dict = field(default_factory=dict, repr=False)
    roots: dict = field(default_factory=dict, repr=False)
    complete: bool = True

    def __post_init__(self):
        self.entries = sorted(self.entries, key=lambda e: (e.gamma, e.chi_label))

    def __len__(self):
        return len(self.entries)

    @property
    def gammas(self):
        return [e.gamma for e in self.entries]

    def by_label(self):
        out = {lab: [] for lab in self.labels}
        for e in self.entries:
            out.setdefault(e.chi_label, []).append(e)
        return out

    def critical_roots(self, label):
        """All critical inverse roots (both half-planes) of one character."""
        sq = math.sqrt(self.q)
        return [(a, k) for a, k in self.roots.get(label, []) if abs(abs(a) - sq) < MODULUS_TOL]

    def max_rh_deviation(self):
        sq = math.sqrt(self.q)
        devs = [abs(abs(a) - sq) for rs in self.roots.values() for a, _ in rs if abs(abs(a) - sq) < MODULUS_TOL]
        return max(devs, default=0.0)

    def gammas_mp(self, dps):
        """Angles of the entries recomputed at dps decimal digits."""
        if self.mode == "classical":
            with mp.workdps(dps):
                return [mp.mpf(e.gamma_text) if e.gamma_text else mp.mpf(e.gamma) for e in self.entries]
        out = []
        with mp.workdps(dps + 10):
            for e in self.entries:
                L = self.lpolys.get(e.chi_label)
                if L is None or e.alpha is None:
                    out.append(mp.mpf(e.gamma))
                else:
                    out.append(mp.arg(refine_root(L, e.alpha, e.multiplicity)))
        return out

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            if self.mode == "classical":
                w.writerow(["chi_label", "gamma", "multiplicity"])
                for e in self.entries:
                    w.writerow([e.chi_label, e.gamma_text or repr(e.gamma), e.multiplicity])
                return path
            w.writerow(["chi_label", "gamma", "multiplicity", "kind", "alpha_re", "alpha_im"])
            for e in sorted(self.entries + self.trivial, key=lambda e: (e.kind, e.gamma, e.chi_label)):
                w.writerow([e.chi_label, f"{e.gamma:.15g}", e.multiplicity, e.kind,
                            f"{e.alpha.real:.15g}", f"{e.alpha.imag:.15g}"])
        return path


def classify_root(alpha, q):
    r = abs(alpha)
    if abs(r - math.sqrt(q)) < MODULUS_TOL:
        return "critical"
    if abs(r - 1.0) < MODULUS_TOL:
        return "trivial"
    raise RHViolation(f"inverse root {alpha} has modulus {r}, neither sqrt({q}) nor 1")


def _angle(alpha):
    theta = math.atan2(alpha.imag, alpha.real)
    if theta <= -math.pi + 1e-15:
        theta = math.pi
    # real roots: pin the angle to exactly 0 or pi
    if abs(alpha.imag) < 1e-12 * abs(alpha):
        theta = 0.0 if alpha.real > 0 else math.pi
    return theta


def zero_multiset(Q, fs):
    """The multiset of critical zero angles over all non-principal characters mod Q."""
    Q = Q if isinstance(Q, ff.MonicPoly) else ff.MonicPoly(tuple(Q))
    group = unit_group(Q, fs)
    lps = l_polynomials(group)
    entries, trivial, roots = [], [], {}
    fast = _batch_inverse_roots(lps)
    for L, rs in zip(lps, fast):
        if rs is None:
            rs = inverse_roots(L)
        roots[L.label] = rs
        for a, k in rs:
            kind = classify_root(a, fs.q)
            theta = _angle(a)
            if kind == "trivial":
                trivial.append(ZeroEntry(theta, L.label, k, kind, a))
            elif theta >= 0.0:
                entries.append(ZeroEntry(theta, L.label, k, kind, a))
    return ZeroMultiset(
        modulus=f"Q={ff.poly_str(Q.coeffs)} over F_{fs.tag}",
        mode="ff",
        entries=entries,
        trivial=trivial,
        q=fs.q,
        labels=[L.label for L in lps],
        lpolys={L.label: L for L in lps},
        roots=roots,
    )


def psi_from_roots(roots, n):
    """-sum_j alpha_j^n over inverse roots with multiplicity."""
    return -sum(k * a**n for a, k in roots)


def psi_by_enumeration(chi, n):
    """sum over monic N of degree n of Lambda(N) chi(N), from prime powers."""
    fs = chi.group.fs
    vals = chi.value_array()
    total = 0j
    for d, mat in ff.prime_powers(n, fs):
        res = ff.residues_of_coeff_matrix(mat, chi.modulus, fs)
        total += d * vals[res].sum()
    return total


def ingest_classical_zeros(path, label=None):
    """Read a (chi_label, gamma, multiplicity) zero table."""
    entries = []
    seen = set()
    last = {}
    labels = []
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(x.strip() for x in r)]
    if not rows:
        return ZeroMultiset(modulus=label or "classical", mode="classical", entries=[], complete=False)
    header = [h.strip() for h in rows[0]]
    if header[:3] != ["chi_label", "gamma", "multiplicity"]:
        raise ValidationError(f"{path}: header must be chi_label,gamma,multiplicity, got {rows[0]}")
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValidationError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        lab, gtext, mtext = (x.strip() for x in row[:3])
        try:
            gamma = float(gtext)
            mult = int(mtext)
        except ValueError:
            raise ValidationError(f"{path}:{lineno}: malformed row {row}") from None
        if not lab:
            raise ValidationError(f"{path}:{lineno}: empty character label")
        if not math.isfinite(gamma) or gamma < 0:
            raise ValidationError(f"{path}:{lineno}: gamma must be a finite non-negative number")
        if mult < 1:
            raise ValidationError(f"{path}:{lineno}: multiplicity must be >= 1")
        if (lab, gamma) in seen:
            raise ValidationError(f"{path}:{lineno}: duplicate zero ({lab}, {gtext})")
        if lab in last and gamma <= last[lab]:
            raise ValidationError(f"{path}:{lineno}: gamma not ascending for {lab}")
        seen.add((lab, gamma))
        last[lab] = gamma
        if lab not in labels:
            labels.append(lab)
        entries.append(ZeroEntry(gamma, lab, mult, "critical", None, gtext))
    return ZeroMultiset(
        modulus=label or ",".join(labels) or "classical",
        mode="classical",
        entries=entries,
        labels=labels,
        complete=False,
    )
