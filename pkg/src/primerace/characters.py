"""Unit groups of F_q[t]/Q and their Dirichlet characters.

Residues mod Q (degree d) are handled as integer codes sum c_i q^i with
0 <= code < q^d.  The unit group is decomposed into invariant factors
n_1 | n_2 | ... | n_r with explicit generators, and a full discrete-log table
maps every unit code to its exponent vector.  A character is an exponent
vector e with chi(g_i) = exp(2 pi i e_i / n_i); values are carried exactly as
k/m with m = n_r (the group exponent) plus a float shadow.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import product

import numpy as np

from . import ffpoly as ff
from .errors import ResourceError, ValidationError

GROUP_CAP = 10**6


class ResidueRing:
    """Vectorised arithmetic on residue codes modulo Q."""

    def __init__(self, Q, fs):
        self.Q = Q if isinstance(Q, ff.MonicPoly) else ff.MonicPoly(tuple(Q))
        self.fs = fs
        self.d = self.Q.degree
        self.q = fs.q
        self.size = self.q**self.d
        self._tpow = ff.powers_of_t_mod(self.Q, max(2 * self.d - 2, 0), fs)
        self._weights = self.q ** np.arange(self.d, dtype=np.int64)

    def digits(self, codes):
        return ff.code_digits(codes, self.d, self.q)

    def encode(self, digs):
        return np.asarray(digs, dtype=np.int64) @ self._weights

    def code_of(self, poly):
        r = ff.poly_mod(tuple(poly), self.Q.coeffs, self.fs)
        return ff.residue_code(r, self.q, self.d)

    def poly_of(self, code):
        return ff.residue_from_code(int(code), self.q, self.d)

    TABLE_LIMIT = 256

    @cached_property
    def _table(self):
        # small rings: one vectorised pass fills the whole multiplication table
        if self.size > self.TABLE_LIMIT or self.d == 0:
            return None
        r = np.arange(self.size, dtype=np.int64)
        if self.fs.alpha > 1:
            return self._mul_direct(r[:, None], r[None, :]).astype(np.int32)
        # over F_p: code(a*b) is linear in the digits of a, with rows t^i * b
        p, d = self.fs.p, self.d
        rows = [self.digits(r)]
        for _ in range(d - 1):
            shifted = np.hstack([np.zeros((self.size, 1), dtype=np.int64), rows[-1][:, :-1]])
            top = rows[-1][:, -1:]
            red = (shifted - top * np.array(self.Q.coeffs[:-1], dtype=np.int64)[None, :]) % p
            rows.append(red)
        X = np.stack(rows, axis=1).astype(np.float64)  # (b, i, j)
        A = self.digits(r).astype(np.float64)
        prod = np.fmod(A @ X.transpose(1, 0, 2).reshape(d, -1), p).reshape(self.size, self.size, d)
        return (prod @ (float(self.q) ** np.arange(d))).astype(np.int32)

    def mul(self, a, b):
        a = np.atleast_1d(np.asarray(a, dtype=np.int64))
        b = np.atleast_1d(np.asarray(b, dtype=np.int64))
        if self._table is not None:
            return self._table[a, b].astype(np.int64)
        return self._mul_direct(a, b)

    def _mul_direct(self, a, b):
        a, b = np.broadcast_arrays(a, b)
        if self.d == 0:
            return np.zeros(a.shape, dtype=np.int64)
        A, B = self.digits(a.ravel()), self.digits(b.ravel())
        fs = self.fs
        conv = np.zeros((A.shape[0], 2 * self.d - 1), dtype=np.int64)
        for i in range(self.d):
            for j in range(self.d):
                conv[:, i + j] = fs.vadd(conv[:, i + j], fs.vmul(A[:, i], B[:, j]))
        return ff.residues_of_coeff_matrix(conv, self.Q, fs, self._tpow).reshape(a.shape)

    def pow(self, a, e):
        a = np.atleast_1d(np.asarray(a, dtype=np.int64))
        result = np.full(a.shape, self.one, dtype=np.int64)
        base = a.copy()
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    @property
    def one(self):
        return 1 if self.d > 0 else 0

    @cached_property
    def unit_codes(self):
        """Sorted codes of residues coprime to Q."""
        is_unit = np.ones(self.size, dtype=bool)
        if self.d == 0:
            return np.zeros(1, dtype=np.int64)
        for P, _ in ff.factor(self.Q, self.fs):
            m = self.d - P.degree
            mult = np.arange(self.q**m, dtype=np.int64)
            # multiples of P of degree < d: P * (any residue of degree < m)
            polys = ff.code_digits(mult, m, self.q) if m else np.zeros((1, 0), dtype=np.int64)
            pc = np.array(P.coeffs, dtype=np.int64)
            prod = np.zeros((polys.shape[0], self.d), dtype=np.int64)
            for i in range(m):
                for j in range(P.degree + 1):
                    prod[:, i + j] = self.fs.vadd(prod[:, i + j], self.fs.vmul(polys[:, i], pc[j]))
            is_unit[self.encode(prod)] = False
        return np.flatnonzero(is_unit).astype(np.int64)


def _orders(ring, elems, group_order):
    """Multiplicative orders of an array of units."""
    elems = np.asarray(elems, dtype=np.int64)
    order = np.ones(elems.size, dtype=np.int64)
    for ell, e in ff.factor_int(group_order).items():
        y = ring.pow(elems, group_order // ell**e)
        for _ in range(e):
            nontriv = y != ring.one
            order[nontriv] *= ell
            y = ring.pow(y, ell)
    return order


def _cyclic_powers(ring, g, n):
    """g^0, ..., g^{n-1} by repeated doubling."""
    pw = np.array([ring.one], dtype=np.int64)
    step = g
    while pw.size < n:
        pw = np.concatenate([pw, ring.mul(pw, step)])
        step = int(ring.mul(step, step)[0])
    return pw[:n]


def _span(ring, gens, orders):
    """All products prod g_i^{k_i}: returns (codes, exponent matrix)."""
    codes = np.array([ring.one], dtype=np.int64)
    exps = np.zeros((1, 0), dtype=np.int64)
    for g, n in zip(gens, orders):
        pw = _cyclic_powers(ring, g, n)
        codes = ring.mul(pw[:, None], codes[None, :]).ravel()
        exps = np.hstack([np.repeat(np.arange(n, dtype=np.int64), exps.shape[0])[:, None],
                          np.tile(exps, (n, 1))])
        exps = np.roll(exps, -1, axis=1)
    return codes, exps


def _sylow_basis(ring, sylow, ell):
    """Basis of an abelian ell-group given as a sorted code array."""
    gens, orders = [], []
    span_codes, span_exps = _span(ring, gens, orders)
    while span_codes.size < sylow.size:
        # order of each candidate in the quotient by the current span
        qord = np.ones(sylow.size, dtype=np.int64)
        y = sylow.copy()
        outside = ~np.isin(y, span_codes)
        while outside.any():
            qord[outside] *= ell
            y = ring.pow(y, ell)
            outside &= ~np.isin(y, span_codes)
        ranked = np.lexsort((sylow, -qord))
        for idx in ranked:
            if qord[idx] == 1:
                break
            g, o = int(sylow[idx]), int(qord[idx])
            h = int(ring.pow(g, o)[0])
            coords = span_exps[np.flatnonzero(span_codes == h)[0]]
            if any(c % o for c in coords):
                continue
            # g * h'^{-1} with h'^o = h has order exactly o and meets the span trivially
            hinv = ring.one
            for gi, oi, c in zip(gens, orders, coords):
                hinv = int(ring.mul(hinv, ring.pow(gi, (oi - c // o) % oi))[0])
            gens.append(int(ring.mul(g, hinv)[0]))
            orders.append(o)
            break
        else:  # pragma: no cover - the greedy choice always succeeds for abelian groups
            raise AssertionError("failed to extend Sylow basis")
        span_codes, span_exps = _span(ring, gens, orders)
    return gens, orders


@dataclass(frozen=True)
class ResidueGroup:
    modulus: ff.MonicPoly
    fs: ff.FieldSpec
    generators: tuple
    orders: tuple
    dlog_table: np.ndarray = field(repr=False, compare=False)

    @property
    def size(self):
        return math.prod(self.orders)

    @property
    def exponent(self):
        return self.orders[-1] if self.orders else 1

    @cached_property
    def ring(self):
        return ResidueRing(self.modulus, self.fs)

    @property
    def generator_polys(self):
        return [self.ring.poly_of(g) for g in self.generators]

    @property
    def units(self):
        return np.flatnonzero(self.dlog_table[:, 0] >= 0) if self.orders else np.array([self.ring.one])

    def residue_code(self, poly):
        if isinstance(poly, ff.MonicPoly):
            poly = poly.coeffs
        return self.ring.code_of(poly)

    def dlog(self, poly):
        """Exponent vector of a unit, or None if gcd(poly, Q) != 1."""
        code = self.residue_code(poly)
        if not self.orders:
            return () if self._is_unit_code(code) else None
        row = self.dlog_table[code]
        return None if row[0] < 0 else tuple(int(x) for x in row)

    def _is_unit_code(self, code):
        return code in set(self.ring.unit_codes.tolist())

    def element(self, exps):
        r = self.ring.one
        for g, e in zip(self.generators, exps):
            r = int(self.ring.mul(r, self.ring.pow(g, int(e)))[0])
        return r


@lru_cache(maxsize=128)
def unit_group(Q, fs, cap=GROUP_CAP):
    """Invariant-factor decomposition of (F_q[t]/Q)^* with a dlog table."""
    if isinstance(Q, tuple):
        Q = ff.MonicPoly(Q)
    if Q.degree < 1:
        raise ValidationError("modulus must be a non-constant monic polynomial")
    ring = ResidueRing(Q, fs)
    if ring.size > 8 * cap:
        raise ResourceError(f"residue ring of size {ring.size} exceeds cap")
    units = ring.unit_codes
    n = units.size
    if n > cap:
        raise ResourceError(f"unit group of order {n} exceeds cap {cap}")
    table = np.full((ring.size, 1), -1, dtype=np.int64)
    if n == 1:
        return ResidueGroup(Q, fs, (), (), table)
    order = _orders(ring, units, n)
    if order.max() == n:
        gens, orders = [int(units[np.flatnonzero(order == n)[0]])], [n]
    else:
        per_prime = []
        for ell, e in ff.factor_int(n).items():
            sylow = np.unique(ring.pow(units, n // ell**e))
            g, o = _sylow_basis(ring, sylow, ell)
            idx = np.argsort(o, kind="stable")[::-1]
            per_prime.append(([g[i] for i in idx], [o[i] for i in idx]))
        r = max(len(o) for _, o in per_prime)
        gens, orders = [], []
        # the j-th largest invariant factor collects the j-th largest
        # Sylow cyclic factor of every prime
        for j in range(r):
            gj, oj = ring.one, 1
            for g, o in per_prime:
                if j < len(o):
                    gj = int(ring.mul(gj, g[j])[0])
                    oj *= o[j]
            gens.append(gj)
            orders.append(oj)
        gens, orders = gens[::-1], orders[::-1]
    codes, exps = _span(ring, gens, orders)
    if codes.size != n or np.unique(codes).size != n or not np.array_equal(np.sort(codes), units):
        raise AssertionError("generators do not give a direct decomposition")
    table = np.full((ring.size, len(orders)), -1, dtype=np.int64)
    table[codes] = exps
    table.setflags(write=False)
    return ResidueGroup(Q, fs, tuple(gens), tuple(orders), table)


def _hex_coeffs(coeffs):
    return ".".join(format(int(c), "x") for c in coeffs)


@dataclass(frozen=True)
class Character:
    group: ResidueGroup = field(repr=False)
    exps: tuple

    @property
    def modulus(self):
        return self.group.modulus

    @property
    def label(self):
        e = ".".join(str(x) for x in self.exps) if self.exps else "0"
        return f"Q={_hex_coeffs(self.modulus.coeffs)};e={e}"

    def __repr__(self):
        return f"Character({self.label})"

    @property
    def is_principal(self):
        return all(e == 0 for e in self.exps)

    @property
    def m(self):
        """Denominator of the exact value exponents."""
        return self.group.exponent

    @cached_property
    def _weights(self):
        m = self.m
        return np.array([e * (m // n) for e, n in zip(self.exps, self.group.orders)], dtype=np.int64)

    @cached_property
    def exponent_table(self):
        """k with chi(residue code) = zeta_m^k, or -1 off the units."""
        g = self.group
        if not g.orders:
            out = np.full(g.ring.size, -1, dtype=np.int64)
            out[g.ring.unit_codes] = 0
            return out
        out = (g.dlog_table @ self._weights) % self.m
        out[g.dlog_table[:, 0] < 0] = -1
        out.setflags(write=False)
        return out

    @property
    def order(self):
        ks = self.exponent_table[self.exponent_table >= 0]
        return self.m // math.gcd(self.m, *[int(k) for k in np.unique(ks)])

    @property
    def is_real(self):
        return all((2 * e) % n == 0 for e, n in zip(self.exps, self.group.orders))

    def conj(self):
        return Character(self.group, tuple((-e) % n for e, n in zip(self.exps, self.group.orders)))

    def exact(self, poly):
        """(k, m) with chi(poly) = exp(2 pi i k/m), or None when chi(poly) = 0."""
        k = int(self.exponent_table[self.group.residue_code(poly)])
        return None if k < 0 else (k, self.m)

    def __call__(self, poly):
        return chi_eval(self, poly)

    def value_array(self):
        """Complex values on all residue codes (0 off the units)."""
        k = self.exponent_table
        vals = np.exp(2j * np.pi * k / self.m)
        vals[k < 0] = 0
        return vals


def characters(group):
    """All characters of the group, principal first, in lexicographic exponent order."""
    if not group.orders:
        return [Character(group, ())]
    return [Character(group, e) for e in product(*[range(n) for n in group.orders])]


def chi_eval(chi, poly):
    ex = chi.exact(poly)
    if ex is None:
        return 0j
    k, m = ex
    return complex(np.exp(2j * np.pi * k / m))


def monic_divisors(Q, fs):
    fac = ff.factor(Q, fs)
    out = []
    for exps in product(*[range(e + 1) for _, e in fac]):
        d = (1,)
        for (P, _), k in zip(fac, exps):
            d = ff.mul(d, ff.power(P.coeffs, k, fs), fs)
        out.append(ff.MonicPoly(d))
    return sorted(out, key=lambda D: (D.degree, D.coeffs[::-1]))


def conductor(chi):
    """Smallest monic D | Q such that chi factors through (F_q[t]/D)^*."""
    g = chi.group
    fs = g.fs
    units = g.ring.unit_codes
    unit_digits = g.ring.digits(units)
    kt = chi.exponent_table[units]
    for D in monic_divisors(g.modulus, fs):
        if D.degree == 0:
            if np.all(kt == 0):
                return D
            continue
        red = ff.residues_of_coeff_matrix(unit_digits, D, fs)
        if np.all(kt[red == 1] == 0):
            return D
    return g.modulus  # pragma: no cover - Q itself always qualifies


def is_primitive(chi):
    return conductor(chi) == chi.modulus


def export_table_csv(group, path):
    """One row per character: label, then chi(g_i) as exact 'k/m' exponents."""
    chars = characters(group)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["chi_label"] + [f"g{i}={ff.poly_str(p)}" for i, p in enumerate(group.generator_polys)])
        for chi in chars:
            row = [chi.label]
            for gcode in group.generators:
                k = int(chi.exponent_table[gcode])
                row.append(f"{k}/{chi.m}")
            w.writerow(row)
    return path


# --------------------------------------------------------------------------
# classical Dirichlet characters mod an integer q


def _primitive_root(pe, p):
    phi = pe - pe // p
    fac = ff.prime_factors(phi)
    for g in range(2, pe):
        if math.gcd(g, p) == 1 and all(pow(g, phi // r, pe) != 1 for r in fac):
            return g
    raise AssertionError("no primitive root")


class DirichletGroup:
    """(Z/q)^* as a product of cyclic factors, one or two per prime power of q.

    Odd p^e contributes the cyclic group of a primitive root; 2^e contributes
    nothing (e = 1), <-1> (e = 2) or <-1> x <5> (e >= 3).
    """

    def __init__(self, q):
        q = int(q)
        if q < 1:
            raise ValidationError("modulus must be a positive integer")
        self.q = q
        self.components = []          # (prime power, generator, order)
        for p, e in sorted(ff.factor_int(q).items()) if q > 1 else []:
            pe = p**e
            if p == 2:
                if e >= 2:
                    self.components.append((pe, pe - 1, 2))
                if e >= 3:
                    self.components.append((pe, 5, 2 ** (e - 2)))
            else:
                self.components.append((pe, _primitive_root(pe, p), pe - pe // p))
        self.orders = tuple(c[2] for c in self.components)
        self._dlog = []
        for pe, g, n in self.components:
            table, x = {}, 1
            for k in range(n):
                table[x] = k
                x = x * g % pe
            self._dlog.append(table)

    @property
    def size(self):
        return math.prod(self.orders)

    @property
    def exponent(self):
        return math.lcm(*self.orders) if self.orders else 1

    def dlog(self, a):
        a = int(a) % self.q
        if math.gcd(a, self.q) != 1:
            return None
        out = []
        for (pe, g, n), table in zip(self.components, self._dlog):
            x = a % pe
            if pe % 4 == 0 and g == pe - 1:
                out.append(0 if x % 4 == 1 else 1)
            elif pe % 8 == 0:
                # the <5> coordinate after removing the sign
                out.append(table[x if x % 4 == 1 else (-x) % pe])
            else:
                out.append(table[x])
        return tuple(out)

    def characters(self):
        return [DirichletCharacter(self, e) for e in product(*[range(n) for n in self.orders])]

    def character(self, label):
        """Look up a character by label ``q=<q>;e=<exps>`` or the alias ``chi<q>``.

        The alias is accepted only when there is a single non-principal character.
        """
        chars = self.characters()
        for c in chars:
            if c.label == label:
                return c
        nonprincipal = [c for c in chars if not c.is_principal]
        if label == f"chi{self.q}" and len(nonprincipal) == 1:
            return nonprincipal[0]
        raise ValidationError(f"unknown character label {label!r} mod {self.q}; "
                              f"expected one of {[c.label for c in nonprincipal]}")


@dataclass(frozen=True)
class DirichletCharacter:
    group: DirichletGroup = field(repr=False, compare=False)
    exps: tuple

    @property
    def label(self):
        e = ".".join(str(x) for x in self.exps) if self.exps else "0"
        return f"q={self.group.q};e={e}"

    @property
    def is_principal(self):
        return all(e == 0 for e in self.exps)

    @property
    def is_real(self):
        return all((2 * e) % n == 0 for e, n in zip(self.exps, self.group.orders))

    def __call__(self, a):
        d = self.group.dlog(a)
        if d is None:
            return 0j
        turns = sum(e * k / n for e, k, n in zip(self.exps, d, self.group.orders))
        return complex(np.exp(2j * np.pi * (turns % 1.0)))

    def conj(self):
        return DirichletCharacter(self.group, tuple((-e) % n for e, n in zip(self.exps, self.group.orders)))
