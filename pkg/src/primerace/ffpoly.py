"""Polynomials over finite fields F_q with q = p^alpha.

Field elements are integers 0..q-1.  The base-p digits of an element are its
coefficients (lowest first) as a polynomial in a generator of F_q over F_p,
reduced by ``FieldSpec.modulus``; for alpha = 1 an element is just its residue
mod p.

Polynomials are tuples of field elements, lowest degree first, without
trailing zeros (the zero polynomial is ``()``).  ``MonicPoly`` wraps such a
tuple with leading coefficient 1.

A monic polynomial t^n + sum_{i<n} c_i t^i is encoded by the integer code
sum_{i<n} c_i q^i (the leading 1 is implicit), and a residue of degree < d
modulo a polynomial of degree d by sum_{i<d} c_i q^i.  The vectorised kernels
at the end of the module (sieve, Omega, residues) operate on arrays of codes.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .errors import ResourceError, ValidationError

Poly = tuple


def is_prime(n):
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    r = math.isqrt(n)
    return all(n % d for d in range(3, r + 1, 2))


def prime_factors(n):
    """Distinct prime factors of n, ascending."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def factor_int(n):
    """Prime factorisation of n as a dict prime -> exponent."""
    out = {}
    for ell in prime_factors(n):
        e = 0
        while n % ell == 0:
            n //= ell
            e += 1
        out[ell] = e
    return out


def mobius(n):
    f = factor_int(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


# --------------------------------------------------------------------------
# Field


@dataclass(frozen=True)
class FieldSpec:
    """The finite field F_{p^alpha}, realised as F_p[x]/(modulus)."""

    p: int
    alpha: int = 1
    modulus: tuple = field(default=())

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValidationError(f"field characteristic {self.p} is not prime")
        if self.alpha < 1:
            raise ValidationError("extension degree alpha must be >= 1")
        if not self.modulus:
            object.__setattr__(self, "modulus", default_modulus(self.p, self.alpha))
        mod = tuple(int(c) % self.p for c in self.modulus)
        object.__setattr__(self, "modulus", mod)
        if len(mod) != self.alpha + 1 or mod[-1] != 1:
            raise ValidationError("field modulus must be monic of degree alpha")
        if self.alpha > 1 and not is_irreducible(MonicPoly(mod), FieldSpec(self.p)):
            raise ValidationError(f"field modulus {mod} is reducible over F_{self.p}")

    @classmethod
    def parse(cls, tag, modulus=None):
        """Parse ``"p^alpha"`` (or a bare prime ``"p"``)."""
        m = re.fullmatch(r"\s*(\d+)\s*(?:\^\s*(\d+))?\s*", str(tag))
        if not m:
            raise ValidationError(f"field tag {tag!r} is not of the form p^alpha")
        p, alpha = int(m.group(1)), int(m.group(2) or 1)
        return cls(p, alpha, tuple(modulus) if modulus else ())

    @property
    def q(self):
        return self.p**self.alpha

    @property
    def tag(self):
        return f"{self.p}^{self.alpha}"

    def __repr__(self):
        return f"FieldSpec({self.tag})"

    @cached_property
    def _tables(self):
        q, p = self.q, self.p
        if self.alpha == 1:
            a = np.arange(q)
            add = (a[:, None] + a[None, :]) % p
            mul = (a[:, None] * a[None, :]) % p
        else:
            vecs = [_int_digits(e, p, self.alpha) for e in range(q)]
            add = np.zeros((q, q), dtype=np.int64)
            mul = np.zeros((q, q), dtype=np.int64)
            for x in range(q):
                for y in range(q):
                    add[x, y] = _digits_int([(u + v) % p for u, v in zip(vecs[x], vecs[y])], p)
                    mul[x, y] = _digits_int(_fp_mulmod(vecs[x], vecs[y], self.modulus, p), p)
        neg = np.array([int(np.flatnonzero(add[x] == 0)[0]) for x in range(q)])
        inv = np.zeros(q, dtype=np.int64)
        for x in range(1, q):
            inv[x] = int(np.flatnonzero(mul[x] == 1)[0])
        return add, mul, neg, inv

    @cached_property
    def add_table(self):
        return self._tables[0]

    @cached_property
    def mul_table(self):
        return self._tables[1]

    @cached_property
    def _lists(self):
        add, mul, neg, inv = self._tables
        return add.tolist(), mul.tolist(), neg.tolist(), inv.tolist()

    def add(self, a, b):
        if self.alpha == 1:
            return (a + b) % self.p
        return self._lists[0][a][b]

    def mul(self, a, b):
        if self.alpha == 1:
            return (a * b) % self.p
        return self._lists[1][a][b]

    def neg(self, a):
        if self.alpha == 1:
            return (-a) % self.p
        return self._lists[2][a]

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in F_q")
        if self.alpha == 1:
            return pow(a, self.p - 2, self.p)
        return self._lists[3][a]

    def power(self, a, e):
        r = 1
        while e:
            if e & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            e >>= 1
        return r

    # vectorised element arithmetic on integer arrays
    def vadd(self, a, b):
        if self.alpha == 1:
            return (a + b) % self.p
        return self.add_table[a, b]

    def vmul(self, a, b):
        if self.alpha == 1:
            return (a * b) % self.p
        return self.mul_table[a, b]


def _int_digits(e, base, length):
    out = []
    for _ in range(length):
        out.append(e % base)
        e //= base
    return out


def _digits_int(digits, base):
    v = 0
    for c in reversed(digits):
        v = v * base + c
    return v


def _fp_mulmod(a, b, mod, p):
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
    n = len(mod) - 1
    for k in range(len(prod) - 1, n - 1, -1):
        c = prod[k]
        if c:
            for i in range(n + 1):
                prod[k - n + i] = (prod[k - n + i] - c * mod[i]) % p
    return (prod + [0] * n)[:n]


@lru_cache(maxsize=None)
def default_modulus(p, alpha):
    """Smallest monic irreducible of degree alpha over F_p in code order."""
    if alpha == 1:
        return (0, 1)
    base = FieldSpec(p)
    for code in range(p**alpha):
        f = MonicPoly(tuple(_int_digits(code, p, alpha)) + (1,))
        if is_irreducible(f, base):
            return f.coeffs
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


# --------------------------------------------------------------------------
# Dense polynomial arithmetic on coefficient tuples


def normalize(f):
    f = list(f)
    while f and f[-1] == 0:
        f.pop()
    return tuple(f)


def degree(f):
    return len(f) - 1


def add(f, g, fs):
    n = max(len(f), len(g))
    f = tuple(f) + (0,) * (n - len(f))
    g = tuple(g) + (0,) * (n - len(g))
    return normalize(fs.add(a, b) for a, b in zip(f, g))


def neg(f, fs):
    return tuple(fs.neg(a) for a in f)


def sub(f, g, fs):
    return add(f, neg(g, fs), fs)


def scale(f, c, fs):
    return normalize(fs.mul(a, c) for a in f)


def mul(f, g, fs):
    if not f or not g:
        return ()
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                if b:
                    out[i + j] = fs.add(out[i + j], fs.mul(a, b))
    return normalize(out)


def poly_divmod(f, g, fs):
    g = normalize(g)
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    f = list(normalize(f))
    dg = len(g) - 1
    lead_inv = fs.inv(g[-1])
    if len(f) <= dg:
        return (), tuple(f)
    quot = [0] * (len(f) - dg)
    for k in range(len(f) - 1, dg - 1, -1):
        c = f[k]
        if c:
            c = fs.mul(c, lead_inv)
            quot[k - dg] = c
            for i in range(dg + 1):
                f[k - dg + i] = fs.sub(f[k - dg + i], fs.mul(c, g[i]))
    return normalize(quot), normalize(f[:dg])


def poly_mod(f, g, fs):
    return poly_divmod(f, g, fs)[1]


def make_monic(f, fs):
    f = normalize(f)
    if not f:
        return f
    return scale(f, fs.inv(f[-1]), fs)


def gcd(f, g, fs):
    f, g = normalize(f), normalize(g)
    while g:
        f, g = g, poly_mod(f, g, fs)
    return make_monic(f, fs)


def powmod(f, e, m, fs):
    result = (1,)
    base = poly_mod(f, m, fs)
    while e:
        if e & 1:
            result = poly_mod(mul(result, base, fs), m, fs)
        base = poly_mod(mul(base, base, fs), m, fs)
        e >>= 1
    return result


def power(f, e, fs):
    result = (1,)
    for _ in range(e):
        result = mul(result, f, fs)
    return result


def derivative(f, fs):
    out = []
    for i in range(1, len(f)):
        c = 0
        for _ in range(i % fs.p):
            c = fs.add(c, f[i])
        out.append(c)
    return normalize(out)


# --------------------------------------------------------------------------
# Monic polynomials and the number-theoretic functions on them


@dataclass(frozen=True, order=True)
class MonicPoly:
    coeffs: tuple

    def __post_init__(self):
        c = tuple(int(x) for x in self.coeffs)
        object.__setattr__(self, "coeffs", c)
        if not c or c[-1] != 1:
            raise ValidationError(f"polynomial {c} is not monic")

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @classmethod
    def one(cls):
        return cls((1,))

    @classmethod
    def parse(cls, text, fs):
        f = parse_poly(text, fs)
        if not f or f[-1] != 1:
            raise ValidationError(f"polynomial {text!r} is not monic")
        return cls(f)

    def __str__(self):
        return poly_str(self.coeffs)


def parse_poly(text, fs):
    """Parse ``"t^2+2t+1"``/``"2*t + 1"`` or a low-first list ``"1,2,1"``.

    Coefficients are field-element codes.  The result may be non-monic.
    """
    text = str(text).strip().replace(" ", "")
    if not text:
        raise ValidationError("empty polynomial")
    if re.fullmatch(r"-?\d+([,:;]-?\d+)*", text) and ("," in text or ":" in text or ";" in text):
        vals = [int(x) for x in re.split(r"[,:;]", text)]
        return normalize(_coerce(v, fs) for v in vals)
    if re.fullmatch(r"-?\d+", text):
        return normalize((_coerce(int(text), fs),))
    terms = re.findall(r"([+-]?)([^+-]+)", text)
    if "".join(s + t for s, t in terms) != text:
        raise ValidationError(f"cannot parse polynomial {text!r}")
    acc = {}
    for sign, term in terms:
        m = re.fullmatch(r"(\d*)\*?(?:([tTxX])(?:\^(\d+))?)?", term)
        if not m or (not m.group(1) and not m.group(2)):
            raise ValidationError(f"cannot parse term {term!r} in {text!r}")
        c = int(m.group(1)) if m.group(1) else 1
        e = (int(m.group(3)) if m.group(3) else 1) if m.group(2) else 0
        c = _coerce(c, fs)
        if sign == "-":
            c = fs.neg(c)
        acc[e] = fs.add(acc.get(e, 0), c)
    n = max(acc) + 1
    return normalize(acc.get(i, 0) for i in range(n))


def _coerce(v, fs):
    if fs.alpha == 1:
        return v % fs.p
    if v < 0:
        return fs.neg(-v)
    if v >= fs.q:
        raise ValidationError(f"coefficient {v} is not an element code of F_{fs.q}")
    return v


def poly_str(f):
    if not f:
        return "0"
    terms = []
    for i in range(len(f) - 1, -1, -1):
        c = f[i]
        if not c:
            continue
        mono = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
        if not mono:
            terms.append(str(c))
        else:
            terms.append(mono if c == 1 else f"{c}*{mono}")
    return " + ".join(terms)


def monic_code(f, q):
    coeffs = f.coeffs if isinstance(f, MonicPoly) else tuple(f)
    return _digits_int(list(coeffs[:-1]), q)


def monic_from_code(code, n, q):
    return MonicPoly(tuple(_int_digits(code, q, n)) + (1,))


def residue_code(f, q, d):
    """Code of a residue polynomial f (degree < d)."""
    f = tuple(f)
    if len(f) > d:
        raise ValueError("residue has too large a degree")
    return _digits_int(list(f), q)


def residue_from_code(code, q, d):
    return normalize(_int_digits(code, q, d))


def is_irreducible(f, fs):
    """Rabin's test: t^{q^n} = t mod f and gcd(t^{q^{n/r}} - t, f) = 1."""
    coeffs = f.coeffs if isinstance(f, MonicPoly) else make_monic(f, fs)
    n = len(coeffs) - 1
    if n < 1:
        raise ValidationError("irreducibility is undefined for constants")
    if n == 1:
        return True
    x = (0, 1)
    frob = [x]
    h = x
    for _ in range(n):
        h = powmod(h, fs.q, coeffs, fs)
        frob.append(h)
    if frob[n] != x:
        return False
    for r in prime_factors(n):
        if gcd(sub(frob[n // r], x, fs), coeffs, fs) != (1,):
            return False
    return True


def _pth_root(f, fs):
    p = fs.p
    e = fs.q // p
    return normalize(fs.power(f[i], e) for i in range(0, len(f), p))


def squarefree_decomposition(f, fs):
    """Pairs (g, e) with f = prod g^e and each g squarefree monic."""
    f = make_monic(f, fs)
    if len(f) <= 1:
        return []
    out = []
    fp = derivative(f, fs)
    if fp:
        c = gcd(f, fp, fs)
        w = poly_divmod(f, c, fs)[0]
        i = 1
        while w != (1,):
            y = gcd(w, c, fs)
            z = poly_divmod(w, y, fs)[0]
            if z != (1,):
                out.append((z, i))
            i += 1
            w = y
            c = poly_divmod(c, y, fs)[0]
        if c != (1,):
            for g, e in squarefree_decomposition(_pth_root(c, fs), fs):
                out.append((g, e * fs.p))
    else:
        for g, e in squarefree_decomposition(_pth_root(f, fs), fs):
            out.append((g, e * fs.p))
    return out


def distinct_degree(f, fs):
    """Split a squarefree monic f into (g, d): g = product of its degree-d factors."""
    out = []
    x = (0, 1)
    h = x
    i = 1
    while len(f) - 1 >= 2 * i:
        h = powmod(h, fs.q, f, fs)
        g = gcd(sub(h, x, fs), f, fs)
        if g != (1,):
            out.append((g, i))
            f = poly_divmod(f, g, fs)[0]
            h = poly_mod(h, f, fs)
        i += 1
    if len(f) > 1:
        out.append((f, len(f) - 1))
    return out


def equal_degree(g, d, fs, rng):
    """Cantor-Zassenhaus splitting of g into its degree-d irreducible factors."""
    n = len(g) - 1
    if n == d:
        return [g]
    while True:
        a = normalize(rng.randrange(fs.q) for _ in range(n))
        if len(a) < 2:
            continue
        if fs.p == 2:
            b = a
            t = a
            for _ in range(fs.alpha * d - 1):
                t = poly_mod(mul(t, t, fs), g, fs)
                b = add(b, t, fs)
        else:
            b = sub(powmod(a, (fs.q**d - 1) // 2, g, fs), (1,), fs)
        h = gcd(b, g, fs)
        if 1 <= len(h) - 1 < n:
            return equal_degree(h, d, fs, rng) + equal_degree(poly_divmod(g, h, fs)[0], d, fs, rng)


FACTOR_SEED = 20191016


@lru_cache(maxsize=65536)
def _factor_cached(coeffs, fs):
    rng = random.Random(FACTOR_SEED)
    counts = {}
    for g, e in squarefree_decomposition(coeffs, fs):
        for h, d in distinct_degree(g, fs):
            for irr in equal_degree(h, d, fs, rng):
                counts[irr] = counts.get(irr, 0) + e
    return tuple(sorted(counts.items(), key=lambda kv: (len(kv[0]), kv[0][::-1])))


def factor(f, fs):
    """Factorisation of a monic f as a list of (MonicPoly, exponent)."""
    coeffs = f.coeffs if isinstance(f, MonicPoly) else make_monic(f, fs)
    if len(coeffs) <= 1:
        return []
    return [(MonicPoly(g), e) for g, e in _factor_cached(tuple(coeffs), fs)]


def omega(f, fs):
    """Number of irreducible factors of f counted with multiplicity."""
    return sum(e for _, e in factor(f, fs))


def von_mangoldt(f, fs):
    """deg P if f = P^k for an irreducible P, else 0."""
    fac = factor(f, fs)
    if len(fac) != 1:
        return 0
    return fac[0][0].degree


def count_irreducible(deg, fs):
    """Number of monic irreducibles of degree exactly deg (Gauss's formula)."""
    if deg < 1:
        raise ValidationError("degree must be >= 1")
    return sum(mobius(d) * fs.q ** (deg // d) for d in divisors(deg)) // deg


def enumeration_cap(fs, log2_budget=24):
    """Largest degree whose q^deg monic polynomials fit a 2^24 budget."""
    return max(1, int(math.floor(log2_budget * math.log(2) / math.log(fs.q) + 1e-9)))


def check_cap(deg, fs, cap=None):
    cap = enumeration_cap(fs) if cap is None else cap
    if deg > cap:
        raise ResourceError(f"degree {deg} exceeds enumeration cap {cap} over F_{fs.q}")


def enumerate_monic(deg, fs, cap=None):
    """All q^deg monic polynomials of degree deg, in increasing code order."""
    if deg < 0:
        raise ValidationError("degree must be >= 0")
    check_cap(deg, fs, cap)
    return [monic_from_code(c, deg, fs.q) for c in range(fs.q**deg)]


# --------------------------------------------------------------------------
# Vectorised kernels over arrays of codes

_BATCH = 1 << 22


def code_digits(codes, n, q):
    """(len(codes), n) matrix of base-q digits, lowest first."""
    codes = np.asarray(codes, dtype=np.int64)
    out = np.empty((codes.size, n), dtype=np.int64)
    c = codes.copy()
    for i in range(n):
        out[:, i] = c % q
        c //= q
    return out


def multiply_by_all_monic(polys, m, fs):
    """Codes of P*M for every P in ``polys`` (rows of a (k, d+1) monic
    coefficient matrix) and every monic M of degree m; shape (k, q^m)."""
    polys = np.asarray(polys, dtype=np.int64)
    k, d1 = polys.shape
    d = d1 - 1
    n = d + m
    q = fs.q
    if fs.alpha == 1:
        return _multiply_prime_field(polys, m, fs.p)
    mdig = code_digits(np.arange(q**m), m, q)
    codes = np.zeros((k, q**m), dtype=np.int64)
    qpow = 1
    for j in range(n):
        acc = np.zeros((k, q**m), dtype=np.int64)
        for i in range(max(0, j - m), min(d, j) + 1):
            pi = polys[:, i][:, None]
            if j - i == m:
                term = np.broadcast_to(pi, (k, q**m))
            else:
                term = fs.vmul(pi, mdig[:, j - i][None, :])
            acc = fs.vadd(acc, term)
        codes += acc * qpow
        qpow *= q
    return codes


def _multiply_prime_field(polys, m, p):
    # Over F_p the convolution is a float matmul against a banded matrix
    # built from P; all partial sums stay far below 2^53, so it is exact.
    k, d1 = polys.shape
    n = d1 - 1 + m
    band = np.zeros((m + 1, k, n + 1))
    for s in range(m + 1):
        band[s, :, s:s + d1] = polys
    band = band.reshape(m + 1, k * (n + 1))
    weights = float(p) ** np.arange(n)
    out = np.empty((k, p**m), dtype=np.int64)
    step = max(1, (1 << 23) // (k * (n + 1)))
    for s in range(0, p**m, step):
        idx = np.arange(s, min(s + step, p**m))
        mdig = monic_matrix(idx, m, p).astype(np.float64)
        prod = np.fmod(mdig @ band, p).reshape(idx.size, k, n + 1)
        out[:, s:s + idx.size] = (prod[:, :, :n] @ weights).T.astype(np.int64)
    return out


def monic_matrix(codes, n, q):
    """Coefficient matrix (with the leading 1) of monic degree-n codes."""
    dig = code_digits(codes, n, q)
    return np.hstack([dig, np.ones((dig.shape[0], 1), dtype=np.int64)])


@lru_cache(maxsize=64)
def _irreducible_codes(n, fs):
    q = fs.q
    if n == 1:
        return np.arange(q, dtype=np.int64)
    composite = np.zeros(q**n, dtype=bool)
    for d in range(1, n // 2 + 1):
        irr = _irreducible_codes(d, fs)
        mat = monic_matrix(irr, d, q)
        per = max(1, _BATCH // (q ** (n - d)))
        for s in range(0, mat.shape[0], per):
            composite[multiply_by_all_monic(mat[s:s + per], n - d, fs).ravel()] = True
    out = np.flatnonzero(~composite).astype(np.int64)
    out.setflags(write=False)
    return out


def irreducible_codes(n, fs, cap=None):
    """Sorted codes of all monic irreducibles of degree n (sieve)."""
    if n < 1:
        raise ValidationError("degree must be >= 1")
    check_cap(n, fs, cap)
    return _irreducible_codes(n, fs)


def prime_powers(n, fs, cap=None):
    """Coefficient matrices of all P^e with e*deg P = n, grouped as
    a list of (deg P, matrix).  Feeds the von Mangoldt weights."""
    out = []
    for d in divisors(n):
        irr = irreducible_codes(d, fs, cap)
        e = n // d
        mat = monic_matrix(irr, d, fs.q)
        if e == 1:
            out.append((d, mat))
            continue
        rows = [power(tuple(int(x) for x in row), e, fs) for row in mat]
        out.append((d, np.array(rows, dtype=np.int64).reshape(len(rows), n + 1)))
    return out


@lru_cache(maxsize=16)
def _omega_array(n, fs):
    q = fs.q
    om = np.zeros(q**n, dtype=np.int64)
    for dp in range(1, n + 1):
        for _, mat in prime_powers(dp, fs):
            per = max(1, _BATCH // (q ** (n - dp)))
            for s in range(0, mat.shape[0], per):
                codes = multiply_by_all_monic(mat[s:s + per], n - dp, fs).ravel()
                om += np.bincount(codes, minlength=q**n)
    return om


def omega_array(n, fs, cap=None):
    """Omega(N) for every monic N of degree n, indexed by code."""
    check_cap(n, fs, cap)
    if n == 0:
        return np.zeros(1, dtype=np.int64)
    return _omega_array(n, fs)


def powers_of_t_mod(Q, upto, fs):
    """Rows t^i mod Q (as length-deg Q coefficient vectors) for i <= upto."""
    Qc = Q.coeffs if isinstance(Q, MonicPoly) else tuple(Q)
    d = len(Qc) - 1
    rows = []
    r = (1,)
    for _ in range(upto + 1):
        red = poly_mod(r, Qc, fs)
        rows.append(list(red) + [0] * (d - len(red)))
        r = mul(red, (0, 1), fs)
    return np.array(rows, dtype=np.int64).reshape(upto + 1, d)


def residues_of_coeff_matrix(mat, Q, fs, T=None):
    """Residue codes mod Q of polynomials given by a coefficient matrix.

    ``T`` may carry precomputed rows of t^i mod Q for i < mat.shape[1].
    """
    mat = np.asarray(mat, dtype=np.int64)
    Qc = Q.coeffs if isinstance(Q, MonicPoly) else tuple(Q)
    d = len(Qc) - 1
    q = fs.q
    if T is None:
        T = powers_of_t_mod(Qc, mat.shape[1] - 1, fs)
    else:
        T = T[:mat.shape[1]]
    if fs.alpha == 1:
        red = (mat @ T) % fs.p
    else:
        red = np.zeros((mat.shape[0], d), dtype=np.int64)
        for i in range(mat.shape[1]):
            for j in range(d):
                if T[i, j]:
                    red[:, j] = fs.vadd(red[:, j], fs.vmul(mat[:, i], T[i, j]))
    weights = q ** np.arange(d, dtype=np.int64)
    return red @ weights


def residues_of_codes(codes, n, Q, fs):
    """Residue codes mod Q of the monic degree-n polynomials with given codes."""
    Qc = Q.coeffs if isinstance(Q, MonicPoly) else tuple(Q)
    d = len(Qc) - 1
    codes = np.asarray(codes, dtype=np.int64)
    if n < d:
        return codes + fs.q**n
    out = np.empty(codes.size, dtype=np.int64)
    for s in range(0, codes.size, _BATCH):
        out[s:s + _BATCH] = residues_of_coeff_matrix(monic_matrix(codes[s:s + _BATCH], n, fs.q), Qc, fs)
    return out
