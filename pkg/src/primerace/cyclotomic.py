"""Exact arithmetic in Z[zeta_m].

An element is stored by its coordinates on the power basis
1, zeta, ..., zeta^{phi(m)-1}, i.e. as a polynomial reduced modulo the m-th
cyclotomic polynomial.  Sums of roots of unity are built from an exponent
histogram and reduced once, which keeps character sums exact.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


def euler_phi(n):
    result = n
    k = n
    d = 2
    while d * d <= k:
        if k % d == 0:
            while k % d == 0:
                k //= d
            result -= result // d
        d += 1
    if k > 1:
        result -= result // k
    return result


def _int_poly_divexact(num, den):
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for k in range(len(out) - 1, -1, -1):
        c = num[k + len(den) - 1] // den[-1]
        out[k] = c
        for i, d in enumerate(den):
            num[k + i] -= c * d
    if any(num):
        raise ArithmeticError("inexact cyclotomic division")
    return out


@lru_cache(maxsize=None)
def cyclotomic_poly(m):
    """Integer coefficients of Phi_m, lowest degree first."""
    num = [-1] + [0] * (m - 1) + [1]
    for d in range(1, m):
        if m % d == 0:
            num = _int_poly_divexact(num, cyclotomic_poly(d))
    return tuple(num)


@lru_cache(maxsize=None)
def reduction_matrix(m):
    """Row k holds the power-basis coordinates of zeta_m^k, 0 <= k < m."""
    phi = cyclotomic_poly(m)
    deg = len(phi) - 1
    rows = np.zeros((m, deg), dtype=np.int64)
    cur = [1] + [0] * (deg - 1)
    for k in range(m):
        rows[k] = cur
        # multiply by zeta and reduce with the monic Phi_m
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            cur = [c - top * p for c, p in zip(cur, phi[:-1])]
    rows.setflags(write=False)
    return rows


@dataclass(frozen=True)
class CycInt:
    """Element of Z[zeta_m] on the power basis."""

    m: int
    coeffs: tuple

    @classmethod
    def zero(cls, m):
        return cls(m, (0,) * euler_phi(m))

    @classmethod
    def root(cls, k, m):
        return cls(m, tuple(int(x) for x in reduction_matrix(m)[k % m]))

    @classmethod
    def from_histogram(cls, hist, m):
        """sum_k hist[k] zeta_m^k for an integer histogram of length m."""
        hist = np.asarray(hist, dtype=np.int64)
        return cls(m, tuple(int(x) for x in hist @ reduction_matrix(m)))

    def _lift(self, L):
        if L == self.m:
            return self
        step = L // self.m
        hist = np.zeros(L, dtype=np.int64)
        hist[np.arange(len(self.coeffs)) * step] = self.coeffs
        return CycInt.from_histogram(hist, L)

    def _common(self, other):
        if isinstance(other, int):
            other = CycInt.root(0, self.m).scale(other)
        L = math.lcm(self.m, other.m)
        return self._lift(L), other._lift(L)

    def scale(self, c):
        return CycInt(self.m, tuple(c * x for x in self.coeffs))

    def __add__(self, other):
        a, b = self._common(other)
        return CycInt(a.m, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other if isinstance(other, CycInt) else -other)

    def __mul__(self, other):
        a, b = self._common(other)
        hist = np.zeros(a.m, dtype=np.int64)
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    if y:
                        hist[(i + j) % a.m] += x * y
        return CycInt.from_histogram(hist, a.m)

    __rmul__ = __mul__

    def conj(self):
        hist = np.zeros(self.m, dtype=np.int64)
        for i, x in enumerate(self.coeffs):
            hist[(-i) % self.m] += x
        return CycInt.from_histogram(hist, self.m)

    def is_zero(self):
        return not any(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, int):
            other = CycInt.root(0, self.m).scale(other)
        if not isinstance(other, CycInt):
            return NotImplemented
        a, b = self._common(other)
        return a.coeffs == b.coeffs

    __hash__ = None

    def __complex__(self):
        w = cmath.exp(2j * math.pi / self.m)
        return complex(sum(c * w**k for k, c in enumerate(self.coeffs)))

    def to_json(self):
        return {"m": self.m, "coeffs": list(self.coeffs)}
