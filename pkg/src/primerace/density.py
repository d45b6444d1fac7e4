"""Density estimators: natural density over integers, logarithmic density, and
the weighted prime sum (1/log X) sum_{p in P, p <= X} log p / p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ResourceError, ValidationError

SIEVE_CAP = 2 * 10**8


@dataclass
class DensityEstimate:
    lower: float
    upper: float
    point: float

    def __iter__(self):
        return iter((self.lower, self.upper, self.point))

    def to_json(self):
        return {"lower": self.lower, "upper": self.upper, "point": self.point}


def running_average(mask):
    mask = np.asarray(mask, dtype=float)
    return np.cumsum(mask) / np.arange(1, mask.size + 1)


def natural_density(indicator, K_max=None):
    """(lower, upper, point) of the Cesaro averages over k <= X, X in [K/2, K].

    ``indicator`` is either a boolean array for k = 1..K or a vectorized
    callable on integer arrays.
    """
    if callable(indicator):
        if K_max is None:
            raise ValidationError("K_max is required with a callable indicator")
        mask = np.asarray(indicator(np.arange(1, K_max + 1)), bool)
    else:
        mask = np.asarray(indicator, bool)
        if K_max is not None:
            mask = mask[:K_max]
    if mask.size == 0:
        raise ValidationError("empty indicator")
    avg = running_average(mask)
    tail = avg[(mask.size - 1) // 2:]
    return DensityEstimate(float(tail.min()), float(tail.max()), float(avg[-1]))


def _transitions(indicator, y0, y1, vals, iters=48):
    """Bisect every sign change of the indicator between grid nodes y0 < y1."""
    lo, hi = y0.copy(), y1.copy()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        vm = np.asarray(indicator(mid), bool)
        same = vm == vals
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def log_density(indicator, Y, step=1 / 16, from_x=False):
    """(lower, upper, point) of (1/Y') integral_0^Y' 1_P(e^y) dy over Y' in [Y/2, Y].

    ``indicator`` is a vectorized predicate on y = log x (or on x when
    ``from_x``; only usable while e^Y is representable).  The integral is
    computed on a grid of the given step with every change of the indicator
    located by bisection, so it is exact up to changes closer together than
    one step.
    """
    if Y <= 0:
        raise ValidationError("Y must be positive")
    f = (lambda y: indicator(np.exp(y))) if from_x else indicator
    n = max(2, int(math.ceil(Y / step)))
    y = np.linspace(0.0, Y, n + 1)
    v = np.asarray(f(y), bool)
    ch = np.flatnonzero(v[1:] != v[:-1])
    cuts = _transitions(f, y[ch], y[ch + 1], v[ch]) if ch.size else np.array([])
    # piecewise constant on the cells between consecutive breakpoints
    pts = np.concatenate([y, cuts])
    order = np.argsort(pts, kind="stable")
    pts = pts[order]
    mids = 0.5 * (pts[1:] + pts[:-1])
    inside = np.asarray(f(mids), bool)
    lengths = np.diff(pts)
    cum = np.concatenate([[0.0], np.cumsum(lengths * inside)])
    # running averages at the breakpoints of the tail
    sel = pts >= Y / 2
    avg = cum[sel] / pts[sel]
    # inf/sup of a piecewise-linear numerator over y occur at breakpoints
    return DensityEstimate(float(avg.min()), float(avg.max()), float(cum[-1] / Y))


def log_density_of_steps(breaks, states, X):
    """Exact log density of a set that is constant between breakpoints.

    ``states[i]`` holds on [breaks[i], breaks[i+1]) (the last one up to X),
    and the set is empty below breaks[0].  Returns (lower, upper, point) over
    the tail Y' in [log X / 2, log X], with y = log x measured from x = 1.
    """
    b = np.asarray(breaks, float)
    s = np.asarray(states, bool)
    if b.size == 0:
        return DensityEstimate(0.0, 0.0, 0.0)
    Y = math.log(X)
    yb = np.log(np.append(b[b < X], X))
    s = s[: yb.size - 1]
    seg = np.diff(yb) * s
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    sel = yb >= Y / 2
    ys = yb[sel]
    avg = cum[sel] / np.maximum(ys, 1e-300)
    # include the left edge of the tail window
    k = np.searchsorted(yb, Y / 2, side="right") - 1
    if 0 <= k < s.size:
        edge = (cum[k] + (Y / 2 - yb[k]) * s[k]) / (Y / 2)
        avg = np.append(avg, edge)
    # just before each breakpoint the average reaches the end-of-segment value,
    # which is already listed, so breakpoints suffice
    return DensityEstimate(float(avg.min()), float(avg.max()), float(cum[-1] / Y))


def sieve_primes(X):
    """All primes <= X (numpy sieve of Eratosthenes)."""
    X = int(X)
    if X > SIEVE_CAP:
        raise ResourceError(f"sieve limit {X} exceeds cap {SIEVE_CAP}")
    if X < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(X + 1, dtype=bool)
    is_p[:2] = False
    is_p[4::2] = False
    for p in range(3, int(X**0.5) + 1, 2):
        if is_p[p]:
            is_p[p * p::2 * p] = False
    return np.flatnonzero(is_p)


def weighted_prime_density(members, X, primes=None):
    """(1/log X) sum over primes p <= X with members(p) true of log p / p.

    ``members`` is a boolean array aligned with ``primes`` or a vectorized
    predicate on prime arrays.
    """
    if X < 3:
        raise ValidationError("X must be at least 3")
    if primes is None:
        primes = sieve_primes(X)
    primes = np.asarray(primes)
    keep = primes <= X
    mask = members(primes) if callable(members) else np.asarray(members, bool)
    mask = np.asarray(mask, bool) & keep
    p = primes[mask].astype(float)
    return float(np.sum(np.log(p) / p) / math.log(X))
