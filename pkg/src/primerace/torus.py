"""Almost periodic functions, the orbit-closure subtorus, and the limiting measure.

An almost periodic function is F(t) = offset + sum_n 2 Re(c_n e^{i t gamma_n})
with c_n in C^D.  In integer mode t = k runs over the integers; in real mode
t = y = log x.  The closure of the orbit t -> (t gamma_n) mod 2 pi is a
subtorus A, and the limiting distribution mu of F is the pushforward of the
Haar measure on A through F~(theta) = offset + sum 2 Re(c_n e^{i theta_n}).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import j0

from . import rng as _rng
from .errors import ComputationError, ResourceError, ValidationError
from .lattice import smith_normal_form
from .relations import RelationLattice, relation_lattice, relation_residual

GATHER_TOL = 1e-12
QUAD_POINTS = 2048
QUAD_BUDGET = 2**22
FINITE_CAP = 10**6
TIE_THRESHOLD = 0.05
TWO_PI = 2 * math.pi


@dataclass
class APFunctionSpec:
    gammas: np.ndarray
    coeffs: np.ndarray
    mode: str = "integer"
    offset: np.ndarray | None = None

    def __post_init__(self):
        self.gammas = np.asarray(self.gammas, dtype=float).reshape(-1)
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim == 1:
            c = c.reshape(-1, 1)
        self.coeffs = c
        if self.mode not in ("integer", "real"):
            raise ValidationError(f"mode must be 'integer' or 'real', got {self.mode!r}")
        if c.shape[0] != self.gammas.size:
            raise ValidationError("one coefficient vector per frequency is required")
        self.offset = np.zeros(self.D) if self.offset is None else np.asarray(self.offset, float).reshape(-1)
        if self.offset.size != self.D:
            raise ValidationError("offset has the wrong dimension")
        g = self.gammas
        if np.any(~np.isfinite(g)) or np.any(g <= 0):
            raise ValidationError("frequencies must be positive and finite")
        if self.mode == "integer" and np.any(g > math.pi + 1e-12):
            raise ValidationError("integer-mode frequencies must lie in (0, pi]")
        s = np.sort(g)
        if s.size > 1 and np.min(np.diff(s)) <= GATHER_TOL:
            raise ValidationError("frequencies must be distinct; use APFunctionSpec.gather")

    @classmethod
    def gather(cls, gammas, coeffs, mode="integer", offset=None, tol=GATHER_TOL):
        """Sum the coefficient vectors of frequencies that agree within tol."""
        g = np.asarray(gammas, dtype=float).reshape(-1)
        c = np.asarray(coeffs, dtype=complex)
        if c.ndim == 1:
            c = c.reshape(-1, 1)
        order = np.argsort(g, kind="stable")
        out_g, out_c = [], []
        for i in order:
            if out_g and g[i] - out_g[-1][-1] <= tol:
                out_g[-1].append(g[i])
                out_c[-1] = out_c[-1] + c[i]
            else:
                out_g.append([g[i]])
                out_c.append(c[i].copy())
        D = c.shape[1] if c.size else (len(offset) if offset is not None else 1)
        gam = np.array([grp[0] for grp in out_g])
        cc = np.array(out_c).reshape(len(out_g), D) if out_c else np.zeros((0, D), complex)
        return cls(gam, cc, mode, offset)

    @property
    def N(self):
        return self.gammas.size

    @property
    def D(self):
        return self.coeffs.shape[1]

    @property
    def a(self):
        return 2 * self.coeffs.real

    @property
    def b(self):
        return -2 * self.coeffs.imag

    def vf_basis(self, tol=1e-12):
        """Orthonormal basis (rows) of V_F = span(a_n, b_n)."""
        vecs = np.vstack([self.a, self.b]) if self.N else np.zeros((0, self.D))
        if vecs.size == 0:
            return np.zeros((0, self.D))
        _, sv, vt = np.linalg.svd(vecs, full_matrices=False)
        rank = int(np.sum(sv > tol * max(1.0, sv[0])))
        return vt[:rank]

    def evaluate(self, t):
        """F(t) for scalar or array t (k in integer mode, y = log x in real mode)."""
        t = np.asarray(t, dtype=float)
        phase = np.multiply.outer(t, self.gammas)
        return self.f_tilde_array(phase)

    def f_tilde_array(self, theta):
        theta = np.asarray(theta, dtype=float)
        flat = theta.reshape(-1, self.N)
        out = np.cos(flat) @ self.a + np.sin(flat) @ self.b + self.offset
        return out.reshape(theta.shape[:-1] + (self.D,))

    def box(self):
        """Per-coordinate bound on |F - offset| (compact support)."""
        return 2 * np.abs(self.coeffs).sum(axis=0)

    def concat(self, other):
        if self.mode != other.mode or self.D != other.D:
            raise ValidationError("specs must share mode and dimension")
        return APFunctionSpec.gather(np.concatenate([self.gammas, other.gammas]),
                                     np.vstack([self.coeffs, other.coeffs]), self.mode,
                                     self.offset + other.offset)

    def to_json(self):
        return {
            "mode": self.mode,
            "D": self.D,
            "N": self.N,
            "gammas": self.gammas.tolist(),
            "coeffs_re": self.coeffs.real.tolist(),
            "coeffs_im": self.coeffs.imag.tolist(),
            "offset": self.offset.tolist(),
        }


def f_tilde(theta, spec):
    """F~(theta) = offset + sum 2 Re(c_n e^{i theta_n})."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape[-1:] != (spec.N,):
        raise ValidationError(f"theta must have {spec.N} coordinates")
    return spec.f_tilde_array(theta)


# --------------------------------------------------------------------------
# subtorus


@dataclass
class SubtorusSpec:
    N: int
    dim: int
    embedding: list
    orders: list
    mode: str
    lattice: RelationLattice | None = None
    assumed: bool = False

    @property
    def continuous(self):
        return [i for i, s in enumerate(self.orders) if s == 0]

    @property
    def discrete(self):
        return [(i, s) for i, s in enumerate(self.orders) if s > 1]

    @property
    def n_components(self):
        return math.prod(s for _, s in self.discrete)

    @property
    def is_finite(self):
        return self.dim == 0

    @property
    def V(self):
        return np.array(self.embedding, dtype=float).reshape(self.N, self.N)

    @property
    def is_identity(self):
        return all(self.embedding[i][j] == (i == j) for i in range(self.N) for j in range(self.N))

    def parameters_to_theta(self, phi):
        phi = np.asarray(phi, float)
        if self.assumed or self.is_identity:
            return phi
        return phi @ self.V.T

    def discrete_points(self):
        """All parameter vectors of the discrete part (continuous coordinates 0)."""
        disc = self.discrete
        if self.n_components > FINITE_CAP:
            raise ResourceError(f"{self.n_components} components exceed the cap {FINITE_CAP}")
        pts = np.zeros((self.n_components, self.N))
        for row, ks in enumerate(itertools.product(*[range(s) for _, s in disc])):
            for (i, s), k in zip(disc, ks):
                pts[row, i] = TWO_PI * k / s
        return pts

    def random_parameters(self, rng, size):
        phi = np.zeros((size, self.N))
        cont = self.continuous
        if cont:
            phi[:, cont] = rng.uniform(0.0, TWO_PI, (size, len(cont)))
        for i, s in self.discrete:
            phi[:, i] = TWO_PI * rng.integers(0, s, size) / s
        return phi

    def contains(self, theta, tol=1e-9):
        """Whether theta (rows) lies on A, tested against every relation."""
        theta = np.atleast_2d(np.asarray(theta, float))
        if self.lattice is None or not self.lattice.basis:
            return np.ones(theta.shape[0], bool)
        M = np.array(self.lattice.gamma_part(), dtype=float)
        # in both modes a relation m forces m . theta = 0 mod 2 pi on A
        vals = theta @ M.T / TWO_PI
        dev = np.abs(vals - np.round(vals)) * TWO_PI
        return np.all(dev < tol * np.maximum(1.0, np.abs(M).sum(axis=1)), axis=1)

    def to_json(self):
        return {
            "ambient_dimension": self.N,
            "dim_A": self.dim,
            "mode": self.mode,
            "embedding": self.embedding,
            "orders": self.orders,
            "components": self.n_components,
            "full_torus_assumed": self.assumed,
            "relations": self.lattice.to_json() if self.lattice else None,
        }


def build_subtorus(freqs, mode="integer", lattice=None, assume_independent=False,
                   precision=None, H=None):
    """The closure of the orbit of (t gamma_1, ..., t gamma_N) as a parameterized subtorus.

    With an integer relation matrix M (gamma coordinates only) and its Smith
    form U M V = S, the points of A are theta = V phi where phi_i is free for
    i beyond the rank and phi_i in (2 pi / s_i) Z otherwise.  In real mode the
    orbit is connected, so only the identity component (phi_i = 0) is kept.
    """
    freqs = list(freqs)
    N = len(freqs)
    if mode not in ("integer", "real"):
        raise ValidationError(f"mode must be 'integer' or 'real', got {mode!r}")
    if assume_independent:
        eye = [[int(i == j) for j in range(N)] for i in range(N)]
        return SubtorusSpec(N, N, eye, [0] * N, mode, None, assumed=True)
    if lattice is None:
        kw = {}
        if precision is not None:
            kw["precision"] = precision
        if H is None and any(isinstance(g, float) for g in freqs):
            # a double supports only modest heights once N grows
            n = N + (mode == "integer")
            H = max(2, int(10 ** ((15 - 6) / max(1, n - 1))))
        if H is not None:
            kw["H"] = H
        lattice = relation_lattice(freqs, mode=mode, **kw)
    for v in lattice.basis:
        res = relation_residual(v, lattice.frequencies, lattice.mode, lattice.precision + 10)
        if res > 10.0 ** (-(lattice.precision - 4)):
            raise ComputationError(f"relation {v} is violated numerically (residual {float(res):.3g})")
    rows = lattice.gamma_part()
    rank = 0
    orders = [0] * N
    if rows:
        S, _, V = smith_normal_form(rows)
        for i in range(min(len(rows), N)):
            s = S[i][i]
            if s:
                rank += 1
                orders[i] = s if mode == "integer" else 1
    else:
        V = [[int(i == j) for j in range(N)] for i in range(N)]
    return SubtorusSpec(N, N - rank, V, orders, mode, lattice)


def check_orbit(freqs, subtorus, k_max=10**4, tol=1e-9):
    """Orbit points (k gamma) mod 2 pi for k = 1..k_max lie on A."""
    ks = np.arange(1, k_max + 1, dtype=float)
    theta = np.mod(np.multiply.outer(ks, np.asarray(freqs, float)), TWO_PI)
    return bool(np.all(subtorus.contains(theta, tol)))


# --------------------------------------------------------------------------
# measure sampling


@dataclass
class EmpiricalMeasure:
    samples: np.ndarray
    seed: int | None
    n_samples: int
    vf_basis: np.ndarray
    offset: np.ndarray
    weights: np.ndarray | None = None
    exact: bool = False
    generator: str = _rng.GENERATOR

    def probability(self, mask):
        mask = np.asarray(mask, bool)
        if self.weights is None:
            return float(mask.mean())
        return float(self.weights[mask].sum())

    def span_residual(self):
        """Largest distance of a sample (minus offset) to V_F."""
        x = self.samples - self.offset
        if self.vf_basis.shape[0] == 0:
            return float(np.abs(x).max(initial=0.0))
        proj = (x @ self.vf_basis.T) @ self.vf_basis
        return float(np.abs(x - proj).max(initial=0.0))

    def histogram(self, coord=0, bins=50):
        x = self.samples[:, coord]
        w = self.weights if self.weights is not None else np.full(x.size, 1.0 / x.size)
        mass, edges = np.histogram(x, bins=bins, weights=w)
        return edges, mass

    def to_csv(self, path):
        header = ",".join(f"x{d + 1}" for d in range(self.samples.shape[1]))
        if self.weights is not None:
            header += ",weight"
            data = np.column_stack([self.samples, self.weights])
        else:
            data = self.samples
        np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.12g")
        return path


def _finite_values(spec, sub):
    pts = sub.discrete_points()
    return spec.f_tilde_array(sub.parameters_to_theta(pts))


def _real_amplitudes(spec, tol=1e-12):
    """Rows 2 r_n when each c_n is a unit complex number times a real vector r_n, else None."""
    out = np.zeros((spec.N, spec.D))
    for n, c in enumerate(spec.coeffs):
        k = int(np.argmax(np.abs(c)))
        if abs(c[k]) == 0:
            continue
        r = c * np.conj(c[k]) / abs(c[k])
        if np.max(np.abs(r.imag)) > tol * abs(c[k]):
            return None
        out[n] = 2 * r.real
    return out


def sample_measure(spec, subtorus, n_samples, seed, threads=1):
    """Draw from mu: Haar-uniform points of A pushed through F~."""
    if n_samples < 1:
        raise ValidationError("n_samples must be at least 1")
    if subtorus.N != spec.N:
        raise ValidationError("subtorus and spec have different term counts")
    basis = spec.vf_basis()
    if subtorus.is_finite:
        vals = _finite_values(spec, subtorus)
        w = np.full(vals.shape[0], 1.0 / vals.shape[0])
        return EmpiricalMeasure(vals, seed, vals.shape[0], basis, spec.offset, w, exact=True)

    amp = _real_amplitudes(spec) if len(subtorus.continuous) == spec.N else None
    if amp is not None and (subtorus.assumed or subtorus.is_identity):
        # Haar measure on the full torus is invariant under theta_n -> theta_n - arg,
        # so c_n = e^{i psi_n} r_n with r_n real contributes 2 r_n cos(theta_n)
        def draw(r, size):
            return np.cos(r.uniform(0.0, TWO_PI, (size, spec.N))) @ amp + spec.offset
    else:
        def draw(r, size):
            return spec.f_tilde_array(subtorus.parameters_to_theta(subtorus.random_parameters(r, size)))

    parts = _rng.chunked_map(draw, n_samples, seed, threads)
    return EmpiricalMeasure(np.vstack(parts), seed, int(n_samples), basis, spec.offset)


# --------------------------------------------------------------------------
# Fourier transform of mu


def _grid_points(subtorus, resolution, stride=1):
    """Parameter grid: uniform nodes in each continuous coordinate times every component."""
    cont = subtorus.continuous
    nodes = np.arange(0, resolution, stride) * (TWO_PI / resolution)
    base = subtorus.discrete_points()
    if not cont:
        return base
    mesh = np.array(list(itertools.product(nodes, repeat=len(cont)))) if len(cont) > 1 else nodes[:, None]
    out = np.repeat(base, mesh.shape[0], axis=0)
    out[:, cont] = np.tile(mesh, (base.shape[0], 1))
    return out


def _chunked_mean(fn, pts, chunk=1 << 16):
    total = 0j
    for s in range(0, pts.shape[0], chunk):
        total += fn(pts[s:s + chunk]).sum()
    return total / pts.shape[0]


@dataclass
class FourierValue:
    value: complex
    error: float
    method: str
    points: int
    flagged: bool

    def __complex__(self):
        return complex(self.value)

    def __abs__(self):
        return abs(self.value)


def fourier_mu(spec, subtorus, xi, resolution=QUAD_POINTS, budget=QUAD_BUDGET,
               n_mc=10**6, seed=0, tol=1e-8, with_error=False):
    """mu^(xi) = integral over A of exp(-2 pi i <xi, F~(theta)>) d omega_A.

    Tensor trapezoid rule on the parameterizing torus (spectrally accurate for
    these trigonometric integrands); the error is estimated by comparing with
    the half-resolution rule.  Beyond the point budget, Monte Carlo is used
    and the value is flagged.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.size != spec.D or not np.all(np.isfinite(xi)):
        raise ValidationError(f"xi must be a finite vector of length {spec.D}")
    if not np.any(xi):
        res = FourierValue(1.0 + 0j, 0.0, "exact", 0, False)
        return res if with_error else res.value

    def integrand(phi):
        x = spec.f_tilde_array(subtorus.parameters_to_theta(phi))
        return np.exp(-2j * math.pi * (x @ xi))

    dc = len(subtorus.continuous)
    total = subtorus.n_components * resolution ** dc
    if total <= budget:
        fine = _chunked_mean(integrand, _grid_points(subtorus, resolution))
        if dc:
            coarse = _chunked_mean(integrand, _grid_points(subtorus, resolution, stride=2))
            err = abs(fine - coarse)
        else:
            err = 0.0
        res = FourierValue(complex(fine), float(err), "quadrature", total, err > tol)
    elif dc == spec.N and (subtorus.assumed or subtorus.is_identity):
        # independent angles: the integral factors into J_0 terms
        A, B = spec.a @ xi, spec.b @ xi
        val = np.exp(-2j * math.pi * (spec.offset @ xi)) * np.prod(j0(2 * math.pi * np.hypot(A, B)))
        res = FourierValue(complex(val), 0.0, "bessel-product", spec.N, False)
    else:
        parts = _rng.chunked_map(
            lambda r, size: integrand(subtorus.random_parameters(r, size)).sum(), n_mc, seed)
        val = sum(parts) / n_mc
        res = FourierValue(complex(val), float(1 / math.sqrt(n_mc)), "monte-carlo", n_mc, True)
    return res if with_error else res.value


def fourier_scan(spec, subtorus, radii, directions=None, **kw):
    """Rows (r, xi..., Re, Im); one direction per row (the first coordinate axis by default)."""
    if directions is None:
        directions = [np.eye(spec.D)[0]]
    rows = []
    for r in radii:
        for u in directions:
            u = np.asarray(u, float) / np.linalg.norm(u)
            v = fourier_mu(spec, subtorus, r * u, **kw)
            rows.append((float(r), *map(float, r * u), v.real, v.imag))
    return rows


def decay_envelope(spec, subtorus, radii, window=0.1, samples=8, direction=None, **kw):
    """sup of |mu^| over r' in [r, r (1 + window)], a proxy for the sup over the sphere."""
    u = np.eye(spec.D)[0] if direction is None else np.asarray(direction, float) / np.linalg.norm(direction)
    env = []
    for r in radii:
        rs = np.linspace(r, r * (1 + window), samples)
        env.append(max(abs(fourier_mu(spec, subtorus, s * u, **kw)) for s in rs))
    return np.array(env)


def decay_slope(radii, envelope):
    """Least-squares slope of log(envelope) against log(r)."""
    x = np.log(np.asarray(radii, float))
    y = np.log(np.maximum(np.asarray(envelope, float), 1e-300))
    return float(np.polyfit(x, y, 1)[0])


# --------------------------------------------------------------------------
# hyperplane mass and derivative audit


def _span_rank(rows, tol=1e-10):
    rows = np.atleast_2d(np.asarray(rows, float))
    if rows.size == 0:
        return 0
    sv = np.linalg.svd(rows, compute_uv=False)
    return int(np.sum(sv > tol * max(1.0, sv[0])))


def _quadrature_values(spec, subtorus, resolution, n_samples, seed, budget=QUAD_BUDGET):
    dc = len(subtorus.continuous)
    total = subtorus.n_components * resolution ** dc
    if total <= budget:
        pts = _grid_points(subtorus, resolution)
        return spec.f_tilde_array(subtorus.parameters_to_theta(pts)), "quadrature"
    meas = sample_measure(spec, subtorus, n_samples, seed)
    return meas.samples, "monte-carlo"


def hyperplane_mass_bound(spec, subtorus, alpha, H=(), n=100, resolution=None,
                          n_samples=10**6, seed=0):
    """Integral of the tent function g(x) = max(0, 1 - n dist(x, alpha + H)) against mu.

    This upper-bounds mu(alpha + H); it tends to the true mass as n grows.
    """
    alpha = np.atleast_1d(np.asarray(alpha, float))
    if alpha.size != spec.D:
        raise ValidationError(f"alpha must have length {spec.D}")
    if n < 1:
        raise ValidationError("tent parameter n must be at least 1")
    Hm = np.asarray(H, float).reshape(-1, spec.D) if len(H) else np.zeros((0, spec.D))
    vf = spec.vf_basis()
    rk_h = _span_rank(Hm)
    if _span_rank(np.vstack([Hm, vf])) == rk_h:
        raise ValidationError("H contains V_F, so alpha + H is not a strict affine subspace of V_F")
    if resolution is None:
        resolution = max(QUAD_POINTS, 64 * int(n))
    x, _ = _quadrature_values(spec, subtorus, resolution, n_samples, seed)
    d = x - alpha
    if rk_h:
        _, _, vt = np.linalg.svd(Hm, full_matrices=False)
        hb = vt[:rk_h]
        d = d - (d @ hb.T) @ hb
    dist = np.linalg.norm(d, axis=1)
    return float(np.maximum(0.0, 1.0 - n * dist).mean())


def _multi_indices(dims, K):
    for total in range(1, K + 1):
        for combo in itertools.combinations_with_replacement(range(dims), total):
            k = [0] * dims
            for j in combo:
                k[j] += 1
            yield tuple(k)


def _sphere_points(dim, count, seed=0):
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        t = np.arange(count) * TWO_PI / count
        return np.column_stack([np.cos(t), np.sin(t)])
    g = _rng.chunk_rng(seed, 0).normal(size=(count, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


@dataclass
class DerivativeAudit:
    eta: float
    B: float
    K: int | None
    history: list = field(default_factory=list)

    @property
    def flagged(self):
        return self.K is None

    def __iter__(self):
        return iter((self.eta, self.B, self.K))


def derivative_audit(spec, subtorus, K_max=6, theta_points=256, u_points=64, rel_tol=1e-8):
    """Minimum over (u, theta) of max_{1<=|k|<=K} |d^k <u, F~(theta)>| for K = 1, 2, ...

    Derivatives are taken along the continuous parameters of A and evaluated
    in closed form: each one multiplies c_n e^{i theta_n} by prod (i W_nj)^{k_j}.
    """
    cont = subtorus.continuous
    if not cont:
        raise ValidationError("derivative audit needs dim A >= 1")
    vf = spec.vf_basis()
    if vf.shape[0] == 0:
        return DerivativeAudit(0.0, 0.0, None)
    per = theta_points if len(cont) == 1 else max(8, int(round(theta_points ** (2 / len(cont)) / 2)))
    if len(cont) <= 2:
        phi = _grid_points(subtorus, per)
    else:
        phi = subtorus.random_parameters(_rng.chunk_rng(0, 0), 4096)
        phi = np.vstack([phi] + [subtorus.discrete_points()])
    theta = subtorus.parameters_to_theta(phi)
    W = subtorus.V[:, cont]
    U = _sphere_points(vf.shape[0], u_points) @ vf
    cu = U @ spec.coeffs.T                       # (nu, N) values <u, c_n>
    e = np.exp(1j * theta)                       # (nt, N)
    best = None
    history = []
    for K in range(1, K_max + 1):
        cur = np.zeros((U.shape[0], theta.shape[0]))
        gmax = 0.0
        for k in _multi_indices(len(cont), K):
            factor = np.prod((1j * W) ** np.array(k), axis=1)    # (N,)
            vals = np.abs(2 * np.real((cu * factor) @ e.T))
            cur = np.maximum(cur, vals)
            gmax = max(gmax, float(vals.max()))
        eta = float(cur.min())
        history.append((K, eta, gmax))
        if eta > rel_tol * max(1.0, gmax):
            best = DerivativeAudit(eta, gmax, K, history)
            break
    if best is None:
        return DerivativeAudit(history[-1][1], history[-1][2], None, history)
    return best


# --------------------------------------------------------------------------
# densities


def wilson_interval(p, n, z=1.96):
    if n == 0:
        return (0.0, 1.0)
    den = 1 + z * z / n
    center = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass
class DensityEstimate:
    estimate: float
    ci: tuple
    sigma: float
    n_samples: int
    seed: int | None
    exact: bool
    tie_bounds: list
    ties_negligible: bool

    def to_json(self):
        return {
            "estimate": self.estimate,
            "ci95": list(self.ci),
            "sigma": self.sigma,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "exact": self.exact,
            "tie_bounds": self.tie_bounds,
            "ties_negligible": self.ties_negligible,
        }


def density_above(measure, alpha):
    """mu(x_d > alpha_d for all d) estimated from a sample."""
    mask = np.all(measure.samples > np.asarray(alpha, float), axis=1)
    return measure.probability(mask)


def tie_bounds(spec, subtorus, alpha, n=100, n_samples=10**5, seed=0):
    """Tent bounds on mu(x_d = alpha_d), one per coordinate."""
    out = []
    for d in range(spec.D):
        H = [np.eye(spec.D)[j] for j in range(spec.D) if j != d]
        try:
            out.append(hyperplane_mass_bound(spec, subtorus, alpha, H, n, n_samples=n_samples, seed=seed))
        except ValidationError:
            out.append(1.0)
    return out


def predicted_density(spec, subtorus, alpha, n_samples, seed, measure=None, threads=1,
                      tie_threshold=TIE_THRESHOLD, tie_n=100):
    """mu(x > alpha coordinatewise) with a binomial confidence interval.

    The per-coordinate tie masses mu(x_d = alpha_d) are bounded first; if
    any bound exceeds tie_threshold the result is marked as not negligible.
    """
    alpha = np.atleast_1d(np.asarray(alpha, float))
    ties = tie_bounds(spec, subtorus, alpha, tie_n, n_samples=min(n_samples, 10**5), seed=seed)
    if measure is None:
        measure = sample_measure(spec, subtorus, n_samples, seed, threads)
    p = density_above(measure, alpha)
    if measure.exact:
        ci, sigma = (p, p), 0.0
    else:
        ci = wilson_interval(p, measure.n_samples)
        sigma = math.sqrt(max(p * (1 - p), 1.0 / measure.n_samples) / measure.n_samples)
    return DensityEstimate(p, ci, sigma, measure.n_samples, seed, measure.exact, ties,
                           all(t <= tie_threshold for t in ties))
