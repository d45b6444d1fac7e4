"""Command-line front end.

    primerace <command> [flags]

Every command writes ``<out>/<command>.json`` (deterministic for a given
config) and ``<out>/<command>.meta.json`` (timestamp, thread count).  Race
commands also write plot-data CSVs.  Exit codes: 0 ok, 2 validation error,
3 computation error, 4 resource limit.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import os
import re
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from . import ffpoly as ff
from . import races, torus
from .characters import conductor, is_primitive, unit_group
from .config import COMMANDS, RunConfig
from .density import sieve_primes
from .errors import ComputationError, PrimeRaceError, ResourceError, ValidationError
from .lfunc import ingest_classical_zeros, l_polynomials, zero_multiset
from .relations import self_sufficient_zeros

EXIT_OK, EXIT_VALIDATION, EXIT_COMPUTATION, EXIT_RESOURCE = 0, 2, 3, 4
SIG_DIGITS = 12
MAX_PLOT_ROWS = 10000
HIST_BINS = 60


# --------------------------------------------------------------------------
# JSON output


def clean(obj):
    """JSON-ready copy with every float rounded to 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(obj, (complex, np.complexfloating)):
        return [clean(obj.real), clean(obj.imag)]
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def dumps(obj):
    return json.dumps(clean(obj), indent=1, allow_nan=False) + "\n"


def _fmt(x):
    return f"{float(x):.{SIG_DIGITS}g}"


# --------------------------------------------------------------------------
# building races from a config


def _omega_arg(text):
    parts = [p.strip() for p in str(text).split(",")]
    try:
        w = int(parts[0])
    except ValueError:
        raise ValidationError(f"omega: expected <w>[,mod2], got {text!r}") from None
    if len(parts) > 2 or (len(parts) == 2 and parts[1] != "mod2"):
        raise ValidationError(f"omega: expected <w>[,mod2], got {text!r}")
    return w, len(parts) == 2


def classical_modulus(cfg):
    """q from --modulus, else from the character labels of the zero file."""
    if cfg.modulus is not None:
        return int(cfg.modulus)
    if cfg.zeros:
        for lab in ingest_classical_zeros(cfg.zeros).labels:
            m = re.fullmatch(r"(?:chi|q=)(\d+)(?:;.*)?", lab)
            if m:
                return int(m.group(1))
    raise ValidationError("modulus: the integer modulus is required (not inferable from the zero file)")


def _field(cfg):
    return ff.FieldSpec.parse(cfg.field)


def _modulus(cfg, fs):
    return ff.MonicPoly.parse(cfg.modulus, fs)


def race_spec(cfg):
    cls = cfg.class_list()
    if cfg.mode == "ff":
        fs = _field(cfg)
        return races.RaceSpec.function_field(fs, _modulus(cfg, fs), cls, cfg.omega, cfg.omega_mod2)
    return races.RaceSpec.classical(classical_modulus(cfg), cls, cfg.zeros)


def _all_units_spec(cfg):
    """A race over the given classes, or over every invertible class."""
    if cfg.classes:
        return race_spec(cfg)
    if cfg.mode == "ff":
        fs = _field(cfg)
        Q = _modulus(cfg, fs)
        g = unit_group(Q, fs)
        d = Q.degree
        units = [ff.residue_from_code(int(u), fs.q, d) for u in sorted(g.units)]
        return races.RaceSpec("ff", tuple(units), fs=fs, Q=Q, omega=cfg.omega, omega_mod2=cfg.omega_mod2)
    q = classical_modulus(cfg)
    return races.RaceSpec.classical(q, [a for a in range(1, q) if math.gcd(a, q) == 1], cfg.zeros)


def _zeros(cfg):
    if cfg.mode == "ff":
        fs = _field(cfg)
        return zero_multiset(_modulus(cfg, fs), fs)
    return ingest_classical_zeros(cfg.zeros)


# --------------------------------------------------------------------------
# commands; each returns (result dict, certificates, artifacts)


def cmd_lpoly(cfg):
    fs = _field(cfg)
    Q = _modulus(cfg, fs)
    group = unit_group(Q, fs)
    out = []
    for L in l_polynomials(group):
        chi = L.chi
        out.append({
            "character": L.label,
            "order": chi.order,
            "real": chi.is_real,
            "conductor": str(conductor(chi)),
            "primitive": is_primitive(chi),
            "degree": L.degree,
            "root_of_unity_order": L.m,
            "coefficients_exact": [list(c.coeffs) for c in L.exact],
            "coefficients": [complex(c) for c in L.coeffs],
        })
    res = {"modulus": str(Q), "field": fs.tag, "group_order": group.size,
           "group_exponent": group.exponent, "basis": "power basis of Z[zeta_m], low degree first",
           "l_polynomials": out}
    return res, {}, {}


def cmd_zeros(cfg):
    Z = _zeros(cfg)
    arts = {"zeros.csv": lambda p: Z.to_csv(p)}
    if cfg.mode == "classical":
        res = {"mode": "classical", "labels": Z.labels, "count": len(Z.entries),
               "height_T": max(Z.gammas, default=0.0)}
        return res, {"truncation_height_T": res["height_T"]}, arts
    ent = [{"character": e.chi_label, "gamma": e.gamma, "multiplicity": e.multiplicity,
            "alpha": e.alpha} for e in Z.entries]
    triv = [{"character": e.chi_label, "gamma": e.gamma, "multiplicity": e.multiplicity,
             "alpha": e.alpha} for e in Z.trivial]
    res = {"modulus": Z.modulus, "q": Z.q, "characters": Z.labels, "critical": ent,
           "trivial": triv, "max_rh_deviation": Z.max_rh_deviation()}
    return res, {"rh_deviation": Z.max_rh_deviation()}, arts


def cmd_hypothesis(cfg):
    Z = _zeros(cfg)
    rep = self_sufficient_zeros(Z, H=cfg.height, precision=cfg.precision)
    return rep.to_json(), {"height_H": cfg.height, "precision": cfg.precision}, {}


def cmd_counts(cfg):
    spec = _all_units_spec(cfg)
    labels = spec.class_labels()
    if spec.mode == "ff":
        if spec.omega is not None:
            counts = races.omega_counts(spec, cfg.k_max)
            res = {"omega": spec.omega, "omega_mod2": spec.omega_mod2, "classes": labels,
                   "counts": {lab: [str(c) for c in counts[1:, j]] for j, lab in enumerate(labels)}}
            return res, {}, {}
        table = races.prime_counts(spec, cfg.k_max)
        cc = table.class_counts(spec.classes)
        res = {"k": list(range(1, cfg.k_max + 1)), "classes": labels,
               "pi": {lab: cc[1:, j].tolist() for j, lab in enumerate(labels)},
               "conservation_gap": races.conservation_gap(table, spec)}
        return res, {}, {}
    primes = sieve_primes(cfg.x_max)
    xs = [10**j for j in range(1, int(math.log10(cfg.x_max)) + 1)]
    if xs[-1] != cfg.x_max:
        xs.append(cfg.x_max)
    res = {"x": xs, "classes": labels,
           "pi": {lab: [int(np.count_nonzero((primes <= x) & (primes % spec.q == a))) for x in xs]
                  for lab, a in zip(labels, spec.classes)}}
    return res, {}, {}


def cmd_race(cfg, scan=False):
    spec = race_spec(cfg)
    rep = races.race_report(spec, k_max=cfg.k_max, X_max=cfg.x_max, samples=cfg.samples,
                            seed=cfg.seed, threads=cfg.threads, eps=cfg.eps, H=cfg.height,
                            precision=cfg.precision)
    res = rep.to_json()
    cert = {"height_H": cfg.height, "precision": cfg.precision, "epsilon": cfg.eps,
            "normalization": rep.normalization}
    if rep.predicted:
        cert["rng"] = rep.predicted["generator"]
    if spec.mode == "classical":
        tr = rep.checks["truncation"]
        cert["truncation_height_T"] = tr["height_T"]
        cert["tail_variance_bound"] = tr["tail_variance_bound"]
    rows = None
    if scan and "G" in rep.series:
        rows, slope = _scan(cfg, rep.series["G"], rep.series["subtorus"])
        res["fourier_scan"] = {"decay_slope": slope, "points": len(rows)}
        cert["quadrature_resolution"] = cfg.resolution
    return res, cert, plot_artifacts(rep, spec, rows)


def cmd_plotdata(cfg):
    return cmd_race(cfg, scan=True)


def cmd_density(cfg):
    spec = race_spec(cfg)
    if spec.mode == "classical":
        emp, *_ = races.classical_empirical(spec, cfg.x_max)
        return {"spec": spec.to_json(), "ordering": races.ORDERING, "empirical": emp}, {}, {}
    if spec.omega is not None:
        rep = races.race_report(spec, k_max=cfg.k_max)
        return {"spec": spec.to_json(), "ordering": races.ORDERING, "empirical": rep.empirical}, {}, {}
    E = races.explicit_trajectory(spec, cfg.k_max)
    mask, tmask = races.ordering_mask(E, races.ff_ties(E, spec.fs.q))
    nd = races.natural_density(mask)
    emp = {"source": "explicit formula (exact)", "k_max": cfg.k_max,
           "natural_density": nd.to_json(), "tie_frequency": float(tmask.mean())}
    return {"spec": spec.to_json(), "ordering": races.ORDERING, "empirical": emp}, {}, {}


def _radii(cfg):
    lo, hi, n = cfg.radii_list()
    return np.geomspace(lo, hi, n)


def _scan(cfg, G, sub):
    radii = _radii(cfg)
    rows = torus.fourier_scan(G, sub, radii, resolution=cfg.resolution, seed=cfg.seed)
    mags = [math.hypot(r[-2], r[-1]) for r in rows]
    slope = torus.decay_slope(radii, mags) if min(mags) > 0 else float("-inf")
    return rows, slope


def cmd_fourier_scan(cfg):
    spec = race_spec(cfg)
    G, sub, checks, notes = races.ordering_function(spec, H=cfg.height)
    rows, slope = _scan(cfg, G, sub)
    res = {"spec": spec.to_json(), "direction": "first coordinate axis",
           "rows": [{"r": r[0], "xi": list(r[1:-2]), "re": r[-2], "im": r[-1]} for r in rows],
           "decay_slope": slope, "checks": checks, "notes": notes}
    return res, {"quadrature_resolution": cfg.resolution, "height_H": cfg.height}, \
        {"fourier_scan.csv": lambda p: write_scan_csv(p, rows, G.D)}


HANDLERS = {
    "lpoly": cmd_lpoly,
    "zeros": cmd_zeros,
    "hypothesis": cmd_hypothesis,
    "counts": cmd_counts,
    "race": cmd_race,
    "density": cmd_density,
    "fourier-scan": cmd_fourier_scan,
    "plotdata": cmd_plotdata,
}


# --------------------------------------------------------------------------
# plot data


def _thin(n, cap=MAX_PLOT_ROWS):
    """Increasing row indices, at most cap of them, always keeping the last."""
    if n <= cap:
        return np.arange(n)
    idx = np.unique(np.rint(np.geomspace(1, n, cap)).astype(int) - 1)
    return idx


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([x if isinstance(x, (int, np.integer, str)) else _fmt(x) for x in r])
    return path


def write_scan_csv(path, rows, D):
    header = ["r", *[f"xi_{d + 1}" for d in range(D)], "re", "im", "abs"]
    return write_csv(path, header, [(*r, math.hypot(r[-2], r[-1])) for r in rows])


def plot_artifacts(rep, spec, scan_rows=None):
    """Writers for the E trajectories, running density, mu^ scan and histogram CSVs."""
    s = rep.series
    arts = {}
    E = s.get("E")
    if E is not None and len(E):
        D = E.shape[1]
        x = s.get("x", np.arange(1, E.shape[0] + 1))
        idx = _thin(E.shape[0])
        header = ["x", *[f"E_{d + 1}" for d in range(D)]]
        arts["trajectories.csv"] = lambda p, x=x, idx=idx: write_csv(
            p, header, [(int(x[i]) if spec.mode == "ff" else x[i], *E[i]) for i in idx])
    if "running" in s:
        run = s["running"]
        idx = _thin(run.size)
        arts["running_density.csv"] = lambda p, run=run, idx=idx: write_csv(
            p, ["X", "running_density"], [(int(i + 1), run[i]) for i in idx])
    elif "running_x" in s:
        pr = np.asarray(s["running_x"], float)
        st = np.asarray(s["running_state"], bool)
        y = np.log(pr)
        cum = np.concatenate([[0.0], np.cumsum(np.diff(y) * st[:-1])])
        run = cum / y
        idx = _thin(pr.size)
        arts["running_density.csv"] = lambda p, run=run, idx=idx: write_csv(
            p, ["X", "running_density"], [(int(pr[i]), run[i]) for i in idx])
    meas = s.get("measure")
    if meas is not None and meas.samples.size:
        def hist(p):
            rows = []
            for d in range(meas.samples.shape[1]):
                edges, mass = meas.histogram(d, HIST_BINS)
                mass = mass / mass.sum()
                rows += [(d + 1, edges[i], edges[i + 1], mass[i]) for i in range(mass.size)]
            return write_csv(p, ["coord", "bin_lo", "bin_hi", "mass"], rows)
        arts["histogram.csv"] = hist
    if scan_rows is not None:
        arts["fourier_scan.csv"] = lambda p: write_scan_csv(p, scan_rows, s["G"].D)
    return arts


# --------------------------------------------------------------------------
# running


def envelope(cfg, result, certificates):
    return {
        "tool": "primerace",
        "version": __version__,
        "command": cfg.command,
        "config": cfg.reproducible(),
        "seed": cfg.seed,
        "certificates": certificates,
        "result": result,
    }


def execute(cfg):
    """Validated config -> (report dict, artifact writers)."""
    cfg.validate()
    result, cert, arts = HANDLERS[cfg.command](cfg)
    return envelope(cfg, result, cert), arts


def run(cfg, stdout=None):
    """Run one command; returns (exit status, written paths)."""
    err = sys.stderr
    try:
        report, arts = execute(cfg)
    except ValidationError as e:
        print(f"validation error: {e}", file=err)
        return EXIT_VALIDATION, []
    except ResourceError as e:
        print(f"resource limit: {e}", file=err)
        return EXIT_RESOURCE, []
    except (ComputationError, ArithmeticError) as e:
        print(f"computation error: {e}", file=err)
        return EXIT_COMPUTATION, []
    except (OSError, PrimeRaceError) as e:
        print(f"validation error: {e}", file=err)
        return EXIT_VALIDATION, []
    text = dumps(report)
    paths = []
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        base = os.path.join(cfg.out, cfg.command)
        with open(base + ".json", "w") as fh:
            fh.write(text)
        meta = {"timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
                "threads": cfg.threads, "python": sys.version.split()[0]}
        with open(base + ".meta.json", "w") as fh:
            fh.write(json.dumps(meta, indent=1) + "\n")
        paths += [base + ".json", base + ".meta.json"]
        for name, writer in arts.items():
            p = os.path.join(cfg.out, name)
            writer(p)
            paths.append(p)
    out = stdout if stdout is not None else sys.stdout
    out.write(text)
    return EXIT_OK, paths


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    a = common.add_argument
    a("--config", help="flat key = value file; explicit flags override it")
    a("--mode", choices=["ff", "classical"])
    a("--field", help="finite field p^a, e.g. 3^1")
    a("--modulus", help="modulus polynomial (t^2+1 or low-first 1,0,1); integer q in classical mode")
    a("--classes", help="race classes a0,a1,... (polynomials or integers)")
    a("--kmax", dest="k_max", type=int, help="largest degree k")
    a("--xmax", dest="x_max", type=float, help="sieve limit in classical mode")
    a("--samples", type=float, help="torus samples")
    a("--seed", type=int)
    a("--zeros", help="zero table CSV (chi_label,gamma,multiplicity)")
    a("--omega", help="restrict to N with Omega(N) = w, or w mod 2 with ',mod2'")
    a("--threads", type=int, help="worker threads (does not change results)")
    a("--resolution", type=int, help="quadrature points per torus direction")
    a("--height", type=int, help="relation height bound H")
    a("--precision", type=int, help="decimal digits for relation search")
    a("--eps", type=float, help="bracket width epsilon")
    a("--radii", help="fourier scan radii lo:hi:count (log spaced)")
    a("--out", help="output directory for JSON reports and CSV files")
    p = argparse.ArgumentParser(prog="primerace", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"primerace {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for c in COMMANDS:
        sub.add_parser(c, parents=[common])
    return p


def config_from_args(ns):
    base = RunConfig.load(ns.config) if ns.config else RunConfig()
    over = {k: v for k, v in vars(ns).items() if k != "config"}
    if over.get("omega") is not None:
        over["omega"], over["omega_mod2"] = _omega_arg(over["omega"])
    for k in ("samples", "x_max"):
        if over.get(k) is not None:
            v = over[k]
            if v != int(v):
                raise ValidationError(f"{k}: expected an integer, got {v}")
            over[k] = int(v)
    return base.merged(over)


def main(argv=None):
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except ValidationError as e:
        print(f"validation error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"validation error: config: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    status, _ = run(cfg)
    return status


if __name__ == "__main__":
    sys.exit(main())
