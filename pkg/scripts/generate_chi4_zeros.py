"""Tabulate zeros of L(s, chi_4) on the critical line.

chi_4 is the non-principal character mod 4.  The completed function
(4/pi)^{(s+1)/2} Gamma((s+1)/2) L(s, chi_4) is real on Re s = 1/2, so
zeros are located as sign changes of the rotated function and refined with
the Illinois solver.  The count is compared against the smooth
Riemann-von Mangoldt main term.

Usage: python scripts/generate_chi4_zeros.py OUT.csv [T_MAX]
"""

import csv
import sys

import mpmath as mp

CHI4 = [0, 1, 0, -1]


def hardy_z(t):
    s = mp.mpc(0.5, t)
    theta = t / 2 * mp.log(4 / mp.pi) + mp.im(mp.loggamma((s + 1) / 2))
    return mp.re(mp.exp(1j * theta) * mp.dirichlet(s, CHI4))


def smooth_count(t):
    return t / (2 * mp.pi) * mp.log(4 * t / (2 * mp.pi * mp.e)) - 0.25 + 0.0


def main(out, t_max=760.0, step=0.1):
    mp.mp.dps = 20
    zeros = []
    t = 1.0
    prev = hardy_z(t)
    while t < t_max:
        t_next = t + step
        cur = hardy_z(t_next)
        if prev == 0 or prev * cur < 0:
            root = mp.findroot(hardy_z, (t, t_next), solver="illinois", tol=1e-24)
            zeros.append(root)
        t, prev = t_next, cur
    print(f"found {len(zeros)} zeros up to {t_max}; smooth count {float(smooth_count(t_max)):.1f}")
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["chi_label", "gamma", "multiplicity"])
        for g in zeros:
            w.writerow(["chi4", mp.nstr(g, 15), 1])


if __name__ == "__main__":
    main(sys.argv[1], float(sys.argv[2]) if len(sys.argv) > 2 else 760.0)
