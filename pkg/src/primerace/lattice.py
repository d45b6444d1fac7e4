"""Exact integer lattice tools: LLL reduction and Smith normal form.

Both work on lists of Python ints so that scaled high-precision inputs
(entries around 10^50) are handled without overflow.
"""

from __future__ import annotations

from fractions import Fraction


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def lll_reduce(basis, delta=Fraction(99, 100)):
    """LLL-reduce linearly independent integer row vectors.

    Integral variant (all Gram-Schmidt data kept as integers d_i and
    lambda_ij), following the textbook formulation of de Weger / Cohen.
    """
    b = [list(map(int, v)) for v in basis]
    n = len(b)
    if n <= 1:
        return b
    dn, dd = delta.numerator, delta.denominator
    d = [0] * (n + 1)
    lam = [[0] * n for _ in range(n)]
    d[0] = 1
    d[1] = _dot(b[0], b[0])
    if d[1] == 0:
        raise ValueError("zero vector in basis")

    def red(k, l):
        if 2 * abs(lam[k][l]) > d[l + 1]:
            qq = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            b[k] = [x - qq * y for x, y in zip(b[k], b[l])]
            lam[k][l] -= qq * d[l + 1]
            for i in range(l):
                lam[k][i] -= qq * lam[l][i]

    def swap(k, kmax):
        b[k], b[k - 1] = b[k - 1], b[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lk = lam[k][k - 1]
        B = (d[k - 1] * d[k + 1] + lk * lk) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - lk * t) // d[k]
            lam[i][k - 1] = (B * t + lk * lam[i][k]) // d[k + 1]
        d[k] = B

    k, kmax = 1, 0
    while k < n:
        if k > kmax:
            kmax = k
            for j in range(k + 1):
                u = _dot(b[k], b[j])
                for i in range(j):
                    u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
                if j < k:
                    lam[k][j] = u
                else:
                    d[k + 1] = u
                    if u == 0:
                        raise ValueError("basis vectors are linearly dependent")
        red(k, k - 1)
        # Lovasz condition in integer form
        if dd * d[k + 1] * d[k - 1] < dn * d[k] * d[k] - dd * lam[k][k - 1] ** 2:
            swap(k, kmax)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    return b


def _row_reduce_dependent(vectors):
    """Echelon basis of the lattice spanned by possibly dependent integer rows."""
    rows = [list(map(int, v)) for v in vectors if any(v)]
    out = []
    ncol = len(rows[0]) if rows else 0
    for col in range(ncol):
        nz = [r for r in rows if r[col]]
        rest = [r for r in rows if not r[col]]
        # Euclid on column col across the rows that touch it
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            piv = nz[0]
            nxt = [piv]
            for r in nz[1:]:
                qq = r[col] // piv[col]
                r2 = [x - qq * y for x, y in zip(r, piv)]
                if r2[col]:
                    nxt.append(r2)
                elif any(r2):
                    rest.append(r2)
            nz = nxt
        if nz:
            out.append(nz[0])
        rows = rest
    return out


def reduced_lattice_basis(vectors):
    """LLL-reduced basis of the lattice spanned by integer vectors."""
    basis = _row_reduce_dependent(vectors)
    return lll_reduce(basis) if basis else []


def smith_normal_form(M):
    """Return (S, U, V) with U M V = S diagonal, U and V unimodular.

    ``M`` is a list of r rows of length N; S is returned as the full r x N
    matrix and the diagonal satisfies s_1 | s_2 | ... with nonnegative
    entries.
    """
    r = len(M)
    n = len(M[0]) if r else 0
    A = [list(map(int, row)) for row in M]
    U = [[int(i == j) for j in range(r)] for i in range(r)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, c):
        A[dst] = [x + c * y for x, y in zip(A[dst], A[src])]
        U[dst] = [x + c * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, c):
        for row in A:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]

    for t in range(min(r, n)):
        while True:
            nz = [(abs(A[i][j]), i, j) for i in range(t, r) for j in range(t, n) if A[i][j]]
            if not nz:
                break
            _, i, j = min(nz)
            swap_rows(t, i)
            swap_cols(t, j)
            piv = A[t][t]
            for i in range(t + 1, r):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // piv))
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // piv))
            if any(A[i][t] for i in range(t + 1, r)) or any(A[t][j] for j in range(t + 1, n)):
                continue
            # the pivot must divide every remaining entry
            bad = next((i for i in range(t + 1, r) for j in range(t + 1, n) if A[i][j] % piv), None)
            if bad is not None:
                add_row(t, bad, 1)
                continue
            break
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
    return A, U, V


def matmul(A, B):
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]
