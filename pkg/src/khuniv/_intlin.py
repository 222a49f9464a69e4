"""
Exact integer and finite-field linear algebra.

Matrices are lists of row lists.  Lattices in Z^n are given by lists of
generator vectors (rows); all arithmetic uses Python integers, so torus
knot matrices cannot overflow.  Smith normal form picks the entry of
minimal absolute value as pivot to limit coefficient growth.
"""

from __future__ import annotations

from fractions import Fraction

__all__ = [
    "smith_normal_form",
    "snf_diagonal",
    "rank_field",
    "rank_Z",
    "hnf_rows",
    "kernel_Z",
    "coords_in_hnf",
    "lattice_intersection",
    "lattice_sum",
    "quotient_group",
]


def smith_normal_form(mat):
    """Return (diag, U, V) with U * mat * V diagonal, U, V unimodular.

    ``diag`` is the full list of diagonal entries (nonnegative, each
    dividing the next among the nonzero ones).
    """
    A = [list(row) for row in mat]
    n = len(A)
    m = len(A[0]) if A else 0
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    V = [[int(i == j) for j in range(m)] for i in range(m)]
    r = 0
    while r < n and r < m:
        # find pivot of minimal |value| in the remaining block
        piv = None
        best = None
        for i in range(r, n):
            for j in range(r, m):
                a = A[i][j]
                if a and (best is None or abs(a) < best):
                    best = abs(a)
                    piv = (i, j)
        if piv is None:
            break
        i0, j0 = piv
        A[r], A[i0] = A[i0], A[r]
        U[r], U[i0] = U[i0], U[r]
        for row in A:
            row[r], row[j0] = row[j0], row[r]
        for row in V:
            row[r], row[j0] = row[j0], row[r]
        dirty = False
        for i in range(r + 1, n):
            if A[i][r]:
                qd = A[i][r] // A[r][r]
                if qd:
                    for j in range(m):
                        A[i][j] -= qd * A[r][j]
                    for j in range(n):
                        U[i][j] -= qd * U[r][j]
                if A[i][r]:
                    dirty = True
        for j in range(r + 1, m):
            if A[r][j]:
                qd = A[r][j] // A[r][r]
                if qd:
                    for i in range(n):
                        A[i][j] -= qd * A[i][r]
                    for i in range(m):
                        V[i][j] -= qd * V[i][r]
                if A[r][j]:
                    dirty = True
        if dirty:
            continue  # smaller remainders appeared; pick a new pivot
        # pivot must divide the rest of the block
        fixed = True
        for i in range(r + 1, n):
            for j in range(r + 1, m):
                if A[i][j] % A[r][r]:
                    for k in range(m):
                        A[r][k] += A[i][k]
                    for k in range(n):
                        U[r][k] += U[i][k]
                    fixed = False
                    break
            if not fixed:
                break
        if not fixed:
            continue
        if A[r][r] < 0:
            for j in range(m):
                A[r][j] = -A[r][j]
            for j in range(n):
                U[r][j] = -U[r][j]
        r += 1
    diag = [A[i][i] if i < m else 0 for i in range(min(n, m))]
    return diag, U, V


def snf_diagonal(mat):
    return smith_normal_form(mat)[0]


def rank_Z(mat) -> int:
    return sum(1 for d in snf_diagonal(mat) if d)


def rank_field(mat, ring) -> int:
    """Gaussian elimination rank over a field ring."""
    A = [[ring.from_int(x) if isinstance(x, int) else x for x in row]
         for row in mat]
    n = len(A)
    m = len(A[0]) if A else 0
    rank = 0
    col = 0
    while rank < n and col < m:
        piv = next((i for i in range(rank, n) if not ring.is_zero(A[i][col])), None)
        if piv is None:
            col += 1
            continue
        A[rank], A[piv] = A[piv], A[rank]
        inv = ring.inv(A[rank][col])
        A[rank] = [ring.mul(inv, x) for x in A[rank]]
        for i in range(n):
            if i != rank and not ring.is_zero(A[i][col]):
                f = A[i][col]
                A[i] = [ring.add(x, ring.neg(ring.mul(f, y)))
                        for x, y in zip(A[i], A[rank])]
        rank += 1
        col += 1
    return rank


def hnf_rows(vectors):
    """Row-style Hermite basis of the lattice spanned by ``vectors``."""
    rows = [list(v) for v in vectors if any(v)]
    if not rows:
        return []
    m = len(rows[0])
    basis = []
    col = 0
    while rows and col < m:
        rows = [r for r in rows if any(r)]
        cand = [r for r in rows if r[col]]
        if not cand:
            col += 1
            continue
        while True:
            cand.sort(key=lambda r: abs(r[col]))
            p = cand[0]
            done = True
            for r in cand[1:]:
                qd = r[col] // p[col]
                for j in range(m):
                    r[j] -= qd * p[j]
                if r[col]:
                    done = False
            cand = [r for r in cand if r[col]]
            if done or len(cand) == 1:
                break
        p = cand[0]
        if p[col] < 0:
            p = [-x for x in p]
        basis.append(p)
        rest = []
        for r in rows:
            if r is cand[0] or r == p:
                continue
            if r[col]:
                qd = r[col] // p[col]
                r = [x - qd * y for x, y in zip(r, p)]
            rest.append(r)
        rows = [r for r in rest if any(r)]
        col += 1
    # reduce above-pivot entries for a unique form
    for k in range(len(basis) - 1, -1, -1):
        pc = next(j for j, x in enumerate(basis[k]) if x)
        for i in range(k):
            if basis[i][pc]:
                qd = basis[i][pc] // basis[k][pc]
                basis[i] = [x - qd * y for x, y in zip(basis[i], basis[k])]
    return basis


def kernel_Z(mat):
    """Basis of {x in Z^cols : mat x = 0} (list of vectors)."""
    if not mat or not mat[0]:
        cols = len(mat[0]) if mat else 0
        return [[int(i == j) for j in range(cols)] for i in range(cols)]
    n, m = len(mat), len(mat[0])
    # column-reduce [mat] while tracking the transformation on an identity
    A = [list(row) for row in mat]
    T = [[int(i == j) for j in range(m)] for i in range(m)]
    row = 0
    col = 0
    while row < n and col < m:
        piv = None
        best = None
        for j in range(col, m):
            if A[row][j] and (best is None or abs(A[row][j]) < best):
                best = abs(A[row][j])
                piv = j
        if piv is None:
            row += 1
            continue
        _swap_cols(A, T, col, piv)
        again = False
        for j in range(col + 1, m):
            if A[row][j]:
                qd = A[row][j] // A[row][col]
                _addmul_col(A, T, j, col, -qd)
                if A[row][j]:
                    again = True
        if again:
            continue
        row += 1
        col += 1
    kernel = []
    for j in range(m):
        if all(A[i][j] == 0 for i in range(n)):
            kernel.append([T[i][j] for i in range(m)])
    return kernel


def _swap_cols(A, T, a, b):
    if a == b:
        return
    for row in A:
        row[a], row[b] = row[b], row[a]
    for row in T:
        row[a], row[b] = row[b], row[a]


def _addmul_col(A, T, dst, src, f):
    for row in A:
        row[dst] += f * row[src]
    for row in T:
        row[dst] += f * row[src]


def coords_in_hnf(basis, v):
    """Coordinates of v over an hnf_rows basis, or None if not in the lattice."""
    v = list(v)
    coords = [0] * len(basis)
    for k, b in enumerate(basis):
        pc = next(j for j, x in enumerate(b) if x)
        if v[pc] % b[pc]:
            return None
        c = v[pc] // b[pc]
        coords[k] = c
        if c:
            v = [x - c * y for x, y in zip(v, b)]
    if any(v):
        return None
    return coords


def lattice_sum(A, B):
    return hnf_rows(list(A) + list(B))


def lattice_intersection(A, B):
    """Generators of span_Z(A) meet span_Z(B)."""
    A = [list(v) for v in A if any(v)]
    B = [list(v) for v in B if any(v)]
    if not A or not B:
        return []
    n = len(A[0])
    # solve u A - w B = 0 over Z; intersection = {u A}
    mat = [[A[i][j] for i in range(len(A))] + [-B[i][j] for i in range(len(B))]
           for j in range(n)]
    ker = kernel_Z(mat)
    gens = []
    for vec in ker:
        u = vec[:len(A)]
        g = [sum(u[i] * A[i][j] for i in range(len(A))) for j in range(n)]
        if any(g):
            gens.append(g)
    return hnf_rows(gens)


def quotient_group(N, D):
    """Isomorphism class of span(N)/span(D) with D inside span(N).

    Returns (free_rank, [torsion divisors > 1]).
    """
    N = hnf_rows(N)
    if not N:
        return 0, []
    rows = []
    for d in D:
        coords = coords_in_hnf(N, d)
        if coords is None:
            raise ValueError("denominator not contained in numerator lattice")
        rows.append(coords)
    if not rows:
        return len(N), []
    diag = snf_diagonal(rows)
    tors = [d for d in diag if d > 1]
    rk = sum(1 for d in diag if d)
    return len(N) - rk, sorted(tors)
