"""
Brute-force spectral sequence of a q-filtered integer complex.

Input: free Z-modules graded by homological degree i with generator
filtration degrees q, and a differential whose matrix entries raise q by
nonnegative multiples of 4 (the t-degree of the generalized Lee theory
times the internal degree of t).  Filtration F^p = span of generators with
q >= p, decreasing, d(F^p) in F^p.

Classical pages with jump r:

    Z_r^p = F^p  meet  d^{-1}(F^{p+r})
    E_r^p = Z_r^p / (Z_{r-1}^{p+1} + d(F^{p-r+1}) meet F^p)

Differentials jump by multiples of 4, so only every fourth classical page
moves.  We report "thesis pages": page 1 is the homology of the associated
graded (the standard Khovanov page), page P corresponds to classical
r = 4(P-1)+1, and the page-P differential carries t^P.  All groups are
computed exactly (free rank plus torsion divisors) by lattice arithmetic.
"""

from __future__ import annotations

from ._intlin import (hnf_rows, kernel_Z, lattice_intersection, lattice_sum,
                      quotient_group)

__all__ = ["filtered_pages"]


def _zr(degrees, diffs, i, p, r):
    """Lattice basis of Z_r^{p,i} inside Z^{dim C^i}."""
    qs = degrees.get(i, [])
    dim = len(qs)
    src = [k for k in range(dim) if qs[k] >= p]
    if not src:
        return []
    tq = degrees.get(i + 1, [])
    low_rows = [t for t in range(len(tq)) if tq[t] < p + r]
    m = diffs.get(i, {})
    mat = [[m.get((t, s), 0) for s in src] for t in low_rows]
    if not mat:
        ker = [[int(a == b) for b in range(len(src))] for a in range(len(src))]
    else:
        ker = kernel_Z(mat)
    out = []
    for v in ker:
        w = [0] * dim
        for k, s in enumerate(src):
            w[s] = v[k]
        out.append(w)
    return hnf_rows(out)


def _boundary(degrees, diffs, i, p, r):
    """d(F^{p-r+1} C^{i-1}) intersected with F^p C^i."""
    qs_prev = degrees.get(i - 1, [])
    qs = degrees.get(i, [])
    dim = len(qs)
    m = diffs.get(i - 1, {})
    gens = []
    for s in range(len(qs_prev)):
        if qs_prev[s] >= p - r + 1:
            v = [m.get((t, s), 0) for t in range(dim)]
            if any(v):
                gens.append(v)
    if not gens:
        return []
    coords = [[int(k == s) for s in range(dim)] for k in range(dim)
              if qs[k] >= p]
    if not coords:
        return []
    return lattice_intersection(gens, coords)


def page_table(degrees, diffs, page: int):
    """Thesis page ``page`` as {(i, q): (free_rank, [torsion divisors])}."""
    r = 4 * (page - 1) + 1
    table = {}
    for i, qs in degrees.items():
        for p in sorted(set(qs)):
            z = _zr(degrees, diffs, i, p, r)
            if not z:
                continue
            z1 = _zr(degrees, diffs, i, p + 1, r - 1)
            b = _boundary(degrees, diffs, i, p, r - 1)
            denom = lattice_sum(z1, b)
            free, tors = quotient_group(z, denom)
            if free or tors:
                table[(i, p)] = (free, tuple(tors))
    return table


def filtered_pages(degrees, diffs, max_page: int | None = None):
    """All thesis pages up to stabilization.

    Returns (pages, convergence_page): ``pages[k]`` is page k+1; the list
    extends one page past convergence so the stable page is visible.
    """
    all_q = [q for qs in degrees.values() for q in qs]
    if not all_q:
        return [{}], 1
    spread = max(all_q) - min(all_q)
    limit = max_page if max_page is not None else spread // 4 + 2
    tables = [page_table(degrees, diffs, p) for p in range(1, limit + 2)]
    conv = len(tables)
    while conv > 1 and tables[conv - 2] == tables[conv - 1]:
        conv -= 1
    return tables[:conv + 1], conv
