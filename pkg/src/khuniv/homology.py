"""
Exact homology of promoted complexes, the s-invariant, and Lee spectral
sequence convergence data.

Homology over Z uses Smith normal form (free rank from ranks, torsion from
the elementary divisors of the incoming differential); over Q and Z_p it
is Gaussian elimination.  Differentials of promoted complexes preserve the
internal degree, so each (i, j) cell is computed from the j-graded slices.

The Lee spectral sequence starts at the standard Khovanov homology (page 1
in our counting) and its page-P differential carries t^P of the
generalized Lee theory.  Over a field the complex decomposes into pawns
and lines H^n, and a line of order n dies entering page ceil(n/2)+1
(partially a page earlier when n is odd; in characteristic 2 the Lee
differentials vanish and nothing ever dies).  Over Z the pawn/line pages
follow the same bookkeeping with 2-power torsion, and residual blocks
(diamonds) are handled by the brute-force filtered engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import _specseq
from ._intlin import rank_Z, rank_field, snf_diagonal
from .decomp import decompose
from .promote import AlgebraicComplex, named_promotion, promote
from .rings import GF, QQ, ZZ, Ring, Zt
from .universal import UniversalComplex

__all__ = [
    "HomologyTable",
    "SSReport",
    "SSInconclusiveError",
    "homology",
    "homology_ungraded",
    "s_invariant",
    "reduced_homology",
    "lee_ss_field",
    "lee_ss_Z",
    "line_page_cells",
]


@dataclass
class HomologyTable:
    """cells: (i, j) -> (free rank, sorted tuple of prime-power torsion)."""

    cells: dict = field(default_factory=dict)

    def put(self, i, j, free=0, torsion=()):
        f0, t0 = self.cells.get((i, j), (0, ()))
        merged = (f0 + free, tuple(sorted(t0 + tuple(torsion))))
        if merged != (0, ()):
            self.cells[(i, j)] = merged

    def total_dimension(self) -> int:
        return sum(f for (f, _t) in self.cells.values())

    def free_ranks(self) -> dict:
        return {ij: f for ij, (f, _t) in self.cells.items() if f}

    def __eq__(self, other):
        return isinstance(other, HomologyTable) and self.cells == other.cells

    def to_json(self):
        return {"cells": [{"i": i, "j": j, "free": f, "torsion": list(t)}
                          for (i, j), (f, t) in sorted(self.cells.items())]}

    def render_text(self) -> str:
        """Rows are internal degrees descending, columns homological."""
        if not self.cells:
            return "(empty)"
        is_ = sorted({i for (i, _j) in self.cells})
        js = sorted({j for (_i, j) in self.cells}, reverse=True)
        header = ["j\\i"] + [str(i) for i in is_]
        table = [header]
        for j in js:
            row = [str(j)]
            for i in is_:
                row.append(_group_str(self.cells.get((i, j))))
            table.append(row)
        widths = [max(len(r[k]) for r in table) for k in range(len(header))]
        return "\n".join("  ".join(x.rjust(w) for x, w in zip(r, widths))
                         for r in table)


def _group_str(cell) -> str:
    if not cell:
        return "."
    f, tors = cell
    parts = []
    if f:
        parts.append("Z" if f == 1 else f"Z^{f}")
    for t in tors:
        parts.append(f"Z{t}")
    return "+".join(parts) if parts else "."


def _prime_powers(n: int):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            pk = 1
            while n % d == 0:
                n //= d
                pk *= d
            out.append(pk)
        d += 1
    if n > 1:
        out.append(n)
    return out


def homology(a: AlgebraicComplex) -> HomologyTable:
    """Graded homology over Z, Q or Z_p."""
    R = a.ring
    if R not in (ZZ, QQ) and R.char == 0:
        raise ValueError(f"homology not supported over {R.name}")
    if not a.graded:
        raise ValueError("complex is only filtered; use homology_ungraded")
    table = HomologyTable()
    slices: dict = {}
    for i, qs in a.degrees.items():
        for idx, q in enumerate(qs):
            slices.setdefault((i, q), []).append(idx)
    for (i, q), idxs in sorted(slices.items()):
        dim = len(idxs)
        out_m = _slice_matrix(a, i, q, idxs, forward=True)
        in_m = _slice_matrix(a, i, q, idxs, forward=False)
        if R is ZZ:
            rk_out = rank_Z(out_m) if out_m else 0
            rk_in = rank_Z(in_m) if in_m else 0
            tors = []
            if in_m:
                for d in snf_diagonal(in_m):
                    if d > 1:
                        tors.extend(_prime_powers(d))
            free = dim - rk_out - rk_in
        else:
            rk_out = rank_field(out_m, R) if out_m else 0
            rk_in = rank_field(in_m, R) if in_m else 0
            tors = []
            free = dim - rk_out - rk_in
        if free or tors:
            table.put(i, q, free, tuple(sorted(tors)))
    return table


def _slice_matrix(a: AlgebraicComplex, i, q, idxs, forward: bool):
    """Matrix of d into/out of the (i, q) slice, rows = other side."""
    if forward:
        m = a.diffs.get(i, {})
        tq = a.degrees.get(i + 1, [])
        rows = [t for t, qq in enumerate(tq) if qq == q]
        return [[m.get((t, s), 0) for s in idxs] for t in rows]
    m = a.diffs.get(i - 1, {})
    sq = a.degrees.get(i - 1, [])
    cols = [s for s, qq in enumerate(sq) if qq == q]
    return [[m.get((t, s), 0) for s in cols] for t in idxs]


def homology_ungraded(a: AlgebraicComplex) -> dict:
    """Per homological degree only: {i: (free, torsion)}; for promotions
    that break the internal grading (e.g. conjugated H images)."""
    R = a.ring
    out = {}
    for i, qs in a.degrees.items():
        dim = len(qs)
        mat_out = [[a.diffs.get(i, {}).get((t, s), 0)
                    for s in range(dim)]
                   for t in range(len(a.degrees.get(i + 1, [])))]
        mat_in = [[a.diffs.get(i - 1, {}).get((t, s), 0)
                   for s in range(len(a.degrees.get(i - 1, [])))]
                  for t in range(dim)]
        if R is ZZ:
            rk_out = rank_Z(mat_out) if mat_out else 0
            rk_in = rank_Z(mat_in) if mat_in and mat_in[0] else 0
            tors = []
            if mat_in and mat_in[0]:
                tors = [d for d in snf_diagonal(mat_in) if d > 1]
        else:
            rk_out = rank_field(mat_out, R) if mat_out else 0
            rk_in = rank_field(mat_in, R) if mat_in and mat_in[0] else 0
            tors = []
        free = dim - rk_out - rk_in
        if free or tors:
            out[i] = (free, tuple(sorted(tors)))
    return out


class SInvariantError(ValueError):
    pass


def s_invariant(u: UniversalComplex) -> int:
    """Internal degree of the unique isolated special line at degree 0."""
    pawns = [b for b in decompose(u) if b.kind == "pawn"]
    at_zero = [b for b in pawns if b.positions[0][0] == 0]
    if len(at_zero) != 1 or len(pawns) != 1:
        raise SInvariantError(
            f"expected exactly one isolated line at degree 0, found "
            f"{[b.positions for b in pawns]} (knot input required)")
    return at_zero[0].positions[0][1]


def reduced_homology(u: UniversalComplex, ring: Ring) -> HomologyTable:
    return homology(promote(u, named_promotion("reduced_standard", ring)))


# ---------------------------------------------------------------------------
# Lee spectral sequence
# ---------------------------------------------------------------------------

@dataclass
class SSReport:
    ring_name: str
    pages: list            # HomologyTable, pages 1..convergence(+1)
    convergence_page: int
    fast: bool
    blocks: list = field(default_factory=list)  # (kind, order, position)

    def to_json(self):
        return {
            "ring": self.ring_name,
            "convergence_page": self.convergence_page,
            "fast": self.fast,
            "pages": [p.to_json() for p in self.pages],
            "blocks": [{"kind": k, "order": o, "at": list(pos)}
                       for k, o, pos in self.blocks],
        }


class SSInconclusiveError(RuntimeError):
    """A block too large for the brute-force engine was encountered."""


def field_decompose(u: UniversalComplex, ring: Ring):
    """Split u over a field into pawns and lines H^n.

    Entries with coefficient zero in the field are dropped; invertible
    (power 0) entries are Gauss-eliminated; any remaining nonzero entry can
    clear its row and column (all coefficients are units).  Returns a list
    of ("pawn"|"line", order, (i, q of source), extra q) tuples.
    """
    if not ring.is_field:
        raise ValueError("field_decompose needs a field")
    degrees = {i: list(qs) for i, qs in u.degrees.items()}
    mats: dict = {}
    for i, m in u.mats.items():
        mm = {}
        for (t, s), c in m.items():
            cf = ring.from_int(c)
            if not ring.is_zero(cf):
                mm[(t, s)] = cf
        if mm:
            mats[i] = mm
    alive = {(i, idx) for i, qs in degrees.items() for idx in range(len(qs))}

    def hpow(i, t, s):
        return (degrees[i + 1][t] - degrees[i][s]) // 2

    # gaussian elimination of invertible (power 0) entries
    changed = True
    while changed:
        changed = False
        for i in sorted(mats):
            m = mats[i]
            pivot = next(((t, s) for (t, s) in sorted(m)
                          if hpow(i, t, s) == 0), None)
            if pivot is None:
                continue
            t0, s0 = pivot
            phi = m[pivot]
            gammas = [(t, m[(t, s0)]) for (t, s) in m if s == s0 and t != t0]
            deltas = [(s, m[(t0, s)]) for (t, s) in m if t == t0 and s != s0]
            inv = ring.inv(phi)
            for (t, cg) in gammas:
                for (s, cd) in deltas:
                    upd = ring.neg(ring.mul(ring.mul(cg, inv), cd))
                    cur = m.get((t, s), ring.zero())
                    val = ring.add(cur, upd)
                    if ring.is_zero(val):
                        m.pop((t, s), None)
                    else:
                        m[(t, s)] = val
            for key in [k for k in m if k[1] == s0 or k[0] == t0]:
                m.pop(key)
            for key in [k for k in mats.get(i - 1, {}) if k[0] == s0]:
                mats[i - 1].pop(key)
            for key in [k for k in mats.get(i + 1, {}) if k[1] == t0]:
                mats[i + 1].pop(key)
            alive.discard((i, s0))
            alive.discard((i + 1, t0))
            changed = True
    # unit clearing: smallest power pivots absorb parallel entries
    changed = True
    while changed:
        changed = False
        for i in sorted(mats):
            m = mats[i]
            for (t, s) in sorted(m):
                if (t, s) not in m:
                    continue
                kp = hpow(i, t, s)
                col = [(tt, ss) for (tt, ss) in m
                       if ss == s and tt != t and hpow(i, tt, s) >= kp]
                piv_inv = ring.inv(m[(t, s)])
                for (tt, ss) in col:
                    mu = ring.mul(m[(tt, ss)], piv_inv)
                    for key in [k for k in m if k[0] == t]:
                        val = ring.add(m.get((tt, key[1]), ring.zero()),
                                       ring.neg(ring.mul(mu, m[key])))
                        if ring.is_zero(val):
                            m.pop((tt, key[1]), None)
                        else:
                            m[(tt, key[1])] = val
                    nxt = mats.get(i + 1, {})
                    for key in [k for k in nxt if k[1] == tt]:
                        val = ring.add(nxt.get((key[0], t), ring.zero()),
                                       ring.mul(mu, nxt[key]))
                        if ring.is_zero(val):
                            nxt.pop((key[0], t), None)
                        else:
                            nxt[(key[0], t)] = val
                    changed = True
                if (t, s) not in m:
                    continue
                row = [(tt, ss) for (tt, ss) in m
                       if tt == t and ss != s and hpow(i, t, ss) >= kp]
                for (tt, ss) in row:
                    mu = ring.mul(m[(tt, ss)], piv_inv)
                    for key in [k for k in m if k[1] == s]:
                        val = ring.add(m.get((key[0], ss), ring.zero()),
                                       ring.neg(ring.mul(mu, m[key])))
                        if ring.is_zero(val):
                            m.pop((key[0], ss), None)
                        else:
                            m[(key[0], ss)] = val
                    prv = mats.get(i - 1, {})
                    for key in [k for k in prv if k[0] == ss]:
                        val = ring.add(prv.get((s, key[1]), ring.zero()),
                                       ring.mul(mu, prv[key]))
                        if ring.is_zero(val):
                            prv.pop((s, key[1]), None)
                        else:
                            prv[(s, key[1])] = val
                    changed = True
    blocks = []
    used = set()
    for i in sorted(mats):
        for (t, s), c in sorted(mats[i].items()):
            blocks.append(("line", hpow(i, t, s), (i, degrees[i][s])))
            used.add((i, s))
            used.add((i + 1, t))
    for (i, idx) in sorted(alive - used):
        blocks.append(("pawn", 0, (i, degrees[i][idx])))
    seen = set()
    for i in sorted(mats):
        for (t, s) in mats[i]:
            if (i, s) in seen or (i + 1, t) in seen:
                raise AssertionError("field decomposition left a non-line block")
            seen.add((i, s))
            seen.add((i + 1, t))
    return blocks


def line_page_cells(order: int, i: int, q: int, page: int, ring: Ring):
    """Cells contributed by a standalone line H^order at (i, q) on a page.

    Returns {(i, j): (free, torsion)}; over characteristic 2 fields the Lee
    differentials vanish and page 1 repeats forever.  Over Z the same
    schedule produces 2-power torsion.  The death page ceil(n/2)+1 is
    checked against the brute-force filtered engine in the test suite.
    """
    n = order
    q_top = q + 2 * n
    over_Z = ring is ZZ
    if ring.is_field and ring.char == 2:
        # all structure maps are even; the whole tetris block survives
        cells = {(i, q - 1): 1, (i, q + 1): 1,
                 (i + 1, q_top - 1): 1, (i + 1, q_top + 1): 1}
        return {key: (f, ()) for key, f in cells.items()}
    m = (n - 1) // 2 if n % 2 else n // 2
    if n == 1:
        if page == 1:
            if over_Z:
                return {(i, q - 1): (1, ()), (i + 1, q + 1): (0, (2,)),
                        (i + 1, q + 3): (1, ())}
            return {(i, q - 1): (1, ()), (i + 1, q + 3): (1, ())}
        if over_Z:
            return {(i + 1, q + 1): (0, (2,)), (i + 1, q + 3): (0, (2,))}
        return {}
    full = {(i, q - 1): (1, ()), (i, q + 1): (1, ()),
            (i + 1, q_top - 1): (1, ()), (i + 1, q_top + 1): (1, ())}
    if n % 2 == 0:
        if page <= n // 2:
            return dict(full)
        if over_Z:
            t = (2 ** n,)
            return {(i + 1, q_top - 1): (0, t), (i + 1, q_top + 1): (0, t)}
        return {}
    # odd n >= 3
    if page <= m:
        return dict(full)
    if page == m + 1:
        if over_Z:
            return {(i, q - 1): (1, ()), (i + 1, q_top - 1): (0, (2 ** n,)),
                    (i + 1, q_top + 1): (1, ())}
        return {(i, q - 1): (1, ()), (i + 1, q_top + 1): (1, ())}
    if over_Z:
        t = (2 ** n,)
        return {(i + 1, q_top - 1): (0, t), (i + 1, q_top + 1): (0, t)}
    return {}


def _line_stab_page(order: int, ring: Ring) -> int:
    if ring.is_field and ring.char == 2:
        return 1
    return (order + 1) // 2 + 1 if order % 2 else order // 2 + 1


def lee_ss_field(u: UniversalComplex, ring: Ring) -> SSReport:
    """Pages and convergence of the Lee spectral sequence over a field."""
    blocks = field_decompose(u, ring)
    conv = 1
    for kind, order, _pos in blocks:
        if kind == "line":
            conv = max(conv, _line_stab_page(order, ring))
    pages = []
    for page in range(1, conv + 1):
        table = HomologyTable()
        for kind, order, (i, q) in blocks:
            if kind == "pawn":
                table.put(i, q - 1, 1)
                table.put(i, q + 1, 1)
            else:
                for (ci, cj), (f, tors) in line_page_cells(
                        order, i, q, page, ring).items():
                    table.put(ci, cj, f, tors)
        pages.append(table)
    return SSReport(ring_name=ring.name, pages=pages, convergence_page=conv,
                    fast=conv <= 2,
                    blocks=[(k, o, pos) for k, o, pos in blocks])


def lee_ss_Z(u: UniversalComplex, max_block: int = 16) -> SSReport:
    """Lee spectral sequence over Z: closed forms for pawns and lines,
    brute-force filtered lattice computation for residual blocks."""
    blocks = decompose(u)
    parts = []   # list of (stab_page, page -> cell dict callables)
    names = []
    for b in blocks:
        names.append((b.kind, b.order, b.positions[0]))
        if b.kind == "pawn":
            i, q = b.positions[0]
            parts.append((1, lambda page, i=i, q=q:
                          {(i, q - 1): (1, ()), (i, q + 1): (1, ())}))
        elif b.kind == "line":
            i, q = b.positions[0]
            stab = _line_stab_page(b.order, ZZ)
            parts.append((stab, lambda page, o=b.order, i=i, q=q:
                          line_page_cells(o, i, q, page, ZZ)))
        else:
            if b.complex.total_objects() > max_block:
                raise SSInconclusiveError(
                    f"block with {b.complex.total_objects()} objects exceeds "
                    f"the brute-force bound {max_block}")
            alg = promote(b.complex, named_promotion("generalized_lee"))
            degrees, diffs = _t_specialized(alg)
            tables, conv = _specseq.filtered_pages(degrees, diffs)
            parts.append((conv, lambda page, ts=tables:
                          ts[min(page, len(ts)) - 1]))
    conv = max((stab for stab, _f in parts), default=1)
    pages = []
    for page in range(1, conv + 1):
        table = HomologyTable()
        for _stab, cells in parts:
            for (ci, cj), (f, tors) in cells(page).items():
                table.put(ci, cj, f, tuple(_pp_all(tors)))
        pages.append(table)
    return SSReport(ring_name="Z", pages=pages, convergence_page=conv,
                    fast=conv <= 2, blocks=names)


def _pp_all(tors):
    out = []
    for t in tors:
        out.extend(_prime_powers(t))
    return sorted(out)


def _t_specialized(alg: AlgebraicComplex):
    """Set t = 1 in a Z[t] complex, keeping q-degrees as the filtration."""
    if alg.ring is not Zt:
        raise ValueError("expected a generalized Lee complex")
    degrees = alg.degrees
    diffs: dict = {}
    for i, m in alg.diffs.items():
        mm = {}
        for (t, s), poly in m.items():
            c = sum(poly.values())
            if c:
                mm[(t, s)] = c
        if mm:
            diffs[i] = mm
    return degrees, diffs
