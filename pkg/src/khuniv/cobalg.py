"""
Exact algebra of dotted cobordisms between tangle smoothings, over Z[H].

Encoding conventions
--------------------

A *smoothing* of a partial tangle is a pair ``(arcs, loops)``:

* ``arcs``: sorted tuple of ``(0, p, q)`` with ``p < q`` -- open arcs on the
  boundary points of the tangle.  Boundary points are the edge labels of the
  diagram; the two stubs of the cut-open marked edge carry the reserved ids
  ``MARK_TAIL = -2`` and ``MARK_HEAD = -1`` and are never glued.
* ``loops``: sorted tuple of ``(1, ...)`` ids -- closed circles.

A *cobordism generator* between a source and a target smoothing over the
same boundary points is stored as ``(h_power, comps)``.  ``comps`` is a
sorted tuple of components ``(dot, curves)`` where ``curves`` is a sorted
tuple of side-tagged curves ``(side, curve)`` (side 0 = source, 1 = target).
Arcs meeting at a shared boundary point always lie in the same component
(the vertical boundary line joins them).  Components are kept in normal
form: genus zero and at most one dot; a dot abbreviates a neck joining the
component to the special curtain (the component through the marked stubs),
so it obeys dot*dot = H*dot.  Handles on the special component and excess
structure are absorbed into the global power of the 1-handle operator H
(degree -2).  A formal Z-linear combination of generators is a plain dict
``{(h_power, comps): coefficient}``.

Closed components are evaluated through the counit of Z[H][X]/(X^2 - H X)
(sphere -> 0, dotted sphere -> 1, torus -> 2), which reproduces the S and T
relations; a handle on a non-special component expands as 2*dot - H.

The module also carries a separate, formula-level surface reduction engine
(``SurfaceSpec`` with ``reduce_surface_Q`` / ``reduce_surface_Z``) used to
verify that the relation algebra annihilates neck-cutting and four-tube
instances; it works on abstract genus-labelled surfaces rather than on the
generator normal form above.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "MARK_TAIL",
    "MARK_HEAD",
    "Smoothing",
    "smoothing",
    "identity_gen",
    "cap_gen",
    "cup_gen",
    "compose",
    "compose_sums",
    "degree",
    "sum_degree",
    "handle_relation",
    "neck_cut",
    "closed_surface_value",
    "SurfaceSpec",
    "reduce_surface_Q",
    "reduce_surface_Z",
    "verify_relations",
]

MARK_TAIL = -2  # stub at the tail side of the cut edge
MARK_HEAD = -1  # stub at the head side

Smoothing = tuple  # (arcs, loops); see module docstring

_compose_cache: dict = {}
_chi_cache: dict = {}


def smoothing(arcs, loops=()) -> Smoothing:
    return (tuple(sorted(arcs)), tuple(sorted(loops)))


def arc(p: int, q: int) -> tuple:
    return (0, p, q) if p < q else (0, q, p)


def sm_points(sm: Smoothing):
    return [a[1] for a in sm[0]] + [a[2] for a in sm[0]]


def _arc_other(sm: Smoothing) -> dict:
    out = {}
    for (_t, p, q) in sm[0]:
        out[p] = q
        out[q] = p
    return out


def _canon_gen(h: int, comps) -> tuple:
    return (h, tuple(sorted((dot, tuple(sorted(curves))) for dot, curves in comps)))


def identity_gen(sm: Smoothing) -> tuple:
    comps = [(0, ((0, c), (1, c))) for c in sm[0] + sm[1]]
    return _canon_gen(0, comps)


def identity_sum(sm: Smoothing) -> dict:
    return {identity_gen(sm): 1}


def cap_gen(sm_src: Smoothing, loop, dotted: bool) -> tuple:
    """Cap off ``loop`` of the source smoothing; target lacks the loop."""
    comps = [(1 if dotted else 0, ((0, loop),))]
    for c in sm_src[0]:
        comps.append((0, ((0, c), (1, c))))
    for c in sm_src[1]:
        if c != loop:
            comps.append((0, ((0, c), (1, c))))
    return _canon_gen(0, comps)


def cup_gen(sm_dst: Smoothing, loop, dotted: bool) -> tuple:
    """Birth of ``loop`` in the target smoothing; source lacks the loop."""
    comps = [(1 if dotted else 0, ((1, loop),))]
    for c in sm_dst[0]:
        comps.append((0, ((0, c), (1, c))))
    for c in sm_dst[1]:
        if c != loop:
            comps.append((0, ((0, c), (1, c))))
    return _canon_gen(0, comps)


def _cycle_partition(src_other: dict, dst_other: dict, curves) -> list:
    """Split component curves into its boundary circles.

    Each free loop is one circle; arcs chain along vertical boundary lines.
    Returns a list of curve tuples, one per boundary circle.
    """
    groups = []
    arc_at = ({}, {})
    for side, c in curves:
        if c[0] == 1:
            groups.append(((side, c),))
        else:
            arc_at[side][c[1]] = c
            arc_at[side][c[2]] = c
    visited = set()
    for side0, c0 in curves:
        if c0[0] == 1 or (side0, c0) in visited:
            continue
        group = []
        side, p = side0, c0[1]
        while True:
            c = arc_at[side][p]
            if (side, c) in visited:
                break
            visited.add((side, c))
            group.append((side, c))
            q = c[2] if c[1] == p else c[1]
            side, p = 1 - side, q
        groups.append(tuple(sorted(group)))
    return groups


def _boundary_cycles(src_other: dict, dst_other: dict, curves) -> int:
    return len(_cycle_partition(src_other, dst_other, curves))


def _comp_chi(sm_s: Smoothing, sm_d: Smoothing, comp_curves) -> int:
    """Euler characteristic of a normal-form (genus 0) component."""
    key = (sm_s, sm_d, comp_curves)
    val = _chi_cache.get(key)
    if val is None:
        val = 2 - _boundary_cycles(_arc_other(sm_s), _arc_other(sm_d), comp_curves)
        _chi_cache[key] = val
    return val


def _is_special(curves) -> bool:
    for _side, c in curves:
        if c[0] == 0 and (c[1] in (MARK_TAIL, MARK_HEAD) or c[2] in (MARK_TAIL, MARK_HEAD)):
            return True
    return False


def closed_surface_value(genus: int, dots: int):
    """(coeff, h_power) of a closed genus-g surface with dots, or None if 0.

    Counit evaluation in Z[H][X]/(X^2-HX): sphere 0, dotted sphere 1,
    torus 2, genus three 2H^2.
    """
    if dots == 0:
        if genus % 2 == 0:
            return None
        return (2, genus - 1)
    return (1, genus + dots - 1)


def _piece_special_mark(piece) -> int:
    """Bitmask of cut-edge stubs whose vertical line lies on this circle."""
    mask = 0
    for _side, c in piece:
        if c[0] == 0:
            if MARK_TAIL in (c[1], c[2]):
                mask |= 1
            if MARK_HEAD in (c[1], c[2]):
                mask |= 2
    return mask


def _normalize(sm_s: Smoothing, sm_d: Smoothing, raw_comps, coeff: int, h: int):
    """Expand raw components (curves, chi, dots) into normal-form terms.

    Returns a list of ((h, comps), coeff) pairs.  Genus is recovered from
    chi = 2 - 2g - b.  Normal form: every component consists of a single
    boundary circle; circles through the cut-edge stubs are parts of the
    special component, a dot flag marks a circle joined to the special
    curtain by a neck, plain circles are free.  The reductions:

    * closed pieces evaluate by the counit (sphere 0, dotted sphere 1, ...);
    * genus on a special piece is a power of H; on others it expands as
      2*dot - H per handle;
    * a dot on a special piece is H (a neck from the special component to
      itself); excess dots obey X^2 = H X;
    * a piece holding both stubs on *different* circles hides one handle
      (the outside curtain closes a loop), contributing one more H;
    * a multi-circle piece is neck-cut into its circles: with a dot the
      pieces all come out dotted (one H per extra dot); without, the sum
      runs over proper subsets T of dotted circles weighted (-H)^(b-1-|T|).
    """
    src_other, dst_other = _arc_other(sm_s), _arc_other(sm_d)
    terms = [(coeff, h, [])]
    for curves, chi, dots in raw_comps:
        pieces = _cycle_partition(src_other, dst_other, curves) if curves else []
        b = len(pieces)
        g2 = 2 - chi - b
        if g2 < 0 or g2 % 2:
            raise AssertionError(f"bad Euler characteristic: chi={chi} b={b}")
        g = g2 // 2
        if not curves:
            val = closed_surface_value(g, dots)
            if val is None:
                return []
            c0, h0 = val
            terms = [(c * c0, hh + h0, comps) for c, hh, comps in terms]
            continue
        marks = [_piece_special_mark(p) for p in pieces]
        if any(marks):
            extra = g + dots
            if (1 | 2) not in marks and set(marks) >= {1, 2}:
                extra += 1  # both stubs here but on different circles
            new_comps = [(0, p) if mk else (1, p)
                         for p, mk in zip(pieces, marks)]
            terms = [(c, hh + extra, comps + new_comps)
                     for c, hh, comps in terms]
            continue
        branches = []  # (coeff, h shift, dot count) after killing genus
        if g % 2 == 0:
            branches.append((1, g, dots))
        else:
            branches.append((2, g - 1, dots + 1))
            branches.append((-1, g, dots))
        expanded = []
        for bc, bh, bd in branches:
            if b == 1:
                if bd >= 2:
                    bh += bd - 1
                    bd = 1
                expanded.append((bc, bh, [(bd, curves)]))
            elif bd >= 1:
                # X^m C = H^(m-1) * product of dotted pieces
                expanded.append((bc, bh + bd - 1, [(1, p) for p in pieces]))
            else:
                # C = sum over proper subsets T: (-H)^(b-1-|T|) (T dotted)
                for bits in itertools.product((0, 1), repeat=b):
                    k = sum(bits)
                    if k == b:
                        continue
                    expanded.append(
                        (bc * (-1) ** (b - 1 - k), bh + b - 1 - k,
                         [(d, p) for d, p in zip(bits, pieces)]))
        terms = [(c * ec, hh + eh, comps + ecomps)
                 for c, hh, comps in terms
                 for ec, eh, ecomps in expanded]
    out = []
    for c, hh, comps in terms:
        out.append((_canon_gen(hh, comps), c))
    return out


def _add_term(acc: dict, key, coeff: int):
    c = acc.get(key, 0) + coeff
    if c:
        acc[key] = c
    else:
        acc.pop(key, None)


def compose(sm_s: Smoothing, sm_m: Smoothing, sm_d: Smoothing,
            bottom, top) -> list:
    """Compose generators (bottom: sm_s -> sm_m, top: sm_m -> sm_d).

    Returns [((h, comps), coeff), ...] in normal form.
    """
    key = (sm_s, sm_m, sm_d, bottom, top)
    cached = _compose_cache.get(key)
    if cached is not None:
        return cached
    hb, comps_b = bottom
    ht, comps_t = top
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    where_b = {}
    for i, (dot, curves) in enumerate(comps_b):
        parent[("b", i)] = ("b", i)
        for side, c in curves:
            if side == 1:
                where_b[c] = i
    where_t = {}
    for j, (dot, curves) in enumerate(comps_t):
        parent[("t", j)] = ("t", j)
        for side, c in curves:
            if side == 0:
                where_t[c] = j
    for c in sm_m[0] + sm_m[1]:
        union(("b", where_b[c]), ("t", where_t[c]))
    # gather merged data
    groups: dict = {}
    for i, (dot, curves) in enumerate(comps_b):
        r = find(("b", i))
        g = groups.setdefault(r, {"curves": [], "chi": 0, "dots": 0})
        g["chi"] += _comp_chi(sm_s, sm_m, curves)
        g["dots"] += dot
        g["curves"].extend((0, c) for side, c in curves if side == 0)
    for j, (dot, curves) in enumerate(comps_t):
        r = find(("t", j))
        g = groups.setdefault(r, {"curves": [], "chi": 0, "dots": 0})
        g["chi"] += _comp_chi(sm_m, sm_d, curves)
        g["dots"] += dot
        g["curves"].extend((1, c) for side, c in curves if side == 1)
    for c in sm_m[0]:
        r = find(("b", where_b[c]))
        groups[r]["chi"] -= 1  # glued along an interval
    raw = [(tuple(sorted(g["curves"])), g["chi"], g["dots"]) for g in groups.values()]
    result = _normalize(sm_s, sm_d, raw, 1, hb + ht)
    _compose_cache[key] = result
    return result


def compose_sums(sm_s: Smoothing, sm_m: Smoothing, sm_d: Smoothing,
                 bottom: dict, top: dict) -> dict:
    out: dict = {}
    for gt, ct in top.items():
        for gb, cb in bottom.items():
            for key, c in compose(sm_s, sm_m, sm_d, gb, gt):
                _add_term(out, key, c * cb * ct)
    return out


def degree(sm_s: Smoothing, sm_d: Smoothing, gen) -> int:
    """deg = chi - |B|/2 - 2 dots - 2 h_power for a normal-form generator."""
    h, comps = gen
    chi = 0
    dots = 0
    for dot, curves in comps:
        chi += _comp_chi(sm_s, sm_d, curves)
        dots += dot
    # |B| = one vertical boundary line per boundary point = 2 per arc
    return chi - len(sm_s[0]) - 2 * dots - 2 * h


def sum_degree(sm_s: Smoothing, sm_d: Smoothing, s: dict):
    """Common degree of all terms, or raise if inhomogeneous/empty."""
    degs = {degree(sm_s, sm_d, g) for g in s}
    if len(degs) != 1:
        raise AssertionError(f"inhomogeneous cobordism sum: degrees {degs}")
    return degs.pop()


def handle_relation(sm_s: Smoothing, sm_d: Smoothing, gen, comp, genus: int) -> dict:
    """Add ``genus`` handles to one component of a generator and re-normalize.

    On a non-special component a handle expands as 2*dot - H (so an even
    number of handles collapses to a power of H); on the special component
    each handle is one H.
    """
    h, comps = gen
    raw = []
    for dot, curves in comps:
        chi = _comp_chi(sm_s, sm_d, curves)
        if (dot, curves) == comp:
            chi -= 2 * genus
        raw.append((curves, chi, dot))
    out: dict = {}
    for key, c in _normalize(sm_s, sm_d, raw, 1, h):
        _add_term(out, key, c)
    return out


def neck_cut(sm_s: Smoothing, sm_d: Smoothing, gen, comp, side_a) -> dict:
    """Cut a separating neck of ``comp``, splitting its curves into
    ``side_a`` and the rest: cylinder = dot x cap + cap x dot - H cap x cap.
    """
    h, comps = gen
    dot0, curves = comp
    if dot0:
        raise ValueError("cut the neck before placing dots")
    side_a = tuple(sorted(side_a))
    side_b = tuple(sorted(set(curves) - set(side_a)))
    if not side_a or not side_b:
        raise ValueError("not a separating neck site")
    rest = [c for c in comps if c != comp]
    out: dict = {}
    for da, db, hh, coeff in ((1, 0, 0, 1), (0, 1, 0, 1), (0, 0, 1, -1)):
        raw = [(cur, _comp_chi(sm_s, sm_d, cur), d) for d, cur in rest]
        raw.append((side_a, _comp_chi(sm_s, sm_d, side_a), da))
        raw.append((side_b, _comp_chi(sm_s, sm_d, side_b), db))
        for key, c in _normalize(sm_s, sm_d, raw, coeff, h + hh):
            _add_term(out, key, c)
    return out


# ---------------------------------------------------------------------------
# Formula-level surface reduction (verification engine)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurfaceSpec:
    """Abstract disjoint surface: components (genus, boundary circles, special).

    Circle ids are globally distinct; at most one component is special (the
    one owning the chosen special boundary circle).
    """

    components: tuple  # of (genus, tuple(circle ids), special: bool)

    def __post_init__(self):
        seen = set()
        specials = 0
        for g, circles, special in self.components:
            if g < 0:
                raise ValueError("negative genus")
            for c in circles:
                if c in seen:
                    raise ValueError(f"duplicate circle id {c}")
                seen.add(c)
            specials += bool(special)
        if specials > 1:
            raise ValueError("at most one special component")


def _poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            k = ka + kb
            v = out.get(k, 0) + va * vb
            if v:
                out[k] = v
            else:
                out.pop(k, None)
    return out


def _acc(out: dict, cfg, poly: dict):
    cur = out.setdefault(cfg, {})
    for k, v in poly.items():
        nv = cur.get(k, 0) + v
        if nv:
            cur[k] = nv
        else:
            cur.pop(k, None)
    if not cur:
        out.pop(cfg, None)


def reduce_surface_Q(spec: SurfaceSpec) -> dict:
    """Reduce over Z[1/2, T] to unions of one-boundary genus 0/1 pieces.

    Result maps configurations ``frozenset((circle, genus01))`` to
    polynomials in the 2-handle operator T with Fraction coefficients
    (dicts exponent -> Fraction).
    """
    total = {frozenset(): {0: Fraction(1)}}
    for g, circles, _special in spec.components:
        n = len(circles)
        piece: dict = {}
        if n == 0:
            if g % 2 == 1:
                _acc(piece, frozenset(), {(g - 1) // 2: Fraction(2)})
            # even closed genus reduces to zero
        else:
            for assignment in itertools.product((0, 1), repeat=n):
                z = assignment.count(0)
                if (g + z) % 2 == 0:
                    continue
                cfg = frozenset(zip(circles, assignment))
                tpow = (g + z) // 2
                _acc(piece, cfg, {tpow: Fraction(1, 2 ** (n - 1))})
        new_total: dict = {}
        for cfg0, p0 in total.items():
            for cfg1, p1 in piece.items():
                _acc(new_total, cfg0 | cfg1, _poly_mul(p0, p1))
        total = new_total
    return total


def reduce_surface_Z(spec: SurfaceSpec) -> dict:
    """Reduce over Z[H] to genus-0 generators with a special component.

    Result maps ``(frozenset(circles merged into the special component),
    frozenset(single non-special circles))`` to H-polynomials
    (dicts exponent -> int).  The input must flag one special circle.
    """
    special_comp = [c for c in spec.components if c[2]]
    if len(special_comp) != 1:
        raise ValueError("need exactly one special component")
    total = {(frozenset(), frozenset()): {0: 1}}

    def mul_piece(piece: dict):
        nonlocal total
        new_total: dict = {}
        for (sp0, si0), p0 in total.items():
            for (sp1, si1), p1 in piece.items():
                _acc(new_total, (sp0 | sp1, si0 | si1), _poly_mul(p0, p1))
        total = new_total

    for g, circles, special in spec.components:
        piece: dict = {}
        if special:
            # genus on the special component is plain H^g
            _acc(piece, (frozenset(circles), frozenset()), {g: 1})
        elif len(circles) == 0:
            val = closed_surface_value(g, 0)
            if val is not None:
                c, h = val
                _acc(piece, (frozenset(), frozenset()), {h: c})
        else:
            # genus reduction first: 2 odd(g) H^{g-1} [merge all] + (-1)^g H^g [genus 0]
            stage = []
            if g >= 1:
                if g % 2 == 1:
                    stage.append(({g - 1: 2}, True))
                stage.append(({g: (-1) ** g}, False))
            else:
                stage.append(({0: 1}, False))
            for hpoly, merged in stage:
                if merged:
                    _acc(piece, (frozenset(circles), frozenset()), hpoly)
                elif len(circles) == 1:
                    _acc(piece, (frozenset(), frozenset(circles)), hpoly)
                else:
                    # neck reduction over proper subsets beta of the circles
                    n = len(circles)
                    for k in range(n):
                        for beta in itertools.combinations(circles, k):
                            rest = frozenset(circles) - set(beta)
                            coef = {n - k - 1: (-1) ** (n - k - 1)}
                            _acc(piece, (frozenset(beta), rest),
                                 _poly_mul(hpoly, coef))
        mul_piece(piece)
    return total


def _lin(*pairs):
    """Linear combination of reductions: pairs of (coeff, reduced dict)."""
    out: dict = {}
    for coeff, red in pairs:
        for cfg, poly in red.items():
            _acc(out, cfg, {k: coeff * v for k, v in poly.items()})
    return out


def _random_surface(rng: random.Random, max_comps=3, max_genus=3, max_circles=5,
                    with_special=False):
    n_comps = rng.randint(1, max_comps)
    circles = iter(range(1, max_circles + 50))
    comps = []
    budget = max_circles
    for i in range(n_comps):
        g = rng.randint(0, max_genus)
        k = rng.randint(0, min(2, budget))
        budget -= k
        comps.append([g, tuple(next(circles) for _ in range(k)), False])
    if with_special:
        comps[0][1] = comps[0][1] + (0,)
        comps[0][2] = True
    return [tuple(c) for c in comps]


def _with_tube(comps, i, j):
    """Join components i, j by a tube (same component: adds a handle)."""
    comps = [list(c) for c in comps]
    if i == j:
        comps[i][0] += 1
    else:
        gi, ci, si = comps[i]
        gj, cj, sj = comps[j]
        merged = (gi + gj, tuple(ci) + tuple(cj), si or sj)
        comps = [tuple(c) for k, c in enumerate(comps) if k not in (i, j)]
        return SurfaceSpec(tuple(comps) + (merged,))
    return SurfaceSpec(tuple(tuple(c) for c in comps))


def verify_relations(samples: int = 200, seed: int = 0) -> dict:
    """Check that the reduction formulas annihilate NC and 3S1/4TU instances.

    Returns {"nc_checked": n, "tu_checked": n, "failures": [...]}.
    """
    rng = random.Random(seed)
    failures = []
    nc_checked = tu_checked = 0
    for _ in range(samples):
        # NC instance over Z[1/2, T]: 2*tube(1,2) = handle@1 + handle@2
        comps = _random_surface(rng)
        k = len(comps)
        i, j = rng.randrange(k), rng.randrange(k)
        spec0 = SurfaceSpec(tuple(comps))
        lhs = _lin((2, reduce_surface_Q(_with_tube(comps, i, j))))
        a = [list(c) for c in comps]
        a[i][0] += 1
        b = [list(c) for c in comps]
        b[j][0] += 1
        rhs = _lin((1, reduce_surface_Q(SurfaceSpec(tuple(tuple(c) for c in a)))),
                   (1, reduce_surface_Q(SurfaceSpec(tuple(tuple(c) for c in b)))))
        nc_checked += 1
        if _lin((1, lhs), (-1, rhs)):
            failures.append(("NC", comps, i, j))
        # 3S1 instance over Z[H]: tube(1,2) + handle@3 = tube(1,3) + tube(2,3)
        comps = _random_surface(rng, with_special=True)
        k = len(comps)
        s1, s2, s3 = (rng.randrange(k) for _ in range(3))
        h3 = [list(c) for c in comps]
        h3[s3][0] += 1
        lhs = _lin((1, reduce_surface_Z(_with_tube(comps, s1, s2))),
                   (1, reduce_surface_Z(SurfaceSpec(tuple(tuple(c) for c in h3)))))
        rhs = _lin((1, reduce_surface_Z(_with_tube(comps, s1, s3))),
                   (1, reduce_surface_Z(_with_tube(comps, s2, s3))))
        tu_checked += 1
        if _lin((1, lhs), (-1, rhs)):
            failures.append(("3S1", comps, s1, s2, s3))
    return {"nc_checked": nc_checked, "tu_checked": tu_checked, "failures": failures}
