"""
Geometric chain complexes of tangle smoothings and their reduction to the
universal complex over Z[H].

The assembly is local: crossings are glued one at a time onto a partial
complex.  Objects live in columns indexed by height h (number of
1-smoothings among the processed crossings); each object is a pair
(smoothing, qt) where qt is the running internal grading (delooping shifts
plus h).  The final complex applies the global shifts: homological degree
i = h - n_minus, internal degree q = qt + n_plus - 2 n_minus.

Gluing a crossing tensors the complex with the two-term saddle complex,
with the sign (-1)^h on the saddle entries so squares anticommute.  After
each gluing every closed circle is removed by the delooping isomorphism
(two degree-shifted copies of the object, legs: dotted cap / plain cup into
the +1 copy, plain cap / dotted-cup-minus-H-cup into the -1 copy) and
isomorphisms (identity curtains with coefficient +-1) are cancelled by the
standard elimination lemma, d -> epsilon - gamma phi^{-1} delta.

The fully reduced result is a UniversalComplex: columns of special lines
(q-degrees) with matrices whose entries are integer multiples of H^k, the
power k = (q_target - q_source)/2 being forced by grading.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from . import cobalg
from .cobalg import (MARK_HEAD, MARK_TAIL, cap_gen, compose_sums, cup_gen,
                     degree, smoothing)
from .diagram import PlanarDiagram, processing_order

__all__ = [
    "GeometricComplex",
    "UniversalComplex",
    "SizeLimitError",
    "ComplexError",
    "cube",
    "deloop",
    "gaussian_eliminate",
    "build_universal",
    "verify_complex",
    "normalize_units",
    "complexes_isomorphic",
]

_TMP = 10 ** 7  # temporary point ids for crossing slots


class SizeLimitError(RuntimeError):
    pass


class ComplexError(AssertionError):
    pass


class _Matrix:
    """Sparse matrix of cobordism sums with row/column indexes."""

    def __init__(self):
        self.entries: dict = {}      # (t, s) -> CobSum
        self.by_row: dict = {}       # t -> set of s
        self.by_col: dict = {}       # s -> set of t

    def set(self, t, s, value: dict):
        if value:
            if (t, s) not in self.entries:
                self.by_row.setdefault(t, set()).add(s)
                self.by_col.setdefault(s, set()).add(t)
            self.entries[(t, s)] = value
        else:
            self.discard(t, s)

    def add(self, t, s, value: dict):
        if not value:
            return
        cur = self.entries.get((t, s))
        if cur is None:
            self.set(t, s, dict(value))
            return
        for k, c in value.items():
            nc = cur.get(k, 0) + c
            if nc:
                cur[k] = nc
            else:
                del cur[k]
        if not cur:
            self.discard(t, s)

    def discard(self, t, s):
        if (t, s) in self.entries:
            del self.entries[(t, s)]
            self.by_row[t].discard(s)
            self.by_col[s].discard(t)

    def row(self, t):
        return list(self.by_row.get(t, ()))

    def col(self, s):
        return list(self.by_col.get(s, ()))


class GeometricComplex:
    """Columns of (smoothing, qt) objects and CobSum matrices between them."""

    def __init__(self, n_plus: int, n_minus: int, free_loops=()):
        self.n_plus = n_plus
        self.n_minus = n_minus
        init = smoothing([], free_loops)
        self.cols: dict[int, list] = {0: [(init, 0)]}
        self.diffs: dict[int, _Matrix] = {}
        self.heights = [0, 0]  # [min, max] column height in use

    # -- basic accessors -------------------------------------------------
    def objects(self, h):
        return [(i, o) for i, o in enumerate(self.cols.get(h, [])) if o is not None]

    def live_count(self, h):
        return sum(1 for o in self.cols.get(h, []) if o is not None)

    def matrix(self, h) -> _Matrix:
        m = self.diffs.get(h)
        if m is None:
            m = self.diffs[h] = _Matrix()
        return m

    def total_objects(self):
        return sum(self.live_count(h) for h in self.cols)

    # -- gluing a crossing ------------------------------------------------
    def glue_crossing(self, slots, marked_resolution, open_points: set,
                      size_limit: int | None = None):
        """Attach one crossing.

        ``slots``: the 4 edge labels (a, b, c, d); ``marked_resolution``
        maps slot index -> MARK_HEAD/MARK_TAIL for occurrences of the cut
        edge.  ``open_points`` is the set of currently open edge labels and
        is updated in place.
        """
        tmp = [_TMP + i for i in range(4)]
        rename = {}
        glue_pairs = []  # (existing point, tmp point) or (tmp, tmp)
        done = set()
        for i, e in enumerate(slots):
            if i in done:
                continue
            if i in marked_resolution:
                rename[tmp[i]] = marked_resolution[i]
            elif e in open_points:
                glue_pairs.append((e, tmp[i]))
                open_points.discard(e)
            else:
                js = [j for j in range(i + 1, 4) if slots[j] == e and j not in marked_resolution]
                if js:
                    j = js[0]
                    done.add(j)
                    glue_pairs.append((tmp[i], tmp[j]))
                else:
                    rename[tmp[i]] = e
                    open_points.add(e)
        sigma = {
            0: (cobalg.arc(*(rename.get(p, p) for p in (tmp[0], tmp[1]))),
                cobalg.arc(*(rename.get(p, p) for p in (tmp[2], tmp[3])))),
            1: (cobalg.arc(*(rename.get(p, p) for p in (tmp[0], tmp[3]))),
                cobalg.arc(*(rename.get(p, p) for p in (tmp[1], tmp[2])))),
        }
        pairs = [(rename.get(x, x), rename.get(y, y)) for x, y in glue_pairs]

        glued = {}  # (h, i, state) -> (new_sm, remap)
        new_cols: dict[int, list] = {}
        index = {}  # (h, i, state) -> new index in column
        for h in sorted(self.cols):
            for i, obj in self.objects(h):
                sm, qt = obj
                for state in (0, 1):
                    new_sm, remap = _glue_smoothing(sm, sigma[state], pairs)
                    glued[(h, i, state)] = (new_sm, remap)
                    col = new_cols.setdefault(h + state, [])
                    index[(h, i, state)] = len(col)
                    col.append((new_sm, qt + state))
        new_diffs: dict[int, _Matrix] = {}

        def put(h, t, s, val):
            if val:
                m = new_diffs.get(h)
                if m is None:
                    m = new_diffs[h] = _Matrix()
                m.add(t, s, val)

        # old differentials, extended by parallel curtains over the new arcs
        for h, mat in self.diffs.items():
            for (t, s), e in mat.entries.items():
                sm_s, _ = self.cols[h][s]
                sm_t, _ = self.cols[h + 1][t]
                for state in (0, 1):
                    src_sm, src_remap = glued[(h, s, state)]
                    dst_sm, dst_remap = glued[(h + 1, t, state)]
                    val = _extend_entry(sm_s, sm_t, e, src_sm, src_remap,
                                        dst_sm, dst_remap, sigma[state], pairs,
                                        saddle=False)
                    put(h + state, index[(h + 1, t, state)],
                        index[(h, s, state)], val)
        # saddle entries with the cube sign (-1)^h
        for h in sorted(self.cols):
            for i, obj in self.objects(h):
                sm, qt = obj
                src_sm, src_remap = glued[(h, i, 0)]
                dst_sm, dst_remap = glued[(h, i, 1)]
                val = _saddle_entry(sm, src_sm, src_remap, dst_sm, dst_remap,
                                    sigma, pairs)
                if h % 2:
                    val = {k: -c for k, c in val.items()}
                put(h, index[(h, i, 1)], index[(h, i, 0)], val)
        self.cols = new_cols
        self.diffs = new_diffs
        self.heights[1] += 1
        if size_limit is not None:
            for h in self.cols:
                if self.live_count(h) > size_limit:
                    raise SizeLimitError(
                        f"column {h} exceeds {size_limit} objects")

    # -- delooping ---------------------------------------------------------
    def deloop_object(self, h, i):
        """Replace one closed circle of object (h, i) by two shifted copies."""
        sm, qt = self.cols[h][i]
        if not sm[1]:
            raise ComplexError("object has no loop")
        loop = sm[1][0]
        sm_minus = smoothing(sm[0], [l for l in sm[1] if l != loop])
        col = self.cols[h]
        ip = len(col)
        col.append((sm_minus, qt + 1))
        im = len(col)
        col.append((sm_minus, qt - 1))
        dcap = {cap_gen(sm, loop, dotted=True): 1}
        cap = {cap_gen(sm, loop, dotted=False): 1}
        cup = {cup_gen(sm, loop, dotted=False): 1}
        leg_m = {cup_gen(sm, loop, dotted=True): 1}
        for k, c in cup.items():
            leg_m[(k[0] + 1, k[1])] = -c
        min_h = self.heights[0]
        if h > min_h and h - 1 in self.diffs:
            mat = self.diffs[h - 1]
            for s in mat.row(i):
                e = mat.entries[(i, s)]
                sm_s, _ = self.cols[h - 1][s]
                mat.add(ip, s, compose_sums(sm_s, sm, sm_minus, e, dcap))
                mat.add(im, s, compose_sums(sm_s, sm, sm_minus, e, cap))
                mat.discard(i, s)
        if h in self.diffs:
            mat = self.diffs[h]
            for t in mat.col(i):
                e = mat.entries[(t, i)]
                sm_t, _ = self.cols[h + 1][t]
                mat.add(t, ip, compose_sums(sm_minus, sm, sm_t, cup, e))
                mat.add(t, im, compose_sums(sm_minus, sm, sm_t, leg_m, e))
                mat.discard(t, i)
        col[i] = None

    def deloop_all(self):
        changed = True
        while changed:
            changed = False
            for h in sorted(self.cols):
                for i, obj in self.objects(h):
                    if obj[0][1]:
                        self.deloop_object(h, i)
                        changed = True

    # -- elimination -------------------------------------------------------
    def _invertible(self, h, t, s):
        e = self.diffs[h].entries.get((t, s))
        if e is None or len(e) != 1:
            return None
        (hp, comps), coeff = next(iter(e.items()))
        if hp != 0 or coeff not in (1, -1):
            return None
        sm_s, q_s = self.cols[h][s]
        sm_t, q_t = self.cols[h + 1][t]
        if sm_s != sm_t or q_s != q_t:
            return None
        for dot, curves in comps:
            if dot:
                return None
            if len(curves) != 2:
                return None
            (sa, ca), (sb, cb) = curves
            if ca != cb or sa == sb:
                return None
        if len(comps) != len(sm_s[0]) + len(sm_s[1]):
            return None
        return coeff

    def eliminate(self, h, t, s):
        """Cancel the invertible entry (h, t, s): d -> eps - gamma phi^-1 delta."""
        sign = self._invertible(h, t, s)
        if sign is None:
            raise ComplexError(f"entry ({h},{t},{s}) is not invertible")
        mat = self.diffs[h]
        sm_mid = self.cols[h][s][0]
        gammas = [(t2, mat.entries[(t2, s)]) for t2 in mat.col(s) if t2 != t]
        deltas = [(s2, mat.entries[(t, s2)]) for s2 in mat.row(t) if s2 != s]
        for (t2, eg) in gammas:
            sm_t2 = self.cols[h + 1][t2][0]
            for (s2, ed) in deltas:
                sm_s2 = self.cols[h][s2][0]
                upd = compose_sums(sm_s2, sm_mid, sm_t2, ed, eg)
                if upd:
                    mat.add(t2, s2, {k: -sign * c for k, c in upd.items()})
        for t2 in mat.col(s):
            mat.discard(t2, s)
        for s2 in mat.row(t):
            mat.discard(t, s2)
        if h - 1 in self.diffs:
            prev = self.diffs[h - 1]
            for s2 in prev.row(s):
                prev.discard(s, s2)
        if h + 1 in self.diffs:
            nxt = self.diffs[h + 1]
            for t2 in nxt.col(t):
                nxt.discard(t2, t)
        self.cols[h][s] = None
        self.cols[h + 1][t] = None

    def eliminate_all(self):
        queue = deque()
        for h in sorted(self.diffs):
            for (t, s) in sorted(self.diffs[h].entries):
                queue.append((h, t, s))
        while queue:
            h, t, s = queue.popleft()
            if self.cols[h][s] is None or self.cols[h + 1][t] is None:
                continue
            if self._invertible(h, t, s) is None:
                continue
            before = {key for key in self.diffs[h].entries}
            self.eliminate(h, t, s)
            for key in self.diffs[h].entries:
                queue.append((h,) + key)

    def compact(self):
        """Drop tombstones and reindex."""
        remap = {}
        for h in list(self.cols):
            new = []
            for i, obj in enumerate(self.cols[h]):
                if obj is not None:
                    remap[(h, i)] = len(new)
                    new.append(obj)
            self.cols[h] = new
        for h in list(self.diffs):
            mat = self.diffs[h]
            fresh = _Matrix()
            for (t, s), e in mat.entries.items():
                fresh.set(remap[(h + 1, t)], remap[(h, s)], e)
            self.diffs[h] = fresh

    # -- verification -------------------------------------------------------
    def verify(self):
        """Check d o d = 0 and degree-0 homogeneity; raise ComplexError."""
        for h, mat in self.diffs.items():
            for (t, s), e in mat.entries.items():
                sm_s, q_s = self.cols[h][s]
                sm_t, q_t = self.cols[h + 1][t]
                for gen in e:
                    d = degree(sm_s, sm_t, gen)
                    if d + q_t - q_s != 0:
                        raise ComplexError(
                            f"entry ({h},{t},{s}) has degree {d + q_t - q_s}")
        for h, mat in self.diffs.items():
            nxt = self.diffs.get(h + 1)
            if nxt is None:
                continue
            acc: dict = {}
            for (t, s), e in mat.entries.items():
                sm_s = self.cols[h][s][0]
                sm_m = self.cols[h + 1][t][0]
                for u in nxt.col(t):
                    e2 = nxt.entries[(u, t)]
                    sm_u = self.cols[h + 2][u][0]
                    comp = compose_sums(sm_s, sm_m, sm_u, e, e2)
                    tgt = acc.setdefault((u, s), {})
                    for k, c in comp.items():
                        nc = tgt.get(k, 0) + c
                        if nc:
                            tgt[k] = nc
                        else:
                            del tgt[k]
            for (u, s), val in acc.items():
                if val:
                    raise ComplexError(f"d^2 != 0 at h={h}, ({u},{s}): {val}")
        return True


def _glue_smoothing(sm, cross_arcs, pairs):
    """Merge a smoothing with two crossing arcs along glued point pairs.

    Returns (new_smoothing, remap) where remap sends every old curve and
    ("X", k) for the crossing arcs to its curve in the new smoothing.
    Glued points acquire two arc ends and disappear into the interior of a
    chain; chains with free ends become arcs, closed chains become loops
    whose id records the interior points (globally unique: each edge label
    is glued at most once).
    """
    rep = {}

    def find(p):
        root = p
        while rep.get(root, root) != root:
            root = rep[root]
        while rep.get(p, p) != p:
            rep[p], p = root, rep[p]
        return root

    for x, y in pairs:
        rep[find(y)] = find(x)
    arcs = [(a, find(a[1]), find(a[2])) for a in sm[0]]
    arcs += [(("X", k), find(a[1]), find(a[2])) for k, a in enumerate(cross_arcs)]
    ends_at: dict = {}
    for idx, (cid, p, q) in enumerate(arcs):
        ends_at.setdefault(p, []).append((idx, 0))
        ends_at.setdefault(q, []).append((idx, 1))
    used = [False] * len(arcs)
    remap = {}
    new_arcs = []
    new_loops = list(sm[1])

    def walk(idx, end):
        """From arc ``idx`` leaving via its ``end``, follow the chain."""
        members = [idx]
        used[idx] = True
        p = arcs[idx][1 + end]
        while len(ends_at[p]) == 2:
            (i1, e1), (i2, e2) = ends_at[p]
            nidx, nend = ((i2, e2) if (i1, e1) == (idx, end) else (i1, e1))
            if used[nidx] and nidx == members[0]:
                return members, None  # closed up
            idx, end = nidx, 1 - nend
            members.append(idx)
            used[idx] = True
            p = arcs[idx][1 + end]
        return members, p

    for p, touching in ends_at.items():
        if len(touching) == 1 and not used[touching[0][0]]:
            idx, end = touching[0]
            members, q = walk(idx, 1 - end)
            a = cobalg.arc(p, q)
            new_arcs.append(a)
            for m in members:
                remap[arcs[m][0]] = a
    for idx in range(len(arcs)):
        if not used[idx]:
            members, _ = walk(idx, 1)
            interior = set()
            for m in members:
                interior.add(arcs[m][1])
                interior.add(arcs[m][2])
            loop = (1,) + tuple(sorted(interior))
            new_loops.append(loop)
            for m in members:
                remap[arcs[m][0]] = loop
    for l in sm[1]:
        remap[l] = l
    return smoothing(new_arcs, new_loops), remap


def _extend_entry(sm_s, sm_t, e: dict, src_sm, src_remap, dst_sm, dst_remap,
                  cross_arcs, pairs, saddle: bool):
    """Extend a cobordism sum over the glued crossing by identity curtains."""
    out: dict = {}
    for (hp, comps), coeff in e.items():
        raw = _merge_pieces(sm_s, sm_t, comps, src_sm, src_remap, dst_sm,
                            dst_remap, cross_arcs, pairs)
        for key, c in cobalg._normalize(src_sm, dst_sm, raw, coeff, hp):
            nc = out.get(key, 0) + c
            if nc:
                out[key] = nc
            else:
                out.pop(key, None)
    return out


def _saddle_entry(sm, src_sm, src_remap, dst_sm, dst_remap, sigma, pairs):
    ident = cobalg.identity_gen(sm)
    raw = _merge_pieces(sm, sm, ident[1], src_sm, src_remap, dst_sm,
                        dst_remap, sigma[0], pairs, saddle=True)
    out: dict = {}
    for key, c in cobalg._normalize(src_sm, dst_sm, raw, 1, 0):
        nc = out.get(key, 0) + c
        if nc:
            out[key] = nc
        else:
            out.pop(key, None)
    return out


def _merge_pieces(sm_s, sm_t, comps, src_sm, src_remap, dst_sm, dst_remap,
                  src_arcs, pairs, saddle: bool = False):
    """Union old components with the crossing pieces along the glue pairs."""
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

    comps = list(comps)
    at_point = {}
    for idx, (dot, curves) in enumerate(comps):
        parent[("c", idx)] = ("c", idx)
        for side, c in curves:
            if side == 0 and c[0] == 0:
                at_point[c[1]] = idx
                at_point[c[2]] = idx
    if saddle:
        piece_count = 1
        piece_of_arc = {("X", 0): 0, ("X", 1): 0}
    else:
        piece_count = 2
        piece_of_arc = {("X", 0): 0, ("X", 1): 1}
    for pi in range(piece_count):
        parent[("p", pi)] = ("p", pi)
    piece_at_pt = {}
    for k, a in enumerate(src_arcs):
        piece_at_pt[a[1]] = piece_of_arc[("X", k)]
        piece_at_pt[a[2]] = piece_of_arc[("X", k)]

    def node(p):
        if p in at_point:
            return ("c", at_point[p])
        return ("p", piece_at_pt[p])

    for x, y in pairs:
        union(node(x), node(y))
    groups: dict = {}
    for idx, (dot, curves) in enumerate(comps):
        r = find(("c", idx))
        g = groups.setdefault(r, {"curves": set(), "chi": 0, "dots": 0})
        g["chi"] += cobalg._comp_chi(sm_s, sm_t, curves)
        g["dots"] += dot
        for side, c in curves:
            remap = src_remap if side == 0 else dst_remap
            g["curves"].add((side, remap[c]))
    for pi in range(piece_count):
        r = find(("p", pi))
        g = groups.setdefault(r, {"curves": set(), "chi": 0, "dots": 0})
        g["chi"] += 1
        for k in range(2):
            if piece_of_arc[("X", k)] == pi:
                g["curves"].add((0, src_remap[("X", k)]))
                g["curves"].add((1, dst_remap[("X", k)]))
    for x, y in pairs:
        groups[find(node(x))]["chi"] -= 1
    return [(tuple(sorted(g["curves"])), g["chi"], g["dots"])
            for g in groups.values()]


# ---------------------------------------------------------------------------
# Assembly pipeline
# ---------------------------------------------------------------------------

def _assemble(d: PlanarDiagram, order, reduce_steps: bool,
              size_limit: int | None) -> GeometricComplex:
    loops = d.free_loops - (1 if not d.crossings else 0)
    free = [(1, -10 - i) for i in range(loops)]
    gc = GeometricComplex(d.n_plus, d.n_minus, free)
    open_points: set = set()
    for ci in order:
        x = d.crossings[ci]
        marked_res = {}
        for si, e in enumerate(x.slots):
            if e == d.marked_edge:
                marked_res[si] = (MARK_HEAD if d.heads[e] == (ci, si)
                                  else MARK_TAIL)
        gc.glue_crossing(x.slots, marked_res, open_points,
                         size_limit=size_limit)
        if reduce_steps:
            gc.deloop_all()
            gc.eliminate_all()
            gc.compact()
    return gc


def cube(d: PlanarDiagram, size_limit: int | None = 20000) -> GeometricComplex:
    """Full 2^n cube of resolutions of the cut-open diagram (no reduction).

    Crossings are glued in input order; the edge signs are (-1)^(number of
    1-smoothings among earlier crossings); q-shifts are height + n+ - 2n-.
    """
    return _assemble(d, range(len(d.crossings)), reduce_steps=False,
                     size_limit=size_limit)


def deloop(c: GeometricComplex, which: tuple[int, int]) -> GeometricComplex:
    """Replace one closed circle of the object ``which = (height, index)``.

    Mutates and returns ``c``.
    """
    c.deloop_object(*which)
    return c


def gaussian_eliminate(c: GeometricComplex,
                       entry: tuple[int, int, int]) -> GeometricComplex:
    """Cancel the invertible entry ``(height, target, source)`` of ``c``."""
    c.eliminate(*entry)
    return c


def verify_complex(c: GeometricComplex) -> dict:
    """d o d = 0 and degree-0 homogeneity check; report first violation."""
    try:
        c.verify()
    except ComplexError as err:
        return {"ok": False, "violation": str(err)}
    return {"ok": True, "violation": None}


def build_universal(d: PlanarDiagram, size_limit: int | None = 20000,
                    verify: bool = False) -> "UniversalComplex":
    """Reduce the diagram crossing by crossing to special lines over Z[H]."""
    order = processing_order(d)
    gc = _assemble(d, order, reduce_steps=True, size_limit=size_limit)
    if verify:
        gc.verify()
    u = _to_universal(gc)
    normalize_units(u)
    return u


def _to_universal(gc: GeometricComplex) -> "UniversalComplex":
    shift_i = -gc.n_minus
    shift_q = gc.n_plus - 2 * gc.n_minus
    degrees = {}
    index = {}
    for h in sorted(gc.cols):
        objs = gc.objects(h)
        qs = []
        for i, (sm, qt) in objs:
            if sm[1] or any(a != (0, MARK_TAIL, MARK_HEAD) for a in sm[0]):
                raise ComplexError(f"object at height {h} is not a special line: {sm}")
            index[(h, i)] = len(qs)
            qs.append(qt + shift_q)
        if qs:
            degrees[h + shift_i] = qs
    mats: dict = {}
    for h, mat in gc.diffs.items():
        for (t, s), e in mat.entries.items():
            if len(e) != 1:
                raise ComplexError(f"entry ({h},{t},{s}) is not a monomial: {e}")
            (hp, comps), coeff = next(iter(e.items()))
            for dot, _curves in comps:
                if dot:
                    raise ComplexError("dot survived on a special line entry")
            i = h + shift_i
            mats.setdefault(i, {})[(index[(h + 1, t)], index[(h, s)])] = coeff
            qs_s = degrees[i][index[(h, s)]]
            qs_t = degrees[i + 1][index[(h + 1, t)]]
            if qs_t - qs_s != 2 * hp:
                raise ComplexError("H-power does not match grading")
    from .universal import UniversalComplex
    return UniversalComplex(degrees, mats)


def normalize_units(u) -> None:
    """Concentrate unit-coefficient entries: graded Gauss over Z[H], without
    removing objects (coefficient +-1 entries absorb parallel entries whose
    H-power is at least as large).  Mutates ``u`` in place.
    """
    from .universal import unit_eliminations
    unit_eliminations(u)


def complexes_isomorphic(a, b) -> bool:
    from .universal import isomorphic
    return isomorphic(a, b)
