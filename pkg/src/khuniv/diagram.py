"""
Oriented link diagrams from PD codes and braid words.

A diagram is a list of crossings over labelled edges.  We follow the Knot
Atlas PD convention: a crossing ``X[a,b,c,d]`` lists the four incident edges
counterclockwise starting from the *incoming under-strand* ``a``.  The
under-strand therefore runs a -> c.  The over-strand occupies slots b and d;
its direction is recovered from global orientation consistency (every edge
has exactly one head and one tail) and, where that leaves a component
undetermined, from the convention that edge labels increase along each
component (wrapping at the component's maximal label).

Crossing signs are a two-case rule on the over-strand direction:

    over-strand enters at slot d  (runs d -> b)  ->  sign +1
    over-strand enters at slot b  (runs b -> d)  ->  sign -1

which reproduces the usual ``(b - d) % 2n == 1`` positivity test for knots
labelled in the standard way.

Braid words use the grammar ``BR[n, {i1, i2, ...}]`` where a positive letter
i denotes the generator sigma_i (a positive crossing between strands i and
i+1) and a negative letter its inverse.  The closure of a positive braid has
writhe equal to the word length.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

__all__ = [
    "Crossing",
    "PlanarDiagram",
    "BraidWord",
    "InvalidDiagramError",
    "parse_pd",
    "parse_braid",
    "braid_to_pd",
    "torus_braid",
    "processing_order",
    "cut_open",
    "mirror",
]


class InvalidDiagramError(ValueError):
    """Raised for malformed PD text or inconsistent diagram data."""


@dataclass(frozen=True)
class Crossing:
    """One crossing; slots (a, b, c, d) counterclockwise, a = incoming under."""

    a: int
    b: int
    c: int
    d: int
    sign: int  # +1 or -1

    @property
    def slots(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    @property
    def over_in(self) -> int:
        """Edge entering on the over-strand (slot d if positive, b if negative)."""
        return self.d if self.sign > 0 else self.b

    @property
    def over_out(self) -> int:
        return self.b if self.sign > 0 else self.d


@dataclass(frozen=True)
class PlanarDiagram:
    """A validated, oriented link diagram.

    ``heads[e]``/``tails[e]`` give the (crossing index, slot index) where the
    edge e points into / emanates from.  ``free_loops`` counts crossingless
    circle components (so the 0-crossing unknot is one free loop).
    ``marked_edge`` is the edge cut open to produce the 1-1 tangle; for a
    crossingless diagram the mark sits on the first free loop and the value
    is 0 by convention.
    """

    crossings: tuple[Crossing, ...]
    edge_count: int
    marked_edge: int
    heads: dict[int, tuple[int, int]] = field(compare=False)
    tails: dict[int, tuple[int, int]] = field(compare=False)
    components: tuple[tuple[int, ...], ...] = field(compare=False)
    free_loops: int = 0

    @property
    def n_plus(self) -> int:
        return sum(1 for x in self.crossings if x.sign > 0)

    @property
    def n_minus(self) -> int:
        return sum(1 for x in self.crossings if x.sign < 0)

    @property
    def writhe(self) -> int:
        return self.n_plus - self.n_minus

    @property
    def component_count(self) -> int:
        return len(self.components) + self.free_loops

    def is_knot(self) -> bool:
        return self.component_count == 1


@dataclass(frozen=True)
class BraidWord:
    strand_count: int
    letters: tuple[int, ...]

    def __post_init__(self):
        if self.strand_count < 1:
            raise InvalidDiagramError("braid needs at least one strand")
        for w in self.letters:
            if w == 0 or abs(w) >= self.strand_count:
                raise InvalidDiagramError(f"generator index {w} out of range")


_PD_RE = re.compile(r"^\s*PD\s*\[(.*)\]\s*$", re.DOTALL)
_X_RE = re.compile(r"X\s*\[\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\]")


def parse_pd(text: str) -> PlanarDiagram:
    """Parse ``PD[X[a,b,c,d], ...]`` text into a validated diagram.

    ``PD[]`` yields the 0-crossing unknot.
    """
    m = _PD_RE.match(text)
    if m is None:
        raise InvalidDiagramError(f"not a PD expression: {text!r}")
    body = m.group(1).strip()
    if body == "":
        return _crossingless(1)
    quads = []
    rest = body
    while rest:
        xm = _X_RE.match(rest.strip())
        if xm is None:
            raise InvalidDiagramError(f"malformed crossing near: {rest[:40]!r}")
        quads.append(tuple(int(g) for g in xm.groups()))
        rest = rest.strip()[xm.end():].strip()
        if rest.startswith(","):
            rest = rest[1:]
        elif rest:
            raise InvalidDiagramError(f"expected ',' between crossings near {rest[:20]!r}")
    return diagram_from_quads(quads)


def _crossingless(loops: int, marked: int = 0) -> PlanarDiagram:
    return PlanarDiagram(
        crossings=(),
        edge_count=0,
        marked_edge=marked,
        heads={},
        tails={},
        components=(),
        free_loops=loops,
    )


def diagram_from_quads(
    quads: Sequence[tuple[int, int, int, int]],
    orientations: dict[int, tuple[int, int]] | None = None,
    marked_edge: int | None = None,
    free_loops: int = 0,
) -> PlanarDiagram:
    """Build a diagram from raw crossing quads.

    ``orientations`` may give the head occurrence (crossing, slot) of every
    edge explicitly (used by braid closures); otherwise heads/tails are
    inferred from the under-strand convention plus increasing labels.
    """
    occurrences: dict[int, list[tuple[int, int]]] = {}
    for ci, q in enumerate(quads):
        for si, e in enumerate(q):
            occurrences.setdefault(e, []).append((ci, si))
    for e, occ in occurrences.items():
        if len(occ) != 2:
            raise InvalidDiagramError(f"edge {e} appears {len(occ)} times (need 2)")

    if orientations is not None:
        heads = dict(orientations)
        tails = {}
        for e, occ in occurrences.items():
            if e not in heads:
                raise InvalidDiagramError(f"no orientation provided for edge {e}")
            rest = [o for o in occ if o != heads[e]]
            if len(rest) != 1:
                raise InvalidDiagramError(f"bad head occurrence for edge {e}")
            tails[e] = rest[0]
    else:
        heads, tails = _infer_orientations(quads, occurrences)

    crossings = []
    for ci, (a, b, c, d) in enumerate(quads):
        if heads.get(a) != (ci, 0):
            raise InvalidDiagramError(f"crossing {ci}: slot a={a} is not incoming")
        if tails.get(c) != (ci, 2):
            raise InvalidDiagramError(f"crossing {ci}: slot c={c} is not outgoing")
        if heads.get(d) == (ci, 3) and tails.get(b) == (ci, 1):
            sign = 1
        elif heads.get(b) == (ci, 1) and tails.get(d) == (ci, 3):
            sign = -1
        else:
            raise InvalidDiagramError(f"crossing {ci}: over-strand orientation inconsistent")
        crossings.append(Crossing(a, b, c, d, sign))

    components = _component_cycles(quads)
    edge_count = len(occurrences)
    if sorted(occurrences) != list(range(1, edge_count + 1)):
        # Non-contiguous labels are accepted; edge_count is just the count.
        pass
    if marked_edge is None:
        marked_edge = min(occurrences)
    elif marked_edge not in occurrences:
        raise InvalidDiagramError(f"marked edge {marked_edge} not in diagram")
    return PlanarDiagram(
        crossings=tuple(crossings),
        edge_count=edge_count,
        marked_edge=marked_edge,
        heads=heads,
        tails=tails,
        components=components,
        free_loops=free_loops,
    )


_MATE = {0: 2, 2: 0, 1: 3, 3: 1}


def _walk_components(quads):
    """Walk strand pairings; return per component (edges, entry occurrences).

    For component (e_0, ..., e_{m-1}) the occurrence occ_in[i] is where edge
    e_i *enters* the crossing shared with e_{i+1} when the component is
    traversed in the listed direction.
    """
    occ_of_edge: dict[int, list[tuple[int, int]]] = {}
    for ci, q in enumerate(quads):
        for si, e in enumerate(q):
            occ_of_edge.setdefault(e, []).append((ci, si))
    seen = set()
    comps = []
    for e0 in sorted(occ_of_edge):
        if e0 in seen:
            continue
        edges, occ_ins = [], []
        e = e0
        exit_occ = occ_of_edge[e][0]  # pretend we exited here; enter elsewhere
        while e not in seen:
            seen.add(e)
            edges.append(e)
            occs = occ_of_edge[e]
            entry = occs[1] if occs[0] == exit_occ else occs[0]
            occ_ins.append(entry)
            ci, si = entry
            exit_occ = (ci, _MATE[si])
            e = quads[ci][_MATE[si]]
        comps.append((tuple(edges), tuple(occ_ins)))
    return comps


def _component_cycles(quads) -> tuple[tuple[int, ...], ...]:
    return tuple(edges for edges, _ in _walk_components(quads))


def _infer_orientations(quads, occurrences):
    """Assign heads/tails per component.

    The direction of a component is forced by any under-strand passage (slot
    a must be incoming, slot c outgoing); components that only ever pass over
    are oriented so edge labels ascend.
    """
    heads: dict[int, tuple[int, int]] = {}
    tails: dict[int, tuple[int, int]] = {}
    for edges, occ_ins in _walk_components(quads):
        m = len(edges)
        fwd_ok = bwd_ok = True
        for i in range(m):
            ci, si = occ_ins[i]
            if si == 0:  # under-in slot must be a head
                bwd_ok = False
            elif si == 2:  # under-out slot must be a tail
                fwd_ok = False
            mi = _MATE[si]
            if mi == 0:
                fwd_ok = False
            elif mi == 2:
                bwd_ok = False
        if fwd_ok and bwd_ok:
            fwd_score = sum(1 for i in range(m) if edges[(i + 1) % m] == edges[i] + 1)
            bwd_score = sum(1 for i in range(m) if edges[i - 1] == edges[i] + 1)
            forward = fwd_score >= bwd_score
        elif not fwd_ok and not bwd_ok:
            raise InvalidDiagramError(
                f"component {edges} has inconsistent under-strand orientations")
        else:
            forward = fwd_ok
        for i in range(m):
            ci, si = occ_ins[i]
            if forward:
                heads[edges[i]] = (ci, si)
                tails[edges[(i + 1) % m]] = (ci, _MATE[si])
            else:
                tails[edges[i]] = (ci, si)
                heads[edges[(i + 1) % m]] = (ci, _MATE[si])
    for e in occurrences:
        if e not in heads or e not in tails:
            raise InvalidDiagramError(f"could not orient edge {e}")
    return heads, tails


_BR_RE = re.compile(r"^\s*BR\s*\[\s*(\d+)\s*,\s*\{(.*)\}\s*\]\s*$", re.DOTALL)


def parse_braid(text: str) -> BraidWord:
    """Parse ``BR[n, {i, -j, ...}]`` braid text."""
    m = _BR_RE.match(text)
    if m is None:
        raise InvalidDiagramError(f"not a BR expression: {text!r}")
    n = int(m.group(1))
    body = m.group(2).strip()
    letters = tuple(int(t) for t in body.split(",")) if body else ()
    return BraidWord(n, letters)


def braid_to_pd(word: BraidWord) -> PlanarDiagram:
    """Planar diagram of the braid closure, with explicit orientations.

    Strands run downward through the word; the closure joins bottom back to
    top on each strand position.  sigma_i (positive letter) is built so its
    crossing sign comes out +1.
    """
    m = word.strand_count
    if not word.letters:
        return _crossingless(m)
    # current[p] = edge currently hanging at strand position p (0-based)
    next_edge = 1
    current = []
    first = []
    for p in range(m):
        current.append(next_edge)
        first.append(next_edge)
        next_edge += 1
    quads = []
    orientations: dict[int, tuple[int, int]] = {}
    touched = [False] * m
    for w in word.letters:
        i = abs(w) - 1  # crossing between positions i, i+1
        ul, ur = current[i], current[i + 1]
        ci = len(quads)
        dl, dr = next_edge, next_edge + 1
        next_edge += 2
        if w > 0:
            # over-strand: up-right -> down-left; under: up-left -> down-right
            # slots ccw from incoming under a=UL: (UL, DL, DR, UR)
            quads.append((ul, dl, dr, ur))
            orientations[ul] = (ci, 0)
            orientations[ur] = (ci, 3)
        else:
            # over-strand: up-left -> down-right; under: up-right -> down-left
            # slots ccw from a=UR: (UR, UL, DL, DR)
            quads.append((ur, ul, dl, dr))
            orientations[ur] = (ci, 0)
            orientations[ul] = (ci, 1)
        current[i], current[i + 1] = dl, dr
        touched[i] = touched[i + 1] = True
    free = 0
    merges = {}
    for p in range(m):
        if not touched[p]:
            free += 1
            continue
        # closure: bottom edge current[p] equals top edge first[p]
        merges[current[p]] = first[p]
    # relabel merged edges down to the surviving (top) labels
    def rel(e):
        return merges.get(e, e)

    quads = [tuple(rel(e) for e in q) for q in quads]
    heads = {rel(e): occ for e, occ in orientations.items()}
    all_edges = {e for q in quads for e in q}
    # relabel to a contiguous 1..N range for tidiness
    relabel = {e: i + 1 for i, e in enumerate(sorted(all_edges))}
    quads = [tuple(relabel[e] for e in q) for q in quads]
    heads = {relabel[e]: occ for e, occ in heads.items()}
    return diagram_from_quads(quads, orientations=heads, free_loops=free,
                              marked_edge=1)


def torus_braid(strands: int, twists: int) -> BraidWord:
    """(sigma_1 ... sigma_{m-1})^n, whose closure is the (m, n) torus link."""
    letters = tuple((i + 1) for _ in range(twists) for i in range(strands - 1))
    return BraidWord(strands, letters)


def processing_order(d: PlanarDiagram) -> list[int]:
    """Greedy crossing order minimizing open boundary points (girth).

    Ties break towards the lowest input index, so the order is deterministic.
    """
    n = len(d.crossings)
    remaining = set(range(n))
    processed: set[int] = set()
    order = []
    occ = _edge_occurrences(d)

    def boundary_after(extra: int) -> int:
        done = processed | {extra}
        pts = 0
        for e, occs in occ.items():
            inside = sum(1 for (ci, _si) in occs if ci in done)
            if e == d.marked_edge:
                pts += inside  # each processed end of the cut edge is a stub
            elif inside == 1:
                pts += 1
        return pts

    while remaining:
        best = min(remaining, key=lambda ci: (boundary_after(ci), ci))
        order.append(best)
        processed.add(best)
        remaining.discard(best)
    return order


def _edge_occurrences(d: PlanarDiagram) -> dict[int, list[tuple[int, int]]]:
    occ: dict[int, list[tuple[int, int]]] = {}
    for ci, x in enumerate(d.crossings):
        for si, e in enumerate(x.slots):
            occ.setdefault(e, []).append((ci, si))
    return occ


def cut_open(d: PlanarDiagram, edge: int) -> PlanarDiagram:
    """Mark ``edge`` as the cut point producing the 1-1 tangle."""
    if d.crossings == ():
        return d
    if edge not in _edge_occurrences(d):
        raise InvalidDiagramError(f"edge {edge} not found")
    return PlanarDiagram(
        crossings=d.crossings,
        edge_count=d.edge_count,
        marked_edge=edge,
        heads=d.heads,
        tails=d.tails,
        components=d.components,
        free_loops=d.free_loops,
    )


def mirror(d: PlanarDiagram) -> PlanarDiagram:
    """Mirror image: over/under swapped at every crossing, orientation kept."""
    if not d.crossings:
        return d
    quads = []
    orientations = {}
    for ci, x in enumerate(d.crossings):
        if x.sign > 0:
            # old over d->b becomes the under-strand: new slots (d, a, b, c)
            quads.append((x.d, x.a, x.b, x.c))
        else:
            # old over b->d: new slots (b, c, d, a)
            quads.append((x.b, x.c, x.d, x.a))
    for e, occ in d.heads.items():
        ci, si = occ
        x = d.crossings[ci]
        shift = 1 if x.sign > 0 else 3  # index shift of old slots in the new quad
        orientations[e] = (ci, (si + shift) % 4)
    return diagram_from_quads(
        quads, orientations=orientations, marked_edge=d.marked_edge,
        free_loops=d.free_loops,
    )
