"""
Decomposition of the universal complex into indecomposable blocks.

Over Z[H] there is no general decomposition theory; operationally we
exhaust the integer unit-coefficient eliminations that preserve the
monomial form (see ``universal.unit_eliminations``) and then split the
support graph into connected components.  Components are classified by
shape:

* pawn: one object, no differentials;
* line of order n: two objects joined by +-H^n;
* diamond of order n: the 1 -> 2 -> 1 shape, order the top H-power;
* other: anything else (surfaced honestly; two-object blocks with a
  non-unit coefficient would contradict the structure theory and raise).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .universal import UniversalComplex, unit_eliminations

__all__ = ["Block", "PhenoReport", "decompose", "width", "classify_patterns"]


@dataclass
class Block:
    kind: str                  # pawn | line | diamond | other
    order: int                 # max H-power (0 for pawns)
    positions: list            # [(i, q), ...]
    complex: UniversalComplex  # the block itself, reindexed

    def to_json(self):
        return {
            "kind": self.kind,
            "order": self.order,
            "positions": [list(p) for p in self.positions],
            "matrix": [
                {"from": i, "row": t, "col": s, "coeff": c, "hpow": k}
                for i, t, s, c, k in self.complex.entry_items()
            ],
        }


class DecompositionError(AssertionError):
    pass


def decompose(u: UniversalComplex, strict: bool = True) -> list:
    """Split into blocks.  ``strict`` raises if a two-object block carries a
    non-unit coefficient (no such block can be irreducible)."""
    w = u.copy()
    unit_eliminations(w)
    parent: dict = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    for i, qs in w.degrees.items():
        for idx in range(len(qs)):
            find((i, idx))
    for i, m in w.mats.items():
        for (t, s) in m:
            union((i, s), (i + 1, t))
    groups: dict = {}
    for node in parent:
        groups.setdefault(find(node), []).append(node)
    blocks = []
    for nodes in groups.values():
        nodes.sort()
        index = {}
        degrees: dict = {}
        for (i, idx) in nodes:
            col = degrees.setdefault(i, [])
            index[(i, idx)] = len(col)
            col.append(w.degrees[i][idx])
        mats: dict = {}
        for (i, idx) in nodes:
            m = w.mats.get(i, {})
            for (t, s), c in m.items():
                if s == idx:
                    mats.setdefault(i, {})[(index[(i + 1, t)], index[(i, s)])] = c
        blk = UniversalComplex(degrees, mats)
        blocks.append(_classify(blk, strict))
    blocks.sort(key=lambda b: b.positions)
    return blocks


def _classify(blk: UniversalComplex, strict: bool) -> Block:
    positions = [(i, q) for i in sorted(blk.degrees) for q in blk.degrees[i]]
    n_obj = sum(len(qs) for qs in blk.degrees.values())
    entries = list(blk.entry_items())
    if n_obj == 1 and not entries:
        return Block("pawn", 0, positions, blk)
    if n_obj == 2 and len(entries) == 1:
        _i, _t, _s, c, k = entries[0]
        if abs(c) != 1:
            if strict:
                raise DecompositionError(
                    f"two-object block with coefficient {c} (not a unit)")
            return Block("other", k, positions, blk)
        return Block("line", k, positions, blk)
    counts = [len(blk.degrees[i]) for i in sorted(blk.degrees)]
    if counts == [1, 2, 1] and len(entries) == 4:
        order = max(k for (_i, _t, _s, _c, k) in entries)
        return Block("diamond", order, positions, blk)
    order = max((k for (_i, _t, _s, _c, k) in entries), default=0)
    return Block("other", order, positions, blk)


def width(table) -> int:
    """Number of occupied diagonals 2i - j of a homology table."""
    cells = {(i, j) for (i, j), (free, tors) in table.cells.items()
             if free or tors}
    if not cells:
        raise ValueError("empty homology table")
    return len({2 * i - j for (i, j) in cells})


@dataclass
class PhenoReport:
    width: int
    thin: bool
    torsion_thin: bool
    torsion_rich: bool
    pieces: list = field(default_factory=list)  # (pattern, (i, q))

    def to_json(self):
        return {
            "width": self.width,
            "thin": self.thin,
            "torsion_thin": self.torsion_thin,
            "torsion_rich": self.torsion_rich,
            "pieces": [{"pattern": p, "at": list(pos)} for p, pos in self.pieces],
        }


_LINE1_PATTERNS = ("Q-knight", "Z2-torsion-knight", "Z2-tetris")


def classify_patterns(blocks, rational_table) -> PhenoReport:
    """Name the homology-table patterns each block projects to.

    ``rational_table`` is the standard homology over Q (for the width).
    Lines of order 1 are the knight/tetris/torsion-knight sources, lines of
    order 2 the double knights without torsion, diamonds the wide excess
    torsion phenomena.
    """
    pieces = []
    kinds = []
    for b in blocks:
        at = b.positions[0]
        if b.kind == "pawn":
            pieces.append(("pawn", at))
        elif b.kind == "line" and b.order == 1:
            for name in _LINE1_PATTERNS:
                pieces.append((name, at))
        elif b.kind == "line":
            pieces.append((f"double-knight-order-{b.order}", at))
        elif b.kind == "diamond":
            pieces.append(("excess-torsion-wide", at))
        else:
            pieces.append(("unclassified", at))
        kinds.append((b.kind, b.order))
    w = width(rational_table)
    torsion_thin = all(k == "pawn" or (k == "line" and o == 1)
                       for k, o in kinds)
    torsion_rich = any(k in ("diamond", "other") for k, o in kinds)
    return PhenoReport(width=w, thin=(w == 2), torsion_thin=torsion_thin,
                       torsion_rich=torsion_rich, pieces=pieces)
