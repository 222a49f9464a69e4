"""
The universal complex: columns of special lines over Z[H].

Objects carry only an internal degree q; a differential entry from a line
of degree q_s to one of degree q_t is an integer multiple of H^k with the
power k = (q_t - q_s)/2 forced by grading (H has degree -2 and the
differential is degree 0).  We therefore store integer coefficient
matrices; the H-power is always implied.  Composition of entries adds
powers, so d o d = 0 is the plain integer matrix product being zero.

``unit_eliminations`` performs the graded base changes available over
Z[H]: an entry +-H^k can absorb any parallel entry c H^(k') with k' >= k
in its row or column (the multiplier c H^(k'-k) is a genuine element of
Z[H] and the base change is unipotent, hence allowed).  This concentrates
unit entries and is what splits the complex into its indecomposable
blocks; entries that survive with |coefficient| > 1 or incomparable powers
(the diamonds) are genuine obstructions.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field

__all__ = [
    "UniversalComplex",
    "unit_eliminations",
    "isomorphic",
    "verify_universal",
    "canonicalize",
    "to_text",
    "from_text",
    "to_json",
    "from_json",
]


@dataclass
class UniversalComplex:
    degrees: dict  # i -> list of q
    mats: dict     # i -> {(t, s): coeff} for d: C^i -> C^{i+1}

    def copy(self) -> "UniversalComplex":
        return UniversalComplex({i: list(q) for i, q in self.degrees.items()},
                                {i: dict(m) for i, m in self.mats.items()})

    def hpow(self, i: int, t: int, s: int) -> int:
        k2 = self.degrees[i + 1][t] - self.degrees[i][s]
        if k2 < 0 or k2 % 2:
            raise ValueError(f"illegal entry grading at d^{i}[{t},{s}]")
        return k2 // 2

    def min_degree(self) -> int:
        return min(self.degrees)

    def max_degree(self) -> int:
        return max(self.degrees)

    def total_objects(self) -> int:
        return sum(len(q) for q in self.degrees.values())

    def entry_items(self):
        for i in sorted(self.mats):
            for (t, s), c in sorted(self.mats[i].items()):
                yield i, t, s, c, self.hpow(i, t, s)


def verify_universal(u: UniversalComplex) -> None:
    for i in list(u.mats):
        m = u.mats[i]
        for (t, s), c in m.items():
            if c == 0:
                raise AssertionError("stored zero coefficient")
            u.hpow(i, t, s)  # raises on bad grading
        nxt = u.mats.get(i + 1, {})
        prod: dict = {}
        for (t, s), c in m.items():
            for (t2, s2), c2 in nxt.items():
                if s2 == t:
                    prod[(t2, s)] = prod.get((t2, s), 0) + c * c2
        for key, val in prod.items():
            if val:
                raise AssertionError(f"d^2 != 0 between degrees {i} and {i + 2}")


def _clear_with_pivot(u: UniversalComplex, i: int, t: int, s: int) -> bool:
    """Use the unit entry d^i[t, s] to clear its column and row."""
    m = u.mats.get(i, {})
    pivot = m.get((t, s))
    if pivot not in (1, -1):
        return False
    changed = False
    kp = u.hpow(i, t, s)
    # column: other targets hit by source s
    for (t2, s2) in [k for k in m if k[1] == s and k[0] != t]:
        c = m.get((t2, s2))
        if not c:
            continue
        if u.hpow(i, t2, s) < kp:
            continue
        mu = c * pivot  # c / pivot
        # row op R_t2 -= mu H^gamma R_t on d^i
        for (tt, ss) in [k for k in m if k[0] == t]:
            val = m.get((t2, ss), 0) - mu * m[(tt, ss)]
            if val:
                m[(t2, ss)] = val
            else:
                m.pop((t2, ss), None)
        # paired column op C_t += mu H^gamma C_t2 on d^{i+1}
        nxt = u.mats.get(i + 1)
        if nxt:
            for (uu, tt) in [k for k in nxt if k[1] == t2]:
                val = nxt.get((uu, t), 0) + mu * nxt[(uu, t2)]
                if val:
                    nxt[(uu, t)] = val
                else:
                    nxt.pop((uu, t), None)
        changed = True
    # row: other sources hitting target t
    for (t2, s2) in [k for k in m if k[0] == t and k[1] != s]:
        c = m.get((t2, s2))
        if not c:
            continue
        if u.hpow(i, t, s2) < kp:
            continue
        mu = c * pivot
        # column op C_s2 -= mu H^gamma C_s on d^i
        for (tt, ss) in [k for k in m if k[1] == s]:
            val = m.get((tt, s2), 0) - mu * m[(tt, s)]
            if val:
                m[(tt, s2)] = val
            else:
                m.pop((tt, s2), None)
        # paired row op R_s += mu H^gamma R_s2 on d^{i-1}
        prv = u.mats.get(i - 1)
        if prv:
            for (tt, ss) in [k for k in prv if k[0] == s2]:
                val = prv.get((s, ss), 0) + mu * prv[(tt, ss)]
                if val:
                    prv[(s, ss)] = val
                else:
                    prv.pop((s, ss), None)
        changed = True
    return changed


def unit_eliminations(u: UniversalComplex, max_sweeps: int = 200) -> None:
    """Exhaust unit-coefficient graded eliminations (no object removal)."""
    for _ in range(max_sweeps):
        changed = False
        for i in sorted(u.mats):
            for (t, s) in sorted(u.mats[i]):
                c = u.mats[i].get((t, s))
                if c in (1, -1):
                    if _clear_with_pivot(u, i, t, s):
                        changed = True
        if not changed:
            return
    raise AssertionError("unit elimination did not converge")


# ---------------------------------------------------------------------------
# Isomorphism up to column permutation and basis signs
# ---------------------------------------------------------------------------

def isomorphic(a: UniversalComplex, b: UniversalComplex) -> bool:
    degs = sorted(set(a.degrees) | set(b.degrees))
    for i in degs:
        if sorted(a.degrees.get(i, [])) != sorted(b.degrees.get(i, [])):
            return False
    # also empty matrices must agree in support pattern cardinality
    perms: dict = {}

    def q_perms(i):
        qa = a.degrees.get(i, [])
        qb = b.degrees.get(i, [])
        groups: dict = {}
        for idx, q in enumerate(qb):
            groups.setdefault(q, []).append(idx)
        pools = []
        order = []
        for idx, q in enumerate(qa):
            order.append((q, idx))
        # build candidate assignments: for each q class, all bijections
        classes = sorted(groups)
        by_q_a: dict = {}
        for idx, q in enumerate(qa):
            by_q_a.setdefault(q, []).append(idx)
        for assignment in _class_bijections(by_q_a, groups, classes):
            yield assignment

    def compatible(i, pa, pb):
        """entries of a.mats[i] match b.mats[i] in absolute value under maps."""
        ma = a.mats.get(i, {})
        mb = b.mats.get(i, {})
        if len(ma) != len(mb):
            return False
        for (t, s), c in ma.items():
            c2 = mb.get((pb[t], pa[s]))
            if c2 is None or abs(c2) != abs(c):
                return False
        return True

    def search(pos, chosen):
        if pos == len(degs):
            return _signs_consistent(a, b, chosen)
        i = degs[pos]
        for perm in q_perms(i):
            if pos > 0 and degs[pos - 1] == i - 1:
                if not compatible(i - 1, chosen[i - 1], perm):
                    continue
            elif a.mats.get(i - 1) or b.mats.get(i - 1):
                if len(a.mats.get(i - 1, {})) != len(b.mats.get(i - 1, {})):
                    return False
            chosen[i] = perm
            if search(pos + 1, chosen):
                return True
            del chosen[i]
        return False

    return search(0, {})


def _class_bijections(by_q_a, by_q_b, classes):
    pools = []
    for q in classes:
        ia = by_q_a.get(q, [])
        ib = by_q_b.get(q, [])
        if len(ia) != len(ib):
            return
        pools.append((ia, list(itertools.permutations(ib))))
    for combo in itertools.product(*(perms for _ia, perms in pools)):
        mapping = {}
        for (ia, _perms), pb in zip(pools, combo):
            for x, y in zip(ia, pb):
                mapping[x] = y
        yield mapping


def _signs_consistent(a, b, chosen) -> bool:
    """2-colouring: signs s(obj) with s(t) s(s) = b_coeff / a_coeff."""
    sign: dict = {}

    def assign(node, val):
        stack = [(node, val)]
        while stack:
            n, v = stack.pop()
            if n in sign:
                if sign[n] != v:
                    return False
                continue
            sign[n] = v
            for (n2, rel) in adj.get(n, []):
                stack.append((n2, v * rel))
        return True

    adj: dict = {}
    for i in sorted(a.mats):
        pa, pb = chosen.get(i), chosen.get(i + 1)
        for (t, s), c in a.mats[i].items():
            c2 = b.mats[i][(pb[t], pa[s])]
            rel = 1 if c == c2 else -1
            if abs(c) != abs(c2):
                return False
            n1, n2 = (i, s), (i + 1, t)
            adj.setdefault(n1, []).append((n2, rel))
            adj.setdefault(n2, []).append((n1, rel))
    for node in list(adj):
        if node not in sign:
            if not assign(node, 1):
                return False
    return True


# ---------------------------------------------------------------------------
# Canonical presentation, text and JSON forms
# ---------------------------------------------------------------------------

def canonicalize(u: UniversalComplex) -> UniversalComplex:
    """Sort columns by q descending (refined by entry signatures), then fix
    signs so the first nonzero entry of each matrix row is positive where
    possible.  Returns a new complex."""
    u = u.copy()
    # iterative refinement of object order within equal q
    keys = {i: [(-q,) for q in u.degrees[i]] for i in u.degrees}
    for _ in range(4):
        new_keys = {}
        for i in u.degrees:
            col = []
            for idx in range(len(u.degrees[i])):
                outs = []
                for (t, s), c in u.mats.get(i, {}).items():
                    if s == idx:
                        outs.append((keys[i + 1][t], abs(c)))
                ins = []
                for (t, s), c in u.mats.get(i - 1, {}).items():
                    if t == idx:
                        ins.append((keys[i - 1][s], abs(c)))
                col.append((keys[i][idx], tuple(sorted(outs)), tuple(sorted(ins))))
            new_keys[i] = col
        keys = new_keys
    perm = {}
    for i in u.degrees:
        order = sorted(range(len(u.degrees[i])), key=lambda idx: keys[i][idx])
        perm[i] = {old: new for new, old in enumerate(order)}
        u.degrees[i] = [u.degrees[i][old] for old in order]
    for i in list(u.mats):
        u.mats[i] = {(perm[i + 1][t], perm[i][s]): c
                     for (t, s), c in u.mats[i].items()}
    # sign fixing
    signs = {i: [1] * len(u.degrees[i]) for i in u.degrees}
    pinned = set()
    for i in sorted(u.mats):
        m = u.mats[i]
        for t in range(len(u.degrees.get(i + 1, []))):
            row = sorted(s for (tt, s) in m if tt == t)
            if not row:
                continue
            s0 = row[0]
            val = m[(t, s0)] * signs[i + 1][t] * signs[i][s0]
            if val < 0:
                if (i + 1, t) not in pinned:
                    signs[i + 1][t] *= -1
                elif (i, s0) not in pinned:
                    signs[i][s0] *= -1
            pinned.add((i + 1, t))
            pinned.add((i, s0))
    for i in list(u.mats):
        u.mats[i] = {(t, s): c * signs[i + 1][t] * signs[i][s]
                     for (t, s), c in u.mats[i].items()}
    return u


def _entry_str(coeff: int, k: int) -> str:
    if coeff == 0:
        return "0"
    if k == 0:
        return str(coeff)
    hs = "H" if k == 1 else f"H^{k}"
    if coeff == 1:
        return hs
    if coeff == -1:
        return "-" + hs
    return f"{coeff}{hs}"


def to_text(u: UniversalComplex) -> str:
    """Thesis-style dump: ``[q,...]_i`` columns joined by matrix blocks."""
    lines = []
    degs = sorted(u.degrees)
    lo, hi = (degs[0], degs[-1]) if degs else (0, -1)
    for i in range(lo, hi + 1):
        qs = u.degrees.get(i, [])
        lines.append("[" + ",".join(str(q) for q in qs) + f"]_{i}")
        if i < hi:
            m = u.mats.get(i, {})
            rows = len(u.degrees.get(i + 1, []))
            cols = len(qs)
            rendered = []
            for t in range(rows):
                row = [_entry_str(m.get((t, s), 0), u.hpow(i, t, s) if (t, s) in m else 0)
                       for s in range(cols)]
                rendered.append(",".join(row))
            lines.append("  (" + ("; ".join(rendered) if rendered else "") + ")")
    return "\n".join(lines)


_COL_RE = re.compile(r"^\[([-0-9,\s]*)\]_(-?\d+)$")
_ENTRY_RE = re.compile(r"^(-?\d*)(H(?:\^(\d+))?)?$")


def from_text(text: str) -> UniversalComplex:
    degrees: dict = {}
    mats: dict = {}
    pending_mat = None
    last_i = None
    for lineraw in text.strip().splitlines():
        line = lineraw.strip()
        if not line:
            continue
        cm = _COL_RE.match(line)
        if cm:
            qs = [int(tok) for tok in cm.group(1).split(",") if tok.strip()]
            i = int(cm.group(2))
            degrees[i] = qs
            if pending_mat is not None and last_i is not None:
                mats[last_i] = _parse_matrix(pending_mat)
            pending_mat = None
            last_i = i
        elif line.startswith("(") and line.endswith(")"):
            pending_mat = line[1:-1]
    if pending_mat is not None and last_i is not None:
        mats[last_i] = _parse_matrix(pending_mat)
    out: dict = {}
    for i, body in mats.items():
        entries = {}
        for t, row in enumerate(body):
            for s, (coeff, _k) in enumerate(row):
                if coeff:
                    entries[(t, s)] = coeff
        if entries:
            out[i] = entries
    return UniversalComplex({i: q for i, q in degrees.items() if q}, out)


def _parse_matrix(body: str):
    rows = []
    if body.strip() == "":
        return rows
    for rtxt in body.split(";"):
        row = []
        for etxt in rtxt.split(","):
            etxt = etxt.strip()
            m = _ENTRY_RE.match(etxt)
            if not m:
                raise ValueError(f"bad entry {etxt!r}")
            coeff_txt, hpart, kpart = m.group(1), m.group(2), m.group(3)
            if hpart:
                k = int(kpart) if kpart else 1
                coeff = int(coeff_txt) if coeff_txt not in ("", "-") else (
                    -1 if coeff_txt == "-" else 1)
            else:
                k = 0
                coeff = int(coeff_txt) if coeff_txt else 0
            row.append((coeff, k))
        rows.append(row)
    return rows


SCHEMA = "khuniv.universal/1"


def to_json(u: UniversalComplex) -> dict:
    return {
        "schema": SCHEMA,
        "columns": [{"i": i, "q": list(u.degrees[i])} for i in sorted(u.degrees)],
        "differentials": [
            {"from": i,
             "entries": [{"row": t, "col": s, "coeff": c,
                          "hpow": u.hpow(i, t, s)}
                         for (t, s), c in sorted(u.mats[i].items())]}
            for i in sorted(u.mats) if u.mats[i]
        ],
    }


def from_json(data) -> UniversalComplex:
    if isinstance(data, str):
        data = json.loads(data)
    if data.get("schema") != SCHEMA:
        raise ValueError(f"unknown schema {data.get('schema')!r}")
    degrees = {col["i"]: list(col["q"]) for col in data["columns"]}
    mats: dict = {}
    for blk in data.get("differentials", []):
        entries = {}
        for e in blk["entries"]:
            entries[(e["row"], e["col"])] = e["coeff"]
        if entries:
            mats[blk["from"]] = entries
    u = UniversalComplex(degrees, mats)
    verify_universal(u)
    return u
