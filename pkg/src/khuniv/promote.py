"""
Promotions: turning the universal complex into algebraic chain complexes.

A promotion substitutes a free module of a chosen rank for the special
line and a matrix for the 1-handle operator H.  A special line of degree q
becomes generators of degrees q + basis_degrees; a differential entry
c H^k becomes the block c * H_image^k.  The named promotions are the
standard TQFT dictionary:

    big_ht           H -> ((-h, 2t), (2, h))      over Z[h,t]
    generalized_lee  H -> ((0, 2t), (2, 0))       over Z[t]
    lee              H -> ((0, 2), (2, 0))        over Z
    standard         H -> ((0, 0), (2, 0))        over Z
    reduced_standard H -> (0)                     over Z, rank 1
    universal_H      H -> (H)                     over Z[H], rank 1 (no-op)

Rank-2 promotions use basis degrees (+1, -1) (the unit and X generators of
the rank-2 Frobenius algebra); the reduced theory keeps the X slot, degree
-1.  The grading constraint on an H image M is
deg M[i][j] = basis_degrees[j] - basis_degrees[i] - 2 for nonzero entries.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .rings import GF, QQ, ZH, ZZ, PolyRing, Ring, Zht, Zt
from .universal import UniversalComplex

__all__ = [
    "PromotionSpec",
    "AlgebraicComplex",
    "named_promotion",
    "promote",
    "euler_characteristic",
    "equivalence_class",
    "jones_string",
    "NAMED_PROMOTIONS",
]


@dataclass(frozen=True)
class PromotionSpec:
    """A substitution for the special line: rank, H image, basis degrees.

    ``graded`` records whether the H image is degree-homogeneous (entry
    (i, j) of degree basis_degrees[j] - basis_degrees[i] - 2).  Lee's
    promotion is the t = 1 specialization of the generalized one and is
    only filtered, not graded; its homology is read per homological degree.
    """

    name: str
    ring: Ring
    rank: int
    h_image: tuple          # rank x rank, ring elements
    basis_degrees: tuple    # length rank
    graded: bool = True

    def __post_init__(self):
        R = self.ring
        graded = True
        for i in range(self.rank):
            for j in range(self.rank):
                a = self.h_image[i][j]
                if R.is_zero(a):
                    continue
                want = self.basis_degrees[j] - self.basis_degrees[i] - 2
                try:
                    got = R.element_degree(a)
                except ValueError:
                    got = None
                if got != want:
                    graded = False
        object.__setattr__(self, "graded", graded)

    def with_ring(self, ring: Ring) -> "PromotionSpec":
        """Reinterpret an integer-matrix spec over another coefficient ring."""
        img = []
        for row in self.h_image:
            new_row = []
            for a in row:
                if isinstance(a, int):
                    new_row.append(ring.from_int(a))
                else:
                    raise ValueError(
                        f"cannot move {self.name} entries into {ring.name}")
            img.append(tuple(new_row))
        return replace(self, ring=ring, h_image=tuple(img))


def _spec(name, ring, h_image, basis_degrees):
    return PromotionSpec(name, ring, len(h_image), tuple(map(tuple, h_image)),
                         tuple(basis_degrees))


def _named():
    h = Zht.gen("h")
    t2 = Zht.gen("t", coeff=2)
    big = _spec("big_ht", Zht,
                [[Zht.neg(h), t2], [Zht.from_int(2), h]], (1, -1))
    glee = _spec("generalized_lee", Zt,
                 [[Zt.zero(), Zt.gen("t", coeff=2)],
                  [Zt.from_int(2), Zt.zero()]], (1, -1))
    lee = _spec("lee", ZZ, [[0, 2], [2, 0]], (1, -1))
    std = _spec("standard", ZZ, [[0, 0], [2, 0]], (1, -1))
    red = _spec("reduced_standard", ZZ, [[0]], (-1,))
    uni = _spec("universal_H", ZH, [[ZH.gen("H")]], (0,))
    return {s.name: s for s in (big, glee, lee, std, red, uni)}


NAMED_PROMOTIONS = _named()


def named_promotion(name: str, ring: Ring | None = None) -> PromotionSpec:
    if name not in NAMED_PROMOTIONS:
        raise KeyError(f"unknown promotion {name!r}; "
                       f"choose from {sorted(NAMED_PROMOTIONS)}")
    spec = NAMED_PROMOTIONS[name]
    if ring is not None and ring != spec.ring:
        spec = spec.with_ring(ring)
    return spec


@dataclass
class AlgebraicComplex:
    """Free graded complex over a ring: per-degree generator q-degrees and
    sparse differentials {(t, s): ring element}."""

    ring: Ring
    degrees: dict   # i -> list of q
    diffs: dict     # i -> {(t, s): element}
    graded: bool = True

    def verify(self, graded: bool = True):
        R = self.ring
        for i, m in self.diffs.items():
            for (t, s), a in m.items():
                if R.is_zero(a):
                    raise AssertionError("stored zero")
                if graded:
                    # degree-0 differential: coefficient degree is src - tgt
                    want = self.degrees[i][s] - self.degrees[i + 1][t]
                    if R.element_degree(a) != want:
                        raise AssertionError(
                            f"entry d^{i}[{t},{s}] breaks the grading")
            nxt = self.diffs.get(i + 1, {})
            prod: dict = {}
            for (t, s), a in m.items():
                for (t2, s2), b in nxt.items():
                    if s2 == t:
                        key = (t2, s)
                        prod[key] = R.add(prod.get(key, R.zero()), R.mul(b, a))
            for key, val in prod.items():
                if not R.is_zero(val):
                    raise AssertionError(f"d^2 != 0 from degree {i}")
        return True


def _mat_mul(R: Ring, A, B):
    n, m, k = len(A), len(B[0]), len(B)
    return [[_dot(R, A[i], [B[x][j] for x in range(k)]) for j in range(m)]
            for i in range(n)]


def _dot(R: Ring, row, col):
    acc = R.zero()
    for a, b in zip(row, col):
        acc = R.add(acc, R.mul(a, b))
    return acc


def _h_power(spec: PromotionSpec, k: int):
    R = spec.ring
    out = [[R.one() if i == j else R.zero() for j in range(spec.rank)]
           for i in range(spec.rank)]
    for _ in range(k):
        out = _mat_mul(R, out, [list(r) for r in spec.h_image])
    return out


def promote(u: UniversalComplex, spec: PromotionSpec,
            check: bool = True) -> AlgebraicComplex:
    """Tensor the universal complex through the given promotion."""
    R = spec.ring
    degrees = {}
    for i, qs in u.degrees.items():
        degrees[i] = [q + bd for q in qs for bd in spec.basis_degrees]
    diffs: dict = {}
    powers: dict = {}
    for i, t, s, c, k in u.entry_items():
        blk = powers.get(k)
        if blk is None:
            blk = powers[k] = _h_power(spec, k)
        m = diffs.setdefault(i, {})
        for bi in range(spec.rank):
            for bj in range(spec.rank):
                a = R.mul(R.from_int(c), blk[bi][bj])
                if not R.is_zero(a):
                    m[(t * spec.rank + bi, s * spec.rank + bj)] = a
    out = AlgebraicComplex(R, degrees, diffs, graded=spec.graded)
    if check:
        out.verify(graded=spec.graded)
    return out


def euler_characteristic(a: AlgebraicComplex) -> dict:
    """Graded Euler characteristic: {q exponent: coefficient}."""
    chi: dict = {}
    for i, qs in a.degrees.items():
        for q in qs:
            chi[q] = chi.get(q, 0) + (-1) ** i
            if not chi[q]:
                del chi[q]
    return chi


def jones_string(chi: dict) -> str:
    parts = []
    for q in sorted(chi, reverse=True):
        c = chi[q]
        head = "" if c == 1 else ("-" if c == -1 else str(c))
        if q == 0:
            parts.append(str(c))
        elif q == 1:
            parts.append(f"{head}q")
        else:
            parts.append(f"{head}q^{q}")
    if not parts:
        return "0"
    return " + ".join(parts).replace("+ -", "- ")


@dataclass(frozen=True)
class EquivalenceReport:
    classification: str       # "standard-equivalent" | "Lee-equivalent"
    discriminant: object      # h^2 + 4t in the field
    diagonalizable: bool


def equivalence_class(h_val, t_val, ring: Ring) -> EquivalenceReport:
    """Classify the (h, t) promotion over a field.

    h^2 + 4t = 0 gives the standard theory; anything else is equivalent to
    Lee's theory, with H diagonalizable iff the discriminant is a nonzero
    square (always, in characteristic 2).
    """
    if not ring.is_field:
        raise ValueError("equivalence classification needs a field")
    h_val = ring.from_int(h_val) if isinstance(h_val, int) else h_val
    t_val = ring.from_int(t_val) if isinstance(t_val, int) else t_val
    disc = ring.add(ring.mul(h_val, h_val),
                    ring.mul(ring.from_int(4), t_val))
    if ring.is_zero(disc):
        return EquivalenceReport("standard-equivalent", disc, False)
    if ring.char == 2:
        return EquivalenceReport("Lee-equivalent", disc, True)
    return EquivalenceReport("Lee-equivalent", disc, _is_square(ring, disc))


def _is_square(ring: Ring, a) -> bool:
    if ring is QQ or isinstance(a, Fraction):
        fr = Fraction(a)
        num, den = fr.numerator, fr.denominator
        return num >= 0 and _int_sqrt_exact(num) and _int_sqrt_exact(den)
    p = ring.char
    if p:
        return pow(a % p, (p - 1) // 2, p) in (0, 1)
    raise ValueError(f"square test not implemented over {ring.name}")


def _int_sqrt_exact(n: int) -> bool:
    r = int(n ** 0.5)
    return any((r + d) ** 2 == n for d in (-1, 0, 1, 2))
