"""
Coefficient rings for promoted complexes.

Elements are plain Python values: int for Z and Z_p, Fraction for Q, and
exponent-dict polynomials for the graded rings Z[t], Z[h,t], Z[H].  A ring
object bundles the arithmetic; matrices over a ring are lists of lists of
elements.  Graded rings assign degrees to the generators (H, h: -2; t: -4)
so homogeneity of promotion matrices can be checked exactly.
"""

from __future__ import annotations

from fractions import Fraction

__all__ = ["ZZ", "QQ", "GF", "Zt", "Zht", "ZH", "PolyRing", "Ring", "ring_by_name"]


class Ring:
    name: str
    is_field: bool
    char: int

    def zero(self):
        raise NotImplementedError

    def one(self):
        return self.from_int(1)

    def is_zero(self, a) -> bool:
        return a == self.zero()

    def element_degree(self, a):
        """Degree of a homogeneous nonzero element (0 for constants)."""
        return 0

    def __repr__(self):
        return self.name


class _IntegerRing(Ring):
    name = "Z"
    is_field = False
    char = 0

    def zero(self):
        return 0

    def from_int(self, n):
        return n

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def to_str(self, a):
        return str(a)


class _RationalField(Ring):
    name = "Q"
    is_field = True
    char = 0

    def zero(self):
        return Fraction(0)

    def from_int(self, n):
        return Fraction(n)

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        return 1 / a

    def to_str(self, a):
        return str(a)


class _PrimeField(Ring):
    is_field = True

    def __init__(self, p: int):
        if p < 2 or any(p % k == 0 for k in range(2, int(p ** 0.5) + 1)):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.char = p
        self.name = f"Z{p}"

    def zero(self):
        return 0

    def from_int(self, n):
        return n % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def inv(self, a):
        return pow(a, self.p - 2, self.p)

    def to_str(self, a):
        return str(a % self.p)

    def __eq__(self, other):
        return isinstance(other, _PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))


class PolyRing(Ring):
    """Z[g1, g2, ...] with graded generators; elements are dicts
    mapping exponent tuples to nonzero integer coefficients."""

    is_field = False
    char = 0

    def __init__(self, gens: dict):
        self.gens = tuple(gens)  # generator names in order
        self.degrees = tuple(gens[g] for g in self.gens)
        self.name = "Z[" + ",".join(self.gens) + "]"

    def zero(self):
        return {}

    def from_int(self, n):
        return {(0,) * len(self.gens): n} if n else {}

    def gen(self, name, power: int = 1, coeff: int = 1):
        exp = tuple(power if g == name else 0 for g in self.gens)
        return {exp: coeff} if coeff else {}

    def add(self, a, b):
        out = dict(a)
        for k, v in b.items():
            nv = out.get(k, 0) + v
            if nv:
                out[k] = nv
            else:
                out.pop(k, None)
        return out

    def neg(self, a):
        return {k: -v for k, v in a.items()}

    def mul(self, a, b):
        out: dict = {}
        for ka, va in a.items():
            for kb, vb in b.items():
                k = tuple(x + y for x, y in zip(ka, kb))
                nv = out.get(k, 0) + va * vb
                if nv:
                    out[k] = nv
                else:
                    out.pop(k, None)
        return out

    def element_degree(self, a):
        degs = {sum(e * d for e, d in zip(k, self.degrees)) for k in a}
        if len(degs) != 1:
            raise ValueError(f"inhomogeneous element {a}")
        return degs.pop()

    def to_str(self, a):
        if not a:
            return "0"
        parts = []
        for k in sorted(a):
            v = a[k]
            mono = "".join(
                (g if e == 1 else f"{g}^{e}")
                for g, e in zip(self.gens, k) if e)
            if mono:
                if v == 1:
                    parts.append(mono)
                elif v == -1:
                    parts.append("-" + mono)
                else:
                    parts.append(f"{v}{mono}")
            else:
                parts.append(str(v))
        return "+".join(parts).replace("+-", "-")

    def __eq__(self, other):
        return isinstance(other, PolyRing) and other.gens == self.gens \
            and other.degrees == self.degrees

    def __hash__(self):
        return hash((self.gens, self.degrees))


ZZ = _IntegerRing()
QQ = _RationalField()
Zt = PolyRing({"t": -4})
Zht = PolyRing({"h": -2, "t": -4})
ZH = PolyRing({"H": -2})


def GF(p: int) -> _PrimeField:
    return _PrimeField(p)


def ring_by_name(text: str) -> Ring:
    """Parse CLI ring names: Q, Z, Zp:<p> (also Z2/Z3 shorthands)."""
    t = text.strip()
    if t == "Q":
        return QQ
    if t == "Z":
        return ZZ
    if t.startswith("Zp:"):
        return GF(int(t[3:]))
    if t.startswith("Z") and t[1:].isdigit():
        return GF(int(t[1:]))
    raise ValueError(f"unknown ring {text!r}")
