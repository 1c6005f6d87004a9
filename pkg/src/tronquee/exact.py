"""Exact arithmetic in the twelfth cyclotomic field.

Every leading coefficient that occurs for the canonical third and fourth
Painleve equations is a root of unity of order dividing 4 or 3, and the
parameters are Gaussian rationals.  All of these live in Q(zeta) with
zeta = exp(i*pi/6), which contains both i = zeta**3 and
omega = exp(2*pi*i/3) = zeta**2 - 1.  Elements are stored as four
rational coordinates (``gmpy2.mpq``) over the power basis {1, zeta, zeta**2, zeta**3},
reduced with the minimal polynomial zeta**4 = zeta**2 - 1.
"""

from __future__ import annotations

import math
import numbers
from fractions import Fraction
from typing import Iterable, Union

from gmpy2 import mpq

__all__ = [
    "Cyclo",
    "I",
    "OMEGA",
    "SQRT3",
    "ZETA",
    "parse_exact",
    "to_exact",
]


def _power_table() -> list[tuple[int, int, int, int]]:
    # zeta**p in the power basis for p = 0..11
    table = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
    for _ in range(8):
        c0, c1, c2, c3 = table[-1]
        # multiply by zeta: shift, then zeta**4 -> zeta**2 - 1
        table.append((-c3, c0, c1 + c3, c2))
    return table


_POW = _power_table()
_Z = mpq(0)

Number = Union[int, Fraction, "Cyclo"]


class Cyclo:
    """Element of Q(zeta_12); immutable and hashable."""

    __slots__ = ("_c",)

    def __init__(self, coords: Iterable = (0, 0, 0, 0)):
        c = tuple(mpq(v) for v in coords)
        if len(c) != 4:
            raise ValueError("expected four coordinates")
        object.__setattr__(self, "_c", c)

    @classmethod
    def _raw(cls, c: tuple) -> "Cyclo":
        obj = object.__new__(cls)
        object.__setattr__(obj, "_c", c)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("Cyclo is immutable")

    # -- construction -------------------------------------------------
    @classmethod
    def rational(cls, q) -> "Cyclo":
        return cls._raw((mpq(q), _Z, _Z, _Z))

    @classmethod
    def gaussian(cls, re, im=0) -> "Cyclo":
        return cls._raw((mpq(re), _Z, _Z, mpq(im)))

    @classmethod
    def zeta_power(cls, p: int) -> "Cyclo":
        return cls(_POW[p % 12])

    @classmethod
    def coerce(cls, value) -> "Cyclo":
        if isinstance(value, Cyclo):
            return value
        if isinstance(value, (int, Fraction)):
            return cls.rational(value)
        raise TypeError(f"cannot represent {value!r} exactly")

    @property
    def coords(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return tuple(Fraction(int(c.numerator), int(c.denominator)) for c in self._c)

    # -- field structure ----------------------------------------------
    def is_zero(self) -> bool:
        return not any(self._c)

    def is_rational(self) -> bool:
        return not any(self._c[1:])

    @property
    def field(self) -> str:
        """Smallest of Q, Q(i), Q(omega), Q(zeta12) containing the element."""
        _, c1, c2, c3 = self._c
        if not (c1 or c2 or c3):
            return "Q"
        if not (c1 or c2):
            return "Q(i)"
        if not (c1 or c3):
            return "Q(omega)"
        return "Q(zeta12)"

    def galois(self, k: int) -> "Cyclo":
        """Apply the automorphism zeta -> zeta**k (k coprime to 12)."""
        if math.gcd(k, 12) != 1:
            raise ValueError("k must be a unit mod 12")
        out = [_Z] * 4
        for j, cj in enumerate(self._c):
            if cj:
                for idx, v in enumerate(_POW[(j * k) % 12]):
                    if v:
                        out[idx] += cj * v
        return Cyclo._raw(tuple(out))

    def conjugate(self) -> "Cyclo":
        return self.galois(11)

    def norm(self) -> Fraction:
        prod = self * self.galois(5) * self.galois(7) * self.galois(11)
        assert prod.is_rational()
        return Fraction(int(prod._c[0].numerator), int(prod._c[0].denominator))

    def inverse(self) -> "Cyclo":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(zeta12)")
        if self.is_rational():
            return Cyclo._raw((1 / self._c[0], _Z, _Z, _Z))
        others = self.galois(5) * self.galois(7) * self.galois(11)
        n = (self * others)._c[0]
        return Cyclo._raw(tuple(c / n for c in others._c))

    # -- embedding ----------------------------------------------------
    def __complex__(self) -> complex:
        c0, c1, c2, c3 = self._c
        h = math.sqrt(3) / 2
        re = float(c0 + c2 / 2) + float(c1) * h
        im = float(c1 / 2 + c3) + float(c2) * h
        return complex(re, im)

    def to_mpc(self):
        import mpmath

        def q(c):
            return mpmath.mpf(int(c.numerator)) / int(c.denominator)

        c0, c1, c2, c3 = self._c
        h = mpmath.sqrt(3) / 2
        return mpmath.mpc(q(c0 + c2 / 2) + q(c1) * h, q(c1 / 2 + c3) + q(c2) * h)

    def real_imag(self) -> tuple:
        """Real and imaginary parts; exact Fractions when the element is in Q(i)."""
        if self.field in ("Q", "Q(i)"):
            c = self.coords
            return c[0], c[3]
        z = complex(self)
        return z.real, z.imag

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        try:
            o = Cyclo.coerce(other)
        except TypeError:
            return NotImplemented
        a, b = self._c, o._c
        return Cyclo._raw((a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]))

    __radd__ = __add__

    def __neg__(self):
        return Cyclo._raw(tuple(-a for a in self._c))

    def __pos__(self):
        return self

    def __sub__(self, other):
        try:
            o = Cyclo.coerce(other)
        except TypeError:
            return NotImplemented
        a, b = self._c, o._c
        return Cyclo._raw((a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]))

    def __rsub__(self, other):
        try:
            o = Cyclo.coerce(other)
        except TypeError:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            q = mpq(other)
            return Cyclo._raw(tuple(a * q for a in self._c))
        if not isinstance(other, Cyclo):
            return NotImplemented
        a, b = self._c, other._c
        if not (b[1] or b[2] or b[3]):
            q = b[0]
            return Cyclo._raw((a[0] * q, a[1] * q, a[2] * q, a[3] * q))
        if not (a[1] or a[2] or a[3]):
            q = a[0]
            return Cyclo._raw((b[0] * q, b[1] * q, b[2] * q, b[3] * q))
        p = [_Z] * 7
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        p[i + j] += ai * bj
        # zeta**4 = zeta**2 - 1, zeta**5 = zeta**3 - zeta, zeta**6 = -1
        return Cyclo._raw((p[0] - p[4] - p[6], p[1] - p[5], p[2] + p[4], p[3] + p[5]))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            q = mpq(other)
            return Cyclo._raw(tuple(a / q for a in self._c))
        if not isinstance(other, Cyclo):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        try:
            o = Cyclo.coerce(other)
        except TypeError:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, Cyclo):
            return self._c == other._c
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self._c[0] == mpq(other)
        return NotImplemented

    def __hash__(self):
        if self.is_rational():
            return hash(self._c[0])
        return hash(tuple(self._c))

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        return f"Cyclo({self})"

    def __str__(self):
        names = ("", "z", "z^2", "z^3")
        if self.field in ("Q", "Q(i)"):
            re, im = self.coords[0], self.coords[3]
            if not im:
                return str(re)
            if not re:
                return f"{im}*i"
            return f"{re}{'+' if im > 0 else '-'}{abs(im)}*i"
        parts = []
        for name, c in zip(names, self.coords):
            if c:
                parts.append(f"({c})" + (f"*{name}" if name else ""))
        return " + ".join(parts)


ZERO = Cyclo()
ONE = Cyclo.rational(1)
ZETA = Cyclo.zeta_power(1)
I = Cyclo.zeta_power(3)
OMEGA = Cyclo.zeta_power(4)
SQRT3 = Cyclo((0, 2, 0, -1))


def parse_exact(text: str) -> Cyclo:
    """Parse a rational or Gaussian-rational literal.

    Accepts ``"1/3"``, ``"-2"``, ``"0.25"``, ``"1/2+3/4i"``, ``"2i"``.
    Raises ``ValueError`` for anything that is not exactly representable.
    """
    s = text.strip().replace(" ", "").replace("j", "i")
    if not s:
        raise ValueError("empty number")
    if not s.endswith("i"):
        return Cyclo.rational(Fraction(s))
    body = s[:-1]
    # split at the last sign that is not the first character or an exponent sign
    cut = None
    for idx in range(len(body) - 1, 0, -1):
        if body[idx] in "+-" and body[idx - 1] not in "eE/":
            cut = idx
            break
    if cut is None:
        re_part, im_part = "0", body
    else:
        re_part, im_part = body[:cut], body[cut:]
    if im_part in ("", "+"):
        im_part = "1"
    elif im_part == "-":
        im_part = "-1"
    return Cyclo.gaussian(Fraction(re_part), Fraction(im_part))


def to_exact(value) -> Cyclo:
    """Promote ints, Fractions, strings and Cyclo to Cyclo; reject floats."""
    if isinstance(value, Cyclo):
        return value
    if isinstance(value, str):
        return parse_exact(value)
    if isinstance(value, (int, Fraction)):
        return Cyclo.rational(value)
    if isinstance(value, numbers.Number):
        raise TypeError(f"{value!r} is not exact; pass a rational string instead")
    raise TypeError(f"cannot promote {type(value).__name__} to an exact scalar")
