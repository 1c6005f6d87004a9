"""Independent reference computations, written before the package code.

Nothing here imports the series engine or its residual machinery; the only
package objects used are the equation parameters and, for the residual
oracle, the coefficient values under test.
"""

from __future__ import annotations

import math
from fractions import Fraction

import sympy as sp

Y = sp.Symbol("y", positive=True)
_EXACT = sp.QQ.algebraic_field(sp.sqrt(3), sp.I)
_ZETA = sp.sqrt(3) / 2 + sp.I / 2


def _modulus() -> tuple[int, int]:
    """A 61-bit prime p = 1 mod 12 and an element of order 12 in GF(p)."""
    p = sp.nextprime(2 ** 61)
    while p % 12 != 1:
        p = sp.nextprime(p)
    z = pow(sp.primitive_root(p), (p - 1) // 12, p)
    return int(p), int(z)


PRIME, ZETA_MOD = _modulus()
_DOMAIN = _EXACT


def to_modp(v, p: int = PRIME, z: int = ZETA_MOD) -> int:
    """Image of an exact scalar under Q(zeta12) -> GF(p), zeta -> z."""
    if hasattr(v, "coords"):
        return sum(to_modp(c, p) * pow(z, k, p) for k, c in enumerate(v.coords)) % p
    q = Fraction(v)
    return q.numerator * pow(q.denominator, -1, p) % p


def to_sympy(v):
    """Cyclo, Fraction, int or complex-with-rational-parts to a sympy number."""
    if hasattr(v, "coords"):
        c = [sp.Rational(q.numerator, q.denominator) for q in v.coords]
        return sp.expand(c[0] + c[1] * _ZETA + c[2] * _ZETA ** 2 + c[3] * _ZETA ** 3)
    if isinstance(v, Fraction):
        return sp.Rational(v.numerator, v.denominator)
    if isinstance(v, int):
        return sp.Integer(v)
    raise TypeError(f"not exact: {v!r}")


class _L:
    """Laurent polynomial in y: ``poly * y**low`` with ``poly`` over Q(sqrt 3, i)."""

    domain = _EXACT
    conv = staticmethod(lambda v: to_sympy(v))

    def __init__(self, poly: sp.Poly, low: int):
        self.p, self.low = poly, low

    @classmethod
    def of(cls, terms: dict) -> "_L":
        low = min(terms)
        expr = sum(c * Y ** (e - low) for e, c in terms.items())
        return cls(sp.Poly(expr, Y, domain=_L.domain), low)

    @classmethod
    def const(cls, c) -> "_L":
        return cls(sp.Poly(c, Y, domain=_L.domain), 0)

    def _align(self, other):
        low = min(self.low, other.low)
        a = self.p * sp.Poly(Y ** (self.low - low), Y, domain=_L.domain)
        b = other.p * sp.Poly(Y ** (other.low - low), Y, domain=_L.domain)
        return a, b, low

    def __add__(self, other):
        other = other if isinstance(other, _L) else _L.const(other)
        a, b, low = self._align(other)
        return _L(a + b, low)

    __radd__ = __add__

    def __neg__(self):
        return _L(-self.p, self.low)

    def __sub__(self, other):
        return self + (-(other if isinstance(other, _L) else _L.const(other)))

    def __rsub__(self, other):
        return _L.const(other) - self

    def __mul__(self, other):
        if not isinstance(other, _L):
            return _L(self.p * sp.Poly(other, Y, domain=_L.domain), self.low)
        return _L(self.p * other.p, self.low + other.low)

    __rmul__ = __mul__

    def shift(self, k: int) -> "_L":
        return _L(self.p, self.low + k)

    def y_dy(self, scale) -> "_L":
        """scale * y d/dy."""
        terms = {}
        for (deg,), c in self.p.terms():
            e = deg + self.low
            if e:
                terms[e] = c * e * scale
        return _L.of(terms) if terms else _L.const(0)

    def terms(self):
        for (deg,), c in self.p.terms():
            if c != 0:
                yield deg + self.low, c


def oracle_residual_order(family: str, params: dict, p_u: Fraction, p_U: Fraction,
                          step: Fraction, a: list, A: list, exact: bool = False) -> float:
    """Highest level j such that every residual coefficient of level <= j vanishes.

    By default the check runs in GF(p) for a 61-bit prime p = 1 mod 12;
    a nonzero element of Q(zeta12) maps to zero only with probability about
    1/p, and only in the direction of overstating the order.  ``exact=True``
    works in Q(sqrt 3, i) instead.

    The system is written in y with x = y**D (D = 3 for the cube-root
    family, 1 otherwise) so all exponents are integers; level j sits at
    y**(top - j*D*step) where ``top`` is the largest exponent any term of
    the equation can reach for the given leading powers.
    """
    if exact:
        _L.domain, _L.conv = _EXACT, staticmethod(to_sympy)
    else:
        _L.domain, _L.conv = sp.GF(PRIME), staticmethod(to_modp)
    conv = _L.conv
    D = 3 if family == "p3ii" else 1
    u = _L.of({int(D * (p_u - n * step)): conv(c) for n, c in enumerate(a)})
    U = _L.of({int(D * (p_U - n * step)): conv(c) for n, c in enumerate(A)})
    # x d/dx = (y / D) d/dy
    xdu, xdU = u.y_dy(conv(Fraction(1, D))), U.y_dy(conv(Fraction(1, D)))
    g = lambda name: conv(params[name])
    pu, pU = Fraction(p_u), Fraction(p_U)
    one = _L.const(1)
    if family in ("p3i", "p3ii"):
        beta = g("beta")
        uU = u * U
        e1 = xdu - (one.shift(D) + u * _sub(1, beta) + (u * uU).shift(D))
        if family == "p3i":
            e2 = xdU - (g("alpha") + u.shift(D) - U * _sub(2, beta) - (uU * U).shift(D))
        else:
            e2 = xdU - (one - U * _sub(2, beta) - (uU * U).shift(D))
        top1 = D * max(1, pu, 1 + 2 * pu + pU)
        top2 = D * max(0, 1 + pu, pU, 1 + pu + 2 * pU)
    else:
        k0, kinf = g("kappa0"), g("kappa_inf")
        two = conv(2)
        # multiplied through by x so that derivatives appear as x d/dx
        e1 = xdu - (u * U * conv(4) - u * u - u.shift(1) * two - _L.const(two * k0)).shift(1)
        e2 = xdU - (U * U * conv(-2) + u * U * two + U.shift(1) * two - kinf).shift(1)
        top1 = 1 + max(pu + pU, 2 * pu, 1 + pu, 0)
        top2 = 1 + max(2 * pU, pu + pU, 1 + pU, 0)
    best = math.inf
    unit = D * step
    for expr, top in ((e1, top1), (e2, top2)):
        for e, _ in expr.terms():
            level = (Fraction(top) - e) / unit
            if level.denominator != 1:
                raise AssertionError(f"exponent {e} off the lattice")
            best = min(best, int(level))
    return best if best == math.inf else best - 1


def _sub(n: int, v):
    """n - v in the active coefficient domain."""
    return _L.conv(n) - v if _L.domain == _EXACT else (n - v) % PRIME


def eq_to_oracle_args(eq, table):
    """Unpack an equation and coefficient table into oracle arguments."""
    fam = eq.family.value
    params = {k: v for k, v in eq.params.items()}
    br = table.branch
    return fam, params, br.p_u, br.p_U, br.step, list(table.a), list(table.A)


# Jacobian eigenvalue pairs as printed for each family and branch
def printed_eigenvalues(family: str, m: int) -> tuple[complex, complex]:
    import cmath

    if family == "p3i":
        lam = 2 * cmath.exp(-1j * m * math.pi / 2)
    elif family == "p3ii":
        lam = 3 * math.sqrt(3) * cmath.exp(-2j * m * math.pi / 3)
    elif m == 1:
        lam = 2j * math.sqrt(3) / 3
    else:
        lam = 2.0
    return (lam, -lam)
