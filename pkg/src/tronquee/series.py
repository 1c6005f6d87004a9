"""Recurrence-generated asymptotic series and their exact verification.

Coefficients are produced by the family recurrences exactly as printed for
each branch.  :func:`residual_order` checks them independently: the
truncated pair is substituted into the first-order system with generic
generalized-power-series arithmetic and the vanishing residual levels are
counted.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import mpmath

from .exact import Cyclo
from .model import Branch, EquationSpec, Family, Polar, branch as make_branch

__all__ = [
    "BackendOverflow",
    "CoefficientTable",
    "ExactBackendUnavailable",
    "GSeries",
    "TrivialBranch",
    "compute_coefficients",
    "evaluate",
    "optimal_truncation_index",
    "residual_order",
    "term_growth",
    "truncated_pair",
]

DEFAULT_PREC = 256


class BackendOverflow(ArithmeticError):
    pass


class ExactBackendUnavailable(ValueError):
    pass


class TrivialBranch(ValueError):
    pass


def _converter(backend: str, prec: int) -> Callable:
    if backend == "exact":
        def conv(v):
            if isinstance(v, Cyclo):
                return v
            if isinstance(v, (int, Fraction)):
                return Cyclo.rational(v)
            raise ExactBackendUnavailable(f"{v!r} has no exact representation")
    elif backend == "mp":
        def conv(v):
            with mpmath.workprec(prec):
                if isinstance(v, Cyclo):
                    return v.to_mpc()
                if isinstance(v, Fraction):
                    return mpmath.mpc(mpmath.mpf(v.numerator) / v.denominator)
                return mpmath.mpc(v)
    elif backend == "double":
        def conv(v):
            return complex(v)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return conv


@dataclass(frozen=True)
class CoefficientTable:
    branch: Branch
    eq: EquationSpec
    N: int
    a: tuple
    A: tuple
    backend: str = "exact"
    prec: int = DEFAULT_PREC

    @property
    def step(self) -> Fraction:
        return self.branch.step

    def complex_a(self) -> list[complex]:
        return [complex(v) for v in self.a]

    def complex_A(self) -> list[complex]:
        return [complex(v) for v in self.A]

    def to_dict(self) -> dict:
        def pair(v):
            if isinstance(v, Cyclo):
                re, im = v.real_imag()
                return [str(re), str(im)]
            z = v if isinstance(v, mpmath.mpc) else complex(v)
            if isinstance(z, mpmath.mpc):
                digits = max(17, int(self.prec * 0.30103))
                return [mpmath.nstr(z.real, digits), mpmath.nstr(z.imag, digits)]
            return [repr(z.real), repr(z.imag)]

        out = {
            "family": self.eq.family.value,
            "m": self.branch.m,
            "params": self.eq.describe(),
            "backend": self.backend,
            "step": str(self.branch.step),
            "p_u": str(self.branch.p_u),
            "p_U": str(self.branch.p_U),
            "N": self.N,
            "a": [pair(v) for v in self.a],
            "A": [pair(v) for v in self.A],
        }
        if self.backend == "exact":
            out["basis"] = "1, zeta, zeta^2, zeta^3 with zeta = exp(i*pi/6)"
            out["a_exact"] = [[str(c) for c in v.coords] for v in self.a]
            out["A_exact"] = [[str(c) for c in v.coords] for v in self.A]
        elif self.backend == "mp":
            out["prec"] = self.prec
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def conjugated(self) -> "CoefficientTable":
        """Coefficient-wise complex conjugate (used for the conjugation symmetry)."""
        def cj(v):
            if isinstance(v, Cyclo):
                return v.conjugate()
            return v.conjugate()

        return CoefficientTable(self.branch, self.eq, self.N, tuple(cj(v) for v in self.a),
                                tuple(cj(v) for v in self.A), self.backend, self.prec)


def _conv(x: Sequence, y: Sequence, n: int, lo: int = 0):
    """sum_{l=lo}^{n-lo} x[l] y[n-l]."""
    s = 0
    for l in range(lo, n - lo + 1):
        s = s + x[l] * y[n - l]
    return s


def _p3i(eq, br, N, conv):
    al, be = conv(eq.alpha), conv(eq.beta)
    a, A = [conv(br.a0)], [conv(br.A0)]
    c = 2 * a[0] * A[0]
    for n in range(N):
        # second line first: it does not involve a_{n+1}
        rhs = (n + be - 2) * A[n] - a[0] * _conv(A, A, n + 1, 1)
        if n == 0:
            rhs = rhs + al
        for k in range(1, n + 1):
            rhs = rhs - a[k] * _conv(A, A, n + 1 - k)
        A.append(rhs / c)
        rhs = (be - 1 - n) * a[n] - A[0] * _conv(a, a, n + 1, 1)
        for k in range(1, n + 2):
            rhs = rhs - A[k] * _conv(a, a, n + 1 - k)
        a.append(rhs / c)
    return a, A


def _p3ii(eq, br, N, conv):
    be = conv(eq.beta)
    a, A = [conv(br.a0)], [conv(br.A0)]
    d = 9 * a[0] * a[0]
    for n in range(N):
        r1 = (2 * n + 2 - 3 * be) * a[n] - 3 * a[0] * _conv(a, a, n + 1, 1)
        r2 = (3 * be - 4 + 2 * n) * A[n] - 3 * a[0] * _conv(A, A, n + 1, 1)
        for k in range(1, n + 1):
            r1 = r1 + 3 * A[k] * _conv(a, a, n + 1 - k)
            r2 = r2 - 3 * a[k] * _conv(A, A, n + 1 - k)
        # [[6, -3], [3, -6]] (a_{n+1}, A_{n+1}) = (r1, r2) / a0**2
        a.append((2 * r1 - r2) / d)
        A.append((r1 - 2 * r2) / d)
    return a, A


def _p4(eq, br, N, conv):
    k0, kinf, al = conv(eq.kappa0), conv(eq.kappa_inf), conv(eq.alpha)
    half = conv(Fraction(1, 2))
    a, A = [conv(br.a0)], [conv(br.A0)]
    m = br.m
    if m == 1:
        if N >= 1:
            a.append(al)
            A.append(half - k0 + half * kinf)
        for n in range(1, N):
            r1 = (1 - 2 * n) * a[n]
            r2 = (2 * n - 1) * A[n]
            for k in range(1, n + 1):
                r1 = r1 - a[k] * (4 * A[n + 1 - k] - a[n + 1 - k])
                r2 = r2 + 2 * A[k] * (a[n + 1 - k] - A[n + 1 - k])
            # 2/3 a - 8/3 A = r1 ; 2/3 A - 2/3 a = r2
            anew = -(r1 + 4 * r2) * half
            a.append(anew)
            A.append(anew + 3 * half * r2)
    elif m == 2:
        if N >= 1:
            a.append(-al)
        for n in range(N):
            if n >= 1:
                s = (half - n) * a[n] + 4 * A[n]
                for k in range(1, n + 1):
                    s = s + half * a[k] * (a[n + 1 - k] - 4 * A[n - k])
                a.append(s)
            s = (half + n) * A[n]
            for k in range(0, n + 1):
                s = s + A[k] * (a[n + 1 - k] - A[n - k])
            A.append(s)
    elif m == 3:
        if N >= 1:
            A.append(-half * (1 - 2 * k0 + kinf))
        for n in range(N):
            if n >= 1:
                s = (n - half) * A[n] + a[n]
                for k in range(1, n + 1):
                    s = s - A[k] * (A[n + 1 - k] - a[n - k])
                A.append(s)
            s = -(n + half) * a[n]
            for k in range(0, n + 1):
                s = s + half * a[k] * (a[n - k] - 4 * A[n + 1 - k])
            a.append(s)
    else:
        for n in range(N):
            s = (n + half) * a[n]
            t = -(n + half) * A[n]
            for k in range(0, n + 1):
                s = s - half * a[k] * (a[n - k] - 4 * A[n - k])
                t = t + A[k] * (A[n - k] - a[n - k])
            a.append(s)
            A.append(t)
    return a[: N + 1], A[: N + 1]


_ENGINES = {Family.P3i: _p3i, Family.P3ii: _p3ii, Family.P4: _p4}


def compute_coefficients(br: Union[Branch, int], eq: EquationSpec, N: int,
                         backend: Optional[str] = None, prec: int = DEFAULT_PREC,
                         allow_trivial: bool = False) -> CoefficientTable:
    """Generate a_0..a_N and A_0..A_N for one branch.

    ``backend`` is ``"exact"`` (default for exact parameters), ``"mp"``
    (mpmath complex with ``prec`` bits) or ``"double"``.
    """
    if isinstance(br, int):
        br = make_branch(eq, br)
    if N < 0:
        raise ValueError("N must be non-negative")
    if br.trivial_u and not allow_trivial:
        raise TrivialBranch(f"{br.label}: u-series vanishes identically")
    if backend is None:
        backend = "exact" if eq.exact else "mp"
    if backend == "exact" and not eq.exact:
        raise ExactBackendUnavailable("parameters are not exactly representable")
    conv = _converter(backend, prec)
    if backend == "mp":
        with mpmath.workprec(prec):
            a, A = _ENGINES[eq.family](eq, br, N, conv)
        bad = [v for v in a + A if not mpmath.isfinite(v)]
    else:
        try:
            a, A = _ENGINES[eq.family](eq, br, N, conv)
        except OverflowError as exc:
            raise BackendOverflow(str(exc)) from exc
        bad = [] if backend == "exact" else [v for v in a + A if not math.isfinite(abs(v))]
    if bad:
        raise BackendOverflow(f"non-finite coefficient in {backend} backend at N={N}")
    return CoefficientTable(br, eq, N, tuple(a), tuple(A), backend, prec)


# ----------------------------------------------------------------------------
# evaluation


def _point(x, sheet: Optional[float]) -> tuple[complex, float]:
    """The point as an exact complex number plus its tracked argument."""
    if isinstance(x, Polar):
        return x.z, x.theta
    if isinstance(x, tuple):
        p = Polar(*x)
        return p.z, p.theta
    z = complex(x)
    return z, Polar.from_complex(z, near=sheet).theta


def _power(z: complex, theta: float, e: Fraction, mode: str):
    """z**e on the sheet whose argument is ``theta``."""
    turns = round((theta - cmath.phase(z)) / (2 * math.pi))
    if mode == "mp":
        zz = mpmath.mpc(z)
        if e.denominator == 1:
            return zz ** int(e)
        ef = mpmath.mpf(e.numerator) / e.denominator
        out = mpmath.power(zz, ef)
        return out * mpmath.expj(2 * mpmath.pi * turns * ef) if turns else out
    if e.denominator == 1:
        return z ** int(e)
    out = z ** float(e)
    return out * cmath.exp(2j * math.pi * turns * float(e)) if turns else out


def evaluate(table: CoefficientTable, x, N_use: Optional[int] = None,
             sheet: Optional[float] = None):
    """Partial sums (u, U) of order ``N_use`` with prefactors applied.

    ``x`` may be a :class:`Polar` (tracked argument) or a complex number, in
    which case its argument is taken on the lift nearest to ``sheet``
    (principal when ``sheet`` is None).  Fractional powers follow the tracked
    argument.  Exact tables evaluate in double precision; mp tables in mp.
    """
    n_use = table.N if N_use is None else N_use
    if n_use > table.N or n_use < 0:
        raise ValueError(f"N_use must lie in [0, {table.N}]")
    z, th = _point(x, sheet)
    mode = "mp" if table.backend == "mp" else "double"
    br = table.branch
    if mode == "mp":
        with mpmath.workprec(table.prec):
            t = _power(z, th, -table.step, mode)
            su = sU = mpmath.mpc(0)
            for n in range(n_use, -1, -1):
                su = su * t + table.a[n]
                sU = sU * t + table.A[n]
            return su * _power(z, th, br.p_u, mode), sU * _power(z, th, br.p_U, mode)
    t = _power(z, th, -table.step, mode)
    a, A = table.complex_a(), table.complex_A()
    su = sU = 0j
    for n in range(n_use, -1, -1):
        su = su * t + a[n]
        sU = sU * t + A[n]
    return su * _power(z, th, br.p_u, mode), sU * _power(z, th, br.p_U, mode)


def term_magnitudes(table: CoefficientTable, radius: float, component: str = "u") -> list[float]:
    coeffs = table.a if component == "u" else table.A
    s = float(table.step)
    out = []
    for n, c in enumerate(coeffs):
        mag = float(abs(complex(c))) if not isinstance(c, mpmath.mpc) else float(abs(c))
        out.append(mag * radius ** (-n * s) if mag else 0.0)
    return out


def _noise_floor(table: CoefficientTable) -> list[float]:
    """Per-index magnitude below which a rounded coefficient counts as zero.

    Exact tables have no noise.  Floating tables inherit cancellation error
    of about one unit in the last place of the neighbouring coefficients.
    """
    if table.backend == "exact":
        return [0.0] * (table.N + 1)
    ulp = 2.0 ** (-(table.prec if table.backend == "mp" else 53) + 8)
    mags = [float(abs(c)) for c in table.a]
    out = []
    for n in range(table.N + 1):
        near = max(mags[max(0, n - 2): n + 3])
        out.append(ulp * near)
    return out


def optimal_truncation_index(table: CoefficientTable, x) -> int:
    """Index of the smallest nonzero term |a_n| |x|**(-n*step), n <= N.

    Ties go to the smaller index.  Vanishing coefficients are skipped, so an
    accidental zero does not stop the sum early; when every a_n with n >= 1
    vanishes the series terminates and the result is 0.
    """
    r = abs(x.z) if isinstance(x, Polar) else abs(complex(x))
    if r <= 0:
        raise ValueError("|x| must be positive")
    terms = term_magnitudes(table, r)
    coeffs = term_magnitudes(table, 1.0)
    noise = _noise_floor(table)
    best, best_n = math.inf, 0
    for n in range(1, table.N + 1):
        if coeffs[n] > noise[n] and terms[n] < best:
            best, best_n = terms[n], n
    return best_n


def term_growth(table: CoefficientTable) -> dict:
    """Divergence diagnostics for the u-coefficients."""
    if table.N < 5:
        raise ValueError("term_growth needs N >= 5")
    mags = term_magnitudes(table, 1.0)
    roots = [m ** (1.0 / n) if m else 0.0 for n, m in enumerate(mags) if n >= 1]
    ratios = [mags[n + 1] / mags[n] if mags[n] else None for n in range(table.N)]
    nonzero = [n for n, m in enumerate(mags) if m]
    if not nonzero:
        flag = "zero"
    elif nonzero[-1] < table.N:
        flag = "terminating"
    else:
        tail = [r for r in ratios[len(ratios) // 2:] if r is not None]
        if len(tail) >= 2 and all(b > a for a, b in zip(tail, tail[1:])):
            flag = "super-geometric"
        else:
            flag = "irregular"
    # growth of the magnitudes themselves over the second half of the table
    half = mags[len(mags) // 2:]
    monotone = len(half) >= 2 and all(b > a > 0 for a, b in zip(half, half[1:]))
    return {"magnitudes": mags, "root_test": roots, "ratios": ratios,
            "flag": flag, "monotone_growth": monotone}


# ----------------------------------------------------------------------------
# generalized power series and the residual check


@dataclass
class GSeries:
    """Finite sum of c * x**e with rational exponents and a nominal top exponent.

    ``lead`` is the formal leading exponent of the expression that produced
    the series (kept even when that coefficient happens to vanish), so that
    residual levels are counted from a fixed origin.
    """

    terms: dict = field(default_factory=dict)
    lead: Fraction = Fraction(0)

    @classmethod
    def monomial(cls, c, e) -> "GSeries":
        e = Fraction(e)
        return cls({e: c} if c else {}, e)

    def _clean(self) -> "GSeries":
        self.terms = {e: c for e, c in self.terms.items() if c}
        return self

    def __add__(self, other: "GSeries") -> "GSeries":
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t[e] + c if e in t else c
        return GSeries(t, max(self.lead, other.lead))._clean()

    def __neg__(self) -> "GSeries":
        return GSeries({e: -c for e, c in self.terms.items()}, self.lead)

    def __sub__(self, other: "GSeries") -> "GSeries":
        return self + (-other)

    def __mul__(self, other) -> "GSeries":
        if not isinstance(other, GSeries):
            return GSeries({e: c * other for e, c in self.terms.items()}, self.lead)._clean()
        t: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = e1 + e2
                t[e] = t[e] + c1 * c2 if e in t else c1 * c2
        return GSeries(t, self.lead + other.lead)._clean()

    __rmul__ = __mul__

    def shift(self, k) -> "GSeries":
        k = Fraction(k)
        return GSeries({e + k: c for e, c in self.terms.items()}, self.lead + k)

    def x_ddx(self) -> "GSeries":
        return GSeries({e: c * e for e, c in self.terms.items()}, self.lead)._clean()

    def ddx(self) -> "GSeries":
        return self.x_ddx().shift(-1)


def truncated_pair(table: CoefficientTable, N_use: Optional[int] = None) -> tuple[GSeries, GSeries]:
    n_use = table.N if N_use is None else N_use
    br = table.branch
    u = GSeries({}, br.p_u)
    U = GSeries({}, br.p_U)
    for n in range(n_use + 1):
        u = u + GSeries.monomial(table.a[n], br.p_u - n * br.step)
        U = U + GSeries.monomial(table.A[n], br.p_U - n * br.step)
    u.lead, U.lead = br.p_u, br.p_U
    return u, U


def system_residual(eq: EquationSpec, u: GSeries, U: GSeries) -> tuple[GSeries, GSeries]:
    """Residuals of the polynomial first-order system after substitution.

    P3 families use the x-multiplied form x u' = x + h u + x u^2 U,
    x U' = alpha + gamma x u - (1+h) U - x u U^2 with h = 1 - beta.
    """
    one = GSeries.monomial(Cyclo.rational(1), 0)
    if eq.family in (Family.P3i, Family.P3ii):
        h = 1 - eq.beta
        r1 = u.x_ddx() - (one.shift(1) + u * h + (u * u * U).shift(1))
        r2 = U.x_ddx() - (one * eq.alpha - U * (1 + h) - (u * U * U).shift(1))
        if eq.family is Family.P3i:
            r2 = r2 - u.shift(1)
        return r1, r2
    k0, kinf = eq.kappa0, eq.kappa_inf
    r1 = u.ddx() - (u * U * 4 - u * u - u.shift(1) * 2 - one * (2 * k0))
    r2 = U.ddx() - (U * U * (-2) + u * U * 2 + U.shift(1) * 2 - one * kinf)
    return r1, r2


def _first_nonzero_level(r: GSeries, step: Fraction) -> Union[int, float]:
    if not r.terms:
        return math.inf
    levels = []
    for e in r.terms:
        lvl = (r.lead - e) / step
        if lvl.denominator != 1:
            raise AssertionError(f"exponent {e} off the lattice of step {step}")
        levels.append(int(lvl))
    return min(levels)


def residual_order(br: Union[Branch, int], eq: EquationSpec, N: int,
                   table: Optional[CoefficientTable] = None) -> Union[int, float]:
    """Highest level r such that all residual coefficients of level <= r vanish.

    Level j is the coefficient of x**(top - j*step) in each equation, counted
    from the formal top exponent.  Returns ``math.inf`` when the truncated
    pair solves the system exactly.
    """
    if not eq.exact:
        raise ExactBackendUnavailable("residual_order needs exact parameters")
    if table is None:
        table = compute_coefficients(br, eq, N, "exact", allow_trivial=True)
    u, U = truncated_pair(table, N)
    r1, r2 = system_residual(eq, u, U)
    lvl = min(_first_nonzero_level(r1, table.step), _first_nonzero_level(r2, table.step))
    return lvl if lvl == math.inf else lvl - 1


def residual_order_of(table: CoefficientTable) -> Union[int, float]:
    """Residual check for an arbitrary (possibly modified) exact table."""
    u, U = truncated_pair(table)
    r1, r2 = system_residual(table.eq, u, U)
    lvl = min(_first_nonzero_level(r1, table.step), _first_nonzero_level(r2, table.step))
    return lvl if lvl == math.inf else lvl - 1
