"""First-order Painleve systems, Hamiltonians and the limit-Jacobian checks."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import mpmath
import numpy as np

from .exact import Cyclo
from .model import Branch, EquationSpec, Family, Polar
from .series import TrivialBranch

__all__ = [
    "JacobianData",
    "TrivialBranch",
    "UnsupportedFamily",
    "ZeroDelta",
    "ZeroU",
    "ZeroX",
    "d2u_from_system",
    "hamiltonian",
    "hamiltonian_rhs",
    "jacobian_limit",
    "PHASE_FORM",
    "phase",
    "phase_derivative",
    "rhs",
    "rhs_general_p3",
    "scalar_residual",
    "vector_field",
    "wasow_check",
]


class ZeroX(ZeroDivisionError):
    pass


class ZeroDelta(ValueError):
    pass


class ZeroU(ZeroDivisionError):
    pass


class UnsupportedFamily(ValueError):
    pass


def _like(value, x):
    """Cast a parameter to the arithmetic of the point ``x``."""
    if isinstance(x, (Cyclo, int, Fraction)) and isinstance(value, Cyclo):
        return value
    if isinstance(x, (mpmath.mpc, mpmath.mpf)):
        return value.to_mpc() if isinstance(value, Cyclo) else mpmath.mpc(value)
    return complex(value)


def _is_zero(v) -> bool:
    if isinstance(v, Cyclo):
        return v.is_zero()
    return np.all(v == 0) if isinstance(v, np.ndarray) else v == 0


def _sqrt_minus(delta, like):
    if isinstance(delta, (int, Fraction)) and isinstance(like, (Cyclo, int, Fraction)):
        delta = Cyclo.rational(delta)
    d = _like(delta, like) if isinstance(delta, Cyclo) else delta
    if isinstance(d, Cyclo):
        if d == -1:
            return Cyclo.rational(1)
        d = complex(d)
    if isinstance(d, (mpmath.mpc, mpmath.mpf)):
        return mpmath.sqrt(-d)
    return cmath.sqrt(-complex(d))


def rhs_general_p3(alpha, beta, gamma, delta, x, u, U):
    """General P3 system divided by x, with h = 1 - beta*(-delta)**(-1/2)."""
    if _is_zero(delta):
        raise ZeroDelta("delta must be nonzero")
    if _is_zero(x):
        raise ZeroX("x = 0 is a fixed singularity")
    s = _sqrt_minus(delta, x)
    h = 1 - beta / s
    du = (s * x + h * u + x * u * u * U) / x
    dU = (alpha + gamma * x * u - (1 + h) * U - x * u * U * U) / x
    return du, dU


def rhs(eq: EquationSpec, x, u, U):
    """Right-hand sides (du/dx, dU/dx) of the first-order system of ``eq``."""
    fam = eq.family
    if fam is Family.P4:
        k0, kinf = _like(eq.kappa0, x), _like(eq.kappa_inf, x)
        du = 4 * u * U - u * u - 2 * x * u - 2 * k0
        dU = -2 * U * U + 2 * u * U + 2 * x * U - kinf
        return du, dU
    if _is_zero(x):
        raise ZeroX("x = 0 is a fixed singularity")
    be = _like(eq.beta, x)
    du = (x + (1 - be) * u + x * u * u * U) / x
    if fam is Family.P3i:
        al = _like(eq.alpha, x)
        dU = (al + x * u - (2 - be) * U - x * u * U * U) / x
    else:
        dU = (1 - (2 - be) * U - x * u * U * U) / x
    return du, dU


def hamiltonian(eq: EquationSpec, x, u, U):
    if eq.family is Family.P4:
        k0, kinf = _like(eq.kappa0, x), _like(eq.kappa_inf, x)
        return 2 * u * U * U - (u * u + 2 * x * u + 2 * k0) * U + kinf * u
    if eq.family is Family.P3ii:
        raise UnsupportedFamily("no Hamiltonian is used for P3(ii)")
    if _is_zero(x):
        raise ZeroX("x = 0 is a fixed singularity")
    al, be = _like(eq.alpha, x), _like(eq.beta, x)
    xh = (2 * u * u * U * U - x * u * u * U + (1 - be) * u * U + x * U
          - (2 + al - be) * x * u / 4)
    return xh / x


def hamiltonian_rhs(eq: EquationSpec, x, u, U):
    """Hamilton's equations (dH/dU, -dH/du) in closed form.

    For P3(i) this is a different first-order system from :func:`rhs` (its
    second variable is not the same U); for P4 the two coincide.
    """
    if eq.family is Family.P4:
        return rhs(eq, x, u, U)
    if eq.family is Family.P3ii:
        raise UnsupportedFamily("no Hamiltonian is used for P3(ii)")
    if _is_zero(x):
        raise ZeroX("x = 0 is a fixed singularity")
    al, be = _like(eq.alpha, x), _like(eq.beta, x)
    du = (4 * u * u * U - x * u * u + (1 - be) * u + x) / x
    dU = (-4 * u * U * U + (2 * u * x + be - 1) * U + (2 + al - be) * x / 4) / x
    return du, dU


def scalar_residual(eq: EquationSpec, x, u, du, d2u):
    """u'' minus the right-hand side of the second-order equation."""
    if _is_zero(u):
        raise ZeroU("u = 0")
    fam = eq.family
    if fam is Family.P4:
        al, be = _like(eq.alpha, x), _like(eq.beta, x)
        f = (du * du / (2 * u) + 3 * u ** 3 / 2 + 4 * x * u * u
             + 2 * (x * x - al) * u + be / u)
        return d2u - f
    if _is_zero(x):
        raise ZeroX("x = 0 is a fixed singularity")
    be = _like(eq.beta, x)
    al = _like(eq.alpha, x)
    f = du * du / u - du / x + (al * u * u + be) / x - 1 / u
    if fam is Family.P3i:
        f = f + u ** 3
    return d2u - f


def d2u_from_system(eq: EquationSpec, x, u, U):
    """u'' along the flow, by the chain rule through (x, u, U)."""
    f1, f2 = rhs(eq, x, u, U)
    if eq.family is Family.P4:
        return -2 * u + (4 * U - 2 * u - 2 * x) * f1 + 4 * u * f2
    be = _like(eq.beta, x)
    return -(1 - be) * u / (x * x) + ((1 - be) / x + 2 * u * U) * f1 + u * u * f2


# ----------------------------------------------------------------------------
# limit Jacobians


# phase(x) = c * x**q on the tracked sheet
PHASE_FORM = {Family.P3i: (1.0, 1.0), Family.P3ii: (2 / 3, 0.5), Family.P4: (2.0, 0.5)}


def vector_field(eq: EquationSpec):
    """Fast complex-double right-hand side ``f(x, u, U) -> (du, dU)``."""
    fam = eq.family
    if fam is Family.P4:
        k0, kinf = complex(eq.kappa0), complex(eq.kappa_inf)

        def f(x, u, U):
            uU = u * U
            return (4 * uU - u * u - 2 * x * u - 2 * k0,
                    -2 * U * U + 2 * uU + 2 * x * U - kinf)
        return f
    be = complex(eq.beta)
    c_u, c_U = 1 - be, 2 - be
    if fam is Family.P3i:
        al = complex(eq.alpha)

        def f(x, u, U):
            uU = u * U
            return 1 + c_u * u / x + u * uU, (al - c_U * U) / x + u - uU * U
        return f

    def f(x, u, U):
        uU = u * U
        return 1 + c_u * u / x + u * uU, (1 - c_U * U) / x - uU * U
    return f


def phase(family: Family, x, sheet: Optional[float] = None) -> complex:
    """Exponent phase: perturbations behave like exp(lambda * phase(x))."""
    fam = Family.parse(family)
    if fam is Family.P3i:
        return complex(x.z if isinstance(x, Polar) else x)
    if fam is Family.P4:
        z = complex(x.z if isinstance(x, Polar) else x)
        return z * z / 2
    p = x if isinstance(x, Polar) else Polar.from_complex(complex(x), near=sheet)
    return 0.5 * cmath.rect(p.r ** (2 / 3), 2 * p.theta / 3)


def phase_derivative(family: Family, x, sheet: Optional[float] = None) -> complex:
    fam = Family.parse(family)
    if fam is Family.P3i:
        return 1 + 0j
    if fam is Family.P4:
        return complex(x.z if isinstance(x, Polar) else x)
    p = x if isinstance(x, Polar) else Polar.from_complex(complex(x), near=sheet)
    return cmath.rect(p.r ** (-1 / 3), -p.theta / 3) / 3


@dataclass
class JacobianData:
    branch: Branch
    J: np.ndarray
    eigenvalues: tuple
    closed_form: tuple
    phase_name: str
    notes: list = field(default_factory=list)

    @property
    def max_error(self) -> float:
        return max(abs(a - b) for a, b in zip(self.eigenvalues, self.closed_form))

    def decaying(self, direction: complex = 1.0, family: Optional[Family] = None) -> complex:
        """Eigenvalue whose mode is recessive along ``direction`` of increasing phase."""
        return min(self.closed_form, key=lambda lam: (lam * direction).real)

    def to_dict(self) -> dict:
        def c(z):
            return [z.real, z.imag]

        return {"branch": self.branch.label, "J": [[c(v) for v in row] for row in self.J],
                "eigenvalues": [c(v) for v in self.eigenvalues],
                "closed_form": [c(v) for v in self.closed_form],
                "max_error": self.max_error, "phase": self.phase_name, "notes": self.notes}


def _closed_form(br: Branch) -> tuple[complex, complex]:
    m = br.m
    if br.family is Family.P3i:
        lam = 2 * cmath.exp(-1j * m * math.pi / 2)
        return (-lam, lam)
    if br.family is Family.P3ii:
        lam = 3 * math.sqrt(3) * cmath.exp(-2j * m * math.pi / 3)
        return (lam, -lam)
    if m == 1:
        lam = 2 * math.sqrt(3) / 3 * 1j
        return (lam, -lam)
    return (2 + 0j, -2 + 0j)


def jacobian_limit(br: Branch, eq: Optional[EquationSpec] = None,
                   override: Optional[np.ndarray] = None) -> JacobianData:
    """Limit Jacobian at the branch, its eigenvalues and their closed forms.

    ``override`` replaces the matrix (negative controls only).
    """
    if br.trivial_u:
        raise TrivialBranch(f"{br.label}: trivial branch has no Jacobian check")
    a0, A0 = complex(br.a0), complex(br.A0)
    notes = []
    if br.family is Family.P3i:
        J = [[2 * a0 * A0, a0 * a0], [0, -2 * a0 * A0]]
        name = "x"
    elif br.family is Family.P3ii:
        J = [[6 * a0 * A0, 3 * a0 * a0], [-3 * A0 * A0, -6 * a0 * A0]]
        name = "x**(2/3)/2"
        notes.append("linearization in y = x**(1/3); the symbols b0, B0 of the "
                     "perturbation matrix are read as a0, A0")
    else:
        if eq is None:
            raise ValueError("P4 Jacobians need the equation parameters")
        k0, kinf = complex(eq.kappa0), complex(eq.kappa_inf)
        J = {1: [[2 / 3, -8 / 3], [2 / 3, -2 / 3]],
             2: [[2, 0], [-kinf, -2]],
             3: [[2, 4 * k0], [0, -2]],
             4: [[-2, 0], [0, 2]]}[br.m]
        name = "x**2/2"
    J = np.array(J, dtype=complex) if override is None else np.asarray(override, dtype=complex)
    computed = list(np.linalg.eigvals(J))
    closed = _closed_form(br)
    ordered = []
    for lam in closed:
        j = min(range(len(computed)), key=lambda i: abs(computed[i] - lam))
        ordered.append(complex(computed.pop(j)))
    return JacobianData(br, J, tuple(ordered), closed, name, notes)


def wasow_check(br: Branch, eq: EquationSpec, override: Optional[np.ndarray] = None,
                tol: float = 1e-12, residual_N: int = 10) -> dict:
    """Machine check of the nonzero-eigenvalue and formal-solution conditions."""
    from .series import residual_order

    report = {"branch": br.label, "m": br.m, "family": br.family.value}
    if br.trivial_u:
        report.update(status="excluded", reason="trivial branch (u-series vanishes)")
        return report
    jd = jacobian_limit(br, eq, override)
    nonzero = all(abs(v) > tol for v in jd.eigenvalues)
    err = jd.max_error
    report.update(jd.to_dict())
    report["nonzero"] = nonzero
    report["eigen_ok"] = err <= tol
    if eq.exact:
        r = residual_order(br, eq, residual_N)
        report["residual_order"] = "inf" if r == math.inf else r
        report["formal_ok"] = r >= residual_N
    else:
        report["residual_order"] = None
        report["formal_ok"] = None
    passed = nonzero and report["eigen_ok"] and report["formal_ok"] is not False
    report["status"] = "pass" if passed else "fail"
    return report
