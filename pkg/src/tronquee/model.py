"""Canonical equation families, branch data and sector geometry."""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional, Union

from .exact import ONE, Cyclo, to_exact

__all__ = [
    "BadBranchIndex",
    "BadSectorIndex",
    "Branch",
    "EquationSpec",
    "Family",
    "NonCanonicalParams",
    "Polar",
    "Sector",
    "SectorKind",
    "branch",
    "contains",
    "make_equation",
    "omega_cover",
    "sector",
]


class NonCanonicalParams(ValueError):
    pass


class BadBranchIndex(ValueError):
    pass


class BadSectorIndex(ValueError):
    pass


class Family(str, enum.Enum):
    P3i = "p3i"
    P3ii = "p3ii"
    P4 = "p4"

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, Family):
            return value
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        aliases = {"p3i": cls.P3i, "p3ii": cls.P3ii, "p4": cls.P4,
                   "piii(i)": cls.P3i, "piii(ii)": cls.P3ii, "piv": cls.P4}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown family {value!r}") from None


Scalar = Union[Cyclo, complex]


def _as_scalar(value) -> Scalar:
    if isinstance(value, (Cyclo, int, Fraction, str)):
        return to_exact(value)
    if isinstance(value, (float, complex)):
        if not cmath.isfinite(complex(value)):
            raise ValueError("parameters must be finite")
        return complex(value)
    # mpmath numbers and numpy scalars
    return complex(value)


def _is_exact(value) -> bool:
    return isinstance(value, Cyclo)


@dataclass(frozen=True)
class EquationSpec:
    """A canonical Painleve family with its parameters.

    P3i fixes (gamma, delta) = (1, -1); P3ii fixes (alpha, gamma, delta) =
    (1, 0, -1); P4 is parametrized by (kappa0, kappa_inf) with
    alpha = -kappa0 + 2*kappa_inf + 1 and beta = -2*kappa0**2.
    """

    family: Family
    params: dict = field(hash=False)

    @property
    def exact(self) -> bool:
        return all(_is_exact(v) for v in self.params.values())

    @property
    def alpha(self) -> Scalar:
        if self.family is Family.P4:
            return -self.kappa0 + 2 * self.kappa_inf + 1
        if self.family is Family.P3ii:
            return ONE if self.exact else 1 + 0j
        return self.params["alpha"]

    @property
    def beta(self) -> Scalar:
        if self.family is Family.P4:
            return -2 * self.kappa0 * self.kappa0
        return self.params["beta"]

    @property
    def gamma(self) -> int:
        if self.family is Family.P4:
            raise AttributeError("P4 has no gamma")
        return 1 if self.family is Family.P3i else 0

    @property
    def delta(self) -> int:
        if self.family is Family.P4:
            raise AttributeError("P4 has no delta")
        return -1

    @property
    def kappa0(self) -> Scalar:
        return self.params["kappa0"]

    @property
    def kappa_inf(self) -> Scalar:
        return self.params["kappa_inf"]

    def to_float(self) -> "EquationSpec":
        return EquationSpec(self.family, {k: complex(v) for k, v in self.params.items()})

    def describe(self) -> dict:
        out = {"family": self.family.value}
        for k, v in self.params.items():
            out[k] = str(v) if _is_exact(v) else [v.real, v.imag]
        return out


_P3_KEYS = {"alpha", "beta", "gamma", "delta"}
_P4_KEYS = {"kappa0", "kappa_inf"}
_ALIASES = {"a": "alpha", "b": "beta", "k0": "kappa0", "kinf": "kappa_inf",
            "kappa_infinity": "kappa_inf", "kappainf": "kappa_inf"}


def make_equation(family, raw_params: Optional[dict] = None, **kwargs) -> EquationSpec:
    """Build a validated :class:`EquationSpec`.

    Exact inputs (ints, Fractions, rational strings such as ``"1/3"`` or
    ``"1/2+i"``) are kept in exact form; floats force the floating backend.
    """
    fam = Family.parse(family)
    raw = {}
    for k, v in {**(raw_params or {}), **kwargs}.items():
        raw[_ALIASES.get(k, k)] = v
    unknown = set(raw) - (_P4_KEYS if fam is Family.P4 else _P3_KEYS)
    if unknown:
        raise NonCanonicalParams(f"unexpected parameters for {fam.value}: {sorted(unknown)}")

    if fam is Family.P4:
        missing = _P4_KEYS - set(raw)
        if missing:
            raise NonCanonicalParams(f"P4 requires {sorted(missing)}")
        params = {k: _as_scalar(raw[k]) for k in ("kappa0", "kappa_inf")}
    else:
        fixed = {"gamma": 1, "delta": -1} if fam is Family.P3i else {"alpha": 1, "gamma": 0, "delta": -1}
        for k, want in fixed.items():
            if k in raw and complex(_as_scalar(raw[k])) != want:
                raise NonCanonicalParams(f"{fam.value} requires {k} = {want}, got {raw[k]!r}")
        if "beta" not in raw or (fam is Family.P3i and "alpha" not in raw):
            raise NonCanonicalParams(f"{fam.value} requires alpha and beta")
        keys = ("alpha", "beta") if fam is Family.P3i else ("beta",)
        params = {k: _as_scalar(raw[k]) for k in keys}

    values = list(params.values())
    if any(_is_exact(v) for v in values) and not all(_is_exact(v) for v in values):
        params = {k: complex(v) for k, v in params.items()}
    return EquationSpec(fam, params)


@dataclass(frozen=True)
class Branch:
    """Leading data of one formal solution.

    u ~ x**p_u * sum(a_n x**(-n*step)), U ~ x**p_U * sum(A_n x**(-n*step)).
    """

    family: Family
    m: int
    a0: Scalar
    A0: Scalar
    p_u: Fraction
    p_U: Fraction
    step: Fraction

    @property
    def trivial_u(self) -> bool:
        return _scalar_is_zero(self.a0)

    @property
    def trivial_U(self) -> bool:
        return _scalar_is_zero(self.A0)

    @property
    def trivial(self) -> bool:
        """True when either formal component vanishes identically."""
        return self.trivial_u or self.trivial_U

    @property
    def label(self) -> str:
        kind = "case" if self.family is Family.P4 else "m"
        return f"{self.family.value}:{kind}={self.m}"


def _scalar_is_zero(v) -> bool:
    return v.is_zero() if isinstance(v, Cyclo) else v == 0


BRANCH_RANGE = {Family.P3i: range(0, 4), Family.P3ii: range(0, 3), Family.P4: range(1, 5)}


def branch(eq: EquationSpec, m: int) -> Branch:
    fam = eq.family
    if m not in BRANCH_RANGE[fam]:
        raise BadBranchIndex(f"{fam.value} has branches {list(BRANCH_RANGE[fam])}, got {m}")
    exact = eq.exact

    def c(v):
        return v if exact else complex(v)

    if fam is Family.P3i:
        a0 = Cyclo.zeta_power(3 * m)  # exp(m*pi*i/2)
        return Branch(fam, m, c(a0), c(-(a0 * a0)), Fraction(0), Fraction(0), Fraction(1))
    if fam is Family.P3ii:
        a0 = Cyclo.zeta_power(4 * m)  # exp(2*m*pi*i/3)
        return Branch(fam, m, c(a0), c(-a0), Fraction(1, 3), Fraction(-2, 3), Fraction(2, 3))

    k0, kinf = eq.kappa0, eq.kappa_inf
    half = Fraction(1, 2)
    if m == 1:
        a0, A0, pu, pU = c(Cyclo.rational(Fraction(-2, 3))), c(Cyclo.rational(Fraction(1, 3))), 1, 1
    elif m == 2:
        a0, A0, pu, pU = c(Cyclo.rational(-2)), -kinf * half if exact else -kinf / 2, 1, -1
    elif m == 3:
        a0, A0, pu, pU = k0, c(ONE), -1, 1
    else:
        a0, A0, pu, pU = -k0, kinf * half if exact else kinf / 2, -1, -1
    return Branch(fam, m, a0, A0, Fraction(pu), Fraction(pU), Fraction(2))


class SectorKind(str, enum.Enum):
    S = "S"
    OMEGA = "Omega"

    @classmethod
    def parse(cls, value) -> "SectorKind":
        if isinstance(value, SectorKind):
            return value
        v = str(value).strip().lower()
        if v in ("s", "s_existence", "existence"):
            return cls.S
        if v in ("omega", "o", "omega_uniqueness", "uniqueness"):
            return cls.OMEGA
        raise ValueError(f"unknown sector kind {value!r}")


class Polar(NamedTuple):
    """A point of the punctured plane with an unreduced argument."""

    r: float
    theta: float

    @property
    def z(self) -> complex:
        return cmath.rect(self.r, self.theta)

    @classmethod
    def from_complex(cls, z: complex, near: Optional[float] = None) -> "Polar":
        """Principal argument, or the lift closest to ``near`` when given."""
        th = cmath.phase(z)
        if near is not None:
            th += 2 * math.pi * round((near - th) / (2 * math.pi))
        return cls(abs(z), th)


@dataclass(frozen=True)
class Sector:
    theta_lo: float
    theta_hi: float
    r_min: float = 0.0
    kind: SectorKind = SectorKind.S
    family: Optional[Family] = None
    m: Optional[int] = None
    k: Optional[int] = None

    def __post_init__(self):
        if not self.theta_lo < self.theta_hi:
            raise ValueError("sector needs theta_lo < theta_hi")

    @property
    def span(self) -> float:
        return self.theta_hi - self.theta_lo

    @property
    def bisector(self) -> float:
        return 0.5 * (self.theta_lo + self.theta_hi)

    def shrink(self, margin: float) -> "Sector":
        return Sector(self.theta_lo + margin, self.theta_hi - margin, self.r_min,
                      self.kind, self.family, self.m, self.k)

    def shifted(self, turns: int) -> "Sector":
        d = 2 * math.pi * turns
        return Sector(self.theta_lo + d, self.theta_hi + d, self.r_min, self.kind,
                      self.family, self.m, self.k)

    def covers(self, other: "Sector") -> bool:
        return self.theta_lo <= other.theta_lo and other.theta_hi <= self.theta_hi

    def intersect(self, other: "Sector") -> Optional["Sector"]:
        lo, hi = max(self.theta_lo, other.theta_lo), min(self.theta_hi, other.theta_hi)
        if lo >= hi:
            return None
        return Sector(lo, hi, max(self.r_min, other.r_min), self.kind, self.family, self.m)

    def to_dict(self) -> dict:
        return {"theta_lo": self.theta_lo, "theta_hi": self.theta_hi, "r_min": self.r_min,
                "kind": self.kind.value, "family": self.family.value if self.family else None,
                "m": self.m, "k": self.k}


SECTOR_K_RANGE = {Family.P3i: range(0, 2), Family.P3ii: range(0, 4), Family.P4: range(0, 4)}


def _sector_angles(fam: Family, m: int, k: int, kind: SectorKind) -> tuple[float, float]:
    pi = math.pi
    if fam is Family.P3i:
        if kind is SectorKind.S:
            return ((-pi / 2 + k * pi, pi / 2 + k * pi) if m in (0, 2)
                    else (k * pi, (k + 1) * pi))
        return ((-pi / 2 + k * pi, 3 * pi / 2 + k * pi) if m in (0, 2)
                else (k * pi, (k + 2) * pi))
    if fam is Family.P3ii:
        lo, hi = ((-3 * pi / 4 - k * pi / 2, 3 * pi / 4 - k * pi / 2) if m in (0, 2)
                  else (pi / 4 - k * pi / 2, 7 * pi / 4 - k * pi / 2))
        if kind is SectorKind.S:
            return lo, hi
        # y = x**(1/3) uniqueness sectors have angle pi, i.e. 3*pi in x
        return lo, lo + 3 * pi
    if kind is SectorKind.S:
        return ((k * pi / 2, pi / 2 + k * pi / 2) if m == 1
                else (-pi / 4 + k * pi / 2, pi / 4 + k * pi / 2))
    return ((k * pi, (k + 2) * pi) if m == 1
            else (-3 * pi / 4 + k * pi, 5 * pi / 4 + k * pi))


def sector(eq: Union[EquationSpec, Family, str], m: int, k: int, kind=SectorKind.S,
           r_min: float = 0.0) -> Sector:
    fam = eq.family if isinstance(eq, EquationSpec) else Family.parse(eq)
    kind = SectorKind.parse(kind)
    if m not in BRANCH_RANGE[fam]:
        raise BadSectorIndex(f"bad branch {m} for {fam.value}")
    if k not in SECTOR_K_RANGE[fam]:
        raise BadSectorIndex(f"{fam.value} sectors use k in {list(SECTOR_K_RANGE[fam])}, got {k}")
    lo, hi = _sector_angles(fam, m, k, kind)
    return Sector(lo, hi, float(r_min), kind, fam, m, k)


def contains(sec: Sector, x: Union[Polar, complex, tuple]) -> bool:
    """Membership on the universal cover; plain complex numbers use the principal argument."""
    if isinstance(x, Polar):
        p = x
    elif isinstance(x, tuple):
        p = Polar(*x)
    else:
        p = Polar.from_complex(complex(x))
    return sec.r_min < p.r and sec.theta_lo < p.theta < sec.theta_hi


def omega_cover(eq, m: int, k: int) -> Sector:
    """The uniqueness sector lifted by whole turns so that it covers S_k.

    For the single-valued families the printed uniqueness intervals are only
    meaningful modulo 2*pi; this picks the lift containing the existence sector.
    """
    s = sector(eq, m, k, SectorKind.S)
    om = sector(eq, m, k, SectorKind.OMEGA)
    for turns in (0, -1, 1, -2, 2):
        cand = om.shifted(turns)
        if cand.covers(s):
            return cand
    raise BadSectorIndex(f"no lift of Omega_{k} covers S_{k}")
