"""Complex-path integration of the first-order systems.

Two engines share one :class:`Path` model:

* :func:`integrate` runs an embedded Dormand-Prince 5(4) pair in double
  precision over the real path parameter, and detects blow-up.
* :func:`integrate_hp` runs a high-order Taylor method in multiprecision
  (``gmpy2``).  It is meant for measurements below double-precision
  resolution and for paths where exponentially growing modes would swamp
  double-precision roundoff.
"""

from __future__ import annotations

import cmath
import csv
import io
import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import gmpy2
import mpmath
import numpy as np

from .dynamics import PHASE_FORM, vector_field
from .exact import Cyclo
from .model import EquationSpec, Family, Polar

__all__ = [
    "Arc",
    "DiscontinuousJoin",
    "HPResult",
    "Line",
    "Neutral",
    "NoBlowupSignature",
    "Path",
    "PoleEvent",
    "Ray",
    "Trajectory",
    "ZeroXOnPath",
    "concat",
    "estimate_pole",
    "integrate",
    "integrate_hp",
    "make_arc",
    "make_line",
    "make_neutral",
    "make_ray",
]


class DiscontinuousJoin(ValueError):
    pass


class ZeroXOnPath(ValueError):
    pass


class NoBlowupSignature(ValueError):
    pass


# ----------------------------------------------------------------------------
# paths


@dataclass(frozen=True)
class Ray:
    theta: float
    r0: float
    r1: float

    def x(self, s: float) -> complex:
        return cmath.rect(self.r0 + s * (self.r1 - self.r0), self.theta)

    def dx(self, s: float) -> complex:
        return cmath.rect(self.r1 - self.r0, self.theta)

    def arg(self, s: float) -> float:
        return self.theta

    def min_radius(self) -> float:
        return min(self.r0, self.r1)

    def reversed(self) -> "Ray":
        return Ray(self.theta, self.r1, self.r0)


@dataclass(frozen=True)
class Arc:
    r: float
    theta0: float
    theta1: float

    def x(self, s: float) -> complex:
        return cmath.rect(self.r, self.theta0 + s * (self.theta1 - self.theta0))

    def dx(self, s: float) -> complex:
        return 1j * self.x(s) * (self.theta1 - self.theta0)

    def arg(self, s: float) -> float:
        return self.theta0 + s * (self.theta1 - self.theta0)

    def min_radius(self) -> float:
        return self.r

    def reversed(self) -> "Arc":
        return Arc(self.r, self.theta1, self.theta0)


@dataclass(frozen=True)
class Line:
    z0: complex
    z1: complex
    theta0: float

    def x(self, s: float) -> complex:
        if s == 1.0:
            return self.z1
        return self.z0 + s * (self.z1 - self.z0)

    def dx(self, s: float) -> complex:
        return self.z1 - self.z0

    def arg(self, s: float) -> float:
        return self.theta0 + cmath.phase(self.x(s) / self.z0)

    def min_radius(self) -> float:
        d = self.z1 - self.z0
        if d == 0:
            return abs(self.z0)
        s = min(1.0, max(0.0, -(self.z0 * d.conjugate()).real / abs(d) ** 2))
        return abs(self.z0 + s * d)

    def reversed(self) -> "Line":
        return Line(self.z1, self.z0, self.arg(1.0))


@dataclass(frozen=True)
class Neutral:
    """Curve on which Re(mu * x**q) is constant, parametrized by its argument.

    r(theta) = r_ref * (cos(q*theta_ref + psi) / cos(q*theta + psi))**(1/q)
    """

    q: float
    psi: float
    r_ref: float
    theta_ref: float
    theta0: float
    theta1: float

    def _th(self, s: float) -> float:
        return self.theta0 + s * (self.theta1 - self.theta0)

    def radius(self, theta: float) -> float:
        ratio = math.cos(self.q * self.theta_ref + self.psi) / math.cos(self.q * theta + self.psi)
        return self.r_ref * ratio ** (1 / self.q)

    def x(self, s: float) -> complex:
        th = self._th(s)
        return cmath.rect(self.radius(th), th)

    def dx(self, s: float) -> complex:
        th = self._th(s)
        r = self.radius(th)
        return r * (math.tan(self.q * th + self.psi) + 1j) * cmath.exp(1j * th) * (self.theta1 - self.theta0)

    def arg(self, s: float) -> float:
        return self._th(s)

    def min_radius(self) -> float:
        # r is smallest where |cos| is largest; check the ends and the lobe centre
        cands = [self.theta0, self.theta1]
        lo, hi = sorted((self.theta0, self.theta1))
        k = round((self.q * lo + self.psi) / math.pi)
        centre = (k * math.pi - self.psi) / self.q
        if lo < centre < hi:
            cands.append(centre)
        return min(self.radius(t) for t in cands)

    def reversed(self) -> "Neutral":
        return Neutral(self.q, self.psi, self.r_ref, self.theta_ref, self.theta1, self.theta0)


Segment = Union[Ray, Arc, Line, Neutral]


@dataclass(frozen=True)
class Path:
    """Ordered segments; the global parameter runs over [0, len(segments)]."""

    segments: tuple

    def __post_init__(self):
        for a, b in zip(self.segments, self.segments[1:]):
            xa, xb = a.x(1.0), b.x(0.0)
            if abs(xa - xb) > 1e-9 * max(1.0, abs(xa)) or abs(a.arg(1.0) - b.arg(0.0)) > 1e-9:
                raise DiscontinuousJoin(f"segments do not join: {xa} vs {xb}")

    def __len__(self):
        return len(self.segments)

    @property
    def start(self) -> complex:
        return self.segments[0].x(0.0)

    @property
    def end(self) -> complex:
        return self.segments[-1].x(1.0)

    @property
    def start_arg(self) -> float:
        return self.segments[0].arg(0.0)

    @property
    def end_arg(self) -> float:
        return self.segments[-1].arg(1.0)

    def x(self, t: float) -> complex:
        i, s = self._locate(t)
        return self.segments[i].x(s)

    def arg(self, t: float) -> float:
        i, s = self._locate(t)
        return self.segments[i].arg(s)

    def _locate(self, t: float) -> tuple[int, float]:
        i = min(int(t), len(self.segments) - 1)
        return i, t - i

    def min_radius(self) -> float:
        return min(seg.min_radius() for seg in self.segments)

    def total_arg_variation(self, samples: int = 64) -> float:
        total = 0.0
        for seg in self.segments:
            a = [seg.arg(k / samples) for k in range(samples + 1)]
            total += sum(abs(b - c) for b, c in zip(a[1:], a))
        return total

    def reversed(self) -> "Path":
        return Path(tuple(seg.reversed() for seg in reversed(self.segments)))


def make_ray(theta: float, r0: float, r1: float) -> Path:
    if r0 <= 0 or r1 <= 0:
        raise ValueError("ray radii must be positive")
    if not (math.isfinite(theta) and math.isfinite(r0) and math.isfinite(r1)):
        raise ValueError("non-finite ray data")
    return Path((Ray(float(theta), float(r0), float(r1)),))


def make_arc(r: float, theta0: float, theta1: float) -> Path:
    if r <= 0:
        raise ValueError("arc radius must be positive")
    if not (math.isfinite(theta0) and math.isfinite(theta1)):
        raise ValueError("non-finite arc angles")
    return Path((Arc(float(r), float(theta0), float(theta1)),))


def make_line(z0: complex, z1: complex, theta0: Optional[float] = None) -> Path:
    z0, z1 = complex(z0), complex(z1)
    if z0 == 0:
        raise ZeroXOnPath("line starts at x = 0")
    th = cmath.phase(z0) if theta0 is None else Polar.from_complex(z0, near=theta0).theta
    seg = Line(z0, z1, th)
    if seg.min_radius() == 0:
        raise ZeroXOnPath("line passes through x = 0")
    return Path((seg,))


def make_neutral(family: Family, lam: complex, target: Polar, r_seed: float,
                 side: int = 1) -> Path:
    """Path from a seed at radius about ``r_seed`` to ``target`` along which
    Re(lam * phase(x)) stays constant, so neither mode grows or decays.

    ``side`` picks whether the seed lies at larger (+1) or smaller (-1) argument.
    """
    q, c = PHASE_FORM[Family.parse(family)]
    mu = complex(lam) * c
    psi = cmath.phase(mu)
    ft = q * target.theta + psi
    C = math.cos(ft)
    if abs(C) < 1e-12:
        return make_ray(target.theta, r_seed, target.r)
    if r_seed <= target.r:
        raise ValueError("the seed must lie farther out than the target")
    centre = round(ft / math.pi) * math.pi
    fs = centre + (1 if side >= 0 else -1) * math.acos(abs(C) * (target.r / r_seed) ** q)
    theta_s = (fs - psi) / q
    seg = Neutral(q, psi, target.r, target.theta, theta_s, target.theta)
    return Path((seg,))


def concat(*paths: Path) -> Path:
    segs = []
    for p in paths:
        segs.extend(p.segments)
    return Path(tuple(segs))


# ----------------------------------------------------------------------------
# trajectories and pole events


@dataclass(frozen=True)
class PoleEvent:
    x_pole_estimate: complex
    blowing_component: str
    fit_quality: float
    t: float = math.nan
    threshold: float = 1e8

    def to_dict(self) -> dict:
        return {"x_pole": [self.x_pole_estimate.real, self.x_pole_estimate.imag],
                "component": self.blowing_component, "fit_quality": self.fit_quality,
                "t": self.t, "threshold": self.threshold}


COMPLETED, POLE, TOLERANCE_FAILURE = "Completed", "PoleDetected", "ToleranceFailure"


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    arg: np.ndarray
    u: np.ndarray
    U: np.ndarray
    err: np.ndarray
    status: str
    pole: Optional[PoleEvent] = None
    message: str = ""
    segment_ends: list = field(default_factory=list)
    near_misses: list = field(default_factory=list)
    approach: Optional["Trajectory"] = None

    @property
    def completed(self) -> bool:
        return self.status == COMPLETED

    @property
    def final(self) -> tuple[complex, complex]:
        return complex(self.u[-1]), complex(self.U[-1])

    def __len__(self):
        return len(self.t)

    def to_csv(self, dest=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "re_x", "im_x", "arg_x_tracked", "re_u", "im_u", "re_U", "im_U", "err"])
        for row in zip(self.t, self.x, self.arg, self.u, self.U, self.err):
            t, x, a, u, U, e = row
            w.writerow([repr(float(t)), repr(x.real), repr(x.imag), repr(float(a)),
                        repr(u.real), repr(u.imag), repr(U.real), repr(U.imag), repr(float(e))])
        text = buf.getvalue()
        if dest is not None:
            with open(dest, "w", newline="") as fh:
                fh.write(text)
        return text

    def summary(self) -> dict:
        out = {"status": self.status, "samples": len(self), "message": self.message,
               "x_end": [self.x[-1].real, self.x[-1].imag],
               "u_end": [self.u[-1].real, self.u[-1].imag],
               "U_end": [self.U[-1].real, self.U[-1].imag],
               "max_local_error": float(np.max(self.err)) if len(self) else 0.0}
        if self.pole:
            out["pole"] = self.pole.to_dict()
        if self.near_misses:
            out["near_misses"] = [[z.real, z.imag] for z in self.near_misses]
        return out


def estimate_pole(xs: Sequence[complex], ys: Sequence[complex], component: str = "u",
                  window: int = 8) -> PoleEvent:
    """Fit 1/y = a + b x over the trailing window; the root of the fit is the pole."""
    xs = np.asarray(xs, dtype=complex)[-window:]
    ys = np.asarray(ys, dtype=complex)[-window:]
    if len(xs) < 4:
        raise NoBlowupSignature("need at least four trailing samples")
    mags = np.abs(ys)
    if not np.all(np.diff(mags) > 0):
        raise NoBlowupSignature("blowing component is not growing monotonically")
    w = 1 / ys
    A = np.column_stack([np.ones_like(xs), xs - xs[-1]])
    coef, *_ = np.linalg.lstsq(A, w, rcond=None)
    a, b = coef
    if b == 0:
        raise NoBlowupSignature("reciprocal does not vary")
    xp = xs[-1] - a / b
    resid = w - A @ coef
    # residual relative to the spread of the reciprocal over the window
    quality = float(np.linalg.norm(resid) / max(np.linalg.norm(w - w.mean()), 1e-300))
    return PoleEvent(complex(xp), component, quality)


# ----------------------------------------------------------------------------
# Dormand-Prince 5(4)

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6]
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


class _Recorder:
    def __init__(self):
        self.t, self.x, self.arg, self.u, self.U, self.err = [], [], [], [], [], []

    def add(self, t, x, a, u, U, e):
        self.t.append(t)
        self.x.append(x)
        self.arg.append(a)
        self.u.append(u)
        self.U.append(U)
        self.err.append(e)

    def build(self, status, **kw) -> Trajectory:
        return Trajectory(np.array(self.t, dtype=float), np.array(self.x, dtype=complex),
                          np.array(self.arg, dtype=float), np.array(self.u, dtype=complex),
                          np.array(self.U, dtype=complex), np.array(self.err, dtype=float),
                          status, **kw)


def _fit_pole(rec: _Recorder, comp: str, t: float, threshold: float) -> PoleEvent:
    ys = rec.u if comp == "u" else rec.U
    try:
        ev = estimate_pole(rec.x, ys, comp)
    except NoBlowupSignature:
        ev = PoleEvent(complex(rec.x[-1]), comp, math.inf)
    return PoleEvent(ev.x_pole_estimate, comp, ev.fit_quality, t, threshold)


def integrate(eq: EquationSpec, path: Path, init_u, init_U, tol: float = 1e-10,
              max_step: float = 0.05, blowup: float = 1e8, step_floor: float = 1e-12,
              scale_floor: float = 1.0, pursue: Optional[float] = None,
              max_steps: int = 200000) -> Trajectory:
    """Integrate the system of ``eq`` along ``path`` from (init_u, init_U).

    The step controller keeps the per-step error of each component below
    ``tol * max(|y|, scale_floor)``.  ``max_step`` and ``step_floor`` are in
    units of one segment's parameter.  When ``pursue`` is a number, a local
    maximum of |u| or |U| above it is treated as a pole candidate: the
    solver leaves the path, homes in along straight lines and reports the
    pole if blow-up is confirmed.
    """
    u, U = complex(init_u), complex(init_U)
    if not (cmath.isfinite(u) and cmath.isfinite(U)):
        raise ValueError("initial values must be finite")
    if eq.family is not Family.P4 and path.min_radius() <= 0:
        raise ZeroXOnPath("path meets the fixed singularity x = 0")
    f = vector_field(eq)
    rec = _Recorder()
    x0 = path.start
    rec.add(0.0, x0, path.start_arg, u, U, 0.0)
    segment_ends = []
    near = []
    h_prev = None
    nsteps = 0
    for i, seg in enumerate(path.segments):
        s = 0.0
        h = h_prev if h_prev is not None else _initial_step(f, seg, u, U, tol, max_step)
        while s < 1.0:
            if nsteps >= max_steps:
                return rec.build(TOLERANCE_FAILURE, message="step budget exhausted",
                                 segment_ends=segment_ends, near_misses=near)
            last = False
            if s + h >= 1.0:
                h, last = 1.0 - s, True
            k = [None] * 7
            x = seg.x(s)
            d = seg.dx(s)
            fu, fU = f(x, u, U)
            k[0] = (fu * d, fU * d)
            for j in range(1, 7):
                cj = _C[j]
                aj = _A[j]
                uu = u + h * sum(aj[m] * k[m][0] for m in range(j))
                UU = U + h * sum(aj[m] * k[m][1] for m in range(j))
                sj = 1.0 if (last and cj == 1.0) else s + cj * h
                xj, dj = seg.x(sj), seg.dx(sj)
                fu, fU = f(xj, uu, UU)
                k[j] = (fu * dj, fU * dj)
            un, Un = uu, UU  # stage 7 argument is the fifth-order solution
            eu = h * sum(_E[m] * k[m][0] for m in range(7))
            eU = h * sum(_E[m] * k[m][1] for m in range(7))
            if not (cmath.isfinite(un) and cmath.isfinite(Un)):
                ratio = math.inf
            else:
                su = max(abs(u), abs(un), scale_floor)
                sU = max(abs(U), abs(Un), scale_floor)
                ratio = max(abs(eu) / su, abs(eU) / sU) / tol
            if ratio <= 1.0:
                s = 1.0 if last else s + h
                u, U = un, Un
                nsteps += 1
                rec.add(i + s, seg.x(s), seg.arg(s), u, U, ratio * tol)
                big_u, big_U = abs(u) > blowup, abs(U) > blowup
                if big_u or big_U:
                    comp = "u" if abs(u) >= abs(U) else "U"
                    ev = _fit_pole(rec, comp, i + s, blowup)
                    return rec.build(POLE, pole=ev, segment_ends=segment_ends,
                                     near_misses=near, message="blow-up threshold exceeded")
                if pursue is not None and len(rec.t) >= 3:
                    hit = _pursue_peak(eq, rec, pursue, tol, blowup, near)
                    if hit is not None:
                        ev, approach = hit
                        trimmed = rec.build(POLE, pole=ev, segment_ends=segment_ends,
                                            near_misses=near, message="pole located by homing",
                                            approach=approach)
                        return trimmed
                fac = 5.0 if ratio == 0 else min(5.0, max(0.2, 0.9 * ratio ** -0.2))
                h = min(max_step, h * fac)
            else:
                fac = 0.2 if not math.isfinite(ratio) else max(0.1, 0.9 * ratio ** -0.25)
                h *= fac
                if h < step_floor:
                    comp = "u" if abs(u) >= abs(U) else "U"
                    ys = rec.u if comp == "u" else rec.U
                    growing = len(ys) >= 4 and all(
                        abs(b) > abs(a) for a, b in zip(ys[-4:], ys[-3:]))
                    if growing and max(abs(u), abs(U)) > 1e3:
                        ev = _fit_pole(rec, comp, i + s, blowup)
                        return rec.build(POLE, pole=ev, segment_ends=segment_ends,
                                         near_misses=near, message="step underflow at blow-up")
                    return rec.build(TOLERANCE_FAILURE, segment_ends=segment_ends,
                                     near_misses=near,
                                     message=f"step underflow at t={i + s:.6g}")
        h_prev = h
        segment_ends.append((seg.x(1.0), seg.arg(1.0), u, U))
    return rec.build(COMPLETED, segment_ends=segment_ends, near_misses=near)


def _initial_step(f, seg, u, U, tol, max_step) -> float:
    d = seg.dx(0.0)
    fu, fU = f(seg.x(0.0), u, U)
    rate = max(abs(fu * d) / max(abs(u), 1.0), abs(fU * d) / max(abs(U), 1.0), 1e-12)
    return min(max_step, 0.1 * tol ** 0.2 / rate)


def _pursue_peak(eq, rec: _Recorder, level: float, tol: float, blowup: float, near: list):
    """Check for a pole-like peak at the second-to-last sample and home in on it."""
    for comp, ys in (("u", rec.u), ("U", rec.U)):
        a, b, c = abs(ys[-3]), abs(ys[-2]), abs(ys[-1])
        if b > level and b > a and b > c:
            xs = rec.x[:-1]
            try:
                ev = estimate_pole(xs, ys[:-1], comp, window=6)
            except NoBlowupSignature:
                continue
            state = (rec.x[-2], rec.arg[-2], rec.u[-2], rec.U[-2])
            hit = home_to_pole(eq, state, ev.x_pole_estimate, comp, tol, blowup)
            if hit is not None:
                ev2, approach = hit
                return PoleEvent(ev2.x_pole_estimate, ev2.blowing_component, ev2.fit_quality,
                                 rec.t[-2], blowup), approach
            near.append(ev.x_pole_estimate)
    return None


def home_to_pole(eq: EquationSpec, state, guess: complex, comp: str, tol: float,
                 blowup: float, rounds: int = 8):
    """Follow straight lines toward ``guess`` until |component| exceeds ``blowup``.

    Returns (PoleEvent, trajectory) or None when no blow-up is reached.
    """
    x, th, u, U = state
    for _ in range(rounds):
        target = x + 1.5 * (guess - x)
        try:
            path = make_line(x, target, th)
        except ZeroXOnPath:
            return None
        tr = integrate(eq, path, u, U, tol=tol, blowup=blowup, max_step=0.02)
        if tr.status == POLE:
            return tr.pole, tr
        ys = np.abs(tr.u if comp == "u" else tr.U)
        j = int(np.argmax(ys))
        if j < 4 or ys[j] < 10 * max(abs(u if comp == "u" else U), 1.0):
            return None
        try:
            ev = estimate_pole(tr.x[: j + 1], (tr.u if comp == "u" else tr.U)[: j + 1], comp, 6)
        except NoBlowupSignature:
            return None
        x, th, u, U = complex(tr.x[j]), float(tr.arg[j]), complex(tr.u[j]), complex(tr.U[j])
        guess = ev.x_pole_estimate
    return None


# ----------------------------------------------------------------------------
# multiprecision Taylor engine


def _gm(value, prec: int):
    """Convert Cyclo, mpmath, gmpy2 or Python numbers to gmpy2.mpc."""
    ctx = gmpy2.get_context()
    if isinstance(value, Cyclo):
        c0, c1, c2, c3 = value._c
        h = gmpy2.sqrt(gmpy2.mpfr(3)) / 2
        re = gmpy2.mpfr(c0 + c2 / 2) + gmpy2.mpfr(c1) * h
        im = gmpy2.mpfr(c1 / 2 + c3) + gmpy2.mpfr(c2) * h
        return gmpy2.mpc(re, im)
    if isinstance(value, (mpmath.mpc, mpmath.mpf)):
        z = mpmath.mpc(value)
        return gmpy2.mpc(_mp_to_mpfr(z.real), _mp_to_mpfr(z.imag))
    if isinstance(value, type(gmpy2.mpc(0))):
        return value
    if isinstance(value, (int, Fraction)):
        return gmpy2.mpc(gmpy2.mpfr(gmpy2.mpq(value.numerator, value.denominator)), 0)
    z = complex(value)
    return gmpy2.mpc(gmpy2.mpfr(z.real), gmpy2.mpfr(z.imag))


def _mp_to_mpfr(v):
    sign, man, exp, _ = v._mpf_
    if not man:
        return gmpy2.mpfr(0)
    out = gmpy2.mul_2exp(gmpy2.mpfr(gmpy2.mpz(int(man))), int(exp))
    return -out if sign else out


def _mpfr_to_mp(v):
    if v == 0:
        return mpmath.mpf(0)
    man, exp = v.as_mantissa_exp()
    return mpmath.mpf((int(man), int(exp)))


def to_mpmath(z) -> mpmath.mpc:
    with mpmath.workprec(max(mpmath.mp.prec, z.real.precision, z.imag.precision)):
        return mpmath.mpc(_mpfr_to_mp(z.real), _mpfr_to_mp(z.imag))


@dataclass
class HPResult:
    """Outcome of a multiprecision run: segment endpoints in full precision."""

    status: str
    u: mpmath.mpc
    U: mpmath.mpc
    x: complex
    arg: float
    segment_ends: list
    steps: int
    prec: int
    samples: list = field(default_factory=list)
    message: str = ""


def _taylor_coeffs(fam, params, x0, u0, U0, p):
    u = [u0]
    U = [U0]
    uU, uu, UU, w, v = [], [], [], [], []
    for k in range(p):
        uU.append(sum(u[j] * U[k - j] for j in range(k + 1)))
        if fam is Family.P4:
            k0, kinf = params
            uu.append(sum(u[j] * u[k - j] for j in range(k + 1)))
            UU.append(sum(U[j] * U[k - j] for j in range(k + 1)))
            xu = x0 * u[k] + (u[k - 1] if k else 0)
            xU = x0 * U[k] + (U[k - 1] if k else 0)
            nu = 4 * uU[k] - uu[k] - 2 * xu - (2 * k0 if k == 0 else 0)
            nU = -2 * UU[k] + 2 * uU[k] + 2 * xU - (kinf if k == 0 else 0)
            u.append(nu / (k + 1))
            U.append(nU / (k + 1))
            continue
        al, c_u, c_U = params
        w.append(sum(u[j] * uU[k - j] for j in range(k + 1)))
        v.append(sum(U[j] * uU[k - j] for j in range(k + 1)))
        xw = x0 * w[k] + (w[k - 1] if k else 0)
        xv = x0 * v[k] + (v[k - 1] if k else 0)
        xk = x0 if k == 0 else (1 if k == 1 else 0)
        ru = xk + c_u * u[k] + xw
        if fam is Family.P3i:
            rU = (al if k == 0 else 0) + x0 * u[k] + (u[k - 1] if k else 0) - c_U * U[k] - xv
        else:
            rU = (1 if k == 0 else 0) - c_U * U[k] - xv
        u.append((ru - k * u[k]) / (x0 * (k + 1)))
        U.append((rU - k * U[k]) / (x0 * (k + 1)))
    return u, U


def _horner(c, h):
    acc = c[-1]
    for a in reversed(c[:-1]):
        acc = acc * h + a
    return acc


def integrate_hp(eq: EquationSpec, path: Path, init_u, init_U, prec: int = 128,
                 order: Optional[int] = None, tol: Optional[float] = None,
                 blowup: float = 1e8, step_floor: float = 1e-12,
                 keep_samples: bool = False, max_steps: int = 100000) -> HPResult:
    """Taylor-series integration in ``prec``-bit arithmetic along ``path``.

    Steps follow chords between points of the path, so only the nodes, not
    the curve between them, matter.  The step is chosen from the last two
    Taylor coefficients so that the truncation error stays near ``tol``.
    """
    if eq.family is not Family.P4 and path.min_radius() <= 0:
        raise ZeroXOnPath("path meets the fixed singularity x = 0")
    digits = prec * math.log10(2)
    # kept as a logarithm: at a few thousand bits the tolerance underflows a double
    log10_tol = -(digits - 4) if tol is None else math.log10(tol)
    if order is None:
        order = int(math.ceil(1.15 * -log10_tol)) + 2
    fam = eq.family
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        if fam is Family.P4:
            params = (_gm(eq.kappa0, prec), _gm(eq.kappa_inf, prec))
        else:
            be = _gm(eq.beta, prec)
            al = _gm(eq.alpha, prec) if fam is Family.P3i else None
            params = (al, 1 - be, 2 - be)
        u, U = _gm(init_u, prec), _gm(init_U, prec)
        ends, samples = [], []
        steps = 0
        log_tol = log10_tol * math.log(10)
        for i, seg in enumerate(path.segments):
            s = 0.0
            x_cur = seg.x(0.0)
            while s < 1.0:
                if steps >= max_steps:
                    return HPResult(TOLERANCE_FAILURE, to_mpmath(u), to_mpmath(U), x_cur,
                                    seg.arg(s), ends, steps, prec, samples, "step budget")
                x0 = _gm(x_cur, prec)
                cu, cU = _taylor_coeffs(fam, params, x0, u, U, order)
                scale = max(1.0, float(abs(u)), float(abs(U)))
                hmax = math.inf
                for kk in (order - 1, order):
                    mag = max(float(abs(cu[kk])), float(abs(cU[kk])))
                    if mag > 0:
                        hmax = min(hmax, math.exp((log_tol + math.log(scale) - math.log(mag)) / kk))
                hmax *= 0.9
                speed = abs(seg.dx(s))
                ds = 1.0 - s if speed == 0 else min(1.0 - s, hmax / speed)
                if ds < step_floor:
                    return HPResult(TOLERANCE_FAILURE, to_mpmath(u), to_mpmath(U), x_cur,
                                    seg.arg(s), ends, steps, prec, samples,
                                    f"step underflow at t={i + s:.6g}")
                s_new = 1.0 if s + ds >= 1.0 else s + ds
                # the chord must not be longer than the admissible radius
                x_new = seg.x(s_new)
                while abs(x_new - x_cur) > hmax and s_new - s > step_floor:
                    s_new = s + 0.5 * (s_new - s)
                    x_new = seg.x(s_new)
                hstep = _gm(x_new, prec) - x0
                u, U = _horner(cu, hstep), _horner(cU, hstep)
                s, x_cur = s_new, x_new
                steps += 1
                if keep_samples:
                    samples.append((i + s, x_cur, seg.arg(s), complex(u), complex(U)))
                if abs(u) > blowup or abs(U) > blowup:
                    return HPResult(POLE, to_mpmath(u), to_mpmath(U), x_cur, seg.arg(s), ends,
                                    steps, prec, samples, "blow-up threshold exceeded")
            ends.append((x_cur, seg.arg(1.0), to_mpmath(u), to_mpmath(U)))
        return HPResult(COMPLETED, to_mpmath(u), to_mpmath(U), x_cur, path.end_arg, ends,
                        steps, prec, samples)
