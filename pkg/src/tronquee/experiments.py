"""Numerical experiments on tronquee solutions.

Each experiment seeds the ODE system from an optimally truncated series and
integrates it with one of the two engines in :mod:`tronquee.integrate`.
Reports are plain dataclasses with ``to_dict`` for JSON output.

Two facts shape every recipe here.  Along a path the two linear modes scale
like exp(+-lambda*phase(x)), so roundoff or seed error is amplified by
exp(|change of Re(lambda*phase)|).  The multiprecision engine is therefore
run with enough bits to absorb that factor, and comparisons against the
series are made along curves where Re(lambda*phase) is constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import mpmath
import numpy as np

from .dynamics import jacobian_limit, phase, phase_derivative
from .integrate import (COMPLETED, POLE, PoleEvent, Path, concat, integrate, integrate_hp,
                        make_arc, make_neutral, make_ray)
from .model import (Branch, EquationSpec, Family, Polar, Sector, SectorKind, _sector_angles,
                    branch as make_branch, sector as make_sector)
from .series import CoefficientTable, compute_coefficients, evaluate, optimal_truncation_index

__all__ = [
    "DecayReport",
    "FitReport",
    "GridSpec",
    "InsufficientSamples",
    "NoOverlap",
    "OverlapReport",
    "PerturbationEscaped",
    "PoleField",
    "ScanRegion",
    "SeedOutsideSector",
    "SolutionPatch",
    "SweepReport",
    "build_tronquee",
    "overlap_agreement",
    "perturbation_decay",
    "pole_scan",
    "seed_table",
    "tritronquee_sweep_p3ii",
    "validate_asymptotics",
]


class SeedOutsideSector(ValueError):
    pass


class InsufficientSamples(ValueError):
    pass


class PerturbationEscaped(RuntimeError):
    pass


class NoOverlap(ValueError):
    pass


SEED_TOLERANCE = 1e-10
SECTOR_MARGIN = 0.05


def _c(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _resolve(eq: EquationSpec, br) -> Branch:
    return br if isinstance(br, Branch) else make_branch(eq, int(br))


def seed_table(eq: EquationSpec, br, order: int = 120, prec: int = 256) -> CoefficientTable:
    """Multiprecision coefficient table used for seeding."""
    return compute_coefficients(_resolve(eq, br), eq, order, backend="mp", prec=prec)


def _term(table: CoefficientTable, n: int, r: float) -> float:
    return float(abs(table.a[n])) * r ** (-n * float(table.step))


def _seed(table: CoefficientTable, p: Polar, N: Optional[int] = None,
          at: Optional[complex] = None):
    """Optimally truncated series at ``p``; returns (u, U, order, next-term estimate).

    ``at`` overrides the point itself (on the sheet of ``p``) when a path
    start must be matched to the last bit.
    """
    n_opt = optimal_truncation_index(table, p)
    if n_opt == 0:
        # u terminates; U may still carry lower-order terms
        n_opt = table.N
    n = n_opt if N is None else min(N, n_opt)
    u, U = evaluate(table, p.z if at is None else at, n, sheet=p.theta)
    nxt = _term(table, n + 1, p.r) if n + 1 <= table.N else 0.0
    return u, U, n, nxt


def _spread(fam: Family, lam: complex, path: Path, samples: int = 48) -> float:
    """max - min of Re(lam * phase) along the path: log of the worst amplification."""
    vals = []
    for seg in path.segments:
        for k in range(samples + 1):
            s = k / samples
            vals.append((lam * phase(fam, seg.x(s), sheet=seg.arg(s))).real)
    return max(vals) - min(vals)


def _bits_for(spread: float, target_digits: float = 16.0) -> int:
    return int(64 + math.ceil((spread + target_digits * math.log(10)) / math.log(2)))


# ----------------------------------------------------------------------------
# patches


@dataclass(frozen=True)
class GridSpec:
    n_rays: int = 9
    n_radii: int = 12
    r_inner: Optional[float] = None   # default 0.7 * R0
    r_outer: Optional[float] = None   # default R0
    margin: float = SECTOR_MARGIN

    def angles(self, sec: Sector) -> list[float]:
        lo, hi = sec.theta_lo + self.margin, sec.theta_hi - self.margin
        if self.n_rays == 1:
            return [sec.bisector]
        return [float(t) for t in np.linspace(lo, hi, self.n_rays)]

    def radii(self, R0: float) -> list[float]:
        lo = 0.7 * R0 if self.r_inner is None else self.r_inner
        hi = R0 if self.r_outer is None else self.r_outer
        return [float(r) for r in np.linspace(lo, hi, self.n_radii)]


@dataclass
class GridPoint:
    r: float
    theta: float
    u: Optional[complex]
    U: Optional[complex]

    @property
    def x(self) -> complex:
        return complex(Polar(self.r, self.theta).z)

    def to_dict(self) -> dict:
        return {"r": self.r, "theta": self.theta,
                "u": None if self.u is None else _c(self.u),
                "U": None if self.U is None else _c(self.U)}


@dataclass
class SolutionPatch:
    eq: EquationSpec
    branch: Branch
    sector: Sector
    anchor: Polar
    N_seed: int
    seed_error: float
    grid: list
    poles: list
    engine: str
    tol: float
    prec: Optional[int] = None

    @property
    def pole_free(self) -> bool:
        return not self.poles

    @property
    def R0(self) -> float:
        return self.anchor.r

    def values(self) -> np.ndarray:
        return np.array([np.nan if g.u is None else g.u for g in self.grid], dtype=complex)

    def to_dict(self) -> dict:
        return {"family": self.eq.family.value, "params": self.eq.describe(),
                "branch": self.branch.label, "sector": self.sector.to_dict(),
                "anchor": {"r": self.anchor.r, "theta": self.anchor.theta},
                "N_seed": self.N_seed, "seed_error_estimate": self.seed_error,
                "engine": self.engine, "tol": self.tol, "prec": self.prec,
                "pole_free": self.pole_free, "poles": [p.to_dict() for p in self.poles],
                "grid": [g.to_dict() for g in self.grid]}


def _auto_radius(table: CoefficientTable, R0: float, limit: float = SEED_TOLERANCE,
                 growth: float = 1.25, cap: float = 1e4) -> float:
    r = R0
    while r < cap:
        n = optimal_truncation_index(table, Polar(r, 0.0))
        if n == 0 or _term(table, n, r) < limit:
            return r
        r *= growth
    raise SeedOutsideSector(f"no seeding radius below {cap} meets the error target {limit}")


def build_tronquee(eq: EquationSpec, br, sec: Optional[Sector] = None,
                   R0: Optional[float] = None, N: Optional[int] = None,
                   grid: Optional[GridSpec] = None, tol: float = 1e-10,
                   engine: str = "hp", table: Optional[CoefficientTable] = None,
                   reverse: bool = False) -> SolutionPatch:
    """Seed at |x| = R0 on the sector bisector, follow the arc to each grid
    ray, then go radially through the grid radii.

    ``engine="hp"`` sizes the working precision from the amplification
    estimate of each path; ``engine="dp"`` uses the adaptive double-precision
    solver with pole pursuit.  ``reverse`` visits the rays in reverse order
    (values must not depend on it).
    """
    br = _resolve(eq, br)
    sec = sec or make_sector(eq, br.m, 0)
    grid = grid or GridSpec()
    table = table or seed_table(eq, br, order=80, prec=256)
    if N is not None and N > table.N:
        raise ValueError(f"N={N} exceeds the table order {table.N}")
    R0 = _auto_radius(table, R0 if R0 is not None else max(10.0, 2 * sec.r_min))
    if R0 <= sec.r_min:
        raise SeedOutsideSector(f"R0={R0} is not beyond the sector radius {sec.r_min}")
    anchor = Polar(R0, sec.bisector)
    u0, U0, n_seed, err = _seed(table, anchor, N)

    angles = grid.angles(sec)
    radii = grid.radii(R0)
    if any(r <= sec.r_min for r in radii) or not all(sec.theta_lo < t < sec.theta_hi for t in angles):
        raise SeedOutsideSector("grid extends outside the sector")
    inner = [R0] + sorted((r for r in radii if r < R0), reverse=True)
    outer = [R0] + sorted(r for r in radii if r > R0)
    lam = jacobian_limit(br, eq).closed_form[0]
    runner = _Runner(eq, lam, tol, engine)

    # shared arc pass: one sweep each way from the bisector, every ray angle a node
    at_R0 = {}
    for side in (sorted((t for t in angles if t < anchor.theta), reverse=True),
                 sorted(t for t in angles if t > anchor.theta)):
        if not side:
            continue
        marks = [anchor.theta] + side
        path = concat(*[make_arc(R0, a, b) for a, b in zip(marks, marks[1:])])
        for theta, v in zip(side, runner.run(path, u0, U0)):
            at_R0[theta] = v
    if anchor.theta in angles:
        at_R0[anchor.theta] = (u0, U0)

    points: dict = {}
    for theta in (list(reversed(angles)) if reverse else angles):
        start = at_R0.get(theta)
        if start is None:
            continue
        points[(R0, theta)] = start
        for nodes in (inner, outer):
            if len(nodes) < 2:
                continue
            path = concat(*[make_ray(theta, a, b) for a, b in zip(nodes, nodes[1:])])
            for r, v in zip(nodes[1:], runner.run(path, *start)):
                points[(r, theta)] = v
    pts = []
    for theta in angles:
        for r in radii:
            v = points.get((r, theta))
            pts.append(GridPoint(r, theta, None if v is None else complex(v[0]),
                                 None if v is None else complex(v[1])))
    return SolutionPatch(eq, br, sec, anchor, n_seed, err, pts, runner.poles, engine, tol,
                         runner.bits or None)


class _Runner:
    """Integrates one path with the chosen engine; returns values at segment ends.

    The list is cut short when the run stops at a pole, which is recorded.
    """

    def __init__(self, eq, lam, tol, engine):
        if engine not in ("hp", "dp"):
            raise ValueError(f"unknown engine {engine!r}")
        self.eq, self.lam, self.tol, self.engine = eq, lam, tol, engine
        self.poles: list = []
        self.bits = 0

    def _pole(self, ev: PoleEvent):
        if all(abs(p.x_pole_estimate - ev.x_pole_estimate) > 1e-6 for p in self.poles):
            self.poles.append(ev)

    def run(self, path: Path, u0, U0) -> list:
        if self.engine == "dp":
            tr = integrate(self.eq, path, complex(u0), complex(U0), tol=self.tol, pursue=10.0)
            if tr.pole is not None:
                self._pole(tr.pole)
            return [(e[2], e[3]) for e in tr.segment_ends]
        bits = _bits_for(_spread(self.eq.family, self.lam, path), -math.log10(self.tol) + 4)
        self.bits = max(self.bits, bits)
        with mpmath.workprec(bits):
            res = integrate_hp(self.eq, path, u0, U0, prec=bits)
        if res.status == POLE:
            comp = "u" if abs(res.u) >= abs(res.U) else "U"
            self._pole(PoleEvent(complex(res.x), comp, math.nan))
        return [(e[2], e[3]) for e in res.segment_ends]


# ----------------------------------------------------------------------------
# asymptotic validation

SEED_RATIO = {Family.P3i: 1.5, Family.P3ii: 2.0, Family.P4: 1.15}


@dataclass
class FitReport:
    radii: list
    log_errors: list
    slope: float
    predicted_slope: float
    residual: float
    N_cmp: int
    floor_limited: bool = False

    @property
    def deviation(self) -> float:
        return self.slope - self.predicted_slope

    def passed(self, band: float = 0.3) -> bool:
        return self.floor_limited or abs(self.deviation) <= band

    def to_dict(self) -> dict:
        return {"radii": self.radii, "log_errors": self.log_errors, "slope": self.slope,
                "predicted_slope": self.predicted_slope, "deviation": self.deviation,
                "fit_residual": self.residual, "N_cmp": self.N_cmp,
                "floor_limited": self.floor_limited}


def numeric_on_bisector(eq: EquationSpec, br: Branch, table: CoefficientTable, target: Polar,
                        ratio: Optional[float] = None, prec: int = 160):
    """The tronquee solution at ``target``, reached along a curve where
    neither mode changes size, from an optimally truncated seed farther out."""
    ratio = ratio or SEED_RATIO[eq.family]
    lam = jacobian_limit(br, eq).closed_form[0]
    path = make_neutral(eq.family, lam, target, ratio * target.r)
    u0, U0, _, _ = _seed(table, Polar(abs(path.start), path.start_arg), at=path.start)
    with mpmath.workprec(prec):
        res = integrate_hp(eq, path, u0, U0, prec=prec)
    if res.status != COMPLETED:
        raise RuntimeError(f"integration to {target} stopped: {res.status} {res.message}")
    return res.u, res.U, res.x, res.arg


def validate_asymptotics(patch: SolutionPatch, table: CoefficientTable,
                         radii: Sequence[float], N_cmp: int, ratio: Optional[float] = None,
                         prec: int = 160) -> FitReport:
    """Slope of log|u - S_N| / |x|**p_u against log|x| on the sector bisector."""
    radii = [float(r) for r in radii]
    if len(radii) < 6:
        raise InsufficientSamples("need at least six radii")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    if N_cmp >= table.N:
        raise ValueError("table order must exceed N_cmp")
    if radii[0] <= patch.sector.r_min:
        raise SeedOutsideSector("radii must lie inside the patch sector")
    br, eq = patch.branch, patch.eq
    theta = patch.sector.bisector
    floor = 2.0 ** (-prec + 16)
    errs = []
    with mpmath.workprec(max(prec, table.prec)):
        for r in radii:
            u, _, x, arg = numeric_on_bisector(eq, br, table, Polar(r, theta), ratio, prec)
            s, _ = evaluate(table, x, N_cmp, sheet=arg)
            errs.append(float(abs(u - s)) / r ** float(br.p_u))
    floor_limited = max(errs) < 1e3 * floor
    logs = [math.log(max(e, 1e-300)) for e in errs]
    lr = np.log(radii)
    A = np.column_stack([np.ones_like(lr), lr])
    coef, res, *_ = np.linalg.lstsq(A, np.array(logs), rcond=None)
    resid = float(np.sqrt(res[0] / len(radii))) if len(res) else 0.0
    predicted = -(N_cmp + 1) * float(table.step)
    return FitReport(radii, logs, float(coef[1]), predicted, resid, N_cmp, floor_limited)


# ----------------------------------------------------------------------------
# perturbation decay

DECAY_WINDOW = {Family.P3i: (20.0, 12.0), Family.P3ii: (40.0, 20.0), Family.P4: (7.0, 5.0)}


@dataclass
class DecayReport:
    theta: float
    r_window: tuple
    eps: float
    radii: list
    log_du: list
    predicted_rate: list
    measured_rate: list
    kappa: float
    offset: float
    prefactor_exponent: float
    eigenvalue: complex
    escaped: bool = False
    log_du_fit: list = field(default_factory=list)

    @property
    def relative_deviation(self) -> float:
        return abs(self.kappa - 1.0)

    def to_dict(self) -> dict:
        return {"ray": {"theta": self.theta, "r_from": self.r_window[0],
                        "r_to": self.r_window[1]},
                "eps": self.eps, "radii": self.radii, "log_du": self.log_du,
                "predicted_rate": self.predicted_rate, "measured_rate": self.measured_rate,
                "rate_ratio": self.kappa, "relative_deviation": self.relative_deviation,
                "offset": self.offset, "prefactor_exponent": self.prefactor_exponent,
                "eigenvalue": _c(self.eigenvalue), "escaped": self.escaped}


def _re_phase(fam, lam, r, theta) -> float:
    return (lam * phase(fam, Polar(r, theta))).real


def perturbation_decay(eq: EquationSpec, br, theta: Optional[float] = None,
                       eps: Optional[float] = None, r_window: Optional[tuple] = None,
                       which_mode: str = "decaying", samples: int = 25,
                       burn_in: float = 4.0, prec: int = 160,
                       expect_growth: bool = False) -> DecayReport:
    """Integrate the tronquee solution and an eps-perturbed copy along a ray
    and fit log|du| = c + kappa*Re(lambda*phase) + d*log|x|.

    The integration direction is chosen so that the selected mode dominates
    the difference; a burn-in stretch lets the other mode die out first.
    kappa = 1 means the measured rate equals the predicted one.
    """
    br = _resolve(eq, br)
    fam = eq.family
    if theta is None:
        theta = make_sector(eq, br.m, 0).bisector
    a, b = r_window or DECAY_WINDOW[fam]
    lams = jacobian_limit(br, eq).closed_form
    # mode that decays as |x| grows along the ray
    decays = min(lams, key=lambda l: _re_phase(fam, l, 2 * max(a, b), theta)
                 - _re_phase(fam, l, max(a, b), theta))
    lam = decays if which_mode == "decaying" else [l for l in lams if l != decays][0]
    hi, lo = max(a, b), min(a, b)
    inward = which_mode == "decaying"
    # burn-in: the chosen mode must gain e**burn_in before the fit window
    start = hi if inward else lo
    g0 = _re_phase(fam, lam, start, theta)
    step = 0.01 * (hi - lo)
    r_s = start
    while abs(_re_phase(fam, lam, r_s, theta) - g0) < burn_in:
        r_s = r_s + step if inward else r_s - step
        if r_s <= 0:
            raise ValueError("burn-in leaves the punctured plane")
    fit_r = np.linspace(hi, lo, samples + 1) if inward else np.linspace(lo, hi, samples + 1)
    nodes = [r_s] + [float(r) for r in fit_r]
    path = concat(*[make_ray(theta, p, q) for p, q in zip(nodes, nodes[1:])])
    table = seed_table(eq, br, order=80, prec=256)
    u0, U0, _, _ = _seed(table, Polar(r_s, theta))
    growth = abs(_re_phase(fam, lam, nodes[-1], theta) - _re_phase(fam, lam, r_s, theta))
    scale = max(float(abs(u0)), 1e-300)
    if eps is None:
        eps = 1e-4 * scale * math.exp(-growth)
    if eps > 1e-4 * scale:
        raise ValueError("eps must not exceed 1e-4 * |u| at the anchor")
    bits = max(prec, _bits_for(growth, 10.0 - math.log10(eps / scale)))
    with mpmath.workprec(bits):
        base = integrate_hp(eq, path, u0, U0, prec=bits)
        pert = integrate_hp(eq, path, u0 + eps, U0, prec=bits)
        du = [float(abs(p[2] - q[2])) for q, p in zip(base.segment_ends, pert.segment_ends)]
    du = du[1:]
    rr = np.array(nodes[2:])
    escaped = (base.status != COMPLETED or pert.status != COMPLETED
               or max(du) > 0.1 * max(1.0, float(np.max(np.abs([complex(e[2]) for e in base.segment_ends])))))
    if escaped and not expect_growth:
        raise PerturbationEscaped("the perturbation grew to O(1)")
    ph = np.array([_re_phase(fam, lam, r, theta) for r in rr])
    A = np.column_stack([np.ones_like(rr), ph, np.log(rr)])
    logs = np.log(np.maximum(du, 1e-300))
    coef, *_ = np.linalg.lstsq(A, logs, rcond=None)
    kappa = float(coef[1])
    pred = [float((lam * phase_derivative(fam, Polar(r, theta)) * np.exp(1j * theta)).real)
            for r in rr]
    return DecayReport(float(theta), (float(nodes[1]), float(nodes[-1])), float(eps),
                       [float(r) for r in rr], [float(v) for v in logs], pred,
                       [kappa * p for p in pred], kappa, float(coef[0]), float(coef[2]),
                       complex(lam), escaped, [float(v) for v in A @ coef])


# ----------------------------------------------------------------------------
# overlap uniqueness


@dataclass
class OverlapReport:
    k: int
    probe: Polar
    du: float
    dU: float
    neglected_term: float
    floor: float
    bound_constant: float
    seeds: list

    @property
    def separation(self) -> float:
        if self.neglected_term == 0:
            return math.inf
        return self.neglected_term / max(self.du, 1e-300)

    def passed(self, limit: float = 1e-10, ratio: float = 1e3) -> bool:
        return self.du <= max(self.floor, limit) and self.separation >= ratio

    def to_dict(self) -> dict:
        sep = self.separation
        return {"k": self.k, "probe": {"r": self.probe.r, "theta": self.probe.theta},
                "du": self.du, "dU": self.dU, "largest_neglected_term": self.neglected_term,
                "separation": None if math.isinf(sep) else sep, "solver_floor": self.floor,
                "bound_constant": self.bound_constant,
                "seeds": [{"r": s.r, "theta": s.theta} for s in self.seeds]}


def overlap_agreement(eq: EquationSpec, br, k: int = 0, N: int = 4, R_probe: float = 20.0,
                      R_seed: Optional[float] = None, eta: float = SECTOR_MARGIN,
                      probe_theta: Optional[float] = None, tol: float = 1e-13) -> OverlapReport:
    """Compare the tronquee solutions of two adjacent existence sectors at a
    probe point of their common region.

    Each solution is seeded just inside its own sector at the angle nearest
    the probe, then carried along the arc |x| = R_seed and the probe ray.
    """
    br = _resolve(eq, br)
    fam = eq.family
    s0 = make_sector(eq, br.m, k)
    lo1, hi1 = _sector_angles(fam, br.m, k + 1, SectorKind.S)
    s1 = Sector(lo1, hi1, s0.r_min, SectorKind.S, fam, br.m)
    lo, hi = max(s0.theta_lo, s1.theta_lo) - eta, min(s0.theta_hi, s1.theta_hi) + eta
    if lo >= hi:
        raise NoOverlap("the sectors do not meet")
    if probe_theta is None:
        probe_theta = 0.5 * (lo + hi)
    if not lo < probe_theta < hi:
        raise NoOverlap(f"probe angle {probe_theta} is outside the common region ({lo}, {hi})")
    R_seed = R_seed or 2.0 * R_probe
    table = seed_table(eq, br, order=150, prec=256)
    finals, seeds = [], []
    for s in (s0, s1):
        th = min(max(probe_theta, s.theta_lo + eta), s.theta_hi - eta)
        p = Polar(R_seed, th)
        u0, U0, _, _ = _seed(table, p)
        legs = [make_arc(R_seed, th, probe_theta)] if th != probe_theta else []
        path = concat(*legs, make_ray(probe_theta, R_seed, R_probe))
        tr = integrate(eq, path, complex(u0), complex(U0), tol=tol)
        if not tr.completed:
            raise RuntimeError(f"overlap leg stopped: {tr.status}")
        finals.append(tr.final)
        seeds.append(p)
    du = abs(finals[0][0] - finals[1][0])
    dU = abs(finals[0][1] - finals[1][1])
    probe = Polar(R_probe, probe_theta)
    n_opt = optimal_truncation_index(table, probe)
    scale = R_probe ** float(br.p_u)
    neglected = max([_term(table, n, R_probe) for n in range(N + 1, max(n_opt, N + 1) + 1)],
                    default=0.0) * scale
    size = max(1.0, abs(finals[0][0]))
    floor = 100 * tol * size
    lam = jacobian_limit(br, eq).decaying(1.0)
    decay = math.exp(_re_phase(fam, lam, R_probe, probe_theta))
    return OverlapReport(k, probe, float(du), float(dU), float(neglected), floor,
                         float(du / decay) if decay else math.inf, seeds)


# ----------------------------------------------------------------------------
# the P3ii sweep across a cut


@dataclass
class SweepReport:
    m: int
    cut_angle: float
    R: float
    N: int
    margin: float
    checkpoints: list
    deviations: list
    pole_free: bool
    status: str
    seed_order: int

    @property
    def max_deviation(self) -> float:
        return max(self.deviations) if self.deviations else math.inf

    def passed(self, limit: float = 1e-3) -> bool:
        return self.pole_free and len(self.deviations) == len(self.checkpoints) \
            and self.max_deviation < limit

    def to_dict(self) -> dict:
        return {"m": self.m, "cut_angle": self.cut_angle, "R": self.R, "N": self.N,
                "margin": self.margin, "checkpoints": self.checkpoints,
                "relative_deviation": self.deviations, "max_relative_deviation": self.max_deviation,
                "pole_free": self.pole_free, "status": self.status, "seed_order": self.seed_order}


def tritronquee_sweep_p3ii(eq: EquationSpec, m: int = 0, cut_angle: float = -math.pi,
                           R: float = 30.0, N: int = 6, margin: float = 0.1,
                           checkpoints: int = 12, prec: int = 200) -> SweepReport:
    """Carry the series value at arg = cut + margin around |x| = R up to
    arg = cut + 3*pi - margin and compare with the order-N series."""
    if eq.family is not Family.P3ii:
        raise ValueError("the sweep is defined for the P3ii family")
    br = make_branch(eq, m)
    table = seed_table(eq, br, order=80, prec=256)
    lo, hi = cut_angle + margin, cut_angle + 3 * math.pi - margin
    marks = np.linspace(lo, hi, checkpoints + 1)
    path = concat(*[make_arc(R, a, b) for a, b in zip(marks, marks[1:])])
    start = Polar(R, lo)
    u0, U0, n_seed, _ = _seed(table, start)
    with mpmath.workprec(max(prec, table.prec)):
        res = integrate_hp(eq, path, u0, U0, prec=prec)
        devs = []
        for x, arg, u, _ in res.segment_ends:
            s, _ = evaluate(table, x, N, sheet=arg)
            devs.append(float(abs(u - s) / abs(s)))
    return SweepReport(m, cut_angle, R, N, margin, [float(t) for t in marks[1:]], devs,
                       res.status == COMPLETED, res.status, n_seed)


# ----------------------------------------------------------------------------
# pole scans


@dataclass(frozen=True)
class ScanRegion:
    R0: float = 15.0
    theta_lo: float = -0.6
    theta_hi: float = 0.6
    n_rays: int = 7
    r_inner: float = 6.0
    anchor_theta: float = 0.0

    def angles(self) -> list[float]:
        return [float(t) for t in np.linspace(self.theta_lo, self.theta_hi, self.n_rays)]


@dataclass
class ScannedPole:
    event: PoleEvent
    ray: float
    refined: Optional[complex] = None

    @property
    def refinement_change(self) -> float:
        if self.refined is None:
            return math.inf
        return abs(self.refined - self.event.x_pole_estimate) / abs(self.event.x_pole_estimate)

    def stable(self, rel: float = 1e-4) -> bool:
        return self.refinement_change < rel

    def to_dict(self) -> dict:
        out = self.event.to_dict()
        out.update({"ray": self.ray, "refined": None if self.refined is None else _c(self.refined),
                    "refinement_change": None if self.refined is None else self.refinement_change})
        return out


@dataclass
class PoleField:
    detuning: complex
    region: ScanRegion
    poles: list
    max_abs_u: float
    paths: list = field(default_factory=list)

    @property
    def stable_poles(self) -> list:
        return [p for p in self.poles if p.stable()]

    def to_dict(self) -> dict:
        r = self.region
        return {"detuning": _c(self.detuning),
                "region": {"R0": r.R0, "theta_lo": r.theta_lo, "theta_hi": r.theta_hi,
                           "n_rays": r.n_rays, "r_inner": r.r_inner,
                           "anchor_theta": r.anchor_theta},
                "poles": [p.to_dict() for p in self.poles], "stable_count": len(self.stable_poles),
                "max_abs_u": self.max_abs_u}


def _scan_path(region: ScanRegion, theta: float) -> Path:
    ray = make_ray(theta, region.R0, region.r_inner)
    if theta == region.anchor_theta:
        return ray
    return concat(make_arc(region.R0, region.anchor_theta, theta), ray)


def pole_scan(eq: EquationSpec, br, detuning: complex = 0.5,
              region: Optional[ScanRegion] = None, tol: float = 1e-11, pursue: float = 10.0,
              confirm: bool = True) -> PoleField:
    """Integrate a seed detuned by ``detuning`` (added to u) over the region.

    A pole counts as refinement-stable when a rerun at tol/32 with blow-up
    threshold 1e10 reproduces its location to relative 1e-4.
    """
    br = _resolve(eq, br)
    region = region or ScanRegion()
    table = seed_table(eq, br, order=60, prec=128)
    u0, U0, _, _ = _seed(table, Polar(region.R0, region.anchor_theta))
    u0, U0 = complex(u0) + complex(detuning), complex(U0)
    poles, umax, paths = [], 0.0, []
    for theta in region.angles():
        path = _scan_path(region, theta)
        tr = integrate(eq, path, u0, U0, tol=tol, pursue=pursue)
        umax = max(umax, float(np.max(np.abs(tr.u))))
        paths.append([complex(z) for z in tr.x[:: max(1, len(tr.x) // 200)]])
        if tr.pole is None:
            continue
        sp = ScannedPole(tr.pole, theta)
        if confirm:
            fine = integrate(eq, path, u0, U0, tol=tol / 32, pursue=pursue, blowup=1e10)
            if fine.pole is not None:
                sp.refined = fine.pole.x_pole_estimate
        poles.append(sp)
    return PoleField(complex(detuning), region, poles, umax, paths)
