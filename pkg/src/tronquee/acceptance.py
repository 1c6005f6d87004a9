"""The ten acceptance checks, each returning a :class:`CheckResult`.

Shared by ``tests/test_acceptance.py`` and the ``selftest`` subcommand.
Tolerances are fixed here; a failing check reports its measurements rather
than raising.
"""

from __future__ import annotations

import cmath
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .dynamics import wasow_check
from .exact import I, Cyclo
from .experiments import (GridSpec, build_tronquee, overlap_agreement, perturbation_decay,
                          pole_scan, seed_table, tritronquee_sweep_p3ii, validate_asymptotics)
from .integrate import integrate, make_ray
from .model import BRANCH_RANGE, Family, make_equation, branch
from .series import compute_coefficients, residual_order


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    seconds: float = 0.0
    budget: float = math.inf
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:2d}. {self.title} ({self.seconds:.1f}s / {self.budget:g}s)"

    def to_dict(self) -> dict:
        return {"criterion": self.number, "title": self.title, "passed": self.passed,
                "seconds": self.seconds, "budget": self.budget, "detail": self.detail}


def _rand_q(rng: random.Random, span: int = 9, nonzero: bool = False) -> Fraction:
    while True:
        q = Fraction(rng.randint(-span, span), rng.randint(1, span))
        if q or not nonzero:
            return q


def _rand_gauss(rng: random.Random) -> Cyclo:
    return Cyclo.gaussian(_rand_q(rng), _rand_q(rng))


GENERIC = {Family.P3i: {"alpha": 1, "beta": 2},
           Family.P3ii: {"beta": Fraction(1, 2)},
           Family.P4: {"kappa0": Fraction(1, 2), "kappa_inf": Fraction(1, 3)}}


def leading_values(eq, m):
    """(a0, A0) for each branch, written out case by case."""
    fam = eq.family
    if fam is Family.P3i:
        a0 = I ** m
        return a0, -(a0 * a0)
    if fam is Family.P3ii:
        w = Cyclo.zeta_power(4) ** m
        return w, -w
    k0, ki = eq.kappa0, eq.kappa_inf
    return {1: (Cyclo.rational(Fraction(-2, 3)), Cyclo.rational(Fraction(1, 3))),
            2: (Cyclo.rational(-2), -ki / 2),
            3: (k0, Cyclo.rational(1)),
            4: (-k0, ki / 2)}[m]


def check_leading() -> dict:
    rows = []
    for fam, params in GENERIC.items():
        eq = make_equation(fam, params)
        for m in BRANCH_RANGE[fam]:
            br = branch(eq, m)
            want = leading_values(eq, m)
            rows.append({"branch": br.label, "ok": (br.a0, br.A0) == want,
                         "a0": str(br.a0), "A0": str(br.A0)})
    return {"passed": len(rows) == 11 and all(r["ok"] for r in rows), "rows": rows}


def check_printed_coefficients(draws: int = 20, seed: int = 2) -> dict:
    rng = random.Random(seed)
    bad = []
    for _ in range(draws):
        k0, ki = _rand_q(rng, nonzero=True), _rand_q(rng)
        eq4 = make_equation("p4", kappa0=k0, kappa_inf=ki)
        al = -k0 + 2 * ki + 1
        t = {m: compute_coefficients(m, eq4, 2, "exact") for m in (1, 2, 3, 4)}
        half = Fraction(1, 2)
        expect = [
            ("a1 case 1", t[1].a[1], al),
            ("a1 case 2", t[2].a[1], -al),
            ("A1 case 1", t[1].A[1], half - k0 + ki / 2),
            ("A0 case 2", t[2].A[0], -ki / 2),
            ("A1 case 3", t[3].A[1], -(1 - 2 * k0 + ki) / 2),
            ("A0 case 4", t[4].A[0], ki / 2),
        ]
        for name, got, want in expect:
            if got != want:
                bad.append({"name": name, "got": str(got), "want": str(want)})
    return {"passed": not bad, "mismatches": bad[:10], "draws": draws}


FAMILY_KEYS = {Family.P3i: ("alpha", "beta"), Family.P3ii: ("beta",),
               Family.P4: ("kappa0", "kappa_inf")}


def random_equations(draws: int = 20, seed: int = 3):
    rng = random.Random(seed)
    for fam, keys in FAMILY_KEYS.items():
        for _ in range(draws):
            yield make_equation(fam, {k: _rand_gauss(rng) for k in keys})


def check_residuals(N: int = 20, draws: int = 20, seed: int = 3,
                    oracle: Callable = None) -> dict:
    """``oracle(eq, m, N, order)`` returns False when it disagrees with ``order``."""
    worst, count, disagreements = math.inf, 0, []
    for eq in random_equations(draws, seed):
        for m in BRANCH_RANGE[eq.family]:
            if branch(eq, m).trivial_u:
                continue
            r = residual_order(m, eq, N)
            worst = min(worst, r)
            count += 1
            if oracle is not None and not oracle(eq, m, N, r):
                disagreements.append(branch(eq, m).label)
    return {"passed": worst >= N and not disagreements, "min_residual_order": worst,
            "cases": count, "oracle_disagreements": disagreements}


def check_eigenvalues(tol: float = 1e-12) -> dict:
    rows = []
    for fam, params in GENERIC.items():
        eq = make_equation(fam, params)
        for m in BRANCH_RANGE[fam]:
            rep = wasow_check(branch(eq, m), eq)
            rows.append({"branch": rep["branch"], "status": rep["status"],
                         "max_error": rep.get("max_error"), "nonzero": rep.get("nonzero")})
    ok = len(rows) == 11 and all(r["status"] == "pass" and r["max_error"] <= tol for r in rows)
    return {"passed": ok, "rows": rows}


EXACT_RUNS = (
    # (name, family, params, arg, r0, r1, u(x), U(x), relative)
    ("P3i u=1", "p3i", {"alpha": 1, "beta": -1}, math.pi / 2, 10.0, 40.0,
     lambda x: 1.0, lambda x: -1 - 2 / x, False),
    ("P4 u=-2x", "p4", {"kappa0": 1, "kappa_inf": 0}, math.pi / 4, 5.0, 30.0,
     lambda x: -2 * x, lambda x: 0.0, True),
    ("P4 u=-2x/3", "p4", {"kappa0": Fraction(1, 3), "kappa_inf": Fraction(-1, 3)}, 0.0, 5.0,
     30.0, lambda x: -2 * x / 3, lambda x: x / 3, True),
)


def check_exact_solutions(limit: float = 1e-8, tol: float = 1e-12) -> dict:
    rows = []
    for name, fam, params, arg, r0, r1, uf, Uf, rel in EXACT_RUNS:
        eq = make_equation(fam, params)
        x0 = cmath.rect(r0, arg)
        tr = integrate(eq, make_ray(arg, r0, r1), uf(x0), Uf(x0), tol=tol)
        want = np.array([uf(x) for x in tr.x], dtype=complex)
        err = np.abs(tr.u - want)
        if rel:
            err = err / np.abs(want)
        rows.append({"name": name, "status": tr.status, "arg": arg,
                     "max_error": float(err.max()), "relative": rel})
    return {"passed": all(r["status"] == "Completed" and r["max_error"] <= limit for r in rows),
            "rows": rows}


SLOPE_CASES = (("p3i", {"alpha": 1, "beta": 2}, 0),
               ("p3ii", {"beta": "-2+i"}, 0),
               ("p4", {"kappa0": Fraction(1, 2), "kappa_inf": Fraction(1, 3)}, 1))


def check_slopes(band: float = 0.3, radii=None) -> dict:
    radii = list(np.geomspace(15, 40, 7)) if radii is None else radii
    rows = []
    for fam, params, m in SLOPE_CASES:
        eq = make_equation(fam, params)
        table = seed_table(eq, m, order=120, prec=256)
        patch = build_tronquee(eq, m, grid=GridSpec(n_rays=1, n_radii=6), table=table)
        for N in (3, 4, 5, 6):
            fr = validate_asymptotics(patch, table, radii, N)
            rows.append({"family": fam, "N_cmp": N, "slope": fr.slope,
                         "predicted": fr.predicted_slope, "deviation": fr.deviation,
                         "ok": abs(fr.deviation) <= band})
    return {"passed": all(r["ok"] for r in rows), "rows": rows}


def check_decay(rel: float = 0.05) -> dict:
    p3 = perturbation_decay(make_equation("p3i", alpha=1, beta=2), 0, theta=0.0)
    p4 = perturbation_decay(make_equation("p4", kappa0=Fraction(1, 2),
                                          kappa_inf=Fraction(1, 3)), 1, theta=math.pi / 4)
    rows = [{"case": "P3i m=0 arg 0", "rate_ratio": p3.kappa,
             "predicted_rate": p3.predicted_rate[0], "measured_rate": p3.measured_rate[0]},
            {"case": "P4 case 1 arg pi/4", "rate_ratio": p4.kappa,
             "predicted_rate_at_end": p4.predicted_rate[-1],
             "measured_rate_at_end": p4.measured_rate[-1]}]
    ok = (abs(p3.kappa - 1) <= rel and abs(p4.kappa - 1) <= rel
          and abs(p3.predicted_rate[0] + 2) < 1e-12)
    return {"passed": ok, "rows": rows}


def check_overlap() -> dict:
    rep = overlap_agreement(make_equation("p3i", alpha=1, beta=2), 0, k=0, N=4, R_probe=20.0)
    return {"passed": rep.passed(), **rep.to_dict()}


def check_contrast() -> dict:
    eq = make_equation("p3i", alpha=1, beta=2)
    clean = pole_scan(eq, 0, 0.0)
    detuned = pole_scan(eq, 0, 0.5)
    return {"passed": not clean.poles and len(detuned.stable_poles) >= 1,
            "tronquee_poles": len(clean.poles), "tronquee_max_abs_u": clean.max_abs_u,
            "detuned_poles": len(detuned.poles), "detuned_stable": len(detuned.stable_poles),
            "example": detuned.stable_poles[0].to_dict() if detuned.stable_poles else None}


def check_sweep(limit: float = 1e-3) -> dict:
    rep = tritronquee_sweep_p3ii(make_equation("p3ii", beta=Fraction(1, 2)), 0, -math.pi, 30.0, 6)
    return {"passed": rep.passed(limit), **rep.to_dict()}


CHECKS = (
    (1, "leading data of all 11 branches", check_leading, 1),
    (2, "printed low-order coefficients", check_printed_coefficients, 1),
    (3, "formal residual order >= 20", check_residuals, 60),
    (4, "Jacobian eigenvalue anchors", check_eigenvalues, 1),
    (5, "exact-solution integration", check_exact_solutions, 10),
    (6, "asymptotic error slopes", check_slopes, 120),
    (7, "perturbation decay rates", check_decay, 60),
    (8, "overlap uniqueness", check_overlap, 120),
    (9, "tronquee vs detuned pole contrast", check_contrast, 60),
    (10, "P3ii tritronquee sweep", check_sweep, 120),
)


def run_check(number: int, **kw) -> CheckResult:
    num, title, fn, budget = CHECKS[number - 1]
    t0 = time.perf_counter()
    detail = fn(**kw)
    dt = time.perf_counter() - t0
    return CheckResult(num, title, bool(detail["passed"]) and dt <= budget, dt, budget, detail)


def run_all(numbers=None) -> list[CheckResult]:
    return [run_check(n) for n in (numbers or range(1, 11))]
