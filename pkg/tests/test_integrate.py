import cmath
import csv
import io
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tronquee.dynamics import d2u_from_system, rhs, scalar_residual
from tronquee.integrate import (DiscontinuousJoin, NoBlowupSignature, ZeroXOnPath, concat,
                                estimate_pole, integrate, integrate_hp, make_arc, make_line,
                                make_ray)
from tronquee.model import make_equation

pi = math.pi
P3I_CONST = make_equation("p3i", alpha=1, beta=-1)  # u = 1, U = -1 - 2/x
P4_LINEAR = make_equation("p4", kappa0=1, kappa_inf=0)  # u = -2x, U = 0


def test_path_endpoints():
    p = make_ray(0, 10, 20)
    assert p.start == 10 and p.end == 20
    a = make_arc(10, 0, pi / 2)
    assert a.end == pytest.approx(10j) and a.end_arg == pytest.approx(pi / 2)


def test_discontinuous_join():
    with pytest.raises(DiscontinuousJoin):
        concat(make_ray(0, 10, 20), make_arc(15, 0, 1))
    with pytest.raises(DiscontinuousJoin):
        concat(make_ray(0, 10, 20), make_arc(20, 2 * pi, 2 * pi + 1))
    p = concat(make_ray(0, 10, 20), make_arc(20, 0, 1), make_ray(1, 20, 5))
    assert len(p) == 3 and p.min_radius() == 5


@given(st.floats(-6, 6), st.floats(-6, 6), st.floats(1, 30))
def test_arg_tracking_is_continuous(t0, t1, r):
    p = concat(make_arc(r, t0, t1), make_ray(t1, r, r + 1))
    assert p.end_arg == pytest.approx(t1)
    assert p.total_arg_variation() == pytest.approx(abs(t1 - t0), abs=1e-9)


def test_line_through_origin_rejected():
    with pytest.raises(ZeroXOnPath):
        make_line(-1, 1)


def _max_dev(tr, uf, rel):
    want = np.array([uf(x) for x in tr.x])
    err = np.abs(tr.u - want)
    return (err / np.abs(want)).max() if rel else err.max()


def test_constant_solution_on_real_ray_hp():
    r = integrate_hp(P3I_CONST, make_ray(0, 10, 40), 1, Fraction(-6, 5), prec=256,
                     keep_samples=True)
    assert r.status == "Completed"
    assert max(abs(s[3] - 1) for s in r.samples) <= 1e-8


def test_linear_solution_on_real_ray_hp():
    # amplification along the real axis is exp(30**2 - 5**2); the working
    # precision must cover it
    bits = 64 + int((30 ** 2 - 5 ** 2) / math.log(2)) + 60
    r = integrate_hp(P4_LINEAR, make_ray(0, 5, 30), -10, 0, prec=bits, keep_samples=True)
    assert r.status == "Completed"
    assert max(abs(s[3] + 2 * s[1]) / abs(2 * s[1]) for s in r.samples) <= 1e-8


@pytest.mark.parametrize("eq, x0, uf, Uf", [
    (P3I_CONST, 10.0, lambda x: 1.0, lambda x: -1 - 2 / x),
    (P4_LINEAR, 5.0, lambda x: -2 * x, lambda x: 0.0),
])
def test_double_precision_real_ray_instability_is_reported(eq, x0, uf, Uf):
    r1 = 40.0 if eq is P3I_CONST else 30.0
    tr = integrate(eq, make_ray(0, x0, r1), uf(x0), Uf(x0), tol=1e-12)
    # roundoff is amplified far beyond 1e-8 here; the solver must say so
    assert tr.status == "PoleDetected"
    assert math.isfinite(abs(tr.pole.x_pole_estimate))


def test_exact_solutions_on_neutral_rays():
    x0 = 10j
    tr = integrate(P3I_CONST, make_ray(pi / 2, 10, 40), 1, -1 - 2 / x0, tol=1e-12)
    assert tr.completed and _max_dev(tr, lambda x: 1.0, False) <= 1e-8
    x0 = cmath.rect(5, pi / 4)
    tr = integrate(P4_LINEAR, make_ray(pi / 4, 5, 30), -2 * x0, 0, tol=1e-12)
    assert tr.completed and _max_dev(tr, lambda x: -2 * x, True) <= 1e-8


def test_local_errors_within_tolerance():
    tr = integrate(make_equation("p3i", alpha=1, beta=2), make_arc(8, -0.5, 0.5), 1.02, -1.0,
                   tol=1e-10)
    assert tr.completed
    assert np.all(np.diff(tr.t) > 0)
    assert tr.err.max() <= 1e-10


def test_order_on_linear_solution():
    x0 = cmath.rect(5, pi / 4)
    errs = []
    for tol in (1e-7, 1e-7 / 32):
        tr = integrate(P4_LINEAR, make_ray(pi / 4, 5, 30), -2 * x0, 0, tol=tol)
        errs.append(_max_dev(tr, lambda x: -2 * x, False))
    assert errs[0] / errs[1] >= 16


def test_reversal_returns_to_start():
    eq = make_equation("p3i", alpha=1, beta=2)
    tol = 1e-11
    # Re(x) is constant along this path, so neither mode amplifies roundoff
    path = make_ray(pi / 2, 12, 20)
    u0, U0 = 1.01 + 0.01j, -1.0 + 0.02j
    fwd = integrate(eq, path, u0, U0, tol=tol)
    assert fwd.completed
    back = integrate(eq, path.reversed(), *fwd.final, tol=tol)
    assert back.completed
    assert abs(back.final[0] - u0) <= 10 * tol * max(1, abs(u0))
    assert abs(back.final[1] - U0) <= 10 * tol * max(1, abs(U0))


def test_second_order_equation_recovered_along_trajectory():
    eq = make_equation("p4", kappa0=Fraction(1, 2), kappa_inf=Fraction(1, 3))
    tol = 1e-10
    tr = integrate(eq, make_arc(3, 0.1, 0.7), -2.1 + 0.1j, 0.05, tol=tol)
    assert tr.completed
    for x, u, U in zip(tr.x, tr.u, tr.U):
        du, _ = rhs(eq, x, u, U)
        res = scalar_residual(eq, x, u, du, d2u_from_system(eq, x, u, U))
        assert abs(res) <= 100 * tol * max(1.0, abs(u) ** 3)


def test_simple_pole_fit():
    xp = 2.5 + 0.7j
    xs = np.linspace(0, 0.999, 40) * (xp - 1) + 1
    ev = estimate_pole(xs, 1 / (xs - xp))
    assert abs(ev.x_pole_estimate - xp) < 1e-6
    assert ev.fit_quality < 1e-8


def test_double_pole_fit_is_flagged():
    xp = 2.5 + 0.7j
    xs = np.linspace(0, 0.999, 40) * (xp - 1) + 1
    simple = estimate_pole(xs, 1 / (xs - xp))
    double = estimate_pole(xs, 1 / (xs - xp) ** 2)
    assert double.fit_quality > 1e3 * max(simple.fit_quality, 1e-15)


def test_no_blowup_signature():
    xs = np.linspace(1, 2, 10)
    with pytest.raises(NoBlowupSignature):
        estimate_pole(xs, np.exp(-xs))


def _blowup(threshold, tol):
    eq = make_equation("p3i", alpha=1, beta=2)
    return integrate(eq, make_ray(0, 10, 30), 1.5, -1.0, tol=tol, blowup=threshold)


def test_pole_detected_and_refinement_stable():
    a = _blowup(1e8, 1e-10)
    assert a.status == "PoleDetected" and math.isfinite(abs(a.pole.x_pole_estimate))
    b = _blowup(1e10, 1e-10)
    c = _blowup(1e8, 1e-10 / 32)
    for other in (b, c):
        assert other.status == "PoleDetected"
        rel = abs(other.pole.x_pole_estimate - a.pole.x_pole_estimate) / abs(a.pole.x_pole_estimate)
        assert rel < 1e-4
    assert max(abs(a.u[-1]), abs(a.U[-1])) >= 1e8


def test_csv_columns():
    tr = integrate(P3I_CONST, make_ray(pi / 2, 10, 11), 1, -1 - 2 / 10j, tol=1e-10)
    rows = list(csv.reader(io.StringIO(tr.to_csv())))
    assert rows[0] == ["t", "re_x", "im_x", "arg_x_tracked", "re_u", "im_u", "re_U", "im_U", "err"]
    assert len(rows) == len(tr) + 1
    assert float(rows[-1][3]) == pytest.approx(pi / 2)
