import json
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import eq_to_oracle_args, oracle_residual_order
from tronquee.exact import Cyclo
from tronquee.model import branch, make_equation
from tronquee.series import (CoefficientTable, TrivialBranch, compute_coefficients, evaluate,
                             optimal_truncation_index, residual_order, residual_order_of,
                             term_growth, term_magnitudes)

q = st.fractions(min_value=-6, max_value=6, max_denominator=6)


def R(v):
    return Cyclo.rational(Fraction(v))


@given(q, q)
def test_p3i_first_coefficients(al, be):
    t = compute_coefficients(0, make_equation("p3i", alpha=al, beta=be), 1)
    assert t.a[1] == R(-(al + be) / 4)
    assert t.A[1] == R((be - al - 2) / 2)


@given(q)
def test_p3i_constant_solution_has_no_corrections(al):
    t = compute_coefficients(0, make_equation("p3i", alpha=al, beta=-al), 6)
    assert all(c.is_zero() for c in t.a[1:])


@given(q.filter(bool), q)
def test_p4_case1_printed_coefficients(k0, ki):
    eq = make_equation("p4", kappa0=k0, kappa_inf=ki)
    t = compute_coefficients(1, eq, 1)
    assert t.a[1] == eq.alpha
    assert t.A[1] == R(Fraction(1, 2) - k0 + ki / 2)


def test_trivial_branch_refused():
    with pytest.raises(TrivialBranch):
        compute_coefficients(3, make_equation("p4", kappa0=0, kappa_inf=1), 4)


def test_evaluate_examples():
    eq = make_equation("p4", kappa0=Fraction(3, 4), kappa_inf=1)
    u, _ = evaluate(compute_coefficients(3, eq, 4), 10, N_use=0)
    assert u == pytest.approx(0.075)
    t = compute_coefficients(0, make_equation("p3i", alpha=2, beta=-2), 8)
    for n in range(9):
        assert evaluate(t, 7, N_use=n)[0] == 1
    t = compute_coefficients(0, make_equation("p3ii", beta=1), 3)
    assert evaluate(t, 8, N_use=0)[0] == pytest.approx(2.0)


def test_evaluate_follows_tracked_sheet():
    t = compute_coefficients(0, make_equation("p3ii", beta=1), 0)
    a = evaluate(t, (8.0, 0.0))[0]
    b = evaluate(t, (8.0, 2 * math.pi))[0]
    assert b == pytest.approx(a * complex(Cyclo.zeta_power(4)))


def test_added_term_is_the_only_difference():
    t = compute_coefficients(0, make_equation("p3i", alpha=1, beta=2), 12)
    x = 9 + 4j
    for n in range(12):
        u0, U0 = evaluate(t, x, N_use=n)
        u1, U1 = evaluate(t, x, N_use=n + 1)
        assert u1 - u0 == pytest.approx(complex(t.a[n + 1]) * x ** -(n + 1), rel=1e-9, abs=1e-15)
        assert U1 - U0 == pytest.approx(complex(t.A[n + 1]) * x ** -(n + 1), rel=1e-9, abs=1e-15)


def _oracle(eq, m, N):
    t = compute_coefficients(m, eq, N, "exact")
    return oracle_residual_order(*eq_to_oracle_args(eq, t))


def test_residual_generic_p3i():
    eq = make_equation("p3i", alpha=1, beta=2)
    r = residual_order(0, eq, 20)
    assert r >= 20
    assert _oracle(eq, 0, 20) == r


def test_residual_terminating_p4_case2():
    eq = make_equation("p4", kappa0=1, kappa_inf=0)
    assert residual_order(2, eq, 20) == math.inf
    assert _oracle(eq, 2, 20) == math.inf


def test_residual_p3ii_rotated_branch():
    eq = make_equation("p3ii", beta=0)
    r = residual_order(1, eq, 15)
    assert r >= 15 and _oracle(eq, 1, 15) == r


def test_corrupted_table_is_caught():
    eq = make_equation("p3i", alpha=1, beta=2)
    t = compute_coefficients(0, eq, 10)
    a = list(t.a)
    a[7] = a[7] + 1
    bad = CoefficientTable(t.branch, eq, 10, tuple(a), t.A)
    assert residual_order_of(bad) == 6
    assert oracle_residual_order(*eq_to_oracle_args(eq, bad)) == 6


def test_p3i_negation_symmetry():
    # u -> -u with (alpha, beta) -> (-alpha, -beta) maps the scalar equation to
    # itself; the companion variable is fixed by the first equation of the system
    rng = random.Random(5)
    x = 40.0 + 9.0j
    for _ in range(5):
        al = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
        be = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
        src = compute_coefficients(0, make_equation("p3i", alpha=-al, beta=-be), 14)
        eq2 = make_equation("p3i", alpha=al, beta=be)
        dst = compute_coefficients(2, eq2, 14)
        assert dst.a == tuple(-c for c in src.a)
        u, U = evaluate(src, x)
        u2, U2 = evaluate(dst, x)
        assert u2 == pytest.approx(-u, rel=1e-15)
        assert U2 == pytest.approx(-U - 2 / u ** 2 - 2 * float(be) / (x * u), rel=1e-12)
        assert residual_order_of(dst) >= 14


@pytest.mark.parametrize("fam, params, pairs", [
    ("p3i", {"alpha": 1, "beta": 2}, [(1, 3)]),
    ("p3ii", {"beta": Fraction(1, 2)}, [(1, 2)]),
])
def test_conjugation_symmetry(fam, params, pairs):
    eq = make_equation(fam, params)
    for m1, m2 in pairs:
        t = compute_coefficients(m1, eq, 12).conjugated()
        t2 = CoefficientTable(branch(eq, m2), eq, 12, t.a, t.A)
        assert residual_order_of(t2) >= 12
        assert t2.a == compute_coefficients(m2, eq, 12).a
    real = compute_coefficients(0, eq, 12)
    assert all(c.is_rational() for c in real.a + real.A)


def _synthetic(mags, step_branch_eq=None):
    eq = make_equation("p3i", alpha=1, beta=2)
    coeffs = tuple(Cyclo.rational(v) for v in mags)
    return CoefficientTable(branch(eq, 0), eq, len(mags) - 1, coeffs, coeffs)


def test_optimal_truncation_factorial():
    t = _synthetic([math.factorial(n) for n in range(30)])
    assert optimal_truncation_index(t, 10) in (9, 10)


def test_optimal_truncation_terminating():
    t = _synthetic([1] + [0] * 10)
    assert optimal_truncation_index(t, 10) == 0


def test_optimal_truncation_matches_brute_force():
    t = compute_coefficients(0, make_equation("p3i", alpha=1, beta=2), 60)
    mags = term_magnitudes(t, 20.0)
    want = min(range(1, 61), key=lambda n: (mags[n] if mags[n] else math.inf, n))
    assert optimal_truncation_index(t, 20) == want


def test_term_growth_flags():
    assert term_growth(_synthetic([0] * 8))["flag"] == "zero"
    assert term_growth(_synthetic([1, 1, 0, 0, 0, 0, 0]))["flag"] == "terminating"
    t = compute_coefficients(0, make_equation("p3i", alpha=1, beta=2), 40)
    mags = [abs(complex(c)) for c in t.a]
    scan = all(b > a for a, b in zip(mags[20:], mags[21:]))
    assert term_growth(t)["monotone_growth"] == scan is True


def test_floating_backends_match_exact():
    eq = make_equation("p3ii", beta="1/2+i")
    ex = compute_coefficients(0, eq, 20, "exact")
    mp = compute_coefficients(0, eq, 20, "mp")
    dbl = compute_coefficients(0, eq, 20, "double")
    for e, m, d in zip(ex.a, mp.a, dbl.a):
        assert abs(complex(m) - complex(e)) <= 1e-12 * max(1, abs(complex(e)))
        assert abs(complex(d) - complex(e)) <= 1e-9 * max(1, abs(complex(e)))


def test_entries_lie_in_declared_field():
    t = compute_coefficients(1, make_equation("p3i", alpha=1, beta=2), 10)
    assert all(c.field in ("Q", "Q(i)") for c in t.a + t.A)
    t = compute_coefficients(1, make_equation("p3ii", beta=2), 10)
    assert all(c.field in ("Q", "Q(omega)") for c in t.a + t.A)


def test_json_export():
    t = compute_coefficients(0, make_equation("p3i", alpha=1, beta=2), 4)
    d = json.loads(t.to_json())
    for key in ("family", "m", "params", "backend", "step", "p_u", "p_U", "a", "A"):
        assert key in d
    assert d["a"][1] == ["-3/4", "0"]
