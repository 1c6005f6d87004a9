import cmath
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tronquee.exact import I, ONE, Cyclo
from tronquee.model import (BRANCH_RANGE, SECTOR_K_RANGE, BadBranchIndex, BadSectorIndex, Family,
                            NonCanonicalParams, Polar, Sector, SectorKind, branch, contains,
                            make_equation, omega_cover, sector)

pi = math.pi


def test_p4_parameters_from_exact_solution():
    eq = make_equation("p4", kappa0=1, kappa_inf=0)
    assert eq.alpha == Cyclo.rational(0) and eq.beta == Cyclo.rational(-2)


def test_p4_parameters_for_linear_solution():
    # u = -2x/3 solves the scalar equation only when alpha = 0, beta = -2/9
    eq = make_equation("p4", kappa0=Fraction(1, 3), kappa_inf=Fraction(-1, 3))
    assert eq.alpha == Cyclo.rational(0)
    assert eq.beta == Cyclo.rational(Fraction(-2, 9))


def test_p3i_zero_parameters():
    eq = make_equation("p3i", alpha=0, beta=0)
    assert eq.gamma == 1 and eq.delta == -1


def test_canonical_normalization_enforced():
    with pytest.raises(NonCanonicalParams):
        make_equation("p3i", alpha=1, beta=0, gamma=2)
    with pytest.raises(NonCanonicalParams):
        make_equation("p3ii", beta=0, alpha=3)
    with pytest.raises(NonCanonicalParams):
        make_equation("p4", kappa0=1)
    with pytest.raises(NonCanonicalParams):
        make_equation("p3i", alpha=1, beta=0, kappa0=1)


def test_float_parameters_force_floating_backend():
    eq = make_equation("p3i", alpha=0.5, beta=1)
    assert not eq.exact
    assert isinstance(eq.alpha, complex)


def test_branch_examples():
    b = branch(make_equation("p3i", alpha=1, beta=2), 1)
    assert (b.a0, b.A0) == (I, ONE)
    b = branch(make_equation("p3ii", beta=Fraction(1, 2)), 0)
    assert (b.a0, b.A0) == (ONE, -ONE)
    b = branch(make_equation("p4", kappa0=0, kappa_inf=1), 3)
    assert b.trivial_u and b.trivial


def test_bad_branch_index():
    with pytest.raises(BadBranchIndex):
        branch(make_equation("p4", kappa0=1, kappa_inf=0), 0)


def test_leading_closed_forms_every_branch():
    eqs = [make_equation("p3i", alpha=1, beta=2), make_equation("p3ii", beta=3),
           make_equation("p4", kappa0=Fraction(1, 2), kappa_inf=Fraction(1, 3))]
    for eq in eqs:
        for m in BRANCH_RANGE[eq.family]:
            b = branch(eq, m)
            if eq.family is Family.P3i:
                assert b.A0 == -(b.a0 * b.a0)
            elif eq.family is Family.P3ii:
                assert b.A0 == -b.a0 and b.a0 ** 3 == ONE
    assert sum(len(BRANCH_RANGE[f]) for f in Family) == 11


@pytest.mark.parametrize("fam, m, k, kind, want", [
    ("p3i", 0, 0, "S", (-pi / 2, pi / 2)),
    ("p3i", 0, 0, "Omega", (-pi / 2, 3 * pi / 2)),
    ("p4", 1, 0, "S", (0, pi / 2)),
])
def test_sector_examples(fam, m, k, kind, want):
    s = sector(fam, m, k, kind)
    assert (s.theta_lo, s.theta_hi) == pytest.approx(want)


def test_s_sector_spans():
    spans = {Family.P3i: pi, Family.P3ii: 3 * pi / 2, Family.P4: pi / 2}
    for fam in Family:
        for m in BRANCH_RANGE[fam]:
            for k in SECTOR_K_RANGE[fam]:
                assert sector(fam, m, k).span == pytest.approx(spans[fam])


def test_bad_sector_index():
    with pytest.raises(BadSectorIndex):
        sector("p3i", 0, 5)


def test_omega_covers_s_for_every_legal_index():
    for fam in Family:
        for m in BRANCH_RANGE[fam]:
            for k in SECTOR_K_RANGE[fam]:
                assert omega_cover(fam, m, k).covers(sector(fam, m, k))


def test_contains_examples():
    s = Sector(0, pi / 2, r_min=5)
    assert contains(s, 10 * cmath.exp(1j * pi / 4))
    assert not contains(s, Polar(10, pi / 4 + 2 * pi))
    assert not contains(s, 3 * cmath.exp(1j * pi / 4))


angles = st.floats(-3, 3)
radii = st.floats(0.1, 50)


@given(radii, angles, st.floats(0, 20), st.floats(0, 20))
def test_contains_monotone_in_r_min(r, th, r1, r2):
    lo, hi = sorted((r1, r2))
    p = Polar(r, th)
    if contains(Sector(-pi, pi, hi), p):
        assert contains(Sector(-pi, pi, lo), p)


@given(radii, angles, st.floats(0, 1.5))
def test_contains_antitone_under_shrink(r, th, margin):
    s = Sector(-pi / 2, pi / 2, 0.0)
    if contains(s.shrink(margin), Polar(r, th)):
        assert contains(s, Polar(r, th))


def test_beta_is_minus_two_kappa0_squared():
    rng = random.Random(11)
    for _ in range(100):
        k0 = Cyclo.gaussian(Fraction(rng.randint(-30, 30), rng.randint(1, 30)),
                            Fraction(rng.randint(-30, 30), rng.randint(1, 30)))
        ki = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        eq = make_equation("p4", kappa0=k0, kappa_inf=ki)
        assert eq.beta == -2 * k0 * k0


def test_exact_and_float_parameters_agree():
    e1 = make_equation("p4", kappa0="1/3", kappa_inf="-1/7")
    e2 = e1.to_float()
    assert abs(complex(e1.alpha) - complex(e2.alpha)) < 1e-15
    assert abs(complex(e1.beta) - complex(e2.beta)) < 1e-15


def test_polar_lift():
    p = Polar.from_complex(-1 + 0j, near=-3.0)
    assert p.theta == pytest.approx(-pi)
    assert Polar(2, pi / 2).z == pytest.approx(2j)
    assert SectorKind.parse("uniqueness") is SectorKind.OMEGA
