import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from tronquee.experiments import (GridSpec, InsufficientSamples, NoOverlap, SeedOutsideSector,
                                  _seed, build_tronquee, overlap_agreement, perturbation_decay,
                                  pole_scan, seed_table, tritronquee_sweep_p3ii,
                                  validate_asymptotics)
from tronquee.integrate import integrate_hp, make_arc
from tronquee.model import Polar, branch, make_equation, sector

P3I = make_equation("p3i", alpha=1, beta=2)
P3I_CONST = make_equation("p3i", alpha=1, beta=-1)
P4_LINEAR = make_equation("p4", kappa0=1, kappa_inf=0)


@pytest.fixture(scope="module")
def p3i_table():
    return seed_table(P3I, 0, order=120, prec=256)


@pytest.fixture(scope="module")
def generic_patch(p3i_table):
    return build_tronquee(P3I, 0, R0=25, N=10, table=p3i_table)


def test_generic_patch_is_pole_free_and_reproduced(generic_patch, p3i_table):
    assert generic_patch.pole_free
    assert len(generic_patch.grid) == 9 * 12
    sec = sector(P3I, 0, 0)
    assert all(sec.theta_lo < g.theta < sec.theta_hi for g in generic_patch.grid)
    check = build_tronquee(P3I, 0, R0=30, N=10, tol=1e-11, table=p3i_table)
    assert check.pole_free == generic_patch.pole_free


def test_patch_is_deterministic(p3i_table):
    grid = GridSpec(n_rays=3, n_radii=4)
    a = build_tronquee(P3I, 0, R0=25, N=10, grid=grid, table=p3i_table)
    b = build_tronquee(P3I, 0, R0=25, N=10, grid=grid, table=p3i_table)
    assert np.array_equal(a.values(), b.values())
    assert a.to_dict() == b.to_dict()


def test_patch_independent_of_visit_order(p3i_table):
    grid = GridSpec(n_rays=5, n_radii=4)
    a = build_tronquee(P3I, 0, R0=25, N=10, grid=grid, table=p3i_table)
    b = build_tronquee(P3I, 0, R0=25, N=10, grid=grid, table=p3i_table, reverse=True)
    assert np.max(np.abs(a.values() - b.values())) < 10 * a.tol


def test_patch_reproduces_constant_solution():
    patch = build_tronquee(P3I_CONST, 0)
    assert patch.pole_free
    assert np.max(np.abs(patch.values() - 1)) <= 1e-8


def test_patch_reproduces_linear_solution():
    patch = build_tronquee(P4_LINEAR, 2)
    assert patch.pole_free
    want = np.array([-2 * g.x for g in patch.grid])
    assert np.max(np.abs(patch.values() - want) / np.abs(want)) <= 1e-8


def test_grid_outside_sector_rejected(p3i_table):
    with pytest.raises(SeedOutsideSector):
        build_tronquee(P3I, 0, R0=25, grid=GridSpec(n_rays=3, margin=-0.1), table=p3i_table)


def test_slope_bootstrap_across_orders(generic_patch, p3i_table):
    radii = list(np.geomspace(15, 40, 7))
    reps = [validate_asymptotics(generic_patch, p3i_table, radii, n) for n in (3, 4, 5, 6)]
    for rep in reps:
        assert rep.passed()
    for a, b in zip(reps, reps[1:]):
        assert b.slope - a.slope == pytest.approx(-1.0, abs=0.3)


def test_slope_example_order_five(generic_patch, p3i_table):
    rep = validate_asymptotics(generic_patch, p3i_table, list(np.geomspace(15, 40, 7)), 5)
    assert rep.slope == pytest.approx(-6, abs=0.3)


def test_slope_needs_six_radii(generic_patch, p3i_table):
    with pytest.raises(InsufficientSamples):
        validate_asymptotics(generic_patch, p3i_table, [15, 20, 25, 30, 35], 4)


def test_terminating_series_is_floor_limited():
    table = seed_table(P4_LINEAR, 2, order=20)
    patch = build_tronquee(P4_LINEAR, 2, grid=GridSpec(n_rays=1, n_radii=2), table=table)
    rep = validate_asymptotics(patch, table, list(np.geomspace(6, 12, 6)), 3)
    assert rep.floor_limited and rep.passed()


def test_decay_rate_and_linearity():
    a = perturbation_decay(P3I, 0, theta=0.0)
    b = perturbation_decay(P3I, 0, theta=0.0, eps=a.eps / 10)
    assert a.kappa == pytest.approx(1, abs=0.05)
    assert b.kappa == pytest.approx(a.kappa, rel=0.01)
    assert a.offset - b.offset == pytest.approx(math.log(10), abs=0.05)


def test_decay_eps_bound():
    with pytest.raises(ValueError):
        perturbation_decay(P3I, 0, theta=0.0, eps=1.0)


def test_overlap_exact_solution_at_floor():
    rep = overlap_agreement(P3I_CONST, 0, k=0, R_probe=20.0)
    assert rep.du <= rep.floor


def test_overlap_probe_outside_common_region():
    with pytest.raises(NoOverlap):
        overlap_agreement(P3I, 0, k=0, probe_theta=0.0)


def test_sweep_conjugate_branches():
    eq = make_equation("p3ii", beta=Fraction(1, 2))
    t1, t2 = seed_table(eq, 1, order=80), seed_table(eq, 2, order=80)
    R, th = 30.0, 2.0
    u1, U1, _, _ = _seed(t1, Polar(R, th))
    u2, U2, _, _ = _seed(t2, Polar(R, -th))
    assert complex(u2) == pytest.approx(complex(u1).conjugate(), rel=1e-14)
    a = integrate_hp(eq, make_arc(R, th, th + 1.5), u1, U1, prec=160)
    b = integrate_hp(eq, make_arc(R, -th, -th - 1.5), u2, U2, prec=160)
    assert complex(b.u) == pytest.approx(complex(a.u).conjugate(), rel=1e-20)
    assert complex(b.U) == pytest.approx(complex(a.U).conjugate(), rel=1e-20)


def test_sweep_report_shape():
    rep = tritronquee_sweep_p3ii(make_equation("p3ii", beta=Fraction(1, 2)), 0, checkpoints=4)
    assert len(rep.checkpoints) == 4
    assert rep.checkpoints[-1] == pytest.approx(-math.pi + 3 * math.pi - 0.1)
    with pytest.raises(ValueError):
        tritronquee_sweep_p3ii(P3I)


def test_scan_without_detuning_is_pole_free():
    field = pole_scan(P3I, 0, 0.0)
    assert not field.poles
