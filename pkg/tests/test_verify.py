import numpy as np
import pytest

from boussinesq_ist import solitons as sol
from boussinesq_ist import verify as vf


def test_fd_weights_exact_on_polynomials():
    # each stencil must differentiate monomials x^p exactly for all p below
    # the stencil size: the m-th derivative of x^p at 0 is m! when p = m
    # and 0 otherwise
    import math

    for order, offsets in [(1, range(-2, 3)), (2, range(-2, 3)), (3, range(-3, 4)), (4, range(-3, 4))]:
        w = vf.fd_weights(order, offsets)
        for p in range(len(list(offsets))):
            vals = np.array([float(o) ** p for o in offsets])
            exact = math.factorial(order) if p == order else 0.0
            assert abs(np.dot(w, vals) - exact) < 1e-8, (order, p)


def test_fd_convergence_order():
    f = lambda x: np.sin(1.3 * x)
    errs = []
    for h in (0.1, 0.05):
        x = h * np.arange(-3, 4)
        w = vf.fd_weights(4, range(-3, 4))
        approx = np.dot(w, f(x)) / h**4
        errs.append(abs(approx - 1.3**4 * np.sin(0.0)))
    # fourth derivative of sin at 0 is 0; error should drop ~16x
    assert errs[1] < errs[0] / 8


@pytest.fixture(scope="module")
def soliton_field():
    c = sol.residue_constant_from_position(2.0, 0.0)
    grid = sol.Grid(np.linspace(-30, 30, 6001), 0.5 + 0.001 * np.arange(-2, 3))
    return sol.one_soliton(2.0, c, grid)


def test_pde_residual_zero_field():
    zero = sol.SolutionField(
        np.linspace(-5, 5, 101), np.linspace(0, 0.04, 5), np.zeros((5, 101))
    )
    rep = vf.pde_residual(zero)
    assert rep.max_abs_residual == 0.0


def test_pde_residual_grid_guards():
    small = sol.SolutionField(np.linspace(-1, 1, 5), np.linspace(0, 1, 5), np.zeros((5, 5)))
    with pytest.raises(ValueError):
        vf.pde_residual(small)
    short_t = sol.SolutionField(np.linspace(-1, 1, 21), np.array([0.0, 0.1]), np.zeros((2, 21)))
    with pytest.raises(ValueError):
        vf.pde_residual(short_t)


def test_pde_residual_exact_soliton(soliton_field):
    rep = vf.pde_residual(soliton_field)
    assert rep.max_abs_residual < 1e-4
    assert set(rep.term_max) == {"u_tt", "u_xx", "(u^2)_xx", "u_xxxx"}


def test_pde_negative_control(soliton_field):
    rep_good = vf.pde_residual(soliton_field)
    bad = sol.SolutionField(
        soliton_field.x,
        soliton_field.t,
        soliton_field.u + 0.1 * np.exp(-((soliton_field.x[None, :] - 1.0) ** 2)),
        v=soliton_field.v,
    )
    rep_bad = vf.pde_residual(bad)
    assert rep_bad.max_abs_residual > 100 * rep_good.max_abs_residual


def test_system_residual_exact_soliton(soliton_field):
    res = vf.system_residual(soliton_field)
    assert res["first_equation"] < 1e-3
    assert res["second_equation"] < 1e-4


def test_lax_compatibility(soliton_field):
    ks = [1.3 + 0.4j, 0.7 - 0.2j, 2.2 + 0.1j]
    assert vf.lax_compatibility(soliton_field, ks) < 1e-3
    zero = sol.SolutionField(
        soliton_field.x, soliton_field.t, 0 * soliton_field.u, v=0 * soliton_field.v
    )
    assert vf.lax_compatibility(zero, ks) < 1e-12
    wobble = 0.1 * np.cos(4 * soliton_field.x[None, :]) * np.exp(
        -((soliton_field.x[None, :] - 1.0) ** 2)
    )
    bad = sol.SolutionField(
        soliton_field.x, soliton_field.t, soliton_field.u + wobble, v=soliton_field.v
    )
    assert vf.lax_compatibility(bad, ks) > 1e-1


def test_mass_conservation():
    c = sol.residue_constant_from_position(2.0, 0.0)
    grid = sol.Grid(np.linspace(-30, 30, 6001), np.linspace(0, 1, 5))
    fld = sol.one_soliton(2.0, c, grid)
    rep = vf.mass_conservation(fld)
    assert rep.decaying
    assert rep.max_deviation < 1e-6
    # sech^2 mass in closed form: 2 sqrt(6 A)
    assert rep.integrals[0] == pytest.approx(2 * np.sqrt(6 * 27 / 32), rel=1e-6)


def test_mass_flags_nondecaying():
    x = np.linspace(-5, 5, 201)
    fld = sol.SolutionField(x, np.array([0.0]), np.ones((1, 201)))
    assert not vf.mass_conservation(fld).decaying


def test_round_trip_soliton():
    c = sol.residue_constant_from_position(2.0, -3.0)
    rep = vf.round_trip([(2.0, c)])
    assert rep.passed
    assert min(rep.pole_errors.values()) < 1e-3
    assert min(rep.residue_errors.values()) < 1e-2
    assert rep.reflection_floor < 1e-3


def test_round_trip_empty():
    rep = vf.round_trip([])
    assert rep.passed
    assert rep.reflection_floor < 1e-10


def test_round_trip_left_breather_uses_adaptive_region():
    # the pole sits outside the default search rectangles; a fitted one is
    # added around it automatically
    k0 = 0.5 * np.exp(1j * 13 * np.pi / 12)
    c = sol.breather_constant_for_position(k0, 0.0, 0.4)
    rep = vf.round_trip([(k0, c)])
    assert rep.passed
    assert min(rep.pole_errors.values()) < 1e-3
