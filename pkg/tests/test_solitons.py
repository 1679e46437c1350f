import numpy as np
import pytest

from boussinesq_ist import solitons as sol
from boussinesq_ist import spectral as sp

W = sp.OMEGA


def sech2_oracle(k0, x0, x, t):
    amp = 0.375 * (k0 - 1.0 / k0) ** 2
    speed = 0.5 * (k0 + 1.0 / k0)
    return amp / np.cosh(np.sqrt(amp / 6.0) * (x[None, :] - x0 - speed * t[:, None])) ** 2


def test_one_soliton_matches_sech2():
    k0 = 2.0
    c = sol.residue_constant_from_position(k0, 0.0)
    grid = sol.Grid(np.linspace(-30, 30, 6001), [0.0, 0.5, 1.0])
    fld = sol.one_soliton(k0, c, grid)
    np.testing.assert_allclose(fld.u, sech2_oracle(2.0, 0.0, grid.x, grid.t), atol=1e-12)
    assert fld.meta["amplitude"] == pytest.approx(27.0 / 32.0)
    assert fld.meta["speed"] == pytest.approx(5.0 / 4.0)
    # second equation closed form: v = -speed * u
    np.testing.assert_allclose(fld.v, -1.25 * fld.u, atol=1e-12)


def test_one_soliton_position_encoding():
    grid = sol.Grid(np.linspace(-30, 30, 3001), [0.0])
    c = sol.residue_constant_from_position(2.0, 3.5)
    fld = sol.one_soliton(2.0, c, grid)
    np.testing.assert_allclose(fld.u, sech2_oracle(2.0, 3.5, grid.x, grid.t), atol=1e-12)
    assert fld.meta["x0"] == pytest.approx(3.5, abs=1e-12)


def test_one_soliton_translation_covariance():
    # traveling-wave identity u(x, t) = u(x - c*delta, t - delta)
    k0, delta = 2.0, 0.5
    c = sol.residue_constant_from_position(k0, -1.0)
    x = np.linspace(-20, 20, 4001)
    f1 = sol.one_soliton(k0, c, sol.Grid(x, [1.0]))
    f2 = sol.one_soliton(k0, c, sol.Grid(x - 1.25 * delta, [1.0 - delta]))
    np.testing.assert_allclose(f1.u, f2.u, atol=1e-10)


def test_one_soliton_speed_signs():
    grid = sol.Grid(np.linspace(-10, 10, 101), [0.0])
    fr = sol.one_soliton(2.0, sol.residue_constant_from_position(2.0, 0.0), grid)
    fl = sol.one_soliton(-0.5, sol.residue_constant_from_position(-0.5, 0.0), grid)
    assert fr.meta["speed"] > 1.0
    assert fl.meta["speed"] < -1.0


def test_shape_factor_sign_is_immaterial():
    # the displayed field is an even function of the square-root branch
    k0 = 2.0
    c = sol.residue_constant_from_position(k0, 1.0)
    f = abs(sol.soliton_shape_factor(k0, c).real)
    y = np.linspace(-8, 8, 200)
    up = 1.5 * (k0 - 1 / k0) ** 2 / (f * np.exp(-y) + np.exp(y) / f) ** 2
    um = 1.5 * (k0 - 1 / k0) ** 2 / (-f * np.exp(-y) + np.exp(y) / -f) ** 2
    np.testing.assert_allclose(up, um, rtol=1e-14)


def test_classification_rays():
    chi = 1.0 / (1j * (W**2 * 4.0 - W))  # direction with real positivity combo
    assert sol.classify_one_soliton(2.0, 5.0 * chi) == "regular"
    assert sol.classify_one_soliton(2.0, -0.1 * chi) == "singular"
    assert sol.classify_one_soliton(2.0, 0.0) == "zero"
    with pytest.raises(sol.NonRealComboError):
        sol.classify_one_soliton(2.0, 1.0 + 0.5j)
    with pytest.raises(sp.DomainError):
        sol.classify_one_soliton(0.5, 1.0)


def test_singular_soliton_refused():
    chi = 1.0 / (1j * (W**2 * 4.0 - W))
    grid = sol.Grid(np.linspace(-5, 5, 51), [0.0])
    with pytest.raises(sol.SingularSolitonError):
        sol.one_soliton(2.0, -1.0 * chi, grid)


def test_zero_constant_gives_zero_field():
    grid = sol.Grid(np.linspace(-5, 5, 51), [0.0])
    fld = sol.one_soliton(2.0, 0.0, grid)
    assert np.all(fld.u == 0.0)
    fb = sol.breather(2 * np.exp(1j * np.pi / 12), 0.0, grid)
    assert np.all(fb.u == 0.0)


# ---------------------------------------------------------------------------
# breather
# ---------------------------------------------------------------------------


def test_breather_regular_real_and_finite():
    k0 = 2 * np.exp(1j * np.pi / 12)
    grid = sol.Grid(np.linspace(-25, 25, 2501), [0.0, 0.7, 1.4])
    fld = sol.breather(k0, 0.3 + 0.2j, grid)
    assert np.all(np.isfinite(fld.u))
    assert fld.u.dtype == np.float64  # imaginary part already checked < 1e-9


def test_breather_derivatives_match_fd():
    k0 = 2 * np.exp(1j * np.pi / 12)
    c = 0.3 + 0.2j
    hx = 0.005
    ht = 0.002
    grid = sol.Grid(np.arange(-4, 4 + hx / 2, hx), np.array([0.5 - ht, 0.5, 0.5 + ht]))
    fld = sol.breather(k0, c, grid)
    ux_fd = (-1j * np.sqrt(3)) * (fld.n31[:, 2:] - fld.n31[:, :-2]) / (2 * hx)
    assert np.max(np.abs(ux_fd - fld.u[:, 1:-1])) < 5e-5
    ut_fd = (-1j * np.sqrt(3)) * (fld.n31[2] - fld.n31[0]) / (2 * ht)
    assert np.max(np.abs(ut_fd - fld.v[1])) < 5e-4


def test_breather_det_positive_and_formula():
    k0 = 2 * np.exp(1j * np.pi / 12)
    c = 0.4 - 0.1j
    x = np.linspace(-40, 40, 401)[None, :]
    t = np.linspace(0, 3, 11)[:, None]
    det = sol.det_i_minus_a(k0, c, x, t)
    assert np.all(det > 0)
    a = sol._breather_a_matrix(k0, c, x, t)
    np.testing.assert_allclose(np.linalg.det(np.eye(2) - a), det, atol=1e-12)


def test_breather_det_identity_between_gauges():
    # the bounded gauge and the display gauge share the determinant
    k0 = 2 * np.exp(1j * np.pi / 12)
    c = 0.3 + 0.2j
    kb = np.conj(k0)
    d = sol.derived_conjugate_constant(k0, c)
    ct = 1j * (k0**2 - 1) / (2 * np.sqrt(3) * k0**2) * c
    dt = 1j * (kb**2 - W**2) / (2 * np.sqrt(3) * kb**2) * W**2 * d
    el, ez = sp.eval_l, sp.eval_z
    for (x, t) in [(0.5, 0.2), (-2.0, 1.3), (4.0, 0.0)]:
        b = np.array(
            [
                [
                    ct * np.exp((el(1, k0) - el(3, k0)) * x + (ez(1, k0) - ez(3, k0)) * t)
                    / (el(1, k0) - el(3, k0)),
                    dt * np.exp((el(1, k0) - el(2, kb)) * x + (ez(1, k0) - ez(2, kb)) * t)
                    / (el(1, k0) - el(2, kb)),
                ],
                [
                    ct * np.exp((el(3, kb) - el(3, k0)) * x + (ez(3, kb) - ez(3, k0)) * t)
                    / (el(3, kb) - el(3, k0)),
                    dt * np.exp((el(3, kb) - el(2, kb)) * x + (ez(3, kb) - ez(2, kb)) * t)
                    / (el(3, kb) - el(2, kb)),
                ],
            ]
        )
        a = sol._breather_a_matrix(k0, c, np.array([[x]]), np.array([[t]]))[0, 0]
        assert abs(np.linalg.det(np.eye(2) - b) - np.linalg.det(np.eye(2) - a)) < 1e-10


def test_breather_singular_pole_detected():
    k0 = 2 * np.exp(-1j * np.pi / 12)
    grid = sol.Grid(np.linspace(-60, 60, 1201), [0.0])
    with pytest.raises(sol.SingularBreatherError) as err:
        sol.breather(k0, 0.3 + 0.2j, grid)
    assert err.value.witness is not None
    # determinant changes sign along x for each fixed t
    x = np.linspace(-80, 80, 4001)
    for t in (0.0, 1.0, 2.0):
        det = sol.det_i_minus_a(k0, 0.3 + 0.2j, x, t)
        assert det.min() < 0 < det.max()


def test_breather_rejects_points_outside_sector():
    grid = sol.Grid(np.linspace(-5, 5, 51), [0.0])
    with pytest.raises(sp.DomainError):
        sol.breather(1.5 * np.exp(1j * np.pi / 2), 0.1, grid)


def test_fast_breather_decays_on_default_grid():
    # envelope rate ~ 1.04, so the default half-width of 30 buries the tails
    k0 = 8 * np.exp(1j * np.pi / 12)
    assert sol.breather_envelope_rate(k0) > 0.6
    c = sol.breather_constant_for_position(k0, 0.0, 0.3)
    grid = sol.Grid(np.linspace(-30, 30, 3001), [0.0, 0.5])
    fld = sol.breather(k0, c, grid)
    assert np.max(np.abs(fld.u[:, [0, -1]])) < 1e-8


# ---------------------------------------------------------------------------
# h indicator
# ---------------------------------------------------------------------------


def test_h_examples():
    assert sol.h_radial(2.0) == pytest.approx(21.0 / 9.0)
    k0 = 2 * np.exp(1j * np.pi / 12)
    prod = sol.h_radial(2.0) * sol.h_angular(np.pi / 12)
    assert sol.h_indicator(k0) == pytest.approx(prod, rel=1e-12)
    assert prod > 4.0
    assert sol.h_indicator(2 * np.exp(-1j * np.pi / 12)) < -0.5


def test_h_symmetry_between_halves():
    # f(r) g(alpha) = f(1/r) g(alpha + pi) extends the bounds to the inner half
    r, alpha = 1.7, 0.31
    outer = sol.h_indicator(r * np.exp(1j * alpha))
    inner = sol.h_indicator((1.0 / r) * np.exp(1j * (alpha + np.pi)))
    assert outer == pytest.approx(inner, rel=1e-12)


def test_h_domain_errors():
    with pytest.raises(sp.DomainError):
        sol.h_indicator(2.0)  # real axis
    with pytest.raises(sp.DomainError):
        sol.h_indicator(np.exp(1j * 0.1))  # unit circle
    with pytest.raises(sp.DomainError):
        sol.h_indicator(2 * np.exp(1j * np.pi / 4))  # outside the pole sector


# ---------------------------------------------------------------------------
# general N-pole synthesis
# ---------------------------------------------------------------------------


def test_n_soliton_empty_is_zero():
    grid = sol.Grid(np.linspace(-5, 5, 101), [0.0])
    fld = sol.n_soliton([], grid)
    assert np.all(fld.u == 0.0) and np.all(fld.v == 0.0)


def test_n_soliton_matches_one_soliton():
    k0 = 2.0
    c = sol.residue_constant_from_position(k0, -1.0)
    grid = sol.Grid(np.linspace(-30, 30, 3001), [0.0, 0.5, 1.0])
    fn = sol.n_soliton([(k0, c)], grid)
    f1 = sol.one_soliton(k0, c, grid)
    np.testing.assert_allclose(fn.u, f1.u, atol=1e-10)
    np.testing.assert_allclose(fn.v, f1.v, atol=1e-10)


def test_n_soliton_matches_breather():
    k0 = 2 * np.exp(1j * np.pi / 12)
    c = 0.3 + 0.2j
    grid = sol.Grid(np.linspace(-20, 20, 2001), [0.0, 0.7])
    fn = sol.n_soliton([(k0, c)], grid)
    fb = sol.breather(k0, c, grid)
    np.testing.assert_allclose(fn.u, fb.u, atol=1e-10)
    np.testing.assert_allclose(fn.v, fb.v, atol=1e-10)
    np.testing.assert_allclose(fn.n31, fb.n31, atol=1e-10)


def test_n_soliton_single_real_pole_matches_six_by_six_display():
    # the general residue assembly reduces to the explicit 6x6 system
    k0, x, t = 2.0, 0.7, 0.3
    c = sol.residue_constant_from_position(k0, 1.0)
    e = sol.dressed_e(k0, c, x, t)
    iw = 1.0 / k0
    a6 = e * np.array(
        [
            [0, 0, 0, -k0**-2 / (k0 - iw), W / (k0 - W * k0), 0],
            [0, 0, 0, -k0**-2 / (W * iw - iw), W / (W * iw - W * k0), 0],
            [1 / (W**2 * k0 - k0), 0, 0, 0, 0, -(W**2) * k0**-2 / (W**2 * k0 - W**2 * iw)],
            [1 / (iw - k0), 0, 0, 0, 0, -(W**2) * k0**-2 / (iw - W**2 * iw)],
            [0, -W * k0**-2 / (W * k0 - W * iw), W**2 / (W * k0 - W**2 * k0), 0, 0, 0],
            [0, -W * k0**-2 / (W**2 * iw - W * iw), W**2 / (W**2 * iw - W**2 * k0), 0, 0, 0],
        ],
        dtype=complex,
    )
    proj = np.array([[1, 1, 0, 0, 0, 0], [0, 0, 1, 1, 0, 0], [0, 0, 0, 0, 1, 1]], dtype=complex)
    b6 = proj @ np.linalg.inv(np.eye(6) - a6.T)
    n31_display = W**2 * e * np.sum(b6[:, 2]) - W * k0**-2 * e * np.sum(b6[:, 1])
    entries = sol._expand_pole_system(sol.SolitonSpec.from_pairs([(k0, c)]))
    n31, _, _ = sol._solve_residues(entries, np.array([x]), np.array([t]))
    assert abs(n31_display - n31[0]) < 1e-12


def test_n_soliton_two_poles_superpose_ahead_of_the_interaction():
    # the leading hump is position-exact; the trailing one carries the usual
    # constant interaction offset, so raw additivity holds on the forward side
    c_fast = sol.residue_constant_from_position(2.0, -15.0)
    c_left = sol.residue_constant_from_position(-0.5, 15.0)
    grid = sol.Grid(np.linspace(-40, 40, 8001), [0.0])
    f2 = sol.n_soliton([(2.0, c_fast), (-0.5, c_left)], grid)
    fr = sol.one_soliton(2.0, c_fast, grid)
    fl = sol.one_soliton(-0.5, c_left, grid)
    diff = f2.u[0] - fr.u[0] - fl.u[0]
    assert np.max(np.abs(diff[grid.x >= 0.0])) < 1e-4
    # and the whole field is two humps with one constant offset
    i = np.argmax(np.where(grid.x < 0, f2.u[0], 0.0))
    h = grid.x[1] - grid.x[0]
    a, b, cc = f2.u[0][i - 1 : i + 2]
    shift = grid.x[i] + 0.5 * (a - cc) / (a - 2 * b + cc) * h + 15.0
    fr_shift = sol.one_soliton(2.0, sol.residue_constant_from_position(2.0, -15.0 + shift), grid)
    assert np.max(np.abs(f2.u[0] - fr_shift.u[0] - fl.u[0])) < 1e-6


def test_n_soliton_rejects_colliding_pole_images():
    c = sol.residue_constant_from_position(2.0, 0.0)
    grid = sol.Grid(np.linspace(-5, 5, 51), [0.0])
    with pytest.raises(sp.DomainError):
        sol.n_soliton([(2.0, c), (2.0 + 1e-10, c)], grid)


def test_n_soliton_rejects_singular_spec():
    chi = 1.0 / (1j * (W**2 * 4.0 - W))
    grid = sol.Grid(np.linspace(-5, 5, 51), [0.0])
    with pytest.raises(sol.SingularSolitonError):
        sol.n_soliton([(2.0, -1.0 * chi)], grid)
    with pytest.raises(sol.SingularBreatherError):
        sol.n_soliton([(2 * np.exp(-1j * np.pi / 12), 0.2 + 0.1j)], grid)


def test_spec_classification():
    spec = sol.SolitonSpec.from_pairs(
        [
            (2.0, sol.residue_constant_from_position(2.0, 0.0)),
            (-0.5, sol.residue_constant_from_position(-0.5, 0.0)),
            (2 * np.exp(1j * np.pi / 12), 0.1),
            (0.5 * np.exp(1j * 13 * np.pi / 12), 0.1),
        ]
    )
    kinds = [(p.kind, p.side, p.regularity) for p in spec.poles]
    assert kinds == [
        ("soliton", "right", "regular"),
        ("soliton", "left", "regular"),
        ("breather", "right", "regular"),
        ("breather", "left", "regular"),
    ]


def test_dressed_residue_positivity():
    # the real-pole dressing is a positive multiple of the constant
    k0 = 2.0
    c = sol.residue_constant_from_position(k0, 0.3)
    vals = sol.dressed_e(k0, c, np.linspace(-3, 3, 7), 0.4)
    ratios = vals / c
    assert np.max(np.abs(ratios.imag)) < 1e-12
    assert np.all(ratios.real > 0)
