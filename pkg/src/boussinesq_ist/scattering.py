"""Direct scattering map: eigenfunctions, connection matrices, reflection
coefficients, the pole spectrum, and residue constants.

The eigenfunction columns are marched by the product-integration engine in
:mod:`boussinesq_ist.volterra`; everything else is assembled from those
columns: the connection matrices by dressed quadrature, reflection
coefficients as entry ratios on the sampling contours, poles by the argument
principle with Newton polish, and residue constants by weighted least-squares
fits of the column proportionality that defines them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from boussinesq_ist import volterra as vt
from boussinesq_ist.spectral import (
    OMEGA,
    QHAT_EXCLUSION,
    DomainError,
    dist_to_qhat,
    eval_l,
    eval_l_all,
    eval_z,
    potential_entries,
    potential_generators,
)

DEFAULT_LX = 30.0
DEFAULT_HX = 0.01
QUAD_TOL = 1e-6
DECAY_TOL = 1e-10
MASS_TOL = 1e-8
FIT_TOL = 1e-4
DERIV_STEP = 1e-5
NEWTON_TOL = 1e-10
NEWTON_MAXIT = 20
WINDING_TOL = 0.2
MAX_POLES = 16
REAL_POLE_TOL = 1e-9

#: rectangles (re_lo, re_hi, im_lo, im_hi) inside the pole sector whose
#: boundaries keep >= 0.05 distance from the contour and the roots of unity
DEFAULT_REGIONS = (
    (1.2, 4.0, -0.62, 0.62),
    (-0.85, -0.25, -0.05, 0.05),
)


class ZeroOnContourError(ValueError):
    """The (1,1) connection entry vanishes at a contour sample."""


class WindingError(ArithmeticError):
    """Argument-principle count did not converge to an integer."""


class TooManyPolesError(ArithmeticError):
    pass


class FitResidualError(ArithmeticError):
    """Column proportionality violated: not a genuine simple zero, or the
    quadrature is too coarse."""


# ----------------------------------------------------------------------------
# initial data
# ----------------------------------------------------------------------------


def _fd1(y, h):
    """4th-order first derivative with one-sided ends."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    out[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    out[0] = (-3 * y[0] + 4 * y[1] - y[2]) / (2 * h)
    out[1] = (y[2] - y[0]) / (2 * h)
    out[-2] = (y[-1] - y[-3]) / (2 * h)
    out[-1] = (3 * y[-1] - 4 * y[-2] + y[-3]) / (2 * h)
    return out


@dataclass(frozen=True)
class InitialData:
    """Real-valued samples (u0, v0) on a uniform grid, plus derived entries."""

    x: np.ndarray
    u0: np.ndarray
    v0: np.ndarray
    decay_tol: float = DECAY_TOL
    warnings: tuple = ()

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        u0 = np.asarray(self.u0, dtype=float)
        v0 = np.asarray(self.v0, dtype=float)
        if x.ndim != 1 or x.size < 9:
            raise ValueError("need a 1-d grid with at least 9 points")
        if u0.shape != x.shape or v0.shape != x.shape:
            raise ValueError("u0, v0 must match the grid")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u0)) and np.all(np.isfinite(v0))):
            raise ValueError("initial data contains non-finite values")
        steps = np.diff(x)
        if np.max(np.abs(steps - steps[0])) > 1e-9 * abs(steps[0]):
            raise ValueError("grid must be uniform")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "u0", u0)
        object.__setattr__(self, "v0", v0)
        warn = list(self.warnings)
        edge = max(
            abs(u0[0]), abs(u0[-1]), abs(v0[0]), abs(v0[-1])
        )
        if edge > self.decay_tol:
            warn.append(
                f"edge values {edge:.3e} exceed decay tolerance {self.decay_tol:g}"
            )
        object.__setattr__(self, "warnings", tuple(warn))

    @staticmethod
    def from_u1(x, u0, u1, mass_tol: float = MASS_TOL) -> "InitialData":
        """Build v0 as the left cumulative integral of u1; u1 must have
        vanishing total integral for the system and the scalar equation to
        share initial data."""
        x = np.asarray(x, dtype=float)
        u1 = np.asarray(u1, dtype=float)
        h = x[1] - x[0]
        total = np.trapezoid(u1, dx=h)
        if abs(total) > mass_tol:
            raise ValueError(
                f"total integral of u1 is {total:.3e}, above {mass_tol:g}"
            )
        v0 = np.concatenate([[0.0], np.cumsum(0.5 * h * (u1[1:] + u1[:-1]))])
        return InitialData(x, np.asarray(u0, dtype=float), v0)

    @property
    def hx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def potential_scalars(self):
        n1, n2 = potential_entries(self.u0, _fd1(self.u0, self.hx), self.v0)
        return n1, n2

    def support_slice(self, threshold: float = 1e-15) -> slice:
        n1, n2 = self.potential_scalars
        env = np.maximum(np.abs(n1), np.abs(n2))
        top = float(np.max(env)) if env.size else 0.0
        if top == 0.0:
            return slice(0, 2)
        idx = np.nonzero(env > threshold * top)[0]
        lo = max(0, int(idx[0]) - 2)
        hi = min(self.x.size, int(idx[-1]) + 3)
        return slice(lo, hi)


# ----------------------------------------------------------------------------
# march plumbing
# ----------------------------------------------------------------------------


def _plan(kbatch):
    k = np.atleast_1d(np.asarray(kbatch, dtype=complex))
    if np.any(dist_to_qhat(k) < QHAT_EXCLUSION):
        raise DomainError("k too close to a sixth root of unity (or zero)")
    ls = eval_l_all(k)
    g1, g2 = potential_generators(k)
    return k, ls, g1, g2


def _march(data: InitialData, kbatch, kind, col, want_traj=False, want_s=False,
           clip=True, growth_ok=False):
    k, ls, g1, g2 = _plan(kbatch)
    if vt.KINDS[kind][3]:
        g1 = np.swapaxes(g1, -1, -2)
        g2 = np.swapaxes(g2, -1, -2)
    n1, n2 = data.potential_scalars
    sl = data.support_slice() if (clip and not want_traj) else slice(0, data.x.size)
    res = vt.march_column(
        data.x[sl], n1[sl], n2[sl], g1, g2, ls, col, kind,
        want_traj=want_traj, want_s=want_s, growth_ok=growth_ok,
    )
    res["k"] = k
    return res


@dataclass
class EigenfunctionBundle:
    """Trajectories of the four eigenfunctions at one k, with the per-column
    definedness masks and the connection matrices where they exist."""

    k: complex
    x: np.ndarray
    X: np.ndarray
    XA: np.ndarray
    Y: np.ndarray
    YA: np.ndarray
    defined: dict
    s: np.ndarray | None = None
    sA: np.ndarray | None = None
    s_defined: np.ndarray | None = None
    sA_defined: np.ndarray | None = None


def solve_volterra(data: InitialData, k: complex, which: str, growth_ok=False):
    """Matrix sequence of one eigenfunction over the grid.

    Columns whose dressing grows along the march are NaN-filled and reported
    in the accompanying mask rather than trusted.
    """
    if which not in vt.KINDS:
        raise ValueError("which must be one of X, XA, Y, YA")
    nx = data.x.size
    out = np.full((nx, 3, 3), np.nan, dtype=complex)
    mask = np.zeros(3, dtype=bool)
    for col in (1, 2, 3):
        _, ls, _, _ = _plan([k])
        if not vt.column_stability(ls, col, which)[0] and not growth_ok:
            continue
        res = _march(data, [k], which, col, want_traj=True, clip=False,
                     growth_ok=growth_ok)
        out[:, :, col - 1] = res["traj"][:, 0, :]
        mask[col - 1] = True
    return out, mask


def eigenfunction_bundle(data: InitialData, k: complex) -> EigenfunctionBundle:
    mats = {}
    masks = {}
    for kind in ("X", "XA", "Y", "YA"):
        mats[kind], masks[kind] = solve_volterra(data, k, kind)
    s, sa, sdef, sadef = scattering_matrices(data, k)
    return EigenfunctionBundle(
        complex(k), data.x, mats["X"], mats["XA"], mats["Y"], mats["YA"],
        masks, s, sa, sdef, sadef,
    )


def scattering_matrices(data: InitialData, k: complex):
    """Connection matrices (s, sA) with entrywise definedness masks.

    Undefined entries (growing dressing whose integral does not converge in
    the window) are NaN with mask False.
    """
    s = np.full((3, 3), np.nan, dtype=complex)
    sa = np.full((3, 3), np.nan, dtype=complex)
    sdef = np.zeros((3, 3), dtype=bool)
    sadef = np.zeros((3, 3), dtype=bool)
    for col in (1, 2, 3):
        _, ls, _, _ = _plan([k])
        if vt.column_stability(ls, col, "X")[0]:
            res = _march(data, [k], "X", col, want_s=True)
            s[:, col - 1] = res["s"][0]
            sdef[:, col - 1] = res["s_defined"][0]
        if vt.column_stability(ls, col, "XA")[0]:
            res = _march(data, [k], "XA", col, want_s=True)
            sa[:, col - 1] = res["s"][0]
            sadef[:, col - 1] = res["s_defined"][0]
    s[~sdef] = np.nan
    sa[~sadef] = np.nan
    return s, sa, sdef, sadef


def _s_entry_batch(data: InitialData, ks, kind: str, col: int, row: int,
                   growth_ok=False):
    """One connection-matrix entry over a k batch (kind "X" -> s, "XA" -> sA)."""
    res = _march(data, ks, kind, col, want_s=True, growth_ok=growth_ok)
    return res["s"][:, row - 1], res["s_defined"][:, row - 1]


def s11_batch(data: InitialData, ks):
    val, _ = _s_entry_batch(data, ks, "X", 1, 1)
    return val


def m2_matrix(data: InitialData, k: complex):
    """The sectionally analytic 3x3 matrix on the pole sector, assembled from
    eigenfunction columns and connection entries; det = 1 where defined."""
    x1 = _march(data, [k], "X", 1, want_traj=True, clip=False)["traj"][:, 0, :]
    y2 = _march(data, [k], "Y", 2, want_traj=True, clip=False)["traj"][:, 0, :]
    xa2 = _march(data, [k], "XA", 2, want_traj=True, clip=False)["traj"][:, 0, :]
    ya1 = _march(data, [k], "YA", 1, want_traj=True, clip=False)["traj"][:, 0, :]
    s11 = s11_batch(data, [k])[0]
    sa22, _ = _s_entry_batch(data, [k], "XA", 2, 2)
    w = np.empty_like(x1)
    w[:, 0] = ya1[:, 1] * xa2[:, 2] - ya1[:, 2] * xa2[:, 1]
    w[:, 1] = ya1[:, 2] * xa2[:, 0] - ya1[:, 0] * xa2[:, 2]
    w[:, 2] = ya1[:, 0] * xa2[:, 1] - ya1[:, 1] * xa2[:, 0]
    out = np.empty((data.x.size, 3, 3), dtype=complex)
    out[:, :, 0] = x1
    out[:, :, 1] = y2 / sa22[0]
    out[:, :, 2] = w / s11
    return out


# ----------------------------------------------------------------------------
# contours and reflection coefficients
# ----------------------------------------------------------------------------


def ray_moduli(per_decade: int = 64, decades=(-2, 2)):
    m = np.logspace(decades[0], decades[1], per_decade * (decades[1] - decades[0]) + 1)
    return m[np.abs(m - 1.0) > 1e-12]


def gamma1_samples(per_decade: int = 64, decades=(-2, 2)):
    """Vertical-ray part of the first sampling contour: i(0,1) and -i(1,oo)."""
    m = ray_moduli(per_decade, decades)
    return np.where(m < 1.0, 1j * m, -1j * m)


def gamma4_samples(per_decade: int = 64, decades=(-2, 2)):
    """Vertical-ray part of the fourth sampling contour: -i(0,1) and i(1,oo)."""
    m = ray_moduli(per_decade, decades)
    return np.where(m < 1.0, -1j * m, 1j * m)


def circle_samples(n: int = 1536):
    """Uniform unit-circle grid, offset so no sample hits a root of unity and
    closed under rotation by 120 degrees and under conjugation."""
    if n % 6:
        raise ValueError("circle grid size must be divisible by 6")
    phi = (np.arange(n) + 0.5) * (2 * np.pi / n)
    return np.exp(1j * phi)


@dataclass
class ScatteringData:
    """Reflection-coefficient samples plus the pole spectrum.

    Values on the two ray contours and on the unit circle are stored on the
    canonical grids; ``eval_r1`` / ``eval_r2`` interpolate between samples or
    defer to callable backends (used by synthetic data generators).
    """

    gamma1: np.ndarray = None
    r1_ray: np.ndarray = None
    gamma4: np.ndarray = None
    r2_ray: np.ndarray = None
    circle: np.ndarray = None
    r1_circle: np.ndarray = None
    r2_circle: np.ndarray = None
    poles: tuple = ()
    residues: dict = field(default_factory=dict)
    time: float = 0.0
    decay_report: dict = field(default_factory=dict)
    r1_fn: object = None
    r2_fn: object = None

    @property
    def derived_conjugate_residues(self) -> dict:
        out = {}
        for k0, c in self.residues.items():
            if abs(complex(k0).imag) > REAL_POLE_TOL:
                kb = np.conj(k0)
                out[k0] = (kb**2 - 1.0) / (OMEGA**2 * (OMEGA**2 - kb**2)) * np.conj(c)
        return out

    def _interp_circle(self, vals, k):
        n = self.circle.size
        step = 2 * np.pi / n
        phi = np.mod(np.angle(k) - 0.5 * step, 2 * np.pi) / step
        base = np.floor(phi).astype(int)
        frac = phi - base
        idx = (base[..., None] + np.arange(-1, 3)) % n
        y = vals[idx]
        t = frac[..., None]
        # 4-point Lagrange on the uniform periodic grid
        w = np.stack(
            [
                -t[..., 0] * (t[..., 0] - 1) * (t[..., 0] - 2) / 6,
                (t[..., 0] + 1) * (t[..., 0] - 1) * (t[..., 0] - 2) / 2,
                -(t[..., 0] + 1) * t[..., 0] * (t[..., 0] - 2) / 2,
                (t[..., 0] + 1) * t[..., 0] * (t[..., 0] - 1) / 6,
            ],
            axis=-1,
        )
        return np.sum(w * y, axis=-1)

    def _interp_ray(self, pts, vals, k, expected_args):
        """Segment-aware interpolation in log-modulus.

        The two halves of a ray contour are distinct contour pieces with a
        gap at the unit circle, so each is interpolated on its own uniform
        log grid.
        """
        r = np.abs(k)
        lo, hi = np.abs(pts[0]), np.abs(pts[-1])
        if np.any((r < lo * 0.999) | (r > hi * 1.001)):
            raise DomainError("sample outside the tabulated ray range")
        ang = np.angle(k)
        want = np.where(r < 1.0, expected_args[0], expected_args[1])
        if np.any(np.abs(np.angle(np.exp(1j * (ang - want)))) > 1e-8):
            raise DomainError("point is not on the sampling rays")

        inner_mask = np.abs(pts) < 1.0
        out = np.empty(r.shape, dtype=complex)

        def piece(sub_pts, sub_vals, rq):
            lr = np.log(np.abs(sub_pts))
            n = lr.size
            step = lr[1] - lr[0]
            pos = (np.log(rq) - lr[0]) / step
            base = np.clip(np.round(pos).astype(int), 1, n - 3)
            t = pos - base
            idx = base[..., None] + np.arange(-1, 3)
            y = sub_vals[idx]
            tt = t[..., None]
            w = np.stack(
                [
                    -tt[..., 0] * (tt[..., 0] - 1) * (tt[..., 0] - 2) / 6,
                    (tt[..., 0] + 1) * (tt[..., 0] - 1) * (tt[..., 0] - 2) / 2,
                    -(tt[..., 0] + 1) * tt[..., 0] * (tt[..., 0] - 2) / 2,
                    (tt[..., 0] + 1) * tt[..., 0] * (tt[..., 0] - 1) / 6,
                ],
                axis=-1,
            )
            return np.sum(w * y, axis=-1)

        qin = r < 1.0
        if np.any(qin):
            out[qin] = piece(pts[inner_mask], vals[inner_mask], r[qin])
        if np.any(~qin):
            out[~qin] = piece(pts[~inner_mask], vals[~inner_mask], r[~qin])
        return out

    def eval_r1(self, k):
        k = np.asarray(k, dtype=complex)
        if self.r1_fn is not None:
            out = np.asarray(self.r1_fn(k), dtype=complex)
            return complex(out.reshape(-1)[0]) if k.ndim == 0 else out.reshape(k.shape)
        scalar = k.ndim == 0
        k = np.atleast_1d(k)
        out = np.empty(k.shape, dtype=complex)
        on_circle = np.abs(np.abs(k) - 1.0) < 1e-9
        if np.any(on_circle):
            out[on_circle] = self._interp_circle(self.r1_circle, k[on_circle])
        if np.any(~on_circle):
            out[~on_circle] = self._interp_ray(
                self.gamma1, self.r1_ray, k[~on_circle], (np.pi / 2, -np.pi / 2)
            )
        return out[0] if scalar else out

    def eval_r2(self, k):
        k = np.asarray(k, dtype=complex)
        if self.r2_fn is not None:
            out = np.asarray(self.r2_fn(k), dtype=complex)
            return complex(out.reshape(-1)[0]) if k.ndim == 0 else out.reshape(k.shape)
        scalar = k.ndim == 0
        k = np.atleast_1d(k)
        out = np.empty(k.shape, dtype=complex)
        on_circle = np.abs(np.abs(k) - 1.0) < 1e-9
        if np.any(on_circle):
            out[on_circle] = self._interp_circle(self.r2_circle, k[on_circle])
        if np.any(~on_circle):
            out[~on_circle] = self._interp_ray(
                self.gamma4, self.r2_ray, k[~on_circle], (-np.pi / 2, np.pi / 2)
            )
        return out[0] if scalar else out


def _theta21_rate(k):
    """theta_21(0, t, k)/t = (z_2 - z_1)(k)."""
    return eval_z(2, k) - eval_z(1, k)


def _clipped_exp(z):
    """exp with the real part saturated at +-700 to keep dressings finite.

    The time dressing grows like exp(|k|^2 t / 4) toward the inner tip of the
    ray contour (the instability of the equation); saturating keeps evolved
    samples ordered and finite instead of overflowing to inf * 0 = nan."""
    z = np.asarray(z, dtype=complex)
    return np.exp(np.clip(z.real, -700.0, 700.0) + 1j * z.imag)


def reflection_coefficients(
    data: InitialData,
    per_decade: int = 64,
    decades=(-2, 2),
    circle_n: int = 1536,
) -> ScatteringData:
    """Sample r1 on its ray contour and the circle, r2 likewise.

    Raises ZeroOnContourError when the (1,1) entries vanish at a sample, and
    attaches a rapid-decay report for the ray tails.
    """
    g1k = gamma1_samples(per_decade, decades)
    g4k = gamma4_samples(per_decade, decades)
    ck = circle_samples(circle_n)

    # entry ratio: the (1,2) entry over the (1,1) entry of the connection matrix
    def r_values(kind, ks):
        den, _ = _s_entry_batch(data, ks, kind, 1, 1)
        num, _ = _s_entry_batch(data, ks, kind, 2, 1)
        if np.any(np.abs(den) < 1e-10):
            bad = ks[np.abs(den) < 1e-10][0]
            raise ZeroOnContourError(
                f"(1,1) connection entry vanishes at contour sample {bad}"
            )
        return num / den

    r1_ray = r_values("X", g1k)
    r2_ray = r_values("XA", g4k)
    r1_circle = r_values("X", ck)
    r2_circle = r_values("XA", ck)

    report = {}
    for name, ks, vals in (("r1", g1k, r1_ray), ("r2", g4k, r2_ray)):
        outer = np.abs(ks) > 10.0
        mag = np.abs(vals[outer])
        kk = np.abs(ks[outer])
        weighted = {int(nn): float(np.max((1.0 + kk) ** nn * mag)) for nn in range(5)}
        report[name] = {
            "tail_max": float(np.max(mag)) if mag.size else 0.0,
            "weighted_sup": weighted,
        }
    return ScatteringData(
        gamma1=g1k,
        r1_ray=r1_ray,
        gamma4=g4k,
        r2_ray=r2_ray,
        circle=ck,
        r1_circle=r1_circle,
        r2_circle=r2_circle,
        decay_report=report,
    )


def unit_point_genericity(data: InitialData, delta: float = 1e-3) -> dict:
    """Detector for non-generic behavior of the (1,1) entry at k = +-1.

    Generic data has a simple pole there, so (k -+ 1) s_11 stays away from
    zero on nearby circle points; values below 1e-6 are flagged.
    """
    out = {}
    for kstar in (1.0, -1.0):
        ks = kstar * np.exp(np.array([1j * delta, -1j * delta]))
        vals = s11_batch(data, ks)
        m = float(np.min(np.abs((ks - kstar) * vals)))
        out[str(kstar)] = {"min_weighted_entry": m, "generic": bool(m > 1e-6)}
    return out


def reflection_floor(data: InitialData, n: int = 50) -> float:
    """max |r1| over a coarse ray sample; the radiation content indicator."""
    m = np.logspace(-1.5, 1.5, n)
    m = m[np.abs(m - 1.0) > 1e-6]
    ks = np.where(m < 1.0, 1j * m, -1j * m)
    den, _ = _s_entry_batch(data, ks, "X", 1, 1)
    num, _ = _s_entry_batch(data, ks, "X", 2, 1)
    return float(np.max(np.abs(num / den)))


# ----------------------------------------------------------------------------
# pole search
# ----------------------------------------------------------------------------


def _rect_boundary(rect, n_per_edge):
    a, b, c, d = rect
    top = np.linspace(a, b, n_per_edge, endpoint=False) + 1j * c
    right = b + 1j * np.linspace(c, d, n_per_edge, endpoint=False)
    bottom = np.linspace(b, a, n_per_edge, endpoint=False) + 1j * d
    left = a + 1j * np.linspace(d, c, n_per_edge, endpoint=False)
    pts = np.concatenate([top, right, bottom, left])
    return np.append(pts, pts[0])


def _winding_and_centroid(data, rect, n_per_edge=48, max_refine=8):
    pts = _rect_boundary(rect, n_per_edge)
    vals = s11_batch(data, pts)
    for _ in range(max_refine):
        dphase = np.angle(vals[1:] / vals[:-1])
        if np.all(np.abs(dphase) < np.pi / 2):
            break
        # subdivide intervals with large phase jumps
        bad = np.nonzero(np.abs(dphase) >= np.pi / 2)[0]
        mids = 0.5 * (pts[bad] + pts[bad + 1])
        mvals = s11_batch(data, mids)
        pts = np.insert(pts, bad + 1, mids)
        vals = np.insert(vals, bad + 1, mvals)
    else:
        raise WindingError("insufficient quadrature: phase jumps on the boundary")
    if np.any(np.abs(vals) < 1e-14):
        raise WindingError("the (1,1) entry vanishes on the search boundary")
    dlog = np.log(np.abs(vals[1:] / vals[:-1])) + 1j * np.angle(vals[1:] / vals[:-1])
    total = np.sum(dlog) / (2j * np.pi)
    n = int(np.round(total.real))
    if abs(total - n) > WINDING_TOL:
        raise WindingError(f"winding estimate {total:.4f} is not close to an integer")
    centroid = None
    if n == 1:
        mid = 0.5 * (pts[1:] + pts[:-1])
        centroid = complex(np.sum(mid * dlog) / (2j * np.pi))
    return n, centroid


def _s11_derivative(data, k, step=DERIV_STEP):
    """Two-step Richardson central difference of the (1,1) entry."""
    ks = np.array([k + step, k - step, k + 2 * step, k - 2 * step])
    v = s11_batch(data, ks)
    return (8.0 * (v[0] - v[1]) - (v[2] - v[3])) / (12.0 * step)


def _newton_polish(data, k0):
    k = complex(k0)
    for _ in range(NEWTON_MAXIT):
        val = s11_batch(data, [k])[0]
        dv = _s11_derivative(data, k)
        dk = val / dv
        k = k - dk
        if abs(dk) < NEWTON_TOL:
            break
    return k


def find_poles(data: InitialData, regions=None, max_poles: int = MAX_POLES):
    """Zeros of the (1,1) connection entry inside the search rectangles.

    Winding-number count on the boundary, recursive bisection until single
    zeros are isolated, then Newton refinement. Real-axis zeros come out with
    a tiny imaginary part and are snapped to the axis.
    """
    regions = DEFAULT_REGIONS if regions is None else regions
    zeros = []

    def recurse(rect, depth):
        n, centroid = _winding_and_centroid(data, rect)
        if n == 0:
            return
        if len(zeros) + n > max_poles:
            raise TooManyPolesError(f"more than {max_poles} zeros in the region")
        if n == 1:
            zeros.append(_newton_polish(data, centroid))
            return
        if depth > 12:
            raise WindingError("pole cluster too tight to separate")
        a, b, c, d = rect
        if (b - a) >= (d - c):
            m = a + (b - a) * 0.503
            recurse((a, m, c, d), depth + 1)
            recurse((m, b, c, d), depth + 1)
        else:
            m = c + (d - c) * 0.503
            recurse((a, b, c, m), depth + 1)
            recurse((a, b, m, d), depth + 1)

    for rect in regions:
        recurse(tuple(rect), 0)
    out = []
    for z in zeros:
        if abs(z.imag) < REAL_POLE_TOL * max(1.0, abs(z)):
            z = complex(z.real, 0.0)
        # regions may overlap; keep one copy of each zero
        if all(abs(z - prev) > 1e-6 for prev in out):
            out.append(z)
    return out


def search_rectangle_around(k0: complex, half_re: float = 0.35, half_im: float = 0.25):
    """A pole-search rectangle containing k0 that stays inside the pole
    sector with a 0.05 margin from the contour; None if k0 sits too close to
    the contour for any such rectangle to exist."""
    from boussinesq_ist.spectral import Sector, classify, dist_to_gamma

    k0 = complex(k0)
    for _ in range(24):
        rect = (k0.real - half_re, k0.real + half_re, k0.imag - half_im, k0.imag + half_im)
        pts = _rect_boundary(rect, 16)
        ok = bool(np.all(dist_to_gamma(pts) >= 0.051)) and bool(
            np.all(dist_to_qhat(pts) >= 0.05)
        )
        if ok:
            ok = all(classify(p).sector is Sector.D2 for p in pts[:: 4])
        if ok:
            return rect
        half_re *= 0.72
        half_im *= 0.72
        if half_re < 2e-3 or half_im < 2e-3:
            break
    return None


# ----------------------------------------------------------------------------
# residue constants
# ----------------------------------------------------------------------------


def _sa22_derivative(data, k, step=DERIV_STEP):
    ks = np.array([k + step, k - step, k + 2 * step, k - 2 * step])
    v, _ = _s_entry_batch(data, ks, "XA", 2, 2)
    return (8.0 * (v[0] - v[1]) - (v[2] - v[3])) / (12.0 * step)


def _weighted_ratio(pi_vec, x1_vec, weights):
    """argmin_c sum w |pi - c x1|^2 and the normalized fit residual."""
    w = weights[:, None]
    num = np.sum(w * np.conj(x1_vec) * pi_vec)
    den = np.sum(w * np.abs(x1_vec) ** 2)
    c = num / den
    resid = np.sqrt(
        float(np.sum(weights * np.sum(np.abs(pi_vec - c * x1_vec) ** 2, axis=1)))
        / float(np.sum(weights * np.sum(np.abs(pi_vec) ** 2, axis=1)) + 1e-300)
    )
    return complex(c), float(resid)


def residue_constant(data: InitialData, k0: complex, fit_tol: float = FIT_TOL):
    """Residue constant at a simple zero of the (1,1) connection entry.

    Real zeros use the proportionality between the second left-normalized
    column and the first right-normalized column; complex zeros use the
    cross-product vector built from the adjugate eigenfunctions. Returns
    (c, fit_residual); a large fit residual signals that k0 is not a genuine
    simple zero or that the quadrature is too coarse.
    """
    k0 = complex(k0)
    x = data.x
    window = (x >= x[0] / 2.0) & (x <= x[-1] / 2.0)
    x1 = _march(data, [k0], "X", 1, want_traj=True, clip=False)["traj"][:, 0, :]

    if abs(k0.imag) < REAL_POLE_TOL:
        k0 = complex(k0.real, 0.0)
        y2 = _march(data, [k0], "Y", 2, want_traj=True, clip=False)["traj"][:, 0, :]
        dsa22 = _sa22_derivative(data, k0)
        rate = eval_l(1, k0) - eval_l(2, k0)
        pi_vec = y2 * np.exp(-rate * x)[:, None] / dsa22
    else:
        sa22, _ = _s_entry_batch(data, [k0], "XA", 2, 2)
        if abs(sa22[0]) <= 1e-8:
            raise FitResidualError(
                "the adjugate (2,2) connection entry vanishes at the zero; "
                "the simple-pole normalization breaks down"
            )
        xa2 = _march(data, [k0], "XA", 2, want_traj=True, clip=False)["traj"][:, 0, :]
        ya1 = _march(data, [k0], "YA", 1, want_traj=True, clip=False)["traj"][:, 0, :]
        w = np.empty_like(xa2)
        w[:, 0] = ya1[:, 1] * xa2[:, 2] - ya1[:, 2] * xa2[:, 1]
        w[:, 1] = ya1[:, 2] * xa2[:, 0] - ya1[:, 0] * xa2[:, 2]
        w[:, 2] = ya1[:, 0] * xa2[:, 1] - ya1[:, 1] * xa2[:, 0]
        ds11 = _s11_derivative(data, k0)
        rate = eval_l(1, k0) - eval_l(3, k0)
        pi_vec = w * np.exp(-rate * x)[:, None] / ds11

    weights = np.where(window & (np.abs(x1[:, 0]) > 0.1), np.abs(x1[:, 0]) ** 2, 0.0)
    if not np.any(weights > 0):
        raise FitResidualError("no usable fit window: |X_11| too small throughout")
    c, resid = _weighted_ratio(pi_vec, x1, weights)
    if resid > fit_tol:
        raise FitResidualError(
            f"linear dependence violated: fit residual {resid:.3e} > {fit_tol:g}"
        )
    return c, resid


def residue_constant_compact(data: InitialData, k0: complex):
    """Compact-support shortcut -s_12/sdot_11 (real k0) or -s_13/sdot_11."""
    k0 = complex(k0)
    ds11 = _s11_derivative(data, k0)
    if abs(k0.imag) < REAL_POLE_TOL:
        num, _ = _s_entry_batch(data, [k0], "X", 2, 1, growth_ok=True)
    else:
        num, _ = _s_entry_batch(data, [k0], "X", 3, 1, growth_ok=True)
    return -num[0] / ds11


# ----------------------------------------------------------------------------
# time evolution and blow-up horizon
# ----------------------------------------------------------------------------


def evolve_scattering(sd: ScatteringData, t: float) -> ScatteringData:
    """Dress the scattering data with its explicit time evolution.

    Reflection samples pick up exp(-+theta_21(0,t,k)); the pole set is
    invariant; residue constants are dressed by their own phase rates.
    """
    if t < 0:
        raise ValueError("time must be nonnegative")

    def dress1(k):
        return _clipped_exp(-_theta21_rate(k) * t)

    def dress2(k):
        return _clipped_exp(_theta21_rate(k) * t)

    new_res = {}
    for k0, c in sd.residues.items():
        if abs(complex(k0).imag) < REAL_POLE_TOL:
            rate = eval_z(1, k0) - eval_z(2, k0)
        else:
            rate = eval_z(1, k0) - eval_z(3, k0)
        new_res[k0] = c * np.exp(rate * t)

    kwargs = dict(
        poles=sd.poles,
        residues=new_res,
        time=sd.time + t,
        decay_report=sd.decay_report,
    )
    if sd.r1_fn is not None:
        old1, old2 = sd.r1_fn, sd.r2_fn
        kwargs["r1_fn"] = lambda k: old1(k) * dress1(np.asarray(k, dtype=complex))
        kwargs["r2_fn"] = lambda k: old2(k) * dress2(np.asarray(k, dtype=complex))
        return ScatteringData(**kwargs)
    return ScatteringData(
        gamma1=sd.gamma1,
        r1_ray=sd.r1_ray * dress1(sd.gamma1),
        gamma4=sd.gamma4,
        r2_ray=sd.r2_ray * dress2(sd.gamma4),
        circle=sd.circle,
        r1_circle=sd.r1_circle * dress1(sd.circle),
        r2_circle=sd.r2_circle * dress2(sd.circle),
        **kwargs,
    )


def estimate_T(sd: ScatteringData, zero_floor: float = 1e-12) -> float:
    """Existence-horizon estimate from the decay of r1 along its outer ray.

    Returns +inf when r1 vanishes (below ``zero_floor``) on the inner
    segment; otherwise the infimum over outer samples k of
    4 (-log |r1(1/k)|) / |k|^2, clipped below at 0. A heuristic estimate,
    not a certified bound.
    """
    if sd.gamma1 is None:
        raise ValueError("estimate_T needs ray samples")
    inner = np.abs(sd.gamma1) < 1.0
    if float(np.max(np.abs(sd.r1_ray[inner]))) < zero_floor:
        return float("inf")
    outer = ~inner
    kk = sd.gamma1[outer]
    vals = sd.eval_r1(1.0 / kk)
    mag = np.abs(vals)
    with np.errstate(divide="ignore"):
        terms = 4.0 * (-np.log(mag)) / np.abs(kk) ** 2
    terms = np.where(mag >= 1.0, 0.0, terms)
    terms = np.where(mag < zero_floor, np.inf, terms)
    return float(np.clip(np.min(terms), 0.0, np.inf))
