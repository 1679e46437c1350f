"""Jump matrices on the nine contour pieces and on the pole-removal circles,
the scalar arc weight f with its log-densities, and a generator of synthetic
admissible reflection data for property tests.

The nine pieces live on six rays and three unit-circle arc families; the
circle jumps remove simple poles and extend to the full circle system by the
rotation and inversion symmetries of the reconstruction problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from boussinesq_ist.scattering import ScatteringData
from boussinesq_ist.spectral import (
    MAT_A,
    MAT_B,
    OMEGA,
    DomainError,
    dist_to_gamma,
    eval_theta,
    rtilde,
)

R2_POLE_GAP = 1e-3
CIRCLE_EPS_MAX = 0.1

_A = MAT_A
_AI = np.linalg.inv(MAT_A)
_B = MAT_B

#: segment containing omega*k when k runs over segment j
ROTATION_MAP = {1: 3, 2: 4, 3: 5, 4: 6, 5: 1, 6: 2, 7: 9, 8: 7, 9: 8}

# (inner-ray angle, outer-ray angle) for the six ray pieces; arcs for 7..9
_RAY_ANGLES = {
    1: (np.pi / 2, -np.pi / 2),
    2: (5 * np.pi / 6, -np.pi / 6),
    3: (-5 * np.pi / 6, np.pi / 6),
    4: (-np.pi / 2, np.pi / 2),
    5: (-np.pi / 6, 5 * np.pi / 6),
    6: (np.pi / 6, -5 * np.pi / 6),
}
_ARC_BOUNDS = {
    7: ((np.pi / 2, 5 * np.pi / 6), (-np.pi / 2, -np.pi / 6)),
    8: ((-np.pi / 6, np.pi / 6), (5 * np.pi / 6, 7 * np.pi / 6)),
    9: ((np.pi / 6, np.pi / 2), (7 * np.pi / 6, 3 * np.pi / 2)),
}


class NearPoleError(ValueError):
    """An entry needs the second reflection coefficient too close to its pole."""


class InequalityViolatedError(ArithmeticError):
    """A log-density hit a nonpositive argument."""

    def __init__(self, msg, k=None):
        super().__init__(msg)
        self.k = k


def sample_segment(j: int, n: int, rng=None):
    """Deterministic (or rng-driven) points on contour piece j."""
    rng = np.random.default_rng(0) if rng is None else rng
    if j in _RAY_ANGLES:
        inner, outer = _RAY_ANGLES[j]
        r_in = rng.uniform(0.15, 0.9, size=(n + 1) // 2)
        r_out = 1.0 / rng.uniform(0.15, 0.9, size=n // 2)
        return np.concatenate(
            [r_in * np.exp(1j * inner), r_out * np.exp(1j * outer)]
        )
    arcs = _ARC_BOUNDS[j]
    pick = rng.integers(0, 2, size=n)
    lo = np.array([arcs[p][0] for p in pick])
    hi = np.array([arcs[p][1] for p in pick])
    pad = 0.02
    phi = rng.uniform(lo + pad, hi - pad)
    return np.exp(1j * phi)


def segment_of_circle_point(k) -> int:
    """Which of the three arc families a unit-circle point belongs to."""
    phi = float(np.angle(k)) % (2 * np.pi)
    for j, arcs in _ARC_BOUNDS.items():
        for lo, hi in arcs:
            if lo <= phi < hi or lo <= phi - 2 * np.pi < hi:
                return j
    raise DomainError(f"circle point {k} sits on an arc junction")


def _require_r2_ok(args):
    for z in np.atleast_1d(np.asarray(args, dtype=complex)):
        if abs(z - OMEGA**2) < R2_POLE_GAP or abs(z + OMEGA**2) < R2_POLE_GAP:
            raise NearPoleError(f"argument {z} is within {R2_POLE_GAP:g} of an r2 pole")


def arc_weight(sd: ScatteringData, k) -> complex:
    """The scalar weight on the circle arcs: 1 + r1 r2 at k plus the same
    product at the conjugate-rotated point. Real and nonnegative for genuine
    data."""
    k = complex(k)
    if abs(abs(k) - 1.0) > 1e-9:
        raise DomainError("arc weight is defined on the unit circle")
    z = 1.0 / (OMEGA**2 * k)
    _require_r2_ok([k, z])
    return 1.0 + sd.eval_r1(k) * sd.eval_r2(k) + sd.eval_r1(z) * sd.eval_r2(z)


def f_function(sd: ScatteringData, k) -> float:
    """Arc weight as a real number; pure numerical imaginary parts are cut."""
    val = complex(arc_weight(sd, k))
    if abs(val.imag) > 1e-8:
        raise InequalityViolatedError(
            f"arc weight has imaginary part {val.imag:.3e} at {k}", k=k
        )
    return val.real


def nu_functions(sd: ScatteringData, k):
    """The four log-densities and the two sign-definite combinations.

    Returns (nu1, nu2, nu3, nu4, nuhat1, nuhat2); raises when a logarithm
    argument fails to be positive.
    """
    k = complex(k)

    def safe_log(val, what):
        val = complex(val)
        if abs(val.imag) > 1e-8 or val.real <= 0.0:
            raise InequalityViolatedError(
                f"inequality violated: {what} = {val:.6e} at k = {k}", k=k
            )
        return math.log(val.real)

    p1 = 1.0 + sd.eval_r1(OMEGA * k) * sd.eval_r2(OMEGA * k)
    p2 = 1.0 + sd.eval_r1(OMEGA**2 * k) * sd.eval_r2(OMEGA**2 * k)
    nu1 = -safe_log(p1, "1 + r1 r2 (rotated once)") / (2 * np.pi)
    nu2 = -safe_log(p2, "1 + r1 r2 (rotated twice)") / (2 * np.pi)
    nu3 = -safe_log(arc_weight(sd, OMEGA * k), "arc weight (rotated once)") / (2 * np.pi)
    nu4 = -safe_log(arc_weight(sd, OMEGA**2 * k), "arc weight (rotated twice)") / (
        2 * np.pi
    )
    return nu1, nu2, nu3, nu4, nu3 - nu1, nu2 + nu3 - nu4


# ----------------------------------------------------------------------------
# jump matrices on the nine pieces
# ----------------------------------------------------------------------------


def build_v(sd: ScatteringData, x, t, k, segment: int):
    """Jump matrix on contour piece ``segment`` evaluated at (x, t, k)."""
    k = complex(k)
    r1, r2 = sd.eval_r1, sd.eval_r2
    w = OMEGA
    th21 = eval_theta(2, 1, x, t, k)
    th31 = eval_theta(3, 1, x, t, k)
    th32 = eval_theta(3, 2, x, t, k)
    e21m, e21p = np.exp(-th21), np.exp(th21)
    e31m, e31p = np.exp(-th31), np.exp(th31)
    e32m, e32p = np.exp(-th32), np.exp(th32)
    v = np.eye(3, dtype=complex)

    if segment == 1:
        a, b = r1(k), r1(1.0 / k)
        v[0, 1] = -a * e21m
        v[1, 0] = b * e21p
        v[1, 1] = 1.0 - a * b
    elif segment == 2:
        _require_r2_ok([w * k, 1.0 / (w * k)])
        a, b = r2(w * k), r2(1.0 / (w * k))
        v[1, 1] = 1.0 - a * b
        v[1, 2] = -b * e32m
        v[2, 1] = a * e32p
    elif segment == 3:
        a, b = r1(w**2 * k), r1(1.0 / (w**2 * k))
        v[0, 0] = 1.0 - a * b
        v[0, 2] = b * e31m
        v[2, 0] = -a * e31p
    elif segment == 4:
        _require_r2_ok([k, 1.0 / k])
        a, b = r2(k), r2(1.0 / k)
        v[0, 0] = 1.0 - a * b
        v[0, 1] = -b * e21m
        v[1, 0] = a * e21p
    elif segment == 5:
        a, b = r1(w * k), r1(1.0 / (w * k))
        v[1, 2] = -a * e32m
        v[2, 1] = b * e32p
        v[2, 2] = 1.0 - a * b
    elif segment == 6:
        _require_r2_ok([w**2 * k, 1.0 / (w**2 * k)])
        a, b = r2(w**2 * k), r2(1.0 / (w**2 * k))
        v[0, 2] = a * e31m
        v[2, 0] = -b * e31p
        v[2, 2] = 1.0 - a * b
    elif segment == 7:
        _require_r2_ok([k, w**2 * k, 1.0 / (w * k)])
        v[0, 1] = -r1(k) * e21m
        v[0, 2] = r2(w**2 * k) * e31m
        v[1, 0] = -r2(k) * e21p
        v[1, 1] = 1.0 + r1(k) * r2(k)
        v[1, 2] = (r2(1.0 / (w * k)) - r2(k) * r2(w**2 * k)) * e32m
        v[2, 0] = r1(w**2 * k) * e31p
        v[2, 1] = (r1(1.0 / (w * k)) - r1(k) * r1(w**2 * k)) * e32p
        v[2, 2] = arc_weight(sd, w**2 * k)
    elif segment == 8:
        _require_r2_ok([k, w * k, 1.0 / (w**2 * k)])
        v[0, 0] = arc_weight(sd, k)
        v[0, 1] = r1(k) * e21m
        v[0, 2] = (r1(1.0 / (w**2 * k)) - r1(k) * r1(w * k)) * e31m
        v[1, 0] = r2(k) * e21p
        v[1, 2] = -r1(w * k) * e32m
        v[2, 0] = (r2(1.0 / (w**2 * k)) - r2(w * k) * r2(k)) * e31p
        v[2, 1] = -r2(w * k) * e32p
        v[2, 2] = 1.0 + r1(w * k) * r2(w * k)
    elif segment == 9:
        _require_r2_ok([w * k, w**2 * k, 1.0 / k])
        v[0, 0] = 1.0 + r1(w**2 * k) * r2(w**2 * k)
        v[0, 1] = (r2(1.0 / k) - r2(w * k) * r2(w**2 * k)) * e21m
        v[0, 2] = -r2(w**2 * k) * e31m
        v[1, 0] = (r1(1.0 / k) - r1(w * k) * r1(w**2 * k)) * e21p
        v[1, 1] = arc_weight(sd, w * k)
        v[1, 2] = r1(w * k) * e32m
        v[2, 0] = -r1(w**2 * k) * e31p
        v[2, 1] = r2(w * k) * e32p
    else:
        raise ValueError("segment must be 1..9")
    return v


# ----------------------------------------------------------------------------
# pole-removal circles
# ----------------------------------------------------------------------------


def _q1(k0, c, x, t, k):
    v = np.eye(3, dtype=complex)
    cc = c * np.exp(-eval_theta(3, 1, x, t, k0))
    v[0, 2] = -cc / (k - k0) * (k**2 - OMEGA) / (k0**2 - OMEGA)
    return v


def _q7(k0, c, x, t, k):
    kb = np.conj(k0)
    v = np.eye(3, dtype=complex)
    cc = np.conj(c) * np.exp(eval_theta(3, 2, x, t, kb))
    v[2, 1] = -cc / (k - kb) * (k**2 - 1.0) / (OMEGA**2 * (OMEGA**2 - kb**2))
    return v


def _p1(k0, c, x, t, k):
    v = np.eye(3, dtype=complex)
    cc = c * np.exp(-eval_theta(2, 1, x, t, k0))
    v[0, 1] = -cc / (k - k0) * (k**2 - OMEGA) / (k0**2 - OMEGA)
    return v


def named_circle_jump(name: str, k0, c, x, t, k):
    """The explicitly displayed pole-removal matrices, by name."""
    w = OMEGA
    if name == "Q1":
        return _q1(k0, c, x, t, k)
    if name == "Q7":
        return _q7(k0, c, x, t, k)
    if name == "P1":
        return _p1(k0, c, x, t, k)
    if name == "Q2":
        return _AI @ _q1(k0, c, x, t, w**2 * k) @ _A
    if name == "Q5":
        return _B @ _AI @ np.linalg.inv(_q1(k0, c, x, t, 1.0 / (w * k))) @ _A @ _B
    if name == "Q11":
        from boussinesq_ist.spectral import r_matrix

        r = r_matrix(k)
        inner = np.conj(np.linalg.inv(named_circle_jump("Q5", k0, c, x, t, np.conj(k))))
        return r @ inner.T @ np.linalg.inv(r)
    if name == "P5":
        return _B @ _AI @ np.linalg.inv(_p1(k0, c, x, t, 1.0 / (w * k))) @ _A @ _B
    if name == "P6":
        return _B @ _A @ np.linalg.inv(_p1(k0, c, x, t, 1.0 / (w**2 * k))) @ _AI @ _B
    raise ValueError(f"unknown pole-removal matrix {name}")


@dataclass(frozen=True)
class Circle:
    """One pole-removal circle: geometric data plus its symmetry coordinates."""

    center: complex
    radius: float
    ccw: bool
    k0: complex
    c: complex
    rot: int  # rotation power applied to the base disk
    kind: str  # "plain" | "star" | "inv" | "invstar"

    def point(self, angle: float) -> complex:
        return self.center + self.radius * np.exp(1j * angle)


def _inverted_circle(center, radius):
    d = abs(center) ** 2 - radius**2
    return np.conj(center) / d, radius / abs(d)


def circle_system(poles, residues, epsilon: float | None = None):
    """All pole-removal circles for the given pole set.

    Six circles per real pole and twelve per complex pole; the radius is
    shrunk until all circles are pairwise disjoint and clear of the contour.
    """
    pts = []
    for k0 in poles:
        k0 = complex(k0)
        base = [k0, np.conj(k0)] if abs(k0.imag) > 1e-9 else [k0]
        for b in base:
            for j in range(3):
                pts.append(OMEGA**j * b)
                pts.append(OMEGA**j / b)
    pts = np.array(pts)
    if epsilon is None:
        sep = np.inf
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                sep = min(sep, abs(pts[i] - pts[j]))
        sep = min(sep, float(np.min(dist_to_gamma(pts))))
        epsilon = min(CIRCLE_EPS_MAX, sep / 3.0)

    def build(eps):
        out = []
        for k0 in poles:
            k0 = complex(k0)
            c = residues[k0]
            is_real = abs(k0.imag) <= 1e-9
            variants = [("plain", k0)] if is_real else [("plain", k0), ("star", np.conj(k0))]
            for kind, base in variants:
                inv_kind = "inv" if kind == "plain" else "invstar"
                for j in range(3):
                    out.append(
                        Circle(OMEGA**j * base, eps, True, k0, c, j, kind)
                    )
                    ic, ir = _inverted_circle(base, eps)
                    out.append(
                        Circle(OMEGA**j * ic, ir, False, k0, c, j, inv_kind)
                    )
        return out

    for _ in range(40):
        circles = build(epsilon)
        ok = True
        for i in range(len(circles)):
            ci = circles[i]
            if dist_to_gamma(np.array([ci.center]))[0] <= ci.radius:
                ok = False
                break
            for j in range(i + 1, len(circles)):
                cj = circles[j]
                if abs(ci.center - cj.center) <= ci.radius + cj.radius:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return circles
        epsilon /= 2.0
    raise DomainError("could not find disjoint pole-removal circles")


def circle_jump(circle: Circle, x, t, k):
    """Jump matrix on a pole-removal circle at a point k of that circle.

    Base disks carry the explicit removal matrices; every other circle is
    reached through v(k) = A v(w k) A^-1 and v(k) = B v(1/k)^-1 B.
    """
    k = complex(k)
    k0, c = circle.k0, circle.c
    is_real = abs(complex(k0).imag) <= 1e-9

    def eval_at(rot, kind, kk):
        if rot != 0:
            # kk lies on w^rot * (base); w*kk lies on w^(rot+1) * base
            return _A @ eval_at((rot + 1) % 3, kind, OMEGA * kk) @ _AI
        if kind == "plain":
            return _p1(k0, c, x, t, kk) if is_real else _q1(k0, c, x, t, kk)
        if kind == "star":
            return _q7(k0, c, x, t, kk)
        if kind == "inv":
            return _B @ np.linalg.inv(eval_at(0, "plain", 1.0 / kk)) @ _B
        if kind == "invstar":
            return _B @ np.linalg.inv(eval_at(0, "star", 1.0 / kk)) @ _B
        raise ValueError(kind)

    if circle.kind in ("inv", "invstar"):
        # circle = w^rot * (base^-1); 1/k lies on w^-rot * base... reduce
        # rotation first: point of w^rot * C-inverse
        def eval_inv(rot, kk):
            if rot != 0:
                return _A @ eval_inv((rot + 1) % 3, OMEGA * kk) @ _AI
            base_kind = "plain" if circle.kind == "inv" else "star"
            return _B @ np.linalg.inv(eval_at(0, base_kind, 1.0 / kk)) @ _B

        return eval_inv(circle.rot, k)
    return eval_at(circle.rot, circle.kind, k)


def build_circle_jump(sd: ScatteringData, x, t, k, circle: Circle):
    """Spec-facing wrapper: jump on a named circle of the system."""
    del sd  # the circle carries its own pole data
    return circle_jump(circle, x, t, k)


# ----------------------------------------------------------------------------
# synthetic admissible reflection data
# ----------------------------------------------------------------------------


def _window(s):
    """Smooth bump on (0,1), vanishing to second order at both ends."""
    s = np.clip(s, 0.0, 1.0)
    return np.sin(np.pi * s) ** 2


def synthetic_scattering_data(seed: int = 0, amplitude: float = 0.35) -> ScatteringData:
    """Reflection data satisfying the two admissibility relations exactly.

    Free smooth values are drawn on three of the six 60-degree arcs; the
    remaining arcs are completed through the circle relation, and the second
    coefficient is defined by the conjugation symmetry. Ray values are a
    smooth super-polynomially decaying bump.
    """
    rng = np.random.default_rng(seed)
    coefs = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    ray_coefs = rng.normal(size=2) + 1j * rng.normal(size=2)

    third = 2 * np.pi / 3

    def free_arc(idx, s):
        # smooth complex profile on the fundamental arc, s in (0,1)
        base = (
            coefs[idx, 0]
            + coefs[idx, 1] * np.cos(2 * np.pi * s)
            + coefs[idx, 2] * np.sin(2 * np.pi * s)
        )
        return amplitude * _window(s) * base / 3.0

    def circle_r1(k):
        phi = np.mod(np.angle(k), 2 * np.pi)
        sector = np.floor(phi / (np.pi / 3)).astype(int) % 6
        # slots 0,2,4 hold free values a1,a2,a3; slots 5,1,3 take the
        # completed values b1,b2,b3 living at the reflected angles
        phi0 = np.select(
            [sector == 0, sector == 2, sector == 4, sector == 5, sector == 1],
            [phi, phi - third, phi - 2 * third, 2 * np.pi - phi, third - phi],
            default=2 * third - phi,
        )
        s = phi0 / (np.pi / 3)
        a1 = free_arc(0, s)
        a2 = free_arc(1, s)
        a3 = free_arc(2, s)
        base = np.exp(1j * phi0)
        rt1 = rtilde(base)
        rt2 = rtilde(OMEGA * base)
        rt3 = rtilde(OMEGA**2 * base)
        al1 = a2 * a3 - rt1 * np.conj(a1)
        be1 = rt1 * np.conj(a1) * a2
        al3 = a3 * a1 - rt2 * np.conj(a2)
        be3 = rt2 * np.conj(a2) * a3
        al2 = a1 * a2 - rt3 * np.conj(a3)
        be2 = rt3 * np.conj(a3) * a1
        b1 = (al1 + be1 * al3 + be1 * be3 * al2) / (1.0 - be1 * be3 * be2)
        b2 = al2 + be2 * b1
        b3 = al3 + be3 * b2
        return np.select(
            [sector == 0, sector == 2, sector == 4, sector == 5, sector == 1],
            [a1, a2, a3, b1, b2],
            default=b3,
        )

    def ray_r1(k):
        lm = np.log(np.abs(k))
        prof = ray_coefs[0] + ray_coefs[1] * np.tanh(lm)
        return amplitude * np.exp(-(lm**2)) * prof / 3.0

    def r1_fn(k):
        k = np.atleast_1d(np.asarray(k, dtype=complex))
        out = np.empty(k.shape, dtype=complex)
        on_circle = np.abs(np.abs(k) - 1.0) < 1e-9
        if np.any(on_circle):
            out[on_circle] = circle_r1(k[on_circle])
        if np.any(~on_circle):
            out[~on_circle] = ray_r1(k[~on_circle])
        return out

    def r2_fn(k):
        k = np.atleast_1d(np.asarray(k, dtype=complex))
        return rtilde(k) * np.conj(r1_fn(1.0 / np.conj(k)))

    return ScatteringData(r1_fn=r1_fn, r2_fn=r2_fn)


def reflectionless_data(poles=(), residues=None) -> ScatteringData:
    """Zero reflection with an optional pole set."""
    return ScatteringData(
        r1_fn=lambda k: np.zeros(np.shape(k), dtype=complex),
        r2_fn=lambda k: np.zeros(np.shape(k), dtype=complex),
        poles=tuple(poles),
        residues=dict(residues or {}),
    )
