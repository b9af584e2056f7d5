"""Green's function, Boettcher coordinate, external rays and landing points.

Ray tracing uses the standard dyadic scheme: the point of R(theta) at
potential t solves f^k(z) = phi^{-1}(exp(2^k (t + 2 pi i theta))) for k
doublings, solved by Newton seeded along decreasing potentials.  Rational
rays land; landing points are Richardson-extrapolated and polished by Newton
against the (pre)periodic-point equation of the angle's orbit type.

The ray *family* pulls entire polylines back through z -> sqrt(z - c),
which settles which square root belongs to which halved angle; that decision
is the branch anchor for everything downstream (tiles, the semiconjugacy).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .angles import RationalAngle, orbit_meta

ESCAPE_RADIUS = 1e4
DEFAULT_LEVELS = 24
NEWTON_TOL = 1e-12


class RayError(ArithmeticError):
    """Newton divergence while tracing a ray, with the failing potential."""

    def __init__(self, message: str, potential: float | None = None):
        super().__init__(message)
        self.potential = potential


def green(c: complex, z: complex, max_iter: int = 512) -> float:
    """Green's function G(z) = lim 2^-n log|f^n(z)|, zero on K_f."""
    zn = complex(z)
    for n in range(max_iter):
        if abs(zn) > ESCAPE_RADIUS:
            # log|phi(zn)| = log|zn| + sum 2^-(k+1) log|1 + c/zk^2|
            g = math.log(abs(zn))
            w = zn
            for k in range(24):
                w2 = w * w
                corr = abs(c) / abs(w2)
                if corr < 1e-18:
                    break
                g += math.log(abs(1 + c / w2)) / 2 ** (k + 1)
                w = w2 + c
            return g / 2 ** n
        zn = zn * zn + c
    return 0.0


def bottcher_escaped(c: complex, z: complex) -> complex:
    """Boettcher coordinate of an already-escaped point (|z| > escape radius).

    phi(z) = z * prod_k (1 + c/z_k^2)^(2^-(k+1)) with principal powers.
    """
    w = complex(z)
    log_phi = cmath.log(w)
    for k in range(64):
        w2 = w * w
        if abs(c / w2) < 1e-18:
            break
        log_phi += cmath.log(1 + c / w2) / 2 ** (k + 1)
        w = w2 + c
    return cmath.exp(log_phi)


def external_coordinates(c: complex, z: complex,
                         max_iter: int = 2048) -> tuple[float, float]:
    """(theta, G) of a basin-of-infinity point: z lies on R(theta) at
    potential G.

    The angle is reconstructed by halving from the escaped iterate: at each
    backward step the true orbit point selects which of the two candidate
    angle halves it sits on (the candidates' ray points are antipodal-ish,
    the orbit point coincides with one of them).
    """
    orbit_pts = [complex(z)]
    while abs(orbit_pts[-1]) <= ESCAPE_RADIUS:
        orbit_pts.append(orbit_pts[-1] ** 2 + c)
        if len(orbit_pts) > max_iter:
            raise RayError("point did not escape; external angle undefined")
    phi = bottcher_escaped(c, orbit_pts[-1])
    theta = (cmath.phase(phi) / (2 * math.pi)) % 1.0
    g_top = math.log(abs(phi))
    n = len(orbit_pts) - 1
    for k in range(n - 1, -1, -1):
        t_k = g_top / 2 ** (n - k)
        if t_k < 1e-12:
            raise RayError("potential underflow in angle reconstruction")
        h0 = theta / 2
        # R(h0 + 1/2) = -R(h0) exactly (the Boettcher map is odd), so the two
        # candidate points are +-p0 and the true orbit point picks the half
        p0 = inverse_bottcher(c, cmath.exp(t_k + 2j * math.pi * h0))
        zk = orbit_pts[k]
        theta = h0 if abs(p0 - zk) <= abs(-p0 - zk) else (h0 + 0.5)
    return theta % 1.0, g_top / 2 ** n


def inverse_bottcher(c: complex, w: complex) -> complex:
    """phi^{-1}(w) for |w| > 1, by square-root pullback of the asymptotic tail.

    For very large |w| the expansion z = w - c/(2w) + O(w^-3) is used; below
    that, z = sqrt(phi^{-1}(w^2) - c) with the root on w's side.
    """
    if abs(w) <= 1:
        raise ValueError("need |w| > 1")
    if abs(w) >= 1e8:
        return w - c / (2 * w)
    zz = inverse_bottcher(c, w * w)
    root = cmath.sqrt(zz - c)
    return root if (root.real * w.real + root.imag * w.imag) >= 0 else -root


@dataclass
class RayTrace:
    angle: RationalAngle
    samples: list[tuple[complex, float]]  # (point, potential), decreasing
    landing: complex


def _ray_target(c: complex, theta: float, t: float) -> tuple[complex, int]:
    """(w, k): solve f^k(z) = w to put z on R(theta) at potential t.

    k is chosen so the target potential t * 2^k lies in (t0/2, t0]."""
    t0 = math.log(ESCAPE_RADIUS)
    k = max(0, math.floor(math.log2(t0 / t))) if t < t0 else 0
    big_t = t * 2 ** k
    ang = (theta * 2 ** k) % 1.0
    w = inverse_bottcher(c, cmath.exp(big_t + 2j * math.pi * ang))
    return w, k


def _newton_fk(c: complex, z: complex, k: int, w: complex,
               max_iter: int = 60) -> complex | None:
    for _ in range(max_iter):
        zn, D = z, 1 + 0j
        for _ in range(k):
            D = 2 * zn * D
            zn = zn * zn + c
            if abs(zn) > 1e30:
                return None
        g = zn - w
        if D == 0:
            return None
        step = g / D
        z -= step
        if abs(step) < NEWTON_TOL * max(1.0, abs(z)):
            # verify the residual against the derivative-scaled noise floor
            # so a merely-stagnated iterate cannot pass as a solution
            zn2, D2 = z, 1 + 0j
            for _ in range(k):
                D2 = 2 * zn2 * D2
                zn2 = zn2 * zn2 + c
            noise = 64 * 2.3e-16 * abs(D2) * (1 + abs(z)) + 1e-11 * (1 + abs(w))
            if abs(zn2 - w) <= noise:
                return z
            return None
    return None


def _descend(c: complex, theta: float, t_from: float, t_to: float,
             z: complex, ratio: float = 0.5 ** 0.25,
             collect: list | None = None) -> complex:
    """Walk a ray point from potential t_from down to t_to by Newton steps.

    The step ratio adapts: on Newton failure the step is square-rooted (up to
    a retry budget) before giving up.
    """
    tt = t_from
    r = ratio
    while tt > t_to * 1.0000001:
        t_next = max(t_to, tt * r)
        w, k = _ray_target(c, theta, t_next)
        znew = _newton_fk(c, z, k, w)
        if znew is None:
            if r > 0.995:
                raise RayError(f"ray Newton diverged at potential {t_next}",
                               t_next)
            r = math.sqrt(r)
            continue
        z, tt = znew, t_next
        r = min(ratio, r * r) if r > ratio else ratio
        if collect is not None:
            collect.append((z, tt))
    return z


def ray_point(c: complex, theta: float, t: float) -> complex:
    """Point of the external ray of (real) angle theta at potential t > 0.

    Newton descent along geometric potential levels from the escape radius;
    theta is taken mod 1 as a float, so keep t above ~1e-9 (the doubling
    depth eats float angle precision beyond that).
    """
    if t <= 0:
        raise ValueError("potential must be positive")
    t0 = math.log(ESCAPE_RADIUS)
    theta = theta % 1.0
    start = min(t0, max(t, 1.0))
    z = inverse_bottcher(c, cmath.exp(start + 2j * math.pi * theta))
    if t >= start:
        w, k = _ray_target(c, theta, t)
        znew = _newton_fk(c, z, k, w)
        if znew is None:
            raise RayError(f"ray Newton diverged at potential {t}", t)
        return znew
    return _descend(c, theta, start, t, z)


def trace_ray(c: complex, theta: RationalAngle,
              from_potential: float = math.log(ESCAPE_RADIUS),
              to_potential: float = 1e-7,
              steps_per_level: int = 4,
              land: bool = True) -> RayTrace:
    """Trace R(theta) from high to low potential as a polyline.

    Potentials are strictly decreasing; each sample is Newton-refined against
    the pulled-back Boettcher target.  The landing point is appended via
    `landing_point` unless land=False.
    """
    th = float(theta.fraction)
    t = from_potential
    z = inverse_bottcher(c, cmath.exp(t + 2j * math.pi * th))
    samples: list[tuple[complex, float]] = [(z, t)]
    _descend(c, th, t, to_potential, z,
             ratio=0.5 ** (1.0 / steps_per_level), collect=samples)
    lp = landing_point(c, theta, _trace_tail=samples) if land else None
    return RayTrace(angle=theta, samples=samples, landing=lp)


def landing_point(c: complex, theta: RationalAngle,
                  _trace_tail: list[tuple[complex, float]] | None = None) -> complex:
    """Landing point gamma(theta) of the rational ray R(theta).

    Richardson-extrapolates trace endpoints as the potential halves, then
    polishes with Newton on f^{pre+per}(z) = f^{pre}(z).  Near-parabolic
    landing converges slowly, so the periodic-point equation takes over once
    the extrapolation is within 1e-3.
    """
    meta = orbit_meta(theta)
    th = float(theta.fraction)
    if _trace_tail is None:
        z = ray_point(c, th, 1e-3)
        tail: list[tuple[complex, float]] = [(z, 1e-3)]
        _descend(c, th, 1e-3, 3e-7, z, ratio=0.5, collect=tail)
        pts = [p for p, _ in tail]
    else:
        pts = [p for p, _ in _trace_tail[-12:]]
    if len(pts) >= 3:
        # one Richardson step on the last three (error ~ C rho^n)
        a, b, d = pts[-3], pts[-2], pts[-1]
        denom = (a - 2 * b + d)
        extrap = d - (d - b) ** 2 / denom if abs(denom) > 1e-30 else d
    else:
        extrap = pts[-1]

    pre, per = meta.preperiod, meta.period
    z = _newton_preperiodic(c, extrap, pre, per)

    # parabolic cycles stall the plain polish at the float noise floor; the
    # cycle point is then re-solved on its exact-period equation (a simple
    # root when the rotation number is non-trivial) and pulled back through
    # f^pre, which is a simple-root solve as well.
    zn = z
    for _ in range(pre):
        zn = zn * zn + c
    mult = 1 + 0j
    w = zn
    for _ in range(per):
        mult *= 2 * w
        w = w * w + c
    if abs(abs(mult) - 1) < 2e-3:
        best = None
        for d in range(1, per + 1):
            if per % d:
                continue
            wd = _newton_periodic(c, zn, d)
            if wd is not None and abs(wd - zn) < 0.2:
                best = wd
                break
        if best is not None:
            if pre:
                z = _newton_to_target(c, z, pre, best)
            else:
                z = best

    # the trace must actually be heading into the polished point
    tail_d = [abs(p - z) for p in pts[-6:]]
    if not (tail_d[-1] <= tail_d[0] + 1e-12 and tail_d[-1] < 0.5):
        raise RayError(
            f"landing extrapolation {extrap} and periodic polish {z} disagree "
            f"for angle {theta}")
    return z


def _newton_preperiodic(c: complex, z: complex, pre: int, per: int) -> complex:
    """Newton on f^(pre+per)(z) = f^pre(z)."""
    for _ in range(240):
        zn, D = z, 1 + 0j
        for _ in range(pre):
            D = 2 * zn * D
            zn = zn * zn + c
        mid, Dm = zn, D
        for _ in range(per):
            D = 2 * zn * D
            zn = zn * zn + c
        dg = D - Dm
        if dg == 0:
            break
        step = (zn - mid) / dg
        z -= step
        if abs(step) < 1e-14:
            break
    return z


def _newton_periodic(c: complex, z: complex, d: int) -> complex | None:
    """Newton on f^d(w) = w; tangent (multiplier-1) cycles are double roots
    and get the multiplicity-corrected step."""
    w = complex(z)
    for _ in range(200):
        zn, D = w, 1 + 0j
        for _ in range(d):
            D = 2 * zn * D
            zn = zn * zn + c
        dg = D - 1
        g = zn - w
        if dg == 0:
            return w
        step = (2 * g / dg) if abs(dg) < 1e-6 else (g / dg)
        w -= step
        if abs(step) < 5e-14:
            return w
    return w


def _newton_to_target(c: complex, z: complex, n: int, target: complex) -> complex:
    """Newton on f^n(z) = target (simple root away from critical orbits)."""
    for _ in range(80):
        zn, D = z, 1 + 0j
        for _ in range(n):
            D = 2 * zn * D
            zn = zn * zn + c
        if D == 0:
            break
        step = (zn - target) / D
        z -= step
        if abs(step) < 1e-14:
            break
    return z


class RayFamily:
    """Memoized external rays and landing points of one map.

    Landing points of deeply preperiodic angles are chained through exact
    square roots of the forward angle's landing, with the branch picked by a
    cheap ray-tail side test; the high-iterate Newton polish is only used
    near the cycle, where it is stable.
    """

    MAX_DIRECT_PREPERIOD = 10

    def __init__(self, c: complex, depth_potential: float = 1e-7,
                 steps_per_level: int = 4):
        self.c = c
        self.to_potential = depth_potential
        self.steps = steps_per_level
        self._cache: dict[RationalAngle, tuple[np.ndarray, np.ndarray]] = {}
        self._landing: dict[RationalAngle, complex] = {}
        self._tail: dict[RationalAngle, complex] = {}

    def polyline(self, theta: RationalAngle) -> tuple[np.ndarray, np.ndarray]:
        if theta not in self._cache:
            tr = trace_ray(self.c, theta, to_potential=self.to_potential,
                           steps_per_level=self.steps, land=False)
            self._cache[theta] = (np.array([p for p, _ in tr.samples]),
                                  np.array([t for _, t in tr.samples]))
        return self._cache[theta]

    def tail(self, theta: RationalAngle, potential: float = 1e-5) -> complex:
        """A ray point deep enough to sit on its landing point's side."""
        if theta not in self._tail:
            tr = trace_ray(self.c, theta, to_potential=potential,
                           steps_per_level=2, land=False)
            self._tail[theta] = tr.samples[-1][0]
        return self._tail[theta]

    def landing(self, theta: RationalAngle) -> complex:
        if theta in self._landing:
            return self._landing[theta]
        if orbit_meta(theta).preperiod <= self.MAX_DIRECT_PREPERIOD:
            lp = landing_point(self.c, theta)
        else:
            root = cmath.sqrt(self.landing(theta.double()) - self.c)
            t = self.tail(theta)
            lp = root if abs(t - root) <= abs(t + root) else -root
        self._landing[theta] = lp
        return lp

    def approach_direction(self, theta: RationalAngle) -> complex:
        """Unit vector along which R(theta) approaches its landing point."""
        pts, _ = self.polyline(theta)
        lp = self.landing(theta)
        for p in pts[::-1]:
            d = p - lp
            if abs(d) > 1e-9:
                return d / abs(d)
        raise RayError(f"degenerate ray tail for angle {theta}")
