"""The pinching semiconjugacy h from f to g and its verification.

The model conjugacy chi sends the hyperbolic half-annuli A(m, ±) onto the
parabolic half-strips C(m, ±):

    chi(W) = log_r(|W - a|/a) + i cot(arg(W - a)/2),   arg in (0, 2pi),

conjugating F(W) = rW + 1 on C - [a, oo) to G(W) = W + 1 exactly.  The point
map h is evaluated by backward transport: iterate z into the distinguished
deep sector of the critical cycle component, convert the chart value through
chi, invert the Fatou coordinate in the critical petal, and pull the result
back through the same number of square roots, selecting branches by
proximity (h moves points by far less than the branch separation except
next to the critical point, where the evaluation reports failure instead of
guessing).  Escaping points transport through Boettcher coordinates, and
degenerating arcs pinch to the matching point of I_g.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import DegenerationPair, QuadMap
from .linearize import (ChartError, fatou_chart, koenigs_chart)
from .rays import external_coordinates, ray_point, RayError
from .tess import TileAddress, build_tile, point_to_polyline

TWO_PI = 2 * math.pi


class SemiconjError(ArithmeticError):
    """h could not be resolved at the configured precision."""


@dataclass(frozen=True)
class ModelConjugacy:
    """chi: the exact conjugacy from F(W)=rW+1 on C-I to G(W)=W+1."""

    r: float

    @property
    def a(self) -> float:
        return 1.0 / (1.0 - self.r)

    def chi(self, W: complex) -> complex:
        u = complex(W) - self.a
        if u == 0:
            raise ValueError("chi undefined at the model fixed point")
        ang = cmath.phase(u) % TWO_PI
        if ang == 0.0:
            raise ValueError("chi undefined on the cut I = [a, oo)")
        re = math.log(abs(u) / self.a) / math.log(self.r)
        return complex(re, 1.0 / math.tan(ang / 2))

    def chi_inv(self, zeta: complex) -> complex:
        # cot(ang/2) = Im zeta with ang in (0, 2pi):  ang = 2*arccot(Im)
        ang = 2 * math.atan2(1.0, zeta.imag)
        mod = self.a * self.r ** zeta.real
        return self.a + mod * cmath.exp(1j * ang)


def spherical_distance(z: complex, w: complex) -> float:
    if cmath.isinf(z) or cmath.isinf(w):
        if cmath.isinf(z) and cmath.isinf(w):
            return 0.0
        finite = w if cmath.isinf(z) else z
        return 2.0 / math.sqrt(1.0 + abs(finite) ** 2)
    return 2 * abs(z - w) / math.sqrt((1 + abs(z) ** 2) * (1 + abs(w) ** 2))


def _deep_sector_ok(kc, z, want_plus_side):
    j, raw = kc.sector_of(z)
    amap = kc.sector_angle_map_raw()
    s = raw * kc.flip
    theta = amap[(j, raw)]
    return (s == 1 and theta == want_plus_side[0]) or \
        (s == -1 and theta == want_plus_side[1])


class Semiconjugacy:
    """Evaluator for h: C-bar -> C-bar for one degeneration pair."""

    def __init__(self, pair: DegenerationPair):
        self.pair = pair
        self.kc = koenigs_chart(pair)
        self.fc = fatou_chart(pair)
        self.kc.ensure_calibrated()
        self.fc.ensure_calibrated()
        if self.kc.flip != self.fc.flip:
            # chi preserves the raw Im-sign, so consistent labels demand
            # identical flips; a mismatch would mean a calibration bug
            raise ChartError("signature calibrations disagree across the pair")
        self.model = ModelConjugacy(self.kc.r_model)
        from .angles import RationalAngle
        tp, tm = self.fc.characteristic_lifted()
        self.theta0 = (RationalAngle(tp), RationalAngle(tm))
        self.c = complex(pair.c)
        self.sigma = complex(pair.sigma)

    # -- pieces ------------------------------------------------------------

    def _transport_escaping(self, z: complex) -> complex:
        theta, g = external_coordinates(self.c, z)
        return ray_point(self.sigma, theta, g)

    def _petal_inverse(self, zeta: complex) -> complex:
        """Solve Phi_g(y) = zeta for y in the critical petal."""
        fc = self.fc
        target = (zeta - fc._normc) / fc.lbar
        d0 = fc.abel_d[0]
        # seed from the leading term of the Abel expansion
        seed_pow = d0 / target
        axis = fc.axes[fc.axis_crit]
        best = None
        for k in range(fc.qp):
            cand = abs(seed_pow) ** (1 / fc.qp) * cmath.exp(
                1j * ((cmath.phase(seed_pow) + TWO_PI * k) / fc.qp))
            da = abs(math.remainder(cmath.phase(cand) - axis, TWO_PI))
            if best is None or da < best[0]:
                best = (da, cand)
        x = best[1]
        for _ in range(80):
            val, der = fc._phi_local(x, axis)
            step = (val - target) / der
            x -= step
            if abs(step) < 1e-13 * max(abs(x), 1e-6):
                break
        return fc.beta0 + x

    def _backward(self, ys_end: complex, orbit: list[complex]) -> complex:
        """Pull the g-side deep point back through len(orbit)-1 roots,
        mirroring the recorded f-side orbit."""
        y = ys_end
        for k in range(len(orbit) - 2, -1, -1):
            root = cmath.sqrt(y - self.sigma)
            zk = orbit[k]
            d_plus, d_minus = abs(root - zk), abs(root + zk)
            if min(d_plus, d_minus) > 0.75 * max(d_plus, d_minus):
                raise SemiconjError(
                    f"branch separation too small at step {k}: "
                    f"candidate gap {abs(2 * root):.3e}")
            y = root if d_plus <= d_minus else -root
        return y

    def __call__(self, z: complex, max_iter: int = 20000) -> complex:
        if cmath.isinf(z):
            return complex("inf")
        zz = complex(z)
        # escaping side: Boettcher transport
        probe = zz
        for _ in range(64):
            probe = probe * probe + self.c
            if abs(probe) > 1e6:
                return self._transport_escaping(zz)
        kc = self.kc
        orbit = [zz]
        cur = zz
        pinch = None
        for n in range(max_iter):
            j = kc.lobe_of(cur)
            if abs(cur - kc.alpha[j]) <= kc.rho and (kc.l - j) % kc.l == 0:
                try:
                    w, _ = kc.phi_and_deriv(cur)
                except ChartError:
                    w = None
                if w is not None:
                    u = w - kc.a
                    ang = cmath.phase(u) % TWO_PI
                    if min(ang, TWO_PI - ang) < 1e-9:
                        pinch = True   # on the degenerating arcs
                        break
                    zeta = self.model.chi(w)
                    if zeta.real >= 8.0 and _deep_sector_ok(kc, cur, self.theta0):
                        break
            if abs(cur) > 1e6:
                return self._transport_escaping(zz)
            cur = cur * cur + self.c
            orbit.append(cur)
        else:
            raise SemiconjError(f"orbit of {z} did not reach the deep sector")
        if pinch:
            y_end = self.fc.beta0
        else:
            w, _ = kc.phi_and_deriv(orbit[-1])
            y_end = self._petal_inverse(self.model.chi(w))
        return self._backward(y_end, orbit)


_SEMI: dict[DegenerationPair, Semiconjugacy] = {}


def semiconjugacy(pair: DegenerationPair) -> Semiconjugacy:
    if pair not in _SEMI:
        _SEMI[pair] = Semiconjugacy(pair)
    return _SEMI[pair]


def h(pair: DegenerationPair, z: complex) -> complex:
    """The pinching semiconjugacy from f to g evaluated at z."""
    return semiconjugacy(pair)(z)


# ---------------------------------------------------------------------------
# grids and residuals


def sample_grid(pair: DegenerationPair, n: int = 40,
                avoid: float = 1e-4, retries: int = 3) -> list[complex]:
    """An n x n grid over the filled-Julia bounding box, keeping points that
    are resolvable for h and at least `avoid` away from J_f and I_f.

    Distance to J is proxied through the escape/interior dichotomy of a
    point and its `avoid`-neighbors; distance to I_f through the sampled
    depth-3 arc set.
    """
    from .linearize import degenerating_arcs
    from .rays import green
    arcs = degenerating_arcs(pair, 3)
    pts = arcs.all_points()
    c = complex(pair.c)
    lim = 1 + math.sqrt(1 + abs(c))
    out = []
    for xi in np.linspace(-lim, lim, n):
        for yi in np.linspace(-lim, lim, n):
            z = complex(xi, yi)
            if np.min(np.abs(pts - z)) < avoid:
                continue
            # require z and its avoid-ball to be on one side of J
            states = []
            for dz in (0, avoid, -avoid, avoid * 1j, -avoid * 1j):
                states.append(green(c, z + dz) > 0)
            if any(states) != all(states):
                continue
            out.append(z)
    return out


def semiconj_residual(pair: DegenerationPair, grid=None,
                      n: int = 40) -> tuple[float, int, int]:
    """(sup spherical distance of h(f(z)) vs g(h(z)), resolved, skipped)."""
    H = semiconjugacy(pair)
    f = QuadMap(complex(pair.c))
    g = QuadMap(complex(pair.sigma))
    if grid is None:
        grid = sample_grid(pair, n)
    worst = 0.0
    resolved = skipped = 0
    for z in grid:
        try:
            lhs = H(f(z))
            rhs = g(H(z))
        except (SemiconjError, ChartError, RayError):
            # jitter once: ambiguity comes from orbits grazing the critical
            # point, which a tiny perturbation clears
            try:
                zj = z + 3e-9 * (1 + 1j)
                lhs = H(f(zj))
                rhs = g(H(zj))
            except (SemiconjError, ChartError, RayError):
                skipped += 1
                continue
        worst = max(worst, spherical_distance(lhs, rhs))
        resolved += 1
    return worst, resolved, skipped


def identity_distance(pair: DegenerationPair, grid) -> float:
    """sup |h(z) - z| over the resolvable part of a fixed grid."""
    H = semiconjugacy(pair)
    worst = 0.0
    for z in grid:
        try:
            worst = max(worst, abs(H(z) - z))
        except (SemiconjError, ChartError, RayError):
            continue
    return worst


def tile_image_distance(pair: DegenerationPair, address: TileAddress,
                        resolution: int = 24) -> float:
    """Hausdorff-style distance between h(T_f(addr)) and T_g(addr).

    The f-tile's degenerating edge pinches to the g-tile's vertex, so the
    comparison runs against the g-boundary with the vertex appended, and
    one-sidedly for the g-tile (whose deep end is truncated)."""
    H = semiconjugacy(pair)
    tf = build_tile(pair, "f", address, resolution)
    tg = build_tile(pair, "g", address, resolution)
    imgs = []
    for e in tf.edges:
        for z in e.points:
            try:
                imgs.append(H(z))
            except (SemiconjError, ChartError, RayError):
                continue
    if len(imgs) < 0.8 * len(tf.boundary()):
        raise SemiconjError("too few f-tile boundary points resolved")
    gpoly = np.concatenate([tg.boundary(), [tg.vertex]])
    return float(point_to_polyline(np.array(imgs), gpoly).max())


def h_field(pair: DegenerationPair, n: int = 20) -> list[dict]:
    """JSON-ready (z, h(z)) samples for visualizing the pinching."""
    H = semiconjugacy(pair)
    out = []
    for z in sample_grid(pair, n):
        try:
            w = H(z)
        except (SemiconjError, ChartError, RayError):
            continue
        out.append({"z": [z.real, z.imag], "h": [w.real, w.imag]})
    return out
