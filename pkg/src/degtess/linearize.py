"""Linearizing charts for degeneration pairs and the degenerating arc system.

Hyperbolic side: a modified Koenigs coordinate Phi_f with Phi_f(0) = 0 that
semiconjugates f on the filled-Julia interior to the model F(W) = rW + 1,
where r = r_int^(q/l) (r_int the internal radius) and a = 1/(1-r) is the
model fixed point.  On the cycle component containing the critical point,

    Phi_f = a (1 - (kappa/kappa(0))^q)

with kappa the Koenigs coordinate of f^l at alpha_0; the other components
inherit Phi_f through the functional equation Phi(f(z)) = F(Phi(z)).  The
invariant star is realized by radial rays of kappa at the bisectors of the
critical-orbit rays, continued outward to the repelling boundary points.

Parabolic side: a normalized Fatou coordinate Phi_g with Phi_g(0) = 0
semiconjugating g to G(W) = W + 1, built from the formal Abel expansion
phi(zeta) = sum d_j zeta^(j-q') + b log zeta of the return map g^lbar at the
parabolic point and truncated at a numerically validated radius.

Inverse branches (the Psi_theta^± of the tessellation) are never stored;
the tess module evaluates them by Newton continuation in the strip
coordinate of each side (eta = log(Phi_f - a) resp. zeta = Phi_g), anchored
at probes next to the landing point of the address angle.  Panel signatures
are Im-signs of the strip coordinate up to a per-side flip calibrated so
that the panel of angle theta0+ with signature "+" carries the critical
point on its boundary, as the characteristic-sector convention demands.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _series
from .angles import RationalAngle
from .dynamics import DegenerationPair, QuadMap, attracting_cycle, parabolic_cycle
from .rays import RayFamily, RayError

TWO_PI = 2 * math.pi


class ChartError(ArithmeticError):
    """Chart construction or evaluation failed at the configured precision."""


def _wrap(x: float) -> float:
    return math.remainder(x, TWO_PI)


# ---------------------------------------------------------------------------
# hyperbolic side


class KoenigsChart:
    """Modified Koenigs coordinate of the hyperbolic member of a pair."""

    def __init__(self, pair: DegenerationPair, order: int = 26):
        self.pair = pair
        self.c = complex(pair.c)
        self.f = QuadMap(self.c)
        self.q = pair.q
        self.l = pair.l
        cyc = attracting_cycle(self.c, max_period=max(pair.l, 8))
        if cyc.period != pair.l:
            raise ChartError(
                f"attracting cycle period {cyc.period} != pair.l = {pair.l}")
        self.r_int = abs(cyc.multiplier)
        if self.r_int < 1e-9:
            raise ChartError("superattracting member; Koenigs needs r > 0")
        self.r_model = self.r_int ** (self.q / self.l)
        self.a = 1.0 / (1.0 - self.r_model)

        # alpha0 := the cycle point whose component contains the critical
        # point: the l-step subsequence of the critical orbit settles on it
        z = 0j
        for _ in range(512 * self.l):
            z = self.f(z)
        for _ in range(256):
            z = self.f.iterate(z, self.l)
        j0 = int(np.argmin([abs(z - p) for p in cyc.points]))
        self.alpha = tuple(cyc.points[(j0 + k) % self.l] for k in range(self.l))

        fl_ser = _series.local_return_map(self.c, self.alpha[0], self.l,
                                          order=order)
        self.lam = fl_ser[1]
        if abs(abs(self.lam) - self.r_int) > 1e-8:
            raise ChartError("cycle multiplier mismatch between orbit and series")
        self.kappa_ser = _series.schroeder(fl_ser, order=order)
        self.rho = self._calibrate_radius()
        self.v0 = self.kappa(0j)
        self.crit_phase = cmath.phase(self.v0)
        self.arm_phases = [self.crit_phase + (2 * j + 1) * math.pi / self.q
                           for j in range(self.q)]
        self.rays = RayFamily(self.c)
        self.flip = 0  # 0 = not yet calibrated
        self._arm_cache: dict[tuple[int, int], np.ndarray] = {}
        self._sector_angle: dict[tuple[int, int], RationalAngle] | None = None

    # -- local coordinate ----------------------------------------------------

    def _calibrate_radius(self) -> float:
        for rho in (0.5, 0.35, 0.25, 0.18, 0.12, 0.08, 0.05, 0.03, 0.015):
            ok = True
            for k in range(8):
                w = rho * cmath.exp(2j * math.pi * k / 8)
                z = self.alpha[0] + w
                lhs = _series.evaluate(self.kappa_ser,
                                       self.f.iterate(z, self.l) - self.alpha[0])
                rhs = self.lam * _series.evaluate(self.kappa_ser, w)
                if abs(lhs - rhs) > 1e-10 * max(1.0, abs(rhs)):
                    ok = False
                    break
            if ok:
                return rho
        raise ChartError("no usable Koenigs series radius")

    def kappa(self, z: complex) -> complex:
        return self.kappa_and_deriv(z)[0]

    def kappa_and_deriv(self, z: complex, max_rounds: int = 8000):
        """Koenigs coordinate of f^l on the component of alpha0."""
        zz = complex(z)
        D = 1 + 0j
        k = 0
        while abs(zz - self.alpha[0]) > self.rho:
            for _ in range(self.l):
                D *= 2 * zz
                zz = zz * zz + self.c
            k += 1
            if k > max_rounds or abs(zz) > 1e9:
                raise ChartError(
                    f"point {z} did not reach the linearization disk")
        w = zz - self.alpha[0]
        scale = self.lam ** (-k)
        return (scale * _series.evaluate(self.kappa_ser, w),
                scale * _series.evaluate_deriv(self.kappa_ser, w) * D)

    # -- global Phi ------------------------------------------------------------

    def phi_and_deriv(self, z: complex, max_iter: int = 20000):
        """Phi_f(z) and dPhi/dz for z in the interior of K_f."""
        zz = complex(z)
        D = 1 + 0j
        n = 0
        while True:
            j = int(np.argmin([abs(zz - p) for p in self.alpha]))
            if abs(zz - self.alpha[j]) <= self.rho:
                break
            D *= 2 * zz
            zz = zz * zz + self.c
            n += 1
            if abs(zz) > 1e9:
                raise ChartError(f"point {z} escapes; not in the interior")
            if n > max_iter:
                raise ChartError(f"point {z} not captured by the cycle")
        for _ in range((self.l - j) % self.l):
            D *= 2 * zz
            zz = zz * zz + self.c
            n += 1
        kap, dkap = self.kappa_and_deriv(zz)
        dkap *= D
        ratio = kap / self.v0
        u0 = -self.a * ratio ** self.q
        du0 = -self.a * self.q * ratio ** (self.q - 1) * dkap / self.v0
        scale = self.r_model ** (-n)
        return self.a + scale * u0, scale * du0

    def phi(self, z: complex) -> complex:
        return self.phi_and_deriv(z)[0]

    def strip_and_deriv(self, z: complex):
        """eta = log(Phi - a): arm boundary at Im 0, critical at Im ±pi."""
        w, dw = self.phi_and_deriv(z)
        u = w - self.a
        if u == 0:
            raise ChartError("strip coordinate undefined on the cycle")
        return cmath.log(u), dw / u

    def strip_branch(self, z: complex, raw_sign: int):
        """Like strip_and_deriv but with the log branch window shifted so
        the working half-strip (including its critical edge at ±pi) is
        interior: arg in (-pi/2, 3pi/2] for the raw + side and mirrored."""
        eta, de = self.strip_and_deriv(z)
        if raw_sign > 0 and eta.imag <= -math.pi / 2:
            eta += 2j * math.pi
        elif raw_sign < 0 and eta.imag > math.pi / 2:
            eta -= 2j * math.pi
        return eta, de

    def level_of_strip(self, eta: complex) -> float:
        """Continuous model level from a strip value (integer part = m)."""
        return (eta.real - math.log(self.a)) / math.log(self.r_model)

    # -- arms ------------------------------------------------------------------

    def _local_inverse(self, w: complex) -> complex:
        x = w
        for _ in range(60):
            val = _series.evaluate(self.kappa_ser, x) - w
            der = _series.evaluate_deriv(self.kappa_ser, x)
            step = val / der
            x -= step
            if abs(step) < 1e-15:
                break
        return self.alpha[0] + x

    def arm(self, lobe: int, j: int, levels: tuple[int, int] = (-9, 10),
            samples_per_level: int = 12) -> np.ndarray:
        """Arm j of the star at alpha_lobe, sampled from the center outward.

        The first point is the exact center; the last is the polished
        repelling endpoint.  Resolution is fixed on first use per (lobe, j).
        """
        key = (lobe % self.l, j % self.q)
        if key in self._arm_cache:
            return self._arm_cache[key]
        if key[0] != 0:
            base = self.arm(0, j, levels, samples_per_level)
            out = base.copy()
            for _ in range(key[0]):
                out = out * out + self.c
            out[0] = self.alpha[key[0]]
            self._arm_cache[key] = out
            return out
        phase = self.arm_phases[key[1]]
        m_lo, m_hi = levels
        n_total = (m_hi - m_lo) * samples_per_level + 1
        # |kappa| on the arm at model level m: |v0| * r_model^(m/q)
        tvals = [abs(self.v0) * self.r_model ** (
            (m_hi - (m_hi - m_lo) * i / (n_total - 1)) / self.q)
            for i in range(n_total)]
        z = self._local_inverse(min(tvals[0], 0.5 * self.rho)
                                * cmath.exp(1j * phase))
        pts = [self.alpha[0]]
        for t in tvals:
            z = self._kappa_march(z, t * cmath.exp(1j * phase))
            pts.append(z)
        pts.append(self._polish_repelling(pts[-1]))
        arr = np.array(pts)
        self._arm_cache[key] = arr
        return arr

    def _polish_repelling(self, z: complex) -> complex:
        """Newton toward the repelling periodic endpoint near the arm tail."""
        period = self.pair.lbar if self.pair.case == "A" else self.pair.lprime
        x = complex(z)
        for _ in range(100):
            zn, D = x, 1 + 0j
            for _ in range(period):
                D = 2 * zn * D
                zn = zn * zn + self.c
            step = (zn - x) / (D - 1)
            x -= step
            if abs(step) < 1e-14:
                break
        return x

    def _kappa_march(self, z: complex, target: complex,
                     budget: int = 4000) -> complex:
        start = self.kappa(z)
        stack = [(start, target)]
        cur = z
        used = 0
        while stack:
            a0, b0 = stack.pop()
            used += 1
            if used > budget:
                raise ChartError("kappa continuation budget exceeded")
            znew = self._kappa_newton(cur, b0)
            if znew is None:
                if abs(b0 - a0) < 1e-12 * max(1.0, abs(b0)):
                    raise ChartError("kappa continuation stalled")
                mid = (a0 + b0) / 2
                stack.append((mid, b0))
                stack.append((a0, mid))
                continue
            cur = znew
        return cur

    def _kappa_newton(self, z: complex, target: complex,
                      max_iter: int = 40) -> complex | None:
        x = z
        for _ in range(max_iter):
            try:
                val, der = self.kappa_and_deriv(x)
            except ChartError:
                return None
            step = (val - target) / der
            x -= step
            if abs(step) < 1e-13 * max(1.0, abs(x)):
                return x
        return None

    # -- sectors and signatures -------------------------------------------------

    def lobe_of(self, z: complex) -> int:
        return int(np.argmin([abs(z - p) for p in self.alpha]))

    def sector_of(self, z_deep: complex) -> tuple[int, int]:
        """(arm index, raw im-sign) near alpha0: layout going ccw is
        crit_j, (-)-half, arm_j, (+)-half, crit_{j+1}."""
        kap = self.kappa(z_deep)
        rel = (cmath.phase(kap) - self.crit_phase) % TWO_PI
        half = int(rel / (math.pi / self.q)) % (2 * self.q)
        j, odd = divmod(half, 2)
        return (j, -1 if odd == 0 else 1)

    def sector_angle_map_raw(self) -> dict[tuple[int, int], RationalAngle]:
        """(arm j, raw sign) at the critical lobe -> cyclic panel angle."""
        if self._sector_angle is not None:
            return self._sector_angle
        out: dict[tuple[int, int], RationalAngle] = {}
        gen = sorted(self.pair.theta_gen)
        landings = {th: self.rays.landing(th) for th in gen}
        if self.pair.case == "A":
            plus_cycle = None
            for j in range(self.q):
                toe = self.arm(0, j)[-1]
                cands = [th for th in gen if abs(landings[th] - toe) < 1e-4]
                if not cands:
                    raise ChartError(
                        f"arm {j} endpoint {toe} matches no generator landing")
                if len(cands) > 1:
                    # two rays land on the toe (primitive parabolics): pick
                    # the angle in the cycle of theta0+
                    if plus_cycle is None:
                        tp, _ = characteristic_sector(self.pair)
                        plus_cycle = set()
                        cur = RationalAngle(tp)
                        for _ in range(self.pair.lbar):
                            plus_cycle.add(cur)
                            cur = cur.double()
                    cands = [th for th in cands if th in plus_cycle]
                th = cands[0]
                out[(j, 1)] = th
                out[(j, -1)] = th
        else:
            armpts = self.arm(0, 0)
            x0 = armpts[-1]
            arm_dir = cmath.phase(armpts[max(1, len(armpts) - 6)] - x0)
            ray_dirs = {}
            for th in gen:
                if abs(landings[th] - x0) > 1e-4:
                    raise ChartError("cyclic ray does not land at the star center")
                ray_dirs[th] = cmath.phase(self.rays.approach_direction(th))
            eps0 = 0.02 * abs(armpts[len(armpts) // 2] - x0)
            for rot in (0.35, -0.35):
                sign = None
                for eps in (eps0, eps0 / 4, eps0 / 16, eps0 / 64):
                    probe = x0 + eps * cmath.exp(1j * (arm_dir + rot))
                    try:
                        w, _ = self.phi_and_deriv(probe)
                    except ChartError:
                        continue
                    sign = 1 if w.imag > 0 else -1
                    break
                if sign is None:
                    raise ChartError("case B flank probe not in the interior")
                best, bestd = None, None
                for th, rd in ray_dirs.items():
                    d = ((rd - arm_dir) * (1 if rot > 0 else -1)) % TWO_PI
                    if bestd is None or d < bestd:
                        best, bestd = th, d
                out[(0, sign)] = best
            if len(out) != 2:
                raise ChartError("case B flank probing failed to split sides")
        self._sector_angle = out
        return out

    def ensure_calibrated(self):
        """Fix the signature flip so that the '+'-flank of the critical ray
        is the panel of angle theta0+ (paper convention: its boundary holds
        the critical point)."""
        if self.flip:
            return
        tp, tm = characteristic_sector(self.pair)
        tp, tm = RationalAngle(tp), RationalAngle(tm)
        amap = self.sector_angle_map_raw()
        if amap[((self.q - 1) % self.q, 1)] == tp:
            self.flip = 1
        elif amap[(0, -1)] == tp:
            self.flip = -1
        else:
            raise ChartError(
                "characteristic angle not adjacent to the critical ray; "
                f"flanks are {amap[((self.q - 1) % self.q, 1)]}, {amap[(0, -1)]}")

    def label(self, strip_value: complex) -> int:
        self.ensure_calibrated()
        return self.flip if strip_value.imag >= 0 else -self.flip

    def sector_angle(self, j: int, labeled_sign: int) -> RationalAngle:
        self.ensure_calibrated()
        return self.sector_angle_map_raw()[(j, labeled_sign * self.flip)]

    def cyclic_angle_at(self, z_deep: complex) -> RationalAngle:
        j, raw = self.sector_of(z_deep)
        return self.sector_angle_map_raw()[(j, raw)]



# ---------------------------------------------------------------------------
# parabolic side


class FatouChart:
    """Normalized Fatou coordinate of the parabolic member of a pair."""

    def __init__(self, pair: DegenerationPair, order: int = 22):
        self.pair = pair
        self.sigma = complex(pair.sigma)
        self.g = QuadMap(self.sigma)
        self.qp = pair.qprime
        self.lbar = pair.lbar
        cycle = parabolic_cycle(self.sigma, pair.lprime, self.qp)
        z = 0j
        for _ in range(512 * self.lbar):
            z = self.g(z)
        for _ in range(256):
            z = self.g.iterate(z, self.lbar)
        self.beta0 = min(cycle, key=lambda b: abs(b - z))
        self.cycle = tuple(cycle)

        ret = _series.local_return_map(self.sigma, self.beta0, self.lbar,
                                       order=order + self.qp + 4)
        if abs(ret[1] - 1) > 1e-6:
            raise ChartError("return map multiplier is not 1 at beta0")
        ret[1] = 1.0
        for k in range(2, self.qp + 1):
            if abs(ret[k]) > 1e-6:
                raise ChartError("missing petal degeneracy in the return map")
            ret[k] = 0.0
        self.A = ret[self.qp + 1]
        if abs(self.A) < 1e-12:
            raise ChartError("vanishing leading parabolic coefficient")
        self.ret_ser = ret
        self._solve_abel(order)

        base = (math.pi - cmath.phase(self.A)) / self.qp
        self.axes = [(base + TWO_PI * k / self.qp) % TWO_PI
                     for k in range(self.qp)]
        d = z - self.beta0
        for _ in range(64):
            z = self.g.iterate(z, self.lbar)
            d = z - self.beta0
        self.axis_crit = min(
            range(self.qp),
            key=lambda k: abs(_wrap(cmath.phase(d) - self.axes[k])))
        self.rho = self._calibrate_radius()
        self.rays = RayFamily(self.sigma)
        self.flip = 0
        self._normc = 0j
        self._normc = -self.phi_and_deriv(0j)[0]
        self._beta0_angles: list[RationalAngle] | None = None
        self._char: tuple[Fraction, Fraction] | None = None

    # -- formal Abel expansion -------------------------------------------------

    def _solve_abel(self, order: int):
        qp = self.qp
        M = order
        npow = M + qp + 1
        u = np.zeros(npow, dtype=complex)
        for k in range(1, min(len(self.ret_ser) - 1, npow)):
            u[k] = self.ret_ser[k + 1] if k + 1 < len(self.ret_ser) else 0.0

        upows = [np.zeros(npow, dtype=complex)]
        upows[0][0] = 1.0
        for _ in range(M // qp + 3):
            upows.append(np.convolve(upows[-1], u)[:npow])

        def one_plus_u_pow_minus_1(m: int) -> np.ndarray:
            out = np.zeros(npow, dtype=complex)
            coef = 1.0
            for i in range(1, len(upows)):
                coef = coef * (m - (i - 1)) / i
                out += coef * upows[i]
            return out

        L = np.zeros(npow, dtype=complex)
        sign = 1.0
        for i in range(1, len(upows)):
            L += sign * upows[i] / i
            sign = -sign

        T = [one_plus_u_pow_minus_1(j - qp) for j in range(M + 1)]
        d = np.zeros(M + 1, dtype=complex)
        b = 0j
        for k in range(M + 1):
            rhs = 1.0 if k == 0 else 0.0
            acc = 0j
            for j in range(k):
                idx = k - j + qp
                if 0 <= idx < npow:
                    acc += d[j] * T[j][idx]
            if k > qp:
                acc += b * L[k]
            if k == qp:
                b = (rhs - acc) / L[qp]
            else:
                d[k] = (rhs - acc) / T[k][qp]
        self.abel_d = d
        self.abel_b = b

    def _phi_local(self, zeta: complex, axis: float):
        val = 0j
        der = 0j
        for j, dj in enumerate(self.abel_d):
            if dj == 0:
                continue
            e = j - self.qp
            val += dj * zeta ** e
            der += dj * e * zeta ** (e - 1)
        lg = cmath.log(zeta * cmath.exp(-1j * axis)) + 1j * axis
        val += self.abel_b * lg
        der += self.abel_b / zeta
        return val, der

    def _calibrate_radius(self) -> float:
        axis = self.axes[self.axis_crit]
        for rho in (0.4, 0.3, 0.22, 0.16, 0.11, 0.07, 0.045, 0.03, 0.02):
            ok = True
            for off in (-0.7, 0.0, 0.7):
                zeta = rho * cmath.exp(1j * (axis + off * math.pi / self.qp))
                z = self.g.iterate(self.beta0 + zeta, self.lbar)
                v1, _ = self._phi_local(z - self.beta0, axis)
                v0, _ = self._phi_local(zeta, axis)
                if abs(v1 - v0 - 1) > 1e-9:
                    ok = False
                    break
            if ok:
                return rho
        raise ChartError("no usable Fatou expansion radius")

    # -- global Phi ---------------------------------------------------------------

    def _captured(self, z: complex) -> bool:
        zeta = z - self.beta0
        az = abs(zeta)
        if az > self.rho or az == 0:
            return False
        rel = _wrap(cmath.phase(zeta) - self.axes[self.axis_crit])
        return abs(rel) <= 0.92 * math.pi / self.qp

    def phi_and_deriv(self, z: complex, max_iter: int = 500000):
        zz = complex(z)
        D = 1 + 0j
        n = 0
        while not self._captured(zz):
            D *= 2 * zz
            zz = zz * zz + self.sigma
            n += 1
            if abs(zz) > 1e9:
                raise ChartError(f"point {z} escapes; not in the interior")
            if n > max_iter:
                raise ChartError(f"point {z} never entered the critical petal")
        val, der = self._phi_local(zz - self.beta0, self.axes[self.axis_crit])
        return self.lbar * val - n + self._normc, self.lbar * der * D

    def phi(self, z: complex) -> complex:
        return self.phi_and_deriv(z)[0]

    def strip_and_deriv(self, z: complex):
        return self.phi_and_deriv(z)

    def strip_branch(self, z: complex, raw_sign: int):
        return self.phi_and_deriv(z)

    def level_of_strip(self, zeta: complex) -> float:
        return zeta.real

    # -- rays, sectors, signatures ---------------------------------------------

    def beta0_angles(self) -> list[RationalAngle]:
        if self._beta0_angles is None:
            out = [th for th in sorted(self.pair.theta_gen)
                   if abs(self.rays.landing(th) - self.beta0) < 1e-5]
            if not out:
                raise ChartError("no generating ray lands at beta0")
            self._beta0_angles = out
        return self._beta0_angles

    def characteristic_lifted(self) -> tuple[Fraction, Fraction]:
        """(theta0+, theta0-) representatives with t+ < t- <= t+ + 1."""
        if self._char is not None:
            return self._char
        angs = self.beta0_angles()
        axis = self.axes[self.axis_crit]
        if len(angs) == 1:
            th = angs[0]
            self._char = (th.fraction, th.fraction + 1)
            return self._char
        dirs = [(th, cmath.phase(self.rays.approach_direction(th)) % TWO_PI)
                for th in angs]
        cw = min(dirs, key=lambda td: (axis - td[1]) % TWO_PI)[0]
        ccw = min(dirs, key=lambda td: (td[1] - axis) % TWO_PI)[0]
        tp, tm = cw.fraction, ccw.fraction
        if not tp < tm <= tp + 1:
            tm += 1
        if not tp < tm <= tp + 1:
            raise ChartError("could not order the characteristic pair")
        self._char = (tp, tm)
        return self._char

    def ensure_calibrated(self):
        """Fix the signature flip: the critical-petal panel along the
        theta0+ ray is the '+' panel."""
        if self.flip:
            return
        tp, _ = self.characteristic_lifted()
        tp = RationalAngle(tp)
        dray = cmath.phase(self.rays.approach_direction(tp))
        axis = self.axes[self.axis_crit]
        rot = 1.0 if _wrap(axis - dray) > 0 else -1.0
        sign = None
        for eps in (3e-3, 1e-3, 3e-4, 1e-4, 3e-5):
            for delta in (0.3, 0.6, 1.0):
                probe = self.beta0 + eps * cmath.exp(1j * (dray + rot * delta))
                try:
                    val, _ = self.phi_and_deriv(probe)
                except ChartError:
                    continue
                sign = 1 if val.imag >= 0 else -1
                break
            if sign is not None:
                break
        if sign is None:
            raise ChartError("calibration probe not in the parabolic interior")
        self.flip = sign

    def label(self, strip_value: complex) -> int:
        self.ensure_calibrated()
        return self.flip if strip_value.imag >= 0 else -self.flip

    def cyclic_angle_at(self, z_deep: complex) -> RationalAngle:
        val, _ = self.phi_and_deriv(z_deep)
        tp, tm = self.characteristic_lifted()
        return RationalAngle(tp) if self.label(val) == 1 else RationalAngle(tm)



# ---------------------------------------------------------------------------
# cached constructors and spec-level operations


_KOENIGS: dict[DegenerationPair, KoenigsChart] = {}
_FATOU: dict[DegenerationPair, FatouChart] = {}


def koenigs_chart(pair: DegenerationPair) -> KoenigsChart:
    if pair not in _KOENIGS:
        _KOENIGS[pair] = KoenigsChart(pair)
    return _KOENIGS[pair]


def fatou_chart(pair: DegenerationPair) -> FatouChart:
    if pair not in _FATOU:
        _FATOU[pair] = FatouChart(pair)
    return _FATOU[pair]


def characteristic_sector(pair: DegenerationPair) -> tuple[Fraction, Fraction]:
    return fatou_chart(pair).characteristic_lifted()


# ---------------------------------------------------------------------------
# degenerating arc system


@dataclass
class Arc:
    """One component of the degenerating arc system, sampled.

    Depth 0 is an invariant star; a depth-k arc maps onto a depth-(k-1) arc
    under f.  `word` records the anchor branch bits of the pullback chain.
    `toes` maps each angle of the component's type to its landing endpoint.
    """

    depth: int
    word: tuple[int, ...]
    branches: list[np.ndarray]
    toes: dict[RationalAngle, complex]

    def points(self) -> np.ndarray:
        return np.concatenate(self.branches)


@dataclass
class ArcSet:
    pair: DegenerationPair
    depth: int
    arcs: list[Arc]

    def all_points(self) -> np.ndarray:
        return np.concatenate([a.points() for a in self.arcs])

    def min_distance(self, z: complex) -> float:
        return float(np.min(np.abs(self.all_points() - z)))

    def arc_with_angle(self, theta: RationalAngle) -> Arc | None:
        for a in self.arcs:
            if theta in a.toes:
                return a
        return None


def invariant_arc(pair: DegenerationPair,
                  levels: tuple[int, int] = (-9, 10)) -> ArcSet:
    """The invariant star(s) I(alpha') as sampled arcs (depth 0)."""
    chart = koenigs_chart(pair)
    arcs = []
    if pair.case == "A":
        amap = chart.sector_angle_map_raw()
        for lobe in range(pair.l):
            branches = [chart.arm(lobe, j, levels) for j in range(pair.q)]
            toes = {}
            for j in range(pair.q):
                th = amap[(j, 1)]
                for _ in range(lobe):
                    th = th.double()
                toes[th] = branches[j][-1]
            arcs.append(Arc(depth=0, word=(), branches=branches, toes=toes))
    else:
        branches = [chart.arm(lobe, 0, levels) for lobe in range(pair.l)]
        x0 = branches[0][-1]
        for br in branches[1:]:
            if abs(br[-1] - x0) > 1e-6:
                raise ChartError("case B arms do not meet at a common center")
        toes = {th: x0 for th in pair.theta_gen}
        arcs.append(Arc(depth=0, word=(), branches=branches, toes=toes))
    return ArcSet(pair=pair, depth=0, arcs=arcs)


def degenerating_arcs(pair: DegenerationPair, depth: int,
                      levels: tuple[int, int] = (-9, 10)) -> ArcSet:
    """All preimage arcs of the invariant star(s) up to the given depth.

    Pullbacks that would reproduce a cyclic star (anchor half-angle still in
    the generating set) are skipped; everything else is branch-tracked by
    continuity with the far end anchored at the landing point of the halved
    anchor angle.
    """
    base = invariant_arc(pair, levels)
    chart = koenigs_chart(pair)
    out = list(base.arcs)
    frontier = list(base.arcs)
    for d in range(1, depth + 1):
        nxt = []
        for arc in frontier:
            for bit in (0, 1):
                anchor_angle = min(arc.toes)
                half = anchor_angle.halves()[bit]
                if half in pair.theta_gen:
                    continue  # reproduces the invariant star
                pulled = _pull_arc(chart, arc, bit, d)
                if pulled is not None:
                    nxt.append(pulled)
        out.extend(nxt)
        frontier = nxt
    return ArcSet(pair=pair, depth=depth, arcs=out)


def _pull_arc(chart: KoenigsChart, arc: Arc, bit: int, depth: int) -> Arc | None:
    c = chart.c
    anchor_angle = min(arc.toes)
    half = anchor_angle.halves()[bit]
    try:
        anchor = chart.rays.landing(half)
    except (RayError, ArithmeticError):
        return None
    toe0 = arc.toes[anchor_angle]
    branches: list[np.ndarray] = []
    center_pre: complex | None = None
    anchor_branch = None
    for bi, br in enumerate(arc.branches):
        if abs(br[-1] - toe0) < 1e-7:
            anchor_branch = bi
            break
    if anchor_branch is None:
        anchor_branch = 0
    order = [anchor_branch] + [i for i in range(len(arc.branches))
                               if i != anchor_branch]
    pulled: dict[int, np.ndarray] = {}
    for bi in order:
        br = arc.branches[bi]
        roots = np.sqrt(br.astype(complex) - c)
        signs = np.empty(len(roots))
        if bi == anchor_branch:
            # continuity from the toe end, anchored at the halved landing
            pick = 1.0 if abs(roots[-1] - anchor) <= abs(roots[-1] + anchor) \
                else -1.0
            signs[-1] = pick
            prev = pick * roots[-1]
            for i in range(len(roots) - 2, -1, -1):
                pick = 1.0 if abs(roots[i] - prev) <= abs(roots[i] + prev) else -1.0
                signs[i] = pick
                prev = pick * roots[i]
            center_pre = signs[0] * roots[0]
        else:
            # continuity from the center end, anchored at the shared center
            pick = 1.0 if abs(roots[0] - center_pre) <= abs(roots[0] + center_pre) \
                else -1.0
            signs[0] = pick
            prev = pick * roots[0]
            for i in range(1, len(roots)):
                pick = 1.0 if abs(roots[i] - prev) <= abs(roots[i] + prev) else -1.0
                signs[i] = pick
                prev = pick * roots[i]
        pulled[bi] = roots * signs
    branches = [pulled[i] for i in range(len(arc.branches))]
    # assign halved angles to the new toes by landing proximity
    new_toes: dict[RationalAngle, complex] = {}
    for th, toe in arc.toes.items():
        endpoint = None
        for bi, br in enumerate(arc.branches):
            if abs(br[-1] - toe) < 1e-7:
                endpoint = branches[bi][-1]
                break
        if endpoint is None:
            continue
        h0, h1 = th.halves()
        try:
            l0 = chart.rays.landing(h0)
        except (RayError, ArithmeticError):
            return None
        new_toes[h0 if abs(l0 - endpoint) <= abs(l0 + endpoint) else h1] = endpoint
    return Arc(depth=depth, word=arc.word + (bit,), branches=branches,
               toes=new_toes)
