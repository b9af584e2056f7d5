"""Quadratic maps f_c(z) = z^2 + c, their cycles, and degeneration pairs.

A degeneration pair (f -> g) couples a hyperbolic f = f_c with the parabolic
g = f_sigma at internal angle p/q on the boundary of f's hyperbolic
component.  Two combinatorial cases occur:

    Case A:  q = q' and l = l'
    Case B:  q = 1 < q' and l = l' q'

where l, l' are the attracting/parabolic cycle periods and q, q' the
denominators of the internal angles.  In both cases l*q = l'*q' =: lbar.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np

from .angles import RationalAngle, cycle_angles

NEWTON_TOL_Z = 1e-12
NEWTON_TOL_C = 1e-11


class SolverError(ArithmeticError):
    """Newton failed to converge or converged to the wrong cycle."""


@dataclass(frozen=True)
class QuadMap:
    c: complex

    def __call__(self, z: complex) -> complex:
        return z * z + self.c

    def deriv(self, z: complex) -> complex:
        return 2 * z

    def iterate(self, z: complex, n: int) -> complex:
        for _ in range(n):
            z = z * z + self.c
        return z


@dataclass(frozen=True)
class Cycle:
    """A periodic orbit in forward order with its multiplier."""

    points: tuple[complex, ...]
    period: int
    multiplier: complex


def _orbit_derivatives(c: complex, z: complex, n: int):
    """Forward orbit of z with d/dz and d/dc of f^n and of (f^n)'.

    Returns (zn, D, C, E, F) where D = d(f^n)/dz, C = d(f^n)/dc,
    E = d/dz[(f^n)'], F = d/dc[(f^n)'].
    """
    D, C = 1.0 + 0j, 0.0 + 0j
    E, F = 0.0 + 0j, 0.0 + 0j
    for _ in range(n):
        E = 2 * (D * D + z * E)
        F = 2 * (C * D + z * F)
        D = 2 * z * D
        C = 2 * z * C + 1
        z = z * z + c
    return z, D, C, E, F


def _minimal_period(c: complex, z: complex, period: int, tol: float = 1e-6) -> bool:
    """True if no proper divisor of `period` already closes the orbit."""
    f = QuadMap(c)
    for d in range(1, period):
        if period % d == 0:
            if abs(f.iterate(z, d) - z) < tol:
                return False
    return True


def attracting_cycle(c: complex, max_period: int = 64,
                     max_iter: int = 100_000) -> Cycle:
    """Locate the attracting cycle by following the critical orbit.

    Iterates the critical orbit with period detection, then polishes with
    Newton on f^p(z) - z.  Raises SolverError if the critical orbit neither
    escapes detection nor settles within the iteration budget.
    """
    f = QuadMap(c)
    z = 0j
    tail: list[complex] = []
    for n in range(max_iter):
        z = f(z)
        if abs(z) > 1e8:
            raise SolverError(f"critical orbit escapes for c = {c}")
        if n > 50:
            tail.append(z)
            if len(tail) > 4 * max_period:
                tail.pop(0)
            for p in range(1, min(max_period, len(tail) - 1) + 1):
                if abs(tail[-1] - tail[-1 - p]) < 1e-9:
                    cand = _polish_cycle(c, tail[-1], p)
                    if cand is not None:
                        return cand
    raise SolverError(f"no attracting cycle found for c = {c} "
                      f"within {max_iter} iterations")


def _polish_cycle(c: complex, z0: complex, period: int) -> Cycle | None:
    z = z0
    for _ in range(60):
        zn, D, _, _, _ = _orbit_derivatives(c, z, period)
        g = zn - z
        dg = D - 1
        if dg == 0:
            return None
        step = g / dg
        z -= step
        if abs(step) < NEWTON_TOL_Z:
            break
    else:
        return None
    zn, D, _, _, _ = _orbit_derivatives(c, z, period)
    if abs(zn - z) > 1e-9 or abs(D) >= 1 or not _minimal_period(c, z, period):
        return None
    pts = [z]
    f = QuadMap(c)
    for _ in range(period - 1):
        pts.append(f(pts[-1]))
    return Cycle(points=tuple(pts), period=period, multiplier=D)


def solve_multiplier(period: int, lam: complex, seed: complex,
                     z_seed: complex | None = None,
                     max_continuation: int = 64) -> complex:
    """Solve for c with an attracting/indifferent period-`period` cycle of
    multiplier `lam`, by Newton on the two-variable system

        f_c^n(z) = z,   (f_c^n)'(z) = lam

    with adaptive continuation in lam from the seed's current multiplier.
    `seed` is a parameter near the target hyperbolic component (typically its
    center); `z_seed` optionally pins the cycle point to start from.
    """
    if abs(lam) > 1 + 1e-12:
        raise ValueError("|lam| must be <= 1")
    c = complex(seed)
    if z_seed is None:
        cyc = attracting_cycle(c, max_period=max(period, 8))
        if cyc.period != period:
            raise SolverError(
                f"seed {seed} has cycle period {cyc.period}, wanted {period}")
        z = cyc.points[0]
        lam0 = cyc.multiplier
    else:
        z = complex(z_seed)
        zn, D, _, _, _ = _orbit_derivatives(c, z, period)
        lam0 = D

    steps = 1
    while steps <= max_continuation:
        ok = True
        zc, cc = z, c
        for k in range(1, steps + 1):
            target = lam0 + (lam - lam0) * k / steps
            res = _newton_multiplier(cc, zc, period, target)
            if res is None:
                ok = False
                break
            zc, cc = res
        if ok:
            if not _minimal_period(cc, zc, period):
                raise SolverError(
                    f"converged to non-minimal period for c = {cc}")
            return cc
        steps *= 2
    raise SolverError(
        f"multiplier continuation failed for period {period}, lam = {lam}")


def _newton_multiplier(c: complex, z: complex, period: int,
                       lam: complex, max_iter: int = 80):
    for _ in range(max_iter):
        zn, D, C, E, F = _orbit_derivatives(c, z, period)
        g1 = zn - z
        g2 = D - lam
        j11, j12 = D - 1, C
        j21, j22 = E, F
        det = j11 * j22 - j12 * j21
        if det == 0:
            return None
        dz = (g1 * j22 - g2 * j12) / det
        dc = (j11 * g2 - j21 * g1) / det
        z -= dz
        c -= dc
        if abs(dz) < NEWTON_TOL_Z and abs(dc) < NEWTON_TOL_C:
            return z, c
    return None


def beta_fixed_point(c: complex) -> complex:
    """The beta fixed point (1 + sqrt(1-4c))/2, landing point of the 0-ray.

    Principal branch of the square root: continuous off c in (1/4, inf),
    which contains the Mandelbrot set.
    """
    return (1 + cmath.sqrt(1 - 4 * c)) / 2


def cardioid_point(mu: complex) -> complex:
    """Multiplier parameterization of the main cardioid: c = mu/2 - mu^2/4."""
    return mu / 2 - mu * mu / 4


def critical_period_centers(period: int) -> list[complex]:
    """Centers of hyperbolic components of exact period `period`.

    Roots of f_c^period(0) = 0 with lower-period roots filtered out.
    Degree 2^(period-1) in c; keep the period modest.
    """
    if period > 14:
        raise ValueError("period too large for direct root finding")
    # coefficients of f_c^n(0) as a polynomial in c, built iteratively
    poly = np.array([0j])  # z_0 = 0
    for _ in range(period):
        sq = np.polynomial.polynomial.polymul(poly, poly) if len(poly) > 1 \
            else np.array([poly[0] ** 2])
        # + c
        n = max(len(sq), 2)
        out = np.zeros(n, dtype=complex)
        out[: len(sq)] += sq
        out[1] += 1
        poly = out
    coeffs = poly[::-1]  # np.roots wants highest degree first
    roots = np.roots(coeffs)
    centers = []
    for r in roots:
        # polish and reject non-minimal periods
        z = complex(r)
        for _ in range(40):
            zn, _, C, _, _ = _orbit_derivatives(z, 0j, period)
            if C == 0:
                break
            step = zn / C
            z -= step
            if abs(step) < 1e-13:
                break
        f = QuadMap(z)
        minimal = all(abs(f.iterate(0j, d)) > 1e-6
                      for d in range(1, period) if period % d == 0)
        if minimal and abs(f.iterate(0j, period)) < 1e-8:
            centers.append(z)
    return centers


@dataclass(frozen=True)
class DegenerationPair:
    """(f -> g): hyperbolic c with internal radius r, parabolic sigma.

    Integer data per the Case A/B classification; theta_gen is the generating
    angle set (type of the parabolic cycle).  Charts and ray families hang off
    this object lazily through the linearize/tess modules.
    """

    c: complex
    sigma: complex
    p: int
    q: int
    l: int
    pprime: int
    qprime: int
    lprime: int
    case: str  # "A" or "B"
    r: float
    theta_gen: frozenset[RationalAngle] = field(compare=False, hash=False)

    @property
    def lbar(self) -> int:
        return self.l * self.q

    def __post_init__(self):
        if self.l * self.q != self.lprime * self.qprime:
            raise ValueError("l*q != l'*q'")

    def as_json_dict(self) -> dict:
        def cfmt(z: complex) -> list[str]:
            return [format(z.real, ".17g"), format(z.imag, ".17g")]

        return {
            "c": cfmt(complex(self.c)),
            "sigma": cfmt(complex(self.sigma)),
            "p": self.p, "q": self.q, "l": self.l,
            "pprime": self.pprime, "qprime": self.qprime,
            "lprime": self.lprime,
            "case": self.case,
            "r": format(self.r, ".17g"),
            "lbar": self.lbar,
            "theta_gen": sorted(str(a) for a in self.theta_gen),
        }


def classify_case(q: int, l: int, qprime: int, lprime: int) -> str:
    """Classify (q, l, q', l') as Case A or B; raise if neither fits."""
    if l * q != lprime * qprime:
        raise ValueError(f"l*q = {l * q} != l'*q' = {lprime * qprime}")
    if q == qprime and l == lprime:
        return "A"
    if q == 1 < qprime and l == lprime * qprime:
        return "B"
    raise ValueError(f"(q,l,q',l') = {(q, l, qprime, lprime)} fits neither case")


def _theta_gen_cardioid(p: int, q: int) -> frozenset[RationalAngle]:
    return frozenset(cycle_angles(p, q).angles)


def _theta_gen_numeric(pair_sigma: complex, lbar: int,
                       parabolic_cycle: tuple[complex, ...]) -> frozenset[RationalAngle]:
    """Angles of exact period lbar whose g-rays land on the parabolic cycle."""
    from .rays import landing_point

    den = 2 ** lbar - 1
    hits = []
    for k in range(den):
        theta = RationalAngle(k, den)
        try:
            lp = landing_point(pair_sigma, theta)
        except ArithmeticError:
            continue
        if min(abs(lp - b) for b in parabolic_cycle) < 1e-6:
            hits.append(theta)
    return frozenset(hits)


def parabolic_cycle(sigma: complex, lprime: int, qprime: int,
                    seed: complex | None = None) -> tuple[complex, ...]:
    """The parabolic cycle of f_sigma (period l', multiplier e^{2pi i p'/q'}).

    For l' = 1 this is a root of the fixed-point equation; otherwise the
    period-l' roots of f^l'(z) = z are clustered (the parabolic is a multiple
    root), located via np.roots and polished by cluster averaging.
    """
    if lprime == 1:
        s = cmath.sqrt(1 - 4 * sigma)
        cands = [(1 + s) / 2, (1 - s) / 2]

        # fixed-point multiplier is 2z; the parabolic one is a primitive
        # q'-th root of unity
        def score(z):
            m = 2 * z
            return min(abs(m - cmath.exp(2j * math.pi * k / qprime))
                       for k in range(qprime) if qprime == 1 or gcd(k, qprime) == 1)
        return (min(cands, key=score),)
    # period-l' parabolic cycle: roots of f^{l'}(z) - z, multiple at the cycle
    poly = np.array([0j, 1 + 0j])  # z as polynomial in z
    for _ in range(lprime):
        poly = np.polynomial.polynomial.polymul(poly, poly)
        poly[0] += sigma
    poly = poly.copy()
    poly[1] -= 1  # f^{l'}(z) - z
    roots = np.roots(poly[::-1])
    f = QuadMap(sigma)
    # parabolic points appear as near-double roots; cluster them
    cands = [complex(z) for z in roots
             if _minimal_period(sigma, complex(z), lprime, tol=1e-3)]
    clusters: list[list[complex]] = []
    for z in cands:
        for cl in clusters:
            if abs(cl[0] - z) < 1e-4:
                cl.append(z)
                break
        else:
            clusters.append([z])
    doubled = [sum(cl) / len(cl) for cl in clusters if len(cl) >= 2]
    if seed is not None and doubled:
        z0 = min(doubled, key=lambda z: abs(z - seed))
    elif doubled:
        z0 = doubled[0]
    else:
        raise SolverError(f"no parabolic cycle found for sigma = {sigma}")
    pts = [z0]
    for _ in range(lprime - 1):
        pts.append(f(pts[-1]))
    return tuple(pts)


def make_pair(p: int, q: int, lprime: int, r: float, case: str,
              seed: complex | None = None) -> DegenerationPair:
    """Resolve a degeneration pair from (p/q, l', r, case).

    p/q is the internal angle of the parabolic on its parent component (the
    multiplier of O_g is e^{2pi i p/q}, so p' = p, q' = q).  Case A puts c on
    the internal ray of angle p/q at radius r in the parent component; Case B
    puts c in the satellite component at real internal parameter r.  A seed
    (component center) is required when l' > 1.
    """
    if gcd(p, q) != 1 or not (0 < r < 1):
        raise ValueError("need coprime p/q and 0 < r < 1")
    case = case.upper()
    if case not in ("A", "B"):
        raise ValueError(f"case must be A or B, got {case!r}")
    if case == "B" and q == 1:
        raise ValueError("Case B needs q' > 1")

    mu_boundary = cmath.exp(2j * math.pi * p / q)
    if lprime == 1:
        sigma = cardioid_point(mu_boundary)
        solve_seed = 0j
    else:
        if seed is None:
            raise ValueError("a component-center seed is required for l' > 1")
        sigma = solve_multiplier(lprime, mu_boundary, seed)
        solve_seed = seed

    if case == "A":
        if lprime == 1:
            c = cardioid_point(r * mu_boundary)
        else:
            c = solve_multiplier(lprime, r * mu_boundary, solve_seed)
        pf, qf, lf = p, q, lprime
    else:
        lbar = lprime * q
        centers = critical_period_centers(lbar)
        if not centers:
            raise SolverError(f"no period-{lbar} centers found")
        center = min(centers, key=lambda z: abs(z - sigma))
        c = solve_multiplier(lbar, r + 0j, center)
        pf, qf, lf = 1, 1, lbar

    if lprime == 1 and q >= 1:
        theta_gen = _theta_gen_cardioid(p, q)
    else:
        pcycle = parabolic_cycle(sigma, lprime, q, seed=seed)
        theta_gen = _theta_gen_numeric(sigma, lprime * q, pcycle)
        if not theta_gen:
            raise SolverError("failed to determine the generating angle set")

    pair = DegenerationPair(
        c=c, sigma=sigma, p=pf, q=qf, l=lf,
        pprime=p, qprime=q, lprime=lprime,
        case=classify_case(qf, lf, q, lprime),
        r=float(r), theta_gen=theta_gen,
    )
    if pair.case != case:
        raise SolverError(f"resolved pair classifies as {pair.case}, wanted {case}")
    return pair


def parse_pair_spec(spec: str, seed: complex | None = None) -> DegenerationPair:
    """Parse "p/q:lprime:r:caseA|caseB" into a resolved pair."""
    try:
        ang, lp, rr, cs = spec.split(":")
        num, den = ang.split("/")
        p, q, lprime = int(num), int(den), int(lp)
        r = float(rr)
        if cs.lower().startswith("case"):
            cs = cs[4:]
        case = cs.upper()
    except (ValueError, IndexError) as exc:
        raise ValueError(f"malformed pair spec {spec!r}") from exc
    return make_pair(p, q, lprime, r, case, seed=seed)


# Resolved standard pairs used throughout the tests and demos.
def cauliflower(r: float = 0.5) -> DegenerationPair:
    return make_pair(1, 1, 1, r, "A")


def rabbit_a(r: float = 0.9) -> DegenerationPair:
    return make_pair(1, 3, 1, r, "A")


def rabbit_b(r: float = 0.9) -> DegenerationPair:
    return make_pair(1, 3, 1, r, "B")


AIRPLANE_CENTER = -1.7548776662466927


def airplane(r: float = 0.5) -> DegenerationPair:
    return make_pair(1, 1, 3, r, "A", seed=AIRPLANE_CENTER)
