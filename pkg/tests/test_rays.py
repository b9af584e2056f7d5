import cmath
import math

import numpy as np
import pytest

from degtess.angles import RationalAngle
from degtess.rays import (green, trace_ray, landing_point, ray_point,
                          external_coordinates, inverse_bottcher, RayFamily)
from degtess.dynamics import cauliflower, rabbit_a, rabbit_b, beta_fixed_point


def A(n, d=None):
    return RationalAngle(n, d)


def test_green_examples():
    assert abs(green(0, 2) - math.log(2)) < 1e-12
    assert green(3 / 16, 0.1) == 0.0          # bounded orbit
    assert green(0, cmath.exp(0.3j)) == 0.0   # unit circle


def test_green_positive_outside():
    assert green(0.25, 2.0) > 0


def test_trace_ray_radial_for_z2():
    tr = trace_ray(0, A(1, 3))
    for p, t in tr.samples:
        assert abs(cmath.phase(p) / (2 * math.pi) % 1.0 - 1 / 3) < 1e-10
    # potentials strictly decreasing
    pots = [t for _, t in tr.samples]
    assert all(a > b for a, b in zip(pots, pots[1:]))


def test_landing_examples():
    assert abs(landing_point(0, A(1, 3)) - cmath.exp(2j * math.pi / 3)) < 1e-10
    assert abs(landing_point(3 / 16, A(0)) - 0.75) < 1e-11
    # common alpha for the rabbit center region: three rays land together
    pa = rabbit_a(0.9)
    pts = [landing_point(pa.sigma, A(k, 7)) for k in (1, 2, 4)]
    assert max(abs(p - pts[0]) for p in pts) < 1e-6


def test_landing_equivariance():
    c = 3 / 16
    for th in (A(1, 4), A(1, 6), A(3, 7)):
        lp = landing_point(c, th)
        lp2 = landing_point(c, th.double())
        assert abs(lp * lp + c - lp2) < 1e-8


def test_zero_ray_lands_at_beta():
    for c in (3 / 16, -0.12375 + 0.56508157596934j, -1.7512483785903599):
        assert abs(landing_point(c, A(0)) - beta_fixed_point(c)) < 1e-9


def test_ray_equation_forward():
    # f(R(theta)) = R(2 theta): forward image of a traced sample lies on the
    # doubled ray at doubled potential
    c = 3 / 16
    th = A(1, 7)
    z = ray_point(c, float(th.fraction), 0.01)
    z2 = ray_point(c, float(th.double().fraction), 0.02)
    assert abs(z * z + c - z2) < 1e-9


def test_external_coordinates_roundtrip():
    c = -0.1237499999999998 + 0.5650815759693462j
    for th, t in [(0.23, 0.07), (0.8, 0.004), (1 / 7, 0.0001)]:
        z = ray_point(c, th, t)
        th2, t2 = external_coordinates(c, z)
        assert abs(th2 - th % 1.0) < 1e-9
        assert abs(t2 - t) < 1e-12


def test_inverse_bottcher_inverts():
    c = 3 / 16
    for w in (2 + 1j, 1.1 * cmath.exp(0.4j), 1.01 * cmath.exp(2.5j)):
        z = inverse_bottcher(c, w)
        th, g = external_coordinates(c, z)
        assert abs(g - math.log(abs(w))) < 1e-10


def test_ray_family_pullback_consistency():
    pair = rabbit_a(0.9)
    fam = RayFamily(complex(pair.c))
    th = A(1, 14)  # preimage of 1/7 off the cycle
    pts, pots = fam.polyline(th)
    parent_pts, parent_pots = fam.polyline(A(1, 7))
    # forward image of the pulled ray lies on the parent ray
    f = lambda z: z * z + pair.c
    img = np.array([f(p) for p in pts])
    assert np.max(np.abs(img - parent_pts)) < 1e-9
    lp = fam.landing(th)
    assert abs(f(lp) - fam.landing(A(1, 7))) < 1e-8


def test_ray_family_landing_matches_direct():
    pair = cauliflower(0.5)
    fam = RayFamily(complex(pair.c))
    for th in (A(1, 2), A(1, 4), A(3, 4)):
        assert abs(fam.landing(th) - landing_point(complex(pair.c), th)) < 1e-8
