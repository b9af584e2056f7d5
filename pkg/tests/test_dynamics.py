import cmath
import math

import pytest

from degtess.dynamics import (QuadMap, attracting_cycle, solve_multiplier,
                              make_pair, classify_case, beta_fixed_point,
                              parse_pair_spec, critical_period_centers,
                              cauliflower, rabbit_a, rabbit_b, airplane,
                              SolverError)


def test_attracting_cycle_examples():
    cyc = attracting_cycle(3 / 16)
    assert cyc.period == 1
    assert abs(cyc.points[0] - 0.25) < 1e-12
    assert abs(cyc.multiplier - 0.5) < 1e-12

    cyc0 = attracting_cycle(0)
    assert cyc0.period == 1 and abs(cyc0.points[0]) < 1e-12
    assert abs(cyc0.multiplier) < 1e-10

    cyc2 = attracting_cycle(-1)
    assert cyc2.period == 2
    pts = sorted(cyc2.points, key=lambda z: z.real)
    assert abs(pts[0] + 1) < 1e-10 and abs(pts[1]) < 1e-10


def test_solve_multiplier_cardioid():
    # cardioid formula c = lam/2 - lam^2/4
    assert abs(solve_multiplier(1, 0.5, 0) - 3 / 16) < 1e-11
    lam = cmath.exp(2j * math.pi / 3)
    want = lam / 2 - lam * lam / 4
    assert abs(solve_multiplier(1, lam, 0) - want) < 1e-11
    assert abs(want - (-1 / 8 + 3 * math.sqrt(3) / 8 * 1j)) < 1e-15
    assert abs(solve_multiplier(1, 1, 0) - 0.25) < 1e-11


def test_roundtrip_multiplier():
    for lam in (0.3 + 0.2j, 0.5, -0.4 + 0.1j):
        c = solve_multiplier(1, lam, 0)
        cyc = attracting_cycle(c)
        assert abs(cyc.multiplier - lam) < 1e-10


def test_make_pair_cauliflower():
    pair = cauliflower(0.5)
    assert abs(pair.c - 3 / 16) < 1e-12
    assert abs(pair.sigma - 0.25) < 1e-12
    assert (pair.p, pair.q, pair.l) == (1, 1, 1)
    assert (pair.pprime, pair.qprime, pair.lprime) == (1, 1, 1)
    assert pair.case == "A"


def test_make_pair_rabbits():
    pa = rabbit_a(0.9)
    assert (pa.q, pa.l, pa.qprime, pa.lprime) == (3, 1, 3, 1)
    assert pa.case == "A"
    pb = rabbit_b(0.9)
    assert (pb.q, pb.l, pb.qprime, pb.lprime) == (1, 3, 3, 1)
    assert pb.case == "B"
    assert pa.lbar == pb.lbar == 3
    assert abs(pa.sigma - pb.sigma) < 1e-10
    # the case-b parameter sits in the rabbit component
    cyc = attracting_cycle(pb.c)
    assert cyc.period == 3
    assert abs(cyc.multiplier - 0.9) < 1e-9


def test_classify_case():
    assert classify_case(3, 1, 3, 1) == "A"
    assert classify_case(1, 3, 3, 1) == "B"
    with pytest.raises(ValueError):
        classify_case(2, 1, 3, 1)


def test_lq_identity():
    for pair in (cauliflower(0.5), rabbit_a(0.9), rabbit_b(0.9)):
        assert pair.l * pair.q == pair.lprime * pair.qprime


def test_beta_fixed_point():
    assert beta_fixed_point(0) == 1
    assert abs(beta_fixed_point(3 / 16) - 0.75) < 1e-15
    assert abs(beta_fixed_point(0.25) - 0.5) < 1e-15


def test_radial_monotonicity():
    # |c(r) - sigma| decreasing as r -> 1 along the internal ray
    ds = []
    for r in (0.5, 0.9, 0.99):
        pair = cauliflower(r)
        ds.append(abs(pair.c - pair.sigma))
    assert ds[0] > ds[1] > ds[2]

    ds = []
    for r in (0.5, 0.9, 0.99):
        pair = rabbit_a(r)
        ds.append(abs(pair.c - pair.sigma))
    assert ds[0] > ds[1] > ds[2]


def test_superattracting_rejected():
    with pytest.raises(ValueError):
        make_pair(1, 3, 1, 0.0, "A")


def test_parse_pair_spec():
    pair = parse_pair_spec("1/3:1:0.9:A")
    assert pair.case == "A" and pair.q == 3
    pair = parse_pair_spec("1/3:1:0.9:caseB")
    assert pair.case == "B" and pair.l == 3
    with pytest.raises(ValueError):
        parse_pair_spec("nonsense")


def test_critical_period_centers():
    centers = critical_period_centers(3)
    assert len(centers) == 3
    assert min(abs(c - (-1.754877666)) for c in centers) < 1e-6


def test_airplane_pair():
    pp = airplane(0.5)
    assert abs(pp.sigma + 1.75) < 1e-9
    assert (pp.q, pp.l, pp.qprime, pp.lprime) == (1, 3, 1, 3)
    assert pp.case == "A"


def test_orbit_order():
    pb = rabbit_b(0.9)
    cyc = attracting_cycle(pb.c)
    f = QuadMap(pb.c)
    for i in range(cyc.period):
        assert abs(f(cyc.points[i]) - cyc.points[(i + 1) % cyc.period]) < 1e-9
