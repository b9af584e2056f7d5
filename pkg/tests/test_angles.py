import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from degtess.angles import (RationalAngle, OrbitMeta, cycle_angles, orbit_meta,
                            ptilde, in_theta, circular_successor)
from degtess.dynamics import cauliflower, rabbit_a, airplane


def A(n, d=None):
    return RationalAngle(n, d)


def test_double_basic():
    assert A(1, 7).double() == A(2, 7)
    assert A(5, 7).double() == A(3, 7)
    assert A(0).double() == A(0)


def test_orbit_meta_examples():
    # iterate doubling by hand: 1/7 -> 2/7 -> 4/7 -> 1/7
    assert orbit_meta(A(1, 7)) == OrbitMeta(0, 3)
    # 1/2 -> 0 -> 0
    assert orbit_meta(A(1, 2)) == OrbitMeta(1, 1)
    # 1/6 -> 1/3 -> 2/3 -> 1/3
    assert orbit_meta(A(1, 6)) == OrbitMeta(1, 2)


def test_halves_are_preimages():
    th = A(3, 7)
    h0, h1 = th.halves()
    assert h0.double() == th and h1.double() == th
    assert h1.fraction - h0.fraction == Fraction(1, 2)


@given(st.integers(min_value=0, max_value=10 ** 6),
       st.integers(min_value=1, max_value=10 ** 6))
@settings(max_examples=60)
def test_double_two_to_one_on_odd_denominators(n, d):
    th = RationalAngle(n, d)
    if th.denominator % 2 == 1:
        h0, h1 = th.halves()
        assert h0 != h1
        assert h0.double() == th and h1.double() == th


def test_cycle_angles_rabbit():
    cyc = cycle_angles(1, 3)
    assert set(cyc.angles) == {A(1, 7), A(2, 7), A(4, 7)}


def test_cycle_angles_basilica_and_fixed():
    assert set(cycle_angles(1, 2).angles) == {A(1, 3), A(2, 3)}
    assert set(cycle_angles(1, 1).angles) == {A(0)}


def _sturmian_cycle(p, q):
    """Independent oracle: the rotation word w_i = floor((i+1)p/q) -
    floor(ip/q) read as a repeating binary expansion generates the unique
    doubling cycle of rotation number p/q."""
    if q == 1:
        return {A(0)}
    bits = [(i + 1) * p // q - i * p // q for i in range(q)]
    num = sum(b << (q - 1 - i) for i, b in enumerate(bits))
    theta = A(num, 2 ** q - 1)
    out = set()
    cur = theta
    for _ in range(q):
        out.add(cur)
        cur = cur.double()
    return out


@pytest.mark.parametrize("q", range(2, 9))
def test_cycle_angles_against_sturmian_oracle(q):
    for p in range(1, q):
        if math.gcd(p, q) != 1:
            continue
        got = set(cycle_angles(p, q).angles)
        want = _sturmian_cycle(p, q)
        assert got == want, (p, q)


def test_cycle_angles_permuted_by_doubling():
    for (p, q) in [(1, 3), (2, 5), (3, 7), (1, 8)]:
        cyc = set(cycle_angles(p, q).angles)
        assert {a.double() for a in cyc} == cyc


def test_ptilde_examples():
    assert ptilde(1, 3) == 1
    assert ptilde(2, 5) == -2
    assert ptilde(1, 1) == 0


def test_ptilde_exhaustive():
    for q in range(1, 101):
        for p in range(1, q + 1):
            if math.gcd(p, q) != 1:
                continue
            pt = ptilde(p, q)
            assert (pt * p) % q == 1 % q
            assert -q / 2 < pt <= q / 2


class _FakePair:
    def __init__(self, gen):
        self.theta_gen = frozenset(gen)


def test_in_theta_examples():
    cauli = _FakePair({A(0)})
    assert in_theta(cauli, A(3, 4))          # 3/4 -> 1/2 -> 0
    rab = _FakePair({A(1, 7), A(2, 7), A(4, 7)})
    assert not in_theta(rab, A(1, 3))        # 1/3 <-> 2/3 never meets
    air = _FakePair({A(k, 7) for k in range(1, 7)})
    assert in_theta(air, A(3, 7))


@given(st.integers(min_value=0, max_value=2 ** 12),
       st.integers(min_value=1, max_value=2 ** 12))
@settings(max_examples=40)
def test_in_theta_doubling_invariant(n, d):
    pair = _FakePair({A(1, 7), A(2, 7), A(4, 7)})
    th = RationalAngle(n, d)
    assert in_theta(pair, th) == in_theta(pair, th.double())


def test_circular_successor():
    angs = [A(1, 7), A(2, 7), A(4, 7)]
    assert circular_successor(angs, A(4, 7)) == A(1, 7)
    assert circular_successor(angs, A(1, 7)) == A(2, 7)


@pytest.mark.slow
def test_characteristic_angles_table():
    from degtess.angles import characteristic_angles
    ca = characteristic_angles(cauliflower(0.5))
    assert ca.lifted == (Fraction(0), Fraction(1))
    ra = characteristic_angles(rabbit_a(0.9))
    assert ra.lifted == (Fraction(4, 7), Fraction(8, 7))
    ap = characteristic_angles(airplane(0.5))
    assert ap.lifted == (Fraction(5, 7), Fraction(9, 7))
