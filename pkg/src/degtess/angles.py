"""Exact arithmetic for external angles under the doubling map.

Angles live on the circle T = R/Z and are always rational here, stored as
reduced fractions with arbitrary-precision integers.  Everything combinatorial
in this package (tile addresses, gluing tables, lifted angles) is built on
this module; no floating-point angle ever enters the combinatorics.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from math import gcd
from typing import Iterable, Sequence


@total_ordering
class RationalAngle:
    """A point of T = R/Z as a reduced fraction in [0, 1)."""

    __slots__ = ("_frac",)

    def __init__(self, numerator, denominator=None):
        if denominator is None:
            frac = Fraction(numerator)
        else:
            frac = Fraction(numerator, denominator)
        self._frac = frac % 1

    @property
    def numerator(self) -> int:
        return self._frac.numerator

    @property
    def denominator(self) -> int:
        return self._frac.denominator

    @property
    def fraction(self) -> Fraction:
        return self._frac

    def double(self) -> "RationalAngle":
        """Image under the angle doubling map delta: theta -> 2*theta mod 1."""
        return RationalAngle(2 * self._frac)

    def halves(self) -> tuple["RationalAngle", "RationalAngle"]:
        """The two delta-preimages, ordered (theta/2, theta/2 + 1/2)."""
        h = self._frac / 2
        return RationalAngle(h), RationalAngle(h + Fraction(1, 2))

    def antipode(self) -> "RationalAngle":
        return RationalAngle(self._frac + Fraction(1, 2))

    def __float__(self) -> float:
        return float(self._frac)

    def __eq__(self, other) -> bool:
        if isinstance(other, RationalAngle):
            return self._frac == other._frac
        return NotImplemented

    def __lt__(self, other) -> bool:
        return self._frac < other._frac

    def __hash__(self) -> int:
        return hash(self._frac)

    def __repr__(self) -> str:
        return f"RationalAngle({self.numerator}/{self.denominator})"

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


def angle(numerator, denominator=None) -> RationalAngle:
    """Shorthand constructor."""
    return RationalAngle(numerator, denominator)


def double(theta: RationalAngle) -> RationalAngle:
    return theta.double()


@dataclass(frozen=True)
class OrbitMeta:
    """Minimal (preperiod, period) of an angle under doubling."""

    preperiod: int
    period: int


def orbit_meta(theta: RationalAngle) -> OrbitMeta:
    """Minimal preperiod and period of theta under the doubling map.

    An angle p/q in lowest terms has preperiod = 2-adic valuation of q and
    period = multiplicative order of 2 modulo the odd part of q; we just
    iterate, which is cheap and obviously correct.
    """
    seen = {}
    cur = theta
    n = 0
    while cur not in seen:
        seen[cur] = n
        cur = cur.double()
        n += 1
    first = seen[cur]
    return OrbitMeta(preperiod=first, period=n - first)


def orbit(theta: RationalAngle) -> list[RationalAngle]:
    """Forward doubling orbit up to (and excluding) the first repeat."""
    seen = set()
    out = []
    cur = theta
    while cur not in seen:
        seen.add(cur)
        out.append(cur)
        cur = cur.double()
    return out


@dataclass(frozen=True)
class CycleSet:
    """A doubling-invariant cycle of angles realizing rotation number p/q."""

    angles: tuple[RationalAngle, ...]
    rotation_numerator: int
    rotation_denominator: int

    def __contains__(self, theta: RationalAngle) -> bool:
        return theta in self.angles


def _rotation_number(cycle: Sequence[RationalAngle]) -> Fraction | None:
    """Rotation number of doubling on a cycle, or None if not a rotation.

    The cycle sorted by circle position must be permuted by delta as a rigid
    rotation i -> i+k; the rotation number is then k/len(cycle).
    """
    srt = sorted(cycle)
    q = len(srt)
    index = {a: i for i, a in enumerate(srt)}
    shift = None
    for i, a in enumerate(srt):
        img = a.double()
        if img not in index:
            return None
        k = (index[img] - i) % q
        if shift is None:
            shift = k
        elif shift != k:
            return None
    return Fraction(shift, q)


MAX_CYCLE_DENOM_EXP = 16


def cycle_angles(p: int, q: int) -> CycleSet:
    """The unique period-q doubling cycle with combinatorial rotation number p/q.

    Brute force over denominator 2^q - 1; q is capped to keep the search
    bounded.  (1, 1) gives the fixed angle {0}.
    """
    if q < 1 or p < 1 or p > q or gcd(p, q) != 1:
        raise ValueError(f"need coprime 1 <= p <= q, got p/q = {p}/{q}")
    if q > MAX_CYCLE_DENOM_EXP:
        raise ValueError(f"q = {q} exceeds cap {MAX_CYCLE_DENOM_EXP}")
    if q == 1:
        return CycleSet(angles=(RationalAngle(0),), rotation_numerator=1,
                        rotation_denominator=1)
    den = 2 ** q - 1
    target = Fraction(p, q)
    seen: set[RationalAngle] = set()
    for k in range(1, den):
        theta = RationalAngle(k, den)
        if theta in seen:
            continue
        cyc = orbit(theta)
        seen.update(cyc)
        if len(cyc) != q:
            continue
        rot = _rotation_number(cyc)
        if rot == target:
            return CycleSet(angles=tuple(sorted(cyc)),
                            rotation_numerator=p, rotation_denominator=q)
    raise ValueError(f"no rotation cycle for {p}/{q}")  # unreachable for valid p/q


def in_theta(pair, theta: RationalAngle) -> bool:
    """Whether theta belongs to the pair's angle set Theta.

    Theta consists of the angles whose doubling orbit eventually enters the
    pair's generating cycle set (the type of the parabolic cycle / the
    degenerating arc system).  Invariant under doubling by construction.
    """
    gen = pair.theta_gen
    cur = theta
    for _ in range(len(orbit(theta)) + 1):
        if cur in gen:
            return True
        cur = cur.double()
    return cur in gen


def ptilde(p: int, q: int) -> int:
    """Inverse residue of p mod q, normalized to the interval (-q/2, q/2].

    For even q the strict bound |ptilde| < q/2 can be unsatisfiable; the
    half-open normalization always yields a unique representative.
    """
    if q < 1 or gcd(p, q) != 1:
        raise ValueError(f"need coprime p, q >= 1, got {p}, {q}")
    if q == 1:
        return 0
    inv = pow(p, -1, q)
    if inv > q / 2:
        inv -= q
    return inv


@dataclass(frozen=True)
class CharacteristicAngles:
    """The angle pair (theta0+, theta0-) bounding the critical sector.

    `lifted` carries representatives with theta0+ < theta0- <= theta0+ + 1;
    the plain angles are their classes in [0, 1).
    """

    theta_plus: RationalAngle
    theta_minus: RationalAngle
    lifted: tuple[Fraction, Fraction]


# Built-in cross-check table for the three standard families, keyed by
# (p', q', l').  The numeric sector test is authoritative for everything else.
_CHARACTERISTIC_TABLE = {
    (1, 1, 1): (Fraction(0), Fraction(1)),           # Cauliflowers
    (1, 3, 1): (Fraction(4, 7), Fraction(8, 7)),      # Rabbits
    (1, 1, 3): (Fraction(5, 7), Fraction(9, 7)),      # Airplanes
}


def characteristic_angles(pair) -> CharacteristicAngles:
    """Compute (theta0+, theta0-) for a resolved degeneration pair.

    The two angles of the type of beta0 (the parabolic point on the critical
    Fatou component's boundary) whose rays bound the sector containing the
    critical orbit's attracting direction.  Computed by the numeric sector
    test in the charts module and cross-checked against the built-in table
    for the standard families.
    """
    from . import linearize

    lifted = linearize.characteristic_sector(pair)
    key = (pair.pprime, pair.qprime, pair.lprime)
    if key in _CHARACTERISTIC_TABLE:
        expect = _CHARACTERISTIC_TABLE[key]
        if lifted != expect:
            raise ArithmeticError(
                f"characteristic sector {lifted} disagrees with the table "
                f"{expect} for {key}; ray-landing numerics failed to separate "
                "sectors at configured precision")
    return CharacteristicAngles(
        theta_plus=RationalAngle(lifted[0]),
        theta_minus=RationalAngle(lifted[1]),
        lifted=lifted,
    )


def sort_circular(angles: Iterable[RationalAngle]) -> list[RationalAngle]:
    return sorted(angles)


def circular_successor(angles: Sequence[RationalAngle],
                       theta: RationalAngle) -> RationalAngle:
    """Counterclockwise neighbor of theta within a finite angle set."""
    srt = sorted(angles)
    i = srt.index(theta)
    return srt[(i + 1) % len(srt)]
