"""Truncated power series helpers for local linearization.

Series are numpy complex arrays of coefficients [a0, a1, ...] about 0.
Only what the charts need: composition, the forward orbit series of f along
a cycle, and the Schroeder equation solve kappa(F(z)) = lam * kappa(z).
"""

from __future__ import annotations

import numpy as np

ORDER = 24


def compose(outer: np.ndarray, inner: np.ndarray, order: int = ORDER) -> np.ndarray:
    """(outer o inner) truncated; inner must有 inner[0] == 0."""
    if abs(inner[0]) > 1e-14:
        raise ValueError("inner series must vanish at 0")
    out = np.zeros(order, dtype=complex)
    power = np.zeros(order, dtype=complex)
    power[0] = 1.0
    for k, a in enumerate(outer[:order]):
        out += a * power
        power = np.convolve(power, inner)[:order]
    return out


def local_return_map(c: complex, cycle_point: complex, period: int,
                     order: int = ORDER) -> np.ndarray:
    """Series of f^period about cycle_point, in the shifted coordinate
    w = z - cycle_point: returns series of f^period(cycle_point + w) - cycle_point.
    """
    # current series: z(w) - alpha_j, composed step by step through the cycle
    cur = np.zeros(order, dtype=complex)
    cur[1] = 1.0
    pt = cycle_point
    for _ in range(period):
        # f(pt + s) = (pt + s)^2 + c = pt^2 + c + 2 pt s + s^2
        sq = np.convolve(cur, cur)[:order]
        nxt = 2 * pt * cur + sq
        pt = pt * pt + c
        nxt[0] += 0.0
        cur = nxt
    if abs(pt - cycle_point) > 1e-8:
        raise ArithmeticError("cycle does not close; bad cycle point")
    cur[0] = 0.0  # exact fixed point in the shifted coordinate
    return cur


def schroeder(fseries: np.ndarray, order: int = ORDER) -> np.ndarray:
    """Solve kappa(F(w)) = lam * kappa(w), kappa'(0) = 1, for attracting F.

    fseries is the series of F about its fixed point 0 with F(0) = 0 and
    multiplier lam = fseries[1], 0 < |lam| < 1.
    """
    lam = fseries[1]
    if not 0 < abs(lam) < 1:
        raise ValueError(f"multiplier {lam} not attracting/nonzero")
    kappa = np.zeros(order, dtype=complex)
    kappa[1] = 1.0
    # F-powers: F^j as series, built incrementally
    fpow = np.zeros(order, dtype=complex)
    fpow[0] = 1.0
    fpows = [fpow.copy()]
    for _ in range(order - 1):
        fpows.append(np.convolve(fpows[-1], fseries)[:order])
    for n in range(2, order):
        # coefficient of w^n in kappa(F(w)) = sum_j kappa_j (F^j)_n
        s = sum(kappa[j] * fpows[j][n] for j in range(1, n))
        # kappa_n lam^n + s = lam kappa_n
        kappa[n] = s / (lam - lam ** n)
    return kappa


def evaluate(series: np.ndarray, w: complex) -> complex:
    acc = 0j
    for a in series[::-1]:
        acc = acc * w + a
    return acc


def evaluate_deriv(series: np.ndarray, w: complex) -> complex:
    acc = 0j
    n = len(series) - 1
    for k in range(n, 0, -1):
        acc = acc * w + k * series[k]
    return acc
