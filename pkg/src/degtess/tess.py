"""Tessellations Tess(f) and Tess(g): tiles, edges, adjacency, subdivision.

A tile T(theta, m, ±) is the inverse-branch image of a model region --
the half-annulus A(m, ±) on the hyperbolic side, the half-strip C(m, ±) on
the parabolic side.  In the strip coordinate of the side (eta = log(Phi_f-a)
resp. zeta = Phi_g) both regions are axis rectangles, so a tile is built by
Newton continuation ("marching") of the rectangle boundary from an anchor
probe placed next to the landing point gamma(theta) of its address angle.
The probe is certified by re-identifying its panel angle, which makes the
branch selection self-checking.

Hyperbolic tiles have four edges (two equipotential, one critical, one
degenerating); parabolic tiles have three edges plus the vertex on I_g.
Case (b) tessellations are represented natively by their subdivided tiles
(one model level per application of f); `subdivided_tiles` gives the
address arithmetic of the coarse union.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .angles import RationalAngle, in_theta
from .dynamics import DegenerationPair, QuadMap
from .linearize import (ChartError, KoenigsChart, FatouChart,
                        koenigs_chart, fatou_chart)

EDGE_EQUIPOTENTIAL = "equipotential"
EDGE_CRITICAL = "critical"
EDGE_DEGENERATING = "degenerating"
ADJ_INCONCLUSIVE = "inconclusive"

MATCH_TOL = 1e-6
DEAD_BAND = 1e-4


class TileError(ChartError):
    """Tile construction failed (branch tracking or marching)."""


@dataclass(frozen=True)
class TileAddress:
    angle: RationalAngle
    level: int
    sign: int  # +1 or -1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def forward(self) -> "TileAddress":
        return TileAddress(self.angle.double(), self.level + 1, self.sign)

    def __str__(self):
        s = "+" if self.sign > 0 else "-"
        return f"({self.angle}, {self.level}, {s})"


@dataclass
class Edge:
    kind: str
    points: np.ndarray


@dataclass
class Tile:
    side: str  # "f" or "g"
    address: TileAddress
    edges: list[Edge]
    center: complex  # the marched image of the model rectangle center
    vertex: complex | None = None  # parabolic tiles: the point on I_g

    def boundary(self) -> np.ndarray:
        return np.concatenate([e.points for e in self.edges])

    def edge(self, kind: str) -> list[Edge]:
        return [e for e in self.edges if e.kind == kind]


def _chart(pair: DegenerationPair, side: str):
    if side == "f":
        return koenigs_chart(pair)
    if side == "g":
        return fatou_chart(pair)
    raise ValueError(f"side must be 'f' or 'g', got {side!r}")


def _cos_grid(a: float, b: float, n: int) -> np.ndarray:
    """n+1 points from a to b clustered toward both ends."""
    t = (1 - np.cos(np.linspace(0, math.pi, n + 1))) / 2
    return a + (b - a) * t


class _Marcher:
    """Newton continuation of the strip coordinate along target paths."""

    def __init__(self, chart, z0: complex, w0: complex, raw_sign: int = 1):
        self.chart = chart
        self.raw = raw_sign
        self.z = z0
        self.w = w0

    def goto(self, w_target: complex, step: float = 0.25,
             budget: int = 100000) -> complex:
        pending = [complex(w_target)]
        used = 0
        while pending:
            b = pending[-1]
            used += 1
            if used > budget:
                raise TileError("marching budget exceeded")
            if abs(b - self.w) > step:
                pending.append(self.w + (b - self.w) / 2)
                continue
            znew = self._newton(b)
            if znew is None:
                if abs(b - self.w) < 1e-11 * (1 + abs(b)):
                    raise TileError(
                        f"marching stalled approaching {b} from {self.w}")
                pending.append(self.w + (b - self.w) / 2)
                continue
            self.z, self.w = znew, b
            pending.pop()
        return self.z

    def _newton(self, w_target: complex, max_iter: int = 60) -> complex | None:
        # near tile corners (branch points of the strip coordinate) the
        # derivative vanishes, so acceptance must be on the residual: the
        # attainable z-precision there is the square root of the value noise
        x = self.z
        tol_res = 1e-12 * (1.0 + abs(w_target))
        for it in range(max_iter):
            try:
                val, der = self.chart.strip_branch(x, self.raw)
            except ChartError:
                return None
            if abs(val - w_target) < tol_res:
                return x
            if der == 0:
                return None
            step = (val - w_target) / der
            if it >= 20:
                step *= 2  # multiplicity-2 regime at a corner
            x -= step
            if abs(step) < 1e-12 * max(1.0, abs(x)):
                return x
        return None


# ---------------------------------------------------------------------------
# probes


_PROBE_CACHE: dict[tuple, tuple[complex, complex]] = {}


def panel_probe(pair: DegenerationPair, side: str, theta: RationalAngle,
                sign: int) -> tuple[complex, complex]:
    """A certified interior point of the panel Pi(theta, sign), with its
    strip value.  Scans directions around the landing point of theta and
    accepts the first candidate whose label and identified angle both match.
    """
    key = (id(pair), side, theta, sign)
    if key in _PROBE_CACHE:
        return _PROBE_CACHE[key]
    chart = _chart(pair, side)
    chart.ensure_calibrated()
    if not in_theta(pair, theta):
        raise TileError(f"angle {theta} is not in Theta for this pair")
    gamma = chart.rays.landing(theta)
    d_ray = chart.rays.approach_direction(theta)
    ray_dir = cmath.phase(d_ray)
    # the panel of signature + is the counterclockwise flank of R(theta) at
    # the landing point (the critical-sector convention fixes the rest);
    # probes rotate off the ray direction strictly into that flank
    eps_grid = ((3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5) if side == "f"
                else (0.25, 0.12, 0.06, 0.025, 0.01, 4e-3))
    deltas = ((0.6, 1.0, 1.5, 2.0, 2.5, 2.9, 0.3) if side == "f"
              else (0.5, 0.8, 1.1, 0.3, 1.5))
    last_err = None
    for eps in eps_grid:
        for ddelta in deltas:
            z = gamma + eps * cmath.exp(1j * (ray_dir + sign * ddelta))
            try:
                w, _ = chart.strip_and_deriv(z)
                if abs(w.imag) > 80:
                    continue  # too deep to march from
                if chart.label(w) != sign:
                    continue
                if not _certify_panel(chart, side, z, w, gamma,
                                      sign * chart.flip):
                    continue
            except ChartError as exc:
                last_err = exc
                continue
            _PROBE_CACHE[key] = (z, w)
            return z, w
    raise TileError(
        f"no certified probe for panel ({theta}, {sign:+d}) on side {side}"
        + (f": {last_err}" if last_err else ""))


def _certify_panel(chart, side: str, z: complex, w: complex, gamma: complex,
                   raw: int) -> bool:
    """Certify that z's panel pinches onto gamma.

    The panel of z is followed toward its landing end along a mid-strip
    corridor (branch points sit on the strip boundary, so the continuation
    cannot hop branches).  On the hyperbolic side the pinch is geometric and
    the limit must hit gamma; on the parabolic side the approach is
    polynomial, so the certificate is a monotone approach to within a loose
    radius.
    """
    try:
        if side == "f":
            mid = raw * math.pi / 2
            marcher = _Marcher(chart, z, w, raw_sign=raw)
            marcher.goto(complex(w.real, mid))
            logr = abs(math.log(chart.r_model))
            prev = marcher.z
            x = w.real
            for _ in range(80):
                x += logr
                cur = marcher.goto(complex(x, mid))
                if abs(cur - prev) < 1e-8:
                    break
                prev = cur
            return abs(cur - gamma) < 1e-5 + 3 * abs(cur - prev)
        else:
            # the pinch onto the vertex is polynomial, |z(T) - gamma| ~
            # C T^(-1/q'); extrapolate the limit with the known exponent
            marcher = _Marcher(chart, z, w, raw_sign=raw)
            T = max(40.0, 2.5 * abs(w.imag))
            z1 = marcher.goto(complex(w.real, raw * T))
            z2 = marcher.goto(complex(w.real, raw * 2 * T))
            shrink = 2.0 ** (-1.0 / chart.qp)
            est = z1 + (z2 - z1) / (1.0 - shrink)
            reach = abs(z1 - est)
            return abs(est - gamma) < 0.3 * reach + 3e-3
    except (ChartError, TileError):
        return False


# ---------------------------------------------------------------------------
# tile construction


def _rect_f(chart: KoenigsChart, m: int, raw_sign: int):
    """The eta-rectangle of A(m, ±) and its edge parameterization."""
    logr = math.log(chart.r_model)
    x_in = math.log(chart.a) + (m + 1) * logr   # inner equipotential
    x_out = math.log(chart.a) + m * logr        # outer equipotential
    y_deg, y_crit = 0.0, raw_sign * math.pi
    return x_in, x_out, y_deg, y_crit


def _rect_g(m: int, raw_sign: int, ymax: float):
    return float(m), float(m + 1), 0.0, raw_sign * ymax


_TILE_CACHE: dict[tuple, Tile] = {}


def build_tile(pair: DegenerationPair, side: str, address: TileAddress,
               resolution: int = 24, ymax: float = 8.0) -> Tile:
    """Construct the tile of the given address as sampled boundary edges.

    resolution = samples per edge (corner-clustered).  Parabolic tiles are
    truncated at |Im| = ymax in the Fatou coordinate; the omitted end is the
    vertex on I_g, appended exactly.
    """
    key = (id(pair), side, address, resolution)
    if key in _TILE_CACHE:
        return _TILE_CACHE[key]
    chart = _chart(pair, side)
    chart.ensure_calibrated()
    theta, m, sign = address.angle, address.level, address.sign
    raw = sign * chart.flip
    z0, w0 = panel_probe(pair, side, theta, sign)
    marcher = _Marcher(chart, z0, w0, raw_sign=raw)

    n = resolution
    if side == "f":
        x_in, x_out, _, y_crit = _rect_f(chart, m, raw)
        mid_y = raw * math.pi / 2
        w_center = complex((x_in + x_out) / 2, mid_y)
        marcher.goto(complex(w0.real, mid_y))
        center = marcher.goto(w_center)
    else:
        x_l, x_r, _, y_top = _rect_g(m, raw, ymax)
        mid_y = raw * min(1.0, ymax / 2)
        w_center = complex((x_l + x_r) / 2, mid_y)
        marcher.goto(complex(w0.real, mid_y))
        center = marcher.goto(w_center)

    def edge_walk(ws):
        """Walk one edge out-and-back from its midpoint; corners are only
        ever approached, never used as Newton seeds (the critical-orbit
        corners are branch points of Phi)."""
        k = len(ws) // 2
        marcher.z, marcher.w = center, w_center
        marcher.goto(ws[k])
        mid_state = (marcher.z, marcher.w)
        to_start = [marcher.goto(w) for w in ws[k::-1]]
        marcher.z, marcher.w = mid_state
        to_end = [marcher.goto(w) for w in ws[k:]]
        return to_start[::-1] + to_end[1:]

    if side == "f":
        zs_deg = edge_walk([complex(x, 0.0) for x in _cos_grid(x_out, x_in, n)])
        zs_in = edge_walk([complex(x_in, y) for y in _cos_grid(0.0, y_crit, n)])
        zs_crit = edge_walk([complex(x, y_crit)
                             for x in _cos_grid(x_in, x_out, n)])
        zs_out = edge_walk([complex(x_out, y)
                            for y in _cos_grid(y_crit, 0.0, n)])
        edges = [
            Edge(EDGE_EQUIPOTENTIAL, np.array(zs_out)),
            Edge(EDGE_DEGENERATING, np.array(zs_deg)),
            Edge(EDGE_EQUIPOTENTIAL, np.array(zs_in)),
            Edge(EDGE_CRITICAL, np.array(zs_crit)),
        ]
        tile = Tile(side=side, address=address, edges=edges, center=center)
    else:
        # verticals sampled geometrically upward (the tile pinches to the
        # vertex polynomially); the Im = ymax cut is not an edge
        ys_up = np.concatenate([[0.0], np.geomspace(5e-3, abs(y_top), n)]) * raw
        zs_crit = edge_walk([complex(x, 0.0) for x in _cos_grid(x_r, x_l, n)])
        zs_left = edge_walk([complex(x_l, y) for y in ys_up])
        zs_right = edge_walk([complex(x_r, y) for y in ys_up])
        vertex = chart.rays.landing(theta)
        edges = [
            Edge(EDGE_EQUIPOTENTIAL, np.array(zs_right)),
            Edge(EDGE_CRITICAL, np.array(zs_crit)),
            Edge(EDGE_EQUIPOTENTIAL, np.array(zs_left)),
        ]
        tile = Tile(side=side, address=address, edges=edges, center=center,
                    vertex=vertex)
    _TILE_CACHE[key] = tile
    return tile


# ---------------------------------------------------------------------------
# geometric comparisons


def point_to_polyline(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Distances from each point to a polyline (segment-projected)."""
    p = np.asarray(points)[:, None]
    a = poly[None, :-1]
    b = poly[None, 1:]
    ab = b - a
    denom = np.abs(ab) ** 2
    denom[denom == 0] = 1e-300
    t = np.clip(((p - a) * np.conj(ab)).real / denom, 0.0, 1.0)
    proj = a + t * ab
    return np.min(np.abs(p - proj), axis=1)


def hausdorff(poly1: np.ndarray, poly2: np.ndarray) -> float:
    d12 = point_to_polyline(poly1, poly2).max()
    d21 = point_to_polyline(poly2, poly1).max()
    return float(max(d12, d21))


def tile_map_law_distance(pair: DegenerationPair, side: str,
                          address: TileAddress, resolution: int = 24) -> float:
    """Hausdorff distance between f(T(theta, m, s)) and T(2theta, m+1, s)."""
    t1 = build_tile(pair, side, address, resolution)
    t2 = build_tile(pair, side, address.forward(), resolution)
    fmap = QuadMap(complex(pair.c if side == "f" else pair.sigma))
    img = np.array([fmap(z) for z in t1.boundary()])
    return hausdorff(img, t2.boundary())


def adjacency_kinds(pair: DegenerationPair, side: str, addr1: TileAddress,
                    addr2: TileAddress,
                    resolution: int = 24) -> frozenset[str]:
    """All shared-edge kinds between two tiles (possibly several: a q = 1
    (theta, m, ±) pair shares both its degenerating and critical edges).

    Numeric rule: an edge is shared when at least 10 samples of one tile's
    edge lie within 1e-6 of the other's; distances inside the dead band
    [1e-6, 1e-4] without a definite match contribute "inconclusive".
    """
    if addr1 == addr2:
        raise ValueError("adjacency of a tile with itself is undefined")
    t1 = build_tile(pair, side, addr1, resolution)
    t2 = build_tile(pair, side, addr2, resolution)
    kinds: set[str] = set()
    for e1 in t1.edges:
        for e2 in t2.edges:
            d = point_to_polyline(e1.points, e2.points)
            close = int(np.sum(d < MATCH_TOL))
            band = int(np.sum((d >= MATCH_TOL) & (d <= DEAD_BAND)))
            if close >= 10:
                if e1.kind != e2.kind:
                    kinds.add(ADJ_INCONCLUSIVE)
                else:
                    kinds.add(e1.kind)
            elif 3 <= close < 10 or band >= 10:
                kinds.add(ADJ_INCONCLUSIVE)
    return frozenset(kinds)


def adjacency(pair: DegenerationPair, side: str, addr1: TileAddress,
              addr2: TileAddress, resolution: int = 24) -> str | None:
    """Shared-edge kind between two tiles, None, or "inconclusive".

    When several kinds are shared the degenerating edge wins (the gluing
    tables are organized around it), then critical, then equipotential.
    """
    kinds = adjacency_kinds(pair, side, addr1, addr2, resolution)
    for kind in (EDGE_DEGENERATING, EDGE_CRITICAL, EDGE_EQUIPOTENTIAL):
        if kind in kinds:
            return kind
    if ADJ_INCONCLUSIVE in kinds:
        return ADJ_INCONCLUSIVE
    return None


def subdivided_tiles(pair_b: DegenerationPair,
                     address: TileAddress) -> list[TileAddress]:
    """Addresses of the q subdivided tiles composing a coarse Case (b) tile:
    (theta, m + mu*l', s) for 0 <= mu < q'."""
    if pair_b.case != "B":
        raise ValueError("subdivided_tiles needs a Case (b) pair")
    q, l = pair_b.qprime, pair_b.lprime
    return [TileAddress(address.angle, address.level + mu * l, address.sign)
            for mu in range(q)]


# ---------------------------------------------------------------------------
# point location in a built tessellation


def level_and_sign(pair: DegenerationPair, side: str,
                   z: complex) -> tuple[int, int, float]:
    """(level, signature, strip boundary distance) of an interior point."""
    chart = _chart(pair, side)
    chart.ensure_calibrated()
    w, _ = chart.strip_and_deriv(z)
    lev = chart.level_of_strip(w)
    m = math.floor(lev)
    frac = lev - m
    if side == "f":
        imdist = min(abs(w.imag), abs(abs(w.imag) - math.pi))
    else:
        imdist = abs(w.imag)
    return m, chart.label(w), float(min(frac, 1 - frac, imdist))


def point_in_tile(tile: Tile, z: complex) -> bool:
    """Winding-number test against the closed tile boundary polygon.

    Parabolic tiles are closed through their vertex, which is exact enough
    for interior queries away from the truncation cut.
    """
    pts = [tile.boundary()]
    if tile.vertex is not None:
        pts.append(np.array([tile.vertex]))
    poly = np.concatenate(pts)
    dz = poly - z
    if np.min(np.abs(dz)) < 1e-12:
        return True
    args = np.angle(dz[1:] / dz[:-1])
    winding = (np.sum(args) + np.angle(dz[0] / dz[-1])) / (2 * math.pi)
    return abs(winding) > 0.5


def locate(pair: DegenerationPair, side: str, z: complex,
           angles, resolution: int = 24,
           edge_tol: float = 1e-6) -> TileAddress | None:
    """Locate z's tile among the panels of the given candidate angles.

    Returns None when no candidate tile contains z; raises TileError when z
    sits within edge_tol (strip units) of a tile boundary, where membership
    is not decidable at this precision.
    """
    m, sign, bdist = level_and_sign(pair, side, z)
    if bdist < edge_tol:
        raise TileError(f"point {z} is within {bdist} of a tile boundary")
    for th in angles:
        addr = TileAddress(th, m, sign)
        try:
            tile = build_tile(pair, side, addr, resolution)
        except TileError:
            continue
        if point_in_tile(tile, z):
            return addr
    return None
