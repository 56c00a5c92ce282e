"""Volume, cut-element and edge quadrature rules in physical coordinates."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

MIN_ORDER, MAX_ORDER = 2, 8


@dataclass(frozen=True)
class QuadratureRule:
    """Points and positive weights; ``sides`` is ``-1``/``+1`` on cut rules."""

    points: np.ndarray
    weights: np.ndarray
    sides: np.ndarray | None = None

    def __len__(self):
        return len(self.weights)

    def integrate(self, values) -> complex:
        return np.dot(self.weights, values)


def _check_order(order):
    if int(order) != order or not MIN_ORDER <= order <= MAX_ORDER:
        raise ValueError(f"quadrature order must be an integer in "
                         f"[{MIN_ORDER}, {MAX_ORDER}], got {order!r}")
    return int(order)


@lru_cache(maxsize=None)
def gauss_legendre(n: int):
    """``n``-point Gauss rule on ``[0, 1]``."""
    x, w = roots_legendre(n)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def reference_triangle_rule(order: int):
    """Collapsed (conical product) Gauss rule on the triangle (0,0),(1,0),(0,1).

    Exact for total degree ``<= order``; all weights positive. Returns the
    barycentric-free reference points ``(n, 2)`` and weights summing to 1/2.
    """
    order = _check_order(order)
    n = (order + 2) // 2
    # Jacobi weight (1-s) absorbs the Duffy Jacobian in the collapsed direction
    s, ws = roots_jacobi(n, 1.0, 0.0)
    s = 0.5 * (s + 1.0)
    ws = 0.25 * ws
    t, wt = gauss_legendre(n)
    S, Tt = np.meshgrid(s, t, indexing="ij")
    W = np.outer(ws, wt)
    pts = np.column_stack([S.ravel(), ((1.0 - S) * Tt).ravel()])
    return pts, W.ravel()


@lru_cache(maxsize=None)
def reference_square_rule(order: int):
    """Tensor Gauss rule on ``[0, 1]^2`` exact for degree ``<= order`` per variable."""
    order = _check_order(order)
    n = (order + 2) // 2
    t, w = gauss_legendre(n)
    X, Y = np.meshgrid(t, t, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel()]), np.outer(w, w).ravel()


def triangle_rule(vertices, order: int) -> QuadratureRule:
    v = np.asarray(vertices, dtype=float)
    ref, w = reference_triangle_rule(order)
    e1, e2 = v[1] - v[0], v[2] - v[0]
    jac = abs(e1[0] * e2[1] - e1[1] * e2[0])
    pts = v[0] + ref[:, :1] * e1 + ref[:, 1:] * e2
    return QuadratureRule(pts, w * jac)


def element_rule(vertices, order: int) -> QuadratureRule:
    """Quadrature rule on one mesh element given its vertex coordinates.

    Triangles use the collapsed Gauss rule, axis-aligned rectangles the
    tensor Gauss rule.
    """
    v = np.asarray(vertices, dtype=float)
    if len(v) == 3:
        return triangle_rule(v, order)
    if len(v) == 4:
        ref, w = reference_square_rule(order)
        lo, hi = v.min(axis=0), v.max(axis=0)
        ext = hi - lo
        return QuadratureRule(lo + ref * ext, w * ext[0] * ext[1])
    raise ValueError("element must have 3 or 4 vertices")


def batched_element_points(coords: np.ndarray, order: int):
    """Vectorized element rule for many congruent-type elements.

    Parameters
    ----------
    coords : (n, 3|4, 2) array

    Returns
    -------
    ref : (q, 2) reference points (triangle or unit square)
    points : (n, q, 2) physical points
    weights : (n, q) physical weights
    """
    nv = coords.shape[1]
    if nv == 3:
        ref, w = reference_triangle_rule(order)
        e1 = coords[:, 1] - coords[:, 0]
        e2 = coords[:, 2] - coords[:, 0]
        jac = np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        pts = (coords[:, None, 0] + ref[None, :, :1] * e1[:, None]
               + ref[None, :, 1:] * e2[:, None])
    else:
        ref, w = reference_square_rule(order)
        lo = coords.min(axis=1)
        ext = coords.max(axis=1) - lo
        jac = ext[:, 0] * ext[:, 1]
        pts = lo[:, None] + ref[None] * ext[:, None]
    return ref, pts, w[None] * jac[:, None]


def polygon_area(poly) -> float:
    p = np.asarray(poly, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def fan_triangles(poly, min_area: float = 0.0):
    """Fan triangulation from the first vertex, dropping slivers below ``min_area``."""
    p = np.asarray(poly, dtype=float)
    tris = []
    for k in range(1, len(p) - 1):
        tri = np.array([p[0], p[k], p[k + 1]])
        if abs(polygon_area(tri)) > min_area:
            tris.append(tri)
    return tris


def polygon_rule(poly, order: int, min_area: float = 0.0) -> QuadratureRule:
    pts, wts = [], []
    for tri in fan_triangles(poly, min_area):
        r = triangle_rule(tri, order)
        pts.append(r.points)
        wts.append(r.weights)
    if not pts:
        return QuadratureRule(np.zeros((0, 2)), np.zeros(0))
    return QuadratureRule(np.concatenate(pts), np.concatenate(wts))


def cut_element_rule(geom, order: int) -> QuadratureRule:
    """Rule on an interface element split by the line through ``D`` and ``E``.

    Each piece is fan-triangulated; points carry the side tag of their piece.
    Sub-triangles with area below ``1e-14 h^2`` are skipped.
    """
    order = _check_order(order)
    min_area = 1e-14 * geom.h ** 2
    parts = []
    for side, poly in ((-1, geom.sub_minus), (1, geom.sub_plus)):
        r = polygon_rule(poly, order, min_area)
        parts.append((r, np.full(len(r), side, dtype=np.int8)))
    return QuadratureRule(np.concatenate([p[0].points for p in parts]),
                          np.concatenate([p[0].weights for p in parts]),
                          np.concatenate([p[1] for p in parts]))


def edge_rule(a, b, split_points=(), order: int = 4) -> QuadratureRule:
    """Gauss rule on segment ``ab`` split at ``split_points``.

    ``order`` is the polynomial degree integrated exactly on every
    subsegment. ``points`` are physical 2D points; the 1D arclength
    parameter of each point is available via ``arclength_parameters``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    length = float(np.hypot(*(b - a)))
    ts = [0.0, 1.0]
    for p in split_points:
        t = float(np.dot(np.asarray(p, dtype=float) - a, b - a)) / length ** 2
        if 0.0 < t < 1.0:
            ts.append(t)
    ts = np.unique(ts)
    n = max(1, (int(order) + 2) // 2)
    g, gw = gauss_legendre(n)
    t_all, w_all = [], []
    for t0, t1 in zip(ts[:-1], ts[1:]):
        if t1 - t0 <= 1e-15:
            continue
        t_all.append(t0 + (t1 - t0) * g)
        w_all.append((t1 - t0) * length * gw)
    t_all = np.concatenate(t_all)
    return QuadratureRule(a + t_all[:, None] * (b - a), np.concatenate(w_all))


def subdivide_triangle(tri):
    """Split a triangle into four congruent children via edge midpoints."""
    a, b, c = tri
    ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
    return [np.array([a, ab, ca]), np.array([ab, b, bc]),
            np.array([ca, bc, c]), np.array([ab, bc, ca])]


def adaptive_interface_rule(triangles, phi, order: int, depth: int = 4) -> QuadratureRule:
    """Rule refining triangles crossed by the zero set of ``phi``.

    A triangle is refined while the signs of ``phi`` at its vertices and
    centroid are mixed or any vertex lies on the zero set, down to
    ``depth`` levels. Side tags follow the sign of ``phi`` at each point
    (zero counted as ``+``).
    """
    leaves = []
    stack = [(np.asarray(t, dtype=float), 0) for t in triangles]
    while stack:
        tri, lvl = stack.pop()
        if lvl < depth:
            probe = np.vstack([tri, tri.mean(axis=0)])
            vals = phi(probe[:, 0], probe[:, 1])
            scale = np.max(np.abs(vals)) + 1e-300
            mixed = (vals.min() < 0.0 <= vals.max()) or np.min(np.abs(vals)) <= 1e-12 * scale
            if mixed:
                stack.extend((c, lvl + 1) for c in subdivide_triangle(tri))
                continue
        leaves.append(tri)
    if not leaves:
        return QuadratureRule(np.zeros((0, 2)), np.zeros(0), np.zeros(0, dtype=np.int8))
    coords = np.array(leaves)
    _, pts, w = batched_element_points(coords, order)
    pts = pts.reshape(-1, 2)
    sides = np.where(phi(pts[:, 0], pts[:, 1]) < 0.0, -1, 1).astype(np.int8)
    return QuadratureRule(pts, w.ravel(), sides)
