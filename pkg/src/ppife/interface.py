"""Level-set interfaces, element classification and cut-element geometry."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .mesh import Mesh
from .quadrature import polygon_area

# |phi| at or below this is "on the interface" and counts as the + side
ZERO_TOL = 1e-14
SLIVER_FRACTION = 1e-10
# interior samples per edge used to count sign changes
EDGE_SAMPLES = 16

# radius of the circular test interface
MODEL_R0 = np.pi / 6.28


class InterfaceError(ValueError):
    """Base class for interface/mesh compatibility failures."""


class HypothesisViolation(InterfaceError):
    def __init__(self, message, element=None, edge=None):
        super().__init__(message)
        self.element = element
        self.edge = edge


class DegenerateCutError(InterfaceError):
    def __init__(self, message, element=None):
        super().__init__(message)
        self.element = element


@dataclass(frozen=True)
class LevelSetInterface:
    """Interface as the zero set of ``phi``; ``phi < 0`` is the minus side.

    ``phi`` and ``grad_phi`` must accept numpy arrays ``x, y``.
    """

    phi: callable
    grad_phi: callable
    tag: str = "level set"

    def side(self, x, y) -> np.ndarray:
        """``-1`` in the minus region, ``+1`` otherwise (zero counts as ``+``)."""
        v = np.asarray(self.phi(np.asarray(x, float), np.asarray(y, float)))
        return np.where(v < -ZERO_TOL, -1, 1).astype(np.int8)


def circle_interface(r0: float = MODEL_R0, center=(0.0, 0.0)) -> LevelSetInterface:
    """Circle ``(x-cx)^2 + (y-cy)^2 - r0^2``, minus side inside."""
    cx, cy = map(float, center)
    r0 = float(r0)

    def phi(x, y):
        return (x - cx) ** 2 + (y - cy) ** 2 - r0 ** 2

    def grad_phi(x, y):
        return np.stack(np.broadcast_arrays(2.0 * (x - cx), 2.0 * (y - cy)), axis=-1)

    return LevelSetInterface(phi, grad_phi, tag=f"circle r0={r0!r} center=({cx!r},{cy!r})")


def line_interface(normal, offset: float) -> LevelSetInterface:
    """Straight line ``nx*x + ny*y - offset``; minus side where it is negative."""
    nx, ny = map(float, normal)

    def phi(x, y):
        return nx * x + ny * y - offset

    def grad_phi(x, y):
        x, y = np.broadcast_arrays(x, y)
        return np.stack([np.full(x.shape, nx), np.full(y.shape, ny)], axis=-1)

    return LevelSetInterface(phi, grad_phi, tag=f"line n=({nx},{ny}) c={offset}")


@dataclass(frozen=True, eq=False)
class CutElementGeometry:
    """Straight-line partition of one interface element.

    ``sub_minus``/``sub_plus`` are counterclockwise polygons; ``nbar`` is the
    unit normal of the line through ``D`` and ``E`` pointing to the plus side.
    ``minus_vertices``/``plus_vertices`` are local vertex indices.
    """

    element: int
    vertices: np.ndarray
    D: np.ndarray
    E: np.ndarray
    edge_D: int
    edge_E: int
    nbar: np.ndarray
    sub_minus: np.ndarray
    sub_plus: np.ndarray
    minus_vertices: tuple
    plus_vertices: tuple
    h: float

    @property
    def area(self) -> float:
        return polygon_area(self.vertices)

    @property
    def area_minus(self) -> float:
        return polygon_area(self.sub_minus)

    @property
    def area_plus(self) -> float:
        return polygon_area(self.sub_plus)

    def line_side(self, points) -> np.ndarray:
        """Side of the cut line: ``-1``/``+1`` by the sign of ``nbar . (X - D)``."""
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        s = (p - self.D) @ self.nbar
        return np.where(s < 0.0, -1, 1).astype(np.int8)


@dataclass(eq=False)
class HypothesisReport:
    multi_root_edges: list = field(default_factory=list)      # (edge, element, roots)
    same_edge_cuts: list = field(default_factory=list)        # element
    boundary_cut_elements: list = field(default_factory=list)  # element
    slivers: list = field(default_factory=list)               # element

    @property
    def ok(self) -> bool:
        return not (self.multi_root_edges or self.same_edge_cuts
                    or self.boundary_cut_elements)

    def first_violation(self):
        if self.multi_root_edges:
            e, el, n = self.multi_root_edges[0]
            return HypothesisViolation(
                f"edge {e} of element {el} is crossed {n} times by the interface",
                element=el, edge=e)
        if self.same_edge_cuts:
            el = self.same_edge_cuts[0]
            return HypothesisViolation(
                f"interface meets element {el} twice on the same edge", element=el)
        if self.boundary_cut_elements:
            el = self.boundary_cut_elements[0]
            return HypothesisViolation(
                f"boundary element {el} is cut by the interface", element=el)
        return None


@dataclass(eq=False)
class Classification:
    """Result of classifying a mesh against an interface.

    Attributes
    ----------
    interface_elements : sorted int array
    noninterface_elements : sorted int array
    element_side : (n_elements,) int8
        ``-1``/``+1`` for non-interface elements, ``0`` for interface elements.
    vertex_side : (n_nodes,) int8
    geometry : dict
        ``element -> CutElementGeometry`` for every interface element.
    edge_points : dict
        ``edge -> intersection point`` for every edge with a sign change.
    report : HypothesisReport
    """

    interface_elements: np.ndarray
    noninterface_elements: np.ndarray
    element_side: np.ndarray
    vertex_side: np.ndarray
    geometry: dict
    edge_points: dict
    report: HypothesisReport

    @property
    def is_interface(self) -> np.ndarray:
        return self.element_side == 0


def _edge_root(phi, a, b, tol):
    fa = phi(a[0], a[1])
    if abs(fa) <= ZERO_TOL:
        return a.copy()
    fb = phi(b[0], b[1])
    if abs(fb) <= ZERO_TOL:
        return b.copy()

    def g(t):
        p = a + t * (b - a)
        return float(phi(p[0], p[1]))

    t = brentq(g, 0.0, 1.0, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200)
    return a + t * (b - a)


def edge_root(interface: LevelSetInterface, a, b, h=None):
    """Crossing of the interface with segment ``ab`` (endpoints must differ in sign)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    length = float(np.hypot(*(b - a)))
    h = length if h is None else h
    sa, sb = interface.side([a[0], b[0]], [a[1], b[1]])
    if sa == sb:
        raise DegenerateCutError("no sign change along the segment")
    return _edge_root(interface.phi, a, b, 1e-13 * h / length)


def edge_intersections(vertices, interface: LevelSetInterface, h=None):
    """Intersection points of the interface with the edges of one element.

    Returns ``(D, E, edge_D, edge_E)`` with local edge indices ascending.

    Raises
    ------
    DegenerateCutError
        If fewer than two edges change sign.
    HypothesisViolation
        If more than two edges change sign.
    """
    v = np.asarray(vertices, dtype=float)
    nv = len(v)
    if h is None:
        h = float(np.max(np.ptp(v, axis=0)))
    sides = interface.side(v[:, 0], v[:, 1])
    hits = []
    for k in range(nv):
        if sides[k] != sides[(k + 1) % nv]:
            a, b = v[k], v[(k + 1) % nv]
            tol = 1e-13 * h / max(np.hypot(*(b - a)), 1e-300)
            hits.append((k, _edge_root(interface.phi, a, b, tol)))
    if len(hits) < 2:
        raise DegenerateCutError("interface does not cross two edges of the element")
    if len(hits) > 2:
        raise HypothesisViolation(f"interface crosses {len(hits)} edges of the element")
    (kD, D), (kE, E) = hits
    return D, E, kD, kE


def line_partition(vertices, D, E, edge_D: int, edge_E: int, interface: LevelSetInterface,
                   element: int = -1, h=None) -> CutElementGeometry:
    """Split an element by segment ``DE`` into two counterclockwise polygons.

    Each polygon is labelled by the vertex signs of the original element
    vertices it contains; the centroid sign is used only if a polygon
    holds no original vertex.
    """
    v = np.asarray(vertices, dtype=float)
    D = np.asarray(D, dtype=float)
    E = np.asarray(E, dtype=float)
    nv = len(v)
    if h is None:
        h = float(np.max(np.ptp(v, axis=0)))
    if np.hypot(*(E - D)) < 1e-12 * h:
        raise DegenerateCutError("cut points coincide", element=element)
    if edge_D > edge_E:
        D, E, edge_D, edge_E = E, D, edge_E, edge_D

    # walk the boundary: D sits on edge kD (after vertex kD), E on edge kE
    first = [D] + [v[j] for j in range(edge_D + 1, edge_E + 1)] + [E]
    first_idx = list(range(edge_D + 1, edge_E + 1))
    second = [E] + [v[j % nv] for j in range(edge_E + 1, edge_D + nv + 1)] + [D]
    second_idx = [j % nv for j in range(edge_E + 1, edge_D + nv + 1)]
    first = _dedupe(first, h)
    second = _dedupe(second, h)

    vsides = interface.side(v[:, 0], v[:, 1])

    def label(poly, idx):
        inner = [j for j in idx
                 if np.hypot(*(v[j] - D)) > 1e-12 * h and np.hypot(*(v[j] - E)) > 1e-12 * h]
        if inner:
            s = vsides[inner]
            return -1 if np.sum(s < 0) >= np.sum(s > 0) else 1
        c = np.mean(poly, axis=0)
        return int(interface.side(c[0], c[1]))

    s1, s2 = label(first, first_idx), label(second, second_idx)
    if s1 == s2:
        raise DegenerateCutError("both pieces fall on the same side", element=element)
    minus, plus = (first, second) if s1 < 0 else (second, first)

    t = E - D
    n = np.array([t[1], -t[0]]) / np.hypot(*t)
    pc = np.mean(plus, axis=0)
    if np.dot(pc - D, n) < 0:
        n = -n
    minus_vertices = tuple(int(j) for j in range(nv) if vsides[j] < 0)
    plus_vertices = tuple(int(j) for j in range(nv) if vsides[j] > 0)
    return CutElementGeometry(element=element, vertices=v, D=D, E=E, edge_D=edge_D,
                              edge_E=edge_E, nbar=n, sub_minus=np.array(minus),
                              sub_plus=np.array(plus), minus_vertices=minus_vertices,
                              plus_vertices=plus_vertices, h=h)


def _dedupe(points, h):
    out = [points[0]]
    for p in points[1:]:
        if np.hypot(*(p - out[-1])) > 1e-12 * h:
            out.append(p)
    if len(out) > 1 and np.hypot(*(out[0] - out[-1])) <= 1e-12 * h:
        out.pop()
    return out


def classify_elements(mesh: Mesh, interface: LevelSetInterface,
                      strict: bool = True) -> Classification:
    """Classify every element as interface or non-interface.

    An element is an interface element when its vertex signs are mixed.
    Per-edge sign counting on ``EDGE_SAMPLES`` interior samples detects edges
    crossed more than once. Interface elements whose smaller piece has an
    area fraction below ``1e-10`` are demoted to non-interface elements on
    the majority side.

    Raises
    ------
    HypothesisViolation
        With ``strict=True``, on the first violated mesh hypothesis.
    """
    nodes = mesh.nodes
    vside = interface.side(nodes[:, 0], nodes[:, 1])
    elem_vs = vside[mesh.elements]
    mixed = elem_vs.min(axis=1) != elem_vs.max(axis=1)
    report = HypothesisReport()

    # multiple crossings of one edge
    t = np.linspace(0.0, 1.0, EDGE_SAMPLES + 2)
    a = nodes[mesh.edges[:, 0]]
    b = nodes[mesh.edges[:, 1]]
    px = a[:, None, 0] + t[None] * (b - a)[:, None, 0]
    py = a[:, None, 1] + t[None] * (b - a)[:, None, 1]
    s = np.where(interface.phi(px, py) < -ZERO_TOL, -1, 1)
    crossings = np.sum(s[:, 1:] != s[:, :-1], axis=1)
    for e in np.nonzero(crossings >= 2)[0]:
        for el in mesh.edge_elements[e]:
            if el >= 0:
                report.multi_root_edges.append((int(e), int(el), int(crossings[e])))
    # an element whose vertices agree but whose edge is crossed twice is cut on one edge
    for e, el, _ in report.multi_root_edges:
        if not mixed[el] and el not in report.same_edge_cuts:
            report.same_edge_cuts.append(el)

    if strict and not report.ok:
        raise report.first_violation()

    element_side = np.where(elem_vs.max(axis=1) < 0, -1, 1).astype(np.int8)
    element_side[mixed] = 0
    geometry, edge_points = {}, {}
    h = mesh.h
    for el in np.nonzero(mixed)[0]:
        el = int(el)
        verts = mesh.nodes[mesh.elements[el]]
        nv = len(verts)
        hits = []
        for k in range(nv):
            if elem_vs[el, k] != elem_vs[el, (k + 1) % nv]:
                ge = int(mesh.element_edges[el, k])
                if ge not in edge_points:
                    # root-find in global edge orientation so neighbours agree
                    n0, n1 = mesh.edges[ge]
                    pa, pb = nodes[n0], nodes[n1]
                    tol = 1e-13 * h / np.hypot(*(pb - pa))
                    edge_points[ge] = _edge_root(interface.phi, pa, pb, tol)
                hits.append((k, edge_points[ge]))
        if len(hits) != 2:
            err = HypothesisViolation(
                f"interface crosses {len(hits)} edges of element {el}", element=el)
            if strict:
                raise err
            report.same_edge_cuts.append(el)
            element_side[el] = _majority(elem_vs[el])
            continue
        (kD, D), (kE, E) = hits
        try:
            geom = line_partition(verts, D, E, kD, kE, interface, element=el, h=h)
        except DegenerateCutError:
            report.slivers.append(el)
            element_side[el] = _majority(elem_vs[el])
            continue
        frac = min(geom.area_minus, geom.area_plus) / geom.area
        if frac < SLIVER_FRACTION:
            report.slivers.append(el)
            element_side[el] = -1 if geom.area_minus > geom.area_plus else 1
            continue
        geometry[el] = geom

    # checked after sliver demotion: touching the interface at a node is fine
    boundary_elements = np.unique(mesh.edge_elements[mesh.is_boundary_edge, 0])
    for el in boundary_elements:
        if int(el) in geometry:
            report.boundary_cut_elements.append(int(el))
            if strict:
                raise report.first_violation()

    iface = np.array(sorted(geometry), dtype=np.int64)
    element_side[iface] = 0
    non = np.nonzero(element_side != 0)[0]
    return Classification(interface_elements=iface, noninterface_elements=non,
                          element_side=element_side, vertex_side=vside,
                          geometry=geometry, edge_points=edge_points, report=report)


def _majority(signs):
    return -1 if np.sum(signs < 0) > np.sum(signs > 0) else 1


def interface_edges(mesh: Mesh, classification: Classification) -> np.ndarray:
    """Interior edges with at least one adjacent interface element, ascending."""
    ee = mesh.edge_elements
    interior = ee[:, 1] >= 0
    is_if = classification.is_interface
    touch = interior & (is_if[ee[:, 0]] | is_if[np.where(ee[:, 1] >= 0, ee[:, 1], 0)])
    return np.nonzero(touch)[0]
