"""Standard and immersed (IFE) linear/bilinear nodal shape functions.

Local polynomials are written in shifted, scaled coordinates
``xi = (x - xc)/s, eta = (y - yc)/s`` with ``(xc, yc)`` the element centroid
and ``s`` its side length, using the monomials ``(xi, eta, 1[, xi*eta])``.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .interface import (Classification, CutElementGeometry, LevelSetInterface,
                        classify_elements)
from .mesh import Mesh

COND_LIMIT = 1e12
INSIDE_TOL = 1e-12


class IllConditionedCutError(ArithmeticError):
    def __init__(self, message, element=None, cond=None):
        super().__init__(message)
        self.element = element
        self.cond = cond


def _frame(vertices):
    v = np.asarray(vertices, dtype=float)
    center = v.mean(axis=0)
    scale = float(np.max(np.ptp(v, axis=0)))
    return v, center, scale


def _monomials(xi, eta, ncoef):
    cols = [xi, eta, np.ones_like(xi)]
    if ncoef == 4:
        cols.append(xi * eta)
    return np.stack(cols, axis=-1)


def _monomial_grads(xi, eta, ncoef):
    """d/dxi and d/deta of each monomial, shape ``(..., ncoef, 2)``."""
    one, zero = np.ones_like(xi), np.zeros_like(xi)
    gx = [one, zero, zero]
    gy = [zero, one, zero]
    if ncoef == 4:
        gx.append(eta)
        gy.append(xi)
    return np.stack([np.stack(gx, axis=-1), np.stack(gy, axis=-1)], axis=-1)


class _ElementBasisBase:
    vertices: np.ndarray
    center: np.ndarray
    scale: float

    @property
    def n_shapes(self) -> int:
        return len(self.vertices)

    @property
    def ncoef(self) -> int:
        return 3 if len(self.vertices) == 3 else 4

    def local_coords(self, points):
        p = (np.asarray(points, dtype=float).reshape(-1, 2) - self.center) / self.scale
        return p[:, 0], p[:, 1]

    def contains(self, point, tol=INSIDE_TOL) -> bool:
        p = np.asarray(point, dtype=float)
        v = self.vertices
        nv = len(v)
        for k in range(nv):
            a, b = v[k], v[(k + 1) % nv]
            cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
            if cross < -tol * self.scale ** 2:
                return False
        return True


class StandardBasis(_ElementBasisBase):
    """Lagrange linear (triangle) or bilinear (rectangle) nodal shapes."""

    is_ife = False

    def __init__(self, vertices, beta: float = 1.0, element: int = -1, side: int = 1):
        self.vertices, self.center, self.scale = _frame(vertices)
        self.element = element
        self.beta = float(beta)
        self.side = side
        xi, eta = self.local_coords(self.vertices)
        V = _monomials(xi, eta, self.ncoef)          # rows: vertex, cols: monomial
        self.coef = np.linalg.solve(V, np.eye(self.n_shapes)).T  # (shape, monomial)

    def side_of(self, points):
        return np.zeros(len(np.asarray(points).reshape(-1, 2)), dtype=np.int8)

    def beta_at(self, sides):
        return np.full(np.shape(sides), self.beta)

    def evaluate(self, points, sides=None):
        """Values ``(nv, np)`` and gradients ``(nv, np, 2)`` at ``points``."""
        xi, eta = self.local_coords(points)
        m = _monomials(xi, eta, self.ncoef)
        g = _monomial_grads(xi, eta, self.ncoef) / self.scale
        vals = self.coef @ m.T
        grads = np.einsum("sc,pcd->spd", self.coef, g)
        return vals, grads


class LocalIFEBasis(_ElementBasisBase):
    """Piecewise linear/bilinear IFE nodal shapes on one interface element.

    ``coef[i, s]`` holds the monomial coefficients of shape ``i`` on side
    ``s`` (0 for minus, 1 for plus) in local scaled coordinates.
    """

    is_ife = True

    def __init__(self, geom: CutElementGeometry, beta_minus: float, beta_plus: float,
                 coef: np.ndarray, center, scale, cond: float):
        self.geom = geom
        self.element = geom.element
        self.vertices = np.asarray(geom.vertices, dtype=float)
        self.center = np.asarray(center, dtype=float)
        self.scale = float(scale)
        self.beta_minus = float(beta_minus)
        self.beta_plus = float(beta_plus)
        self.coef = coef
        self.cond = cond

    def side_of(self, points):
        return self.geom.line_side(points)

    def beta_at(self, sides):
        return np.where(np.asarray(sides) < 0, self.beta_minus, self.beta_plus)

    def evaluate(self, points, sides=None):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        if sides is None:
            sides = self.side_of(pts)
        sides = np.asarray(sides)
        xi, eta = self.local_coords(pts)
        m = _monomials(xi, eta, self.ncoef)
        g = _monomial_grads(xi, eta, self.ncoef) / self.scale
        c = np.where((sides > 0)[None, :, None], self.coef[:, None, 1, :],
                     self.coef[:, None, 0, :])              # (shape, point, monomial)
        vals = np.einsum("spc,pc->sp", c, m)
        grads = np.einsum("spc,pcd->spd", c, g)
        return vals, grads

    def physical_coefficients(self):
        """Coefficients of ``a x + b y + c [+ d x y]`` per shape and side.

        Returns an array of shape ``(n_shapes, 2, ncoef)``.
        """
        s, (xc, yc) = self.scale, self.center
        a, b, c = self.coef[..., 0], self.coef[..., 1], self.coef[..., 2]
        if self.ncoef == 3:
            return np.stack([a / s, b / s, c - (a * xc + b * yc) / s], axis=-1)
        d = self.coef[..., 3]
        return np.stack([a / s - d * yc / s ** 2, b / s - d * xc / s ** 2,
                         c - (a * xc + b * yc) / s + d * xc * yc / s ** 2,
                         d / s ** 2], axis=-1)

    def flux_jump(self, points=None):
        """``beta+ dphi+/dn - beta- dphi-/dn`` of every shape at ``points`` on the line."""
        if points is None:
            points = np.array([self.geom.D, self.geom.E])
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        n = self.geom.nbar
        _, gm = self.evaluate(pts, np.full(len(pts), -1))
        _, gp = self.evaluate(pts, np.full(len(pts), 1))
        return self.beta_plus * (gp @ n) - self.beta_minus * (gm @ n)


def _ife_system(geom: CutElementGeometry, beta_minus, beta_plus, ncoef):
    v, center, scale = _frame(geom.vertices)
    nv = len(v)
    nun = 6 if ncoef == 3 else 7
    A = np.zeros((nv + 3, nun))
    xi, eta = (v[:, 0] - center[0]) / scale, (v[:, 1] - center[1]) / scale
    mono = _monomials(xi, eta, ncoef)
    minus = set(geom.minus_vertices)
    for j in range(nv):
        off = 0 if j in minus else 3
        A[j, off:off + 3] = mono[j, :3]
        if ncoef == 4:
            A[j, 6] = mono[j, 3]
    for row, P in ((nv, geom.D), (nv + 1, geom.E)):
        m = _monomials(np.array([(P[0] - center[0]) / scale]),
                       np.array([(P[1] - center[1]) / scale]), 3)[0]
        A[row, 0:3] = m
        A[row, 3:6] = -m
    nx, ny = geom.nbar
    frow = np.array([-beta_minus * nx, -beta_minus * ny, 0.0,
                     beta_plus * nx, beta_plus * ny, 0.0])
    if ncoef == 3:
        A[nv + 2] = frow
    else:
        # integrand is linear along DE: exact integral = |DE| * midpoint value
        M = 0.5 * (geom.D + geom.E)
        xm, ym = (M[0] - center[0]) / scale, (M[1] - center[1]) / scale
        length = np.hypot(*(geom.E - geom.D)) / scale
        A[nv + 2, :6] = length * frow
        A[nv + 2, 6] = length * (beta_plus - beta_minus) * (ym * nx + xm * ny)
    return A, center, scale


def _build(geom, beta_minus, beta_plus, ncoef):
    if beta_minus <= 0 or beta_plus <= 0:
        raise ValueError("beta values must be positive")
    A, center, scale = _ife_system(geom, beta_minus, beta_plus, ncoef)
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditionedCutError(
            f"local IFE system of element {geom.element} has condition number {cond:.3e}",
            element=geom.element, cond=cond)
    nv = len(geom.vertices)
    rhs = np.zeros((A.shape[0], nv))
    rhs[:nv, :] = np.eye(nv)
    sol = lu_solve(lu_factor(A), rhs).T      # (shape, unknown)
    coef = np.zeros((nv, 2, ncoef))
    coef[:, 0, :3] = sol[:, 0:3]
    coef[:, 1, :3] = sol[:, 3:6]
    if ncoef == 4:
        coef[:, :, 3] = sol[:, 6:7]
    return LocalIFEBasis(geom, beta_minus, beta_plus, coef, center, scale, cond)


def build_linear_ife_basis(geom: CutElementGeometry, beta_minus: float,
                           beta_plus: float) -> LocalIFEBasis:
    """Linear IFE shapes on a triangular interface element.

    Per shape: three nodal conditions, continuity at ``D`` and ``E`` and a
    pointwise flux condition along the cut line (6x6 system, LU with
    partial pivoting).
    """
    if len(geom.vertices) != 3:
        raise ValueError("linear IFE shapes need a triangular element")
    return _build(geom, beta_minus, beta_plus, 3)


def build_bilinear_ife_basis(geom: CutElementGeometry, beta_minus: float,
                             beta_plus: float) -> LocalIFEBasis:
    """Bilinear IFE shapes on a rectangular interface element.

    The ``xy`` coefficient is shared by both pieces and the flux condition is
    imposed in integral form over segment ``DE`` (7x7 system).
    """
    if len(geom.vertices) != 4:
        raise ValueError("bilinear IFE shapes need a rectangular element")
    return _build(geom, beta_minus, beta_plus, 4)


def build_ife_basis(geom, beta_minus, beta_plus):
    if len(geom.vertices) == 3:
        return build_linear_ife_basis(geom, beta_minus, beta_plus)
    return build_bilinear_ife_basis(geom, beta_minus, beta_plus)


def eval_shape(basis, node_index: int, point, side_hint=None):
    """Value and gradient of one local shape at one point.

    On interface elements the piece is chosen by the side of the cut line;
    ``side_hint`` (``-1``/``+1``) only matters for points on that line.

    Raises
    ------
    ValueError
        If the point is outside the element.
    """
    p = np.asarray(point, dtype=float).reshape(1, 2)
    if not basis.contains(p[0]):
        raise ValueError(f"point {p[0]} lies outside the element")
    sides = None
    if basis.is_ife:
        sides = basis.side_of(p)
        dist = abs(float((p[0] - basis.geom.D) @ basis.geom.nbar))
        if side_hint is not None and dist <= INSIDE_TOL * basis.scale:
            sides = np.array([np.sign(side_hint)], dtype=np.int8)
    vals, grads = basis.evaluate(p, sides)
    return float(vals[node_index, 0]), grads[node_index, 0].copy()


# ----------------------------------------------------------------------------
# bulk standard shapes on the reference elements used by batched quadrature

def reference_shapes(ref, nv):
    """Values ``(q, nv)`` and reference gradients ``(q, nv, 2)``.

    Triangle reference is (0,0),(1,0),(0,1); rectangle reference is
    ``[0,1]^2`` with vertices ordered counterclockwise from the lower left.
    """
    s, t = ref[:, 0], ref[:, 1]
    if nv == 3:
        vals = np.column_stack([1 - s - t, s, t])
        g = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
        grads = np.broadcast_to(g, (len(s), 3, 2)).copy()
    else:
        vals = np.column_stack([(1 - s) * (1 - t), s * (1 - t), s * t, (1 - s) * t])
        grads = np.stack([np.column_stack([-(1 - t), -(1 - s)]),
                          np.column_stack([1 - t, -s]),
                          np.column_stack([t, s]),
                          np.column_stack([-t, 1 - s])], axis=1)
    return vals, grads


def physical_gradients(coords, ref_grads):
    """Map reference gradients to physical ones for batched elements.

    ``coords`` is ``(n, nv, 2)``; returns ``(n, q, nv, 2)``. Rectangles must
    be axis aligned with the first vertex at the lower-left corner.
    """
    nv = coords.shape[1]
    if nv == 3:
        J = np.stack([coords[:, 1] - coords[:, 0], coords[:, 2] - coords[:, 0]], axis=-1)
        Jinv_T = np.linalg.inv(J).transpose(0, 2, 1)
        return np.einsum("nij,qvj->nqvi", Jinv_T, ref_grads)
    ext = coords.max(axis=1) - coords.min(axis=1)
    return ref_grads[None] / ext[:, None, None, :]


# ----------------------------------------------------------------------------

class IFESpace:
    """Global IFE space: one complex DOF per node, IFE shapes on interface elements.

    Parameters
    ----------
    mesh : Mesh
    interface : LevelSetInterface
    beta_minus, beta_plus : float
    classification : Classification, optional
        Computed (strict) if omitted.
    standard : bool
        Use standard shapes everywhere (the continuous nodal space); the
        coefficient ``beta`` still follows the element sides.
    """

    def __init__(self, mesh: Mesh, interface: LevelSetInterface, beta_minus: float,
                 beta_plus: float, classification: Classification | None = None,
                 standard: bool = False):
        if beta_minus <= 0 or beta_plus <= 0:
            raise ValueError("beta values must be positive")
        self.mesh = mesh
        self.interface = interface
        self.beta_minus = float(beta_minus)
        self.beta_plus = float(beta_plus)
        self.classification = (classification if classification is not None
                               else classify_elements(mesh, interface))
        self.standard = standard
        self.bases = {}
        if not standard:
            for el, geom in self.classification.geometry.items():
                self.bases[el] = build_ife_basis(geom, self.beta_minus, self.beta_plus)

    @property
    def n_dofs(self) -> int:
        return self.mesh.n_nodes

    @property
    def interface_elements(self):
        return self.classification.interface_elements

    @property
    def noninterface_elements(self):
        return self.classification.noninterface_elements

    def element_beta(self) -> np.ndarray:
        """Coefficient of every non-interface element (NaN on interface elements)."""
        side = self.classification.element_side
        return np.where(side < 0, self.beta_minus,
                        np.where(side > 0, self.beta_plus, np.nan))

    def local_basis(self, element: int):
        if element in self.bases:
            return self.bases[element]
        side = self.classification.element_side[element]
        verts = self.mesh.nodes[self.mesh.elements[element]]
        if self.standard and side == 0:
            return _StandardOnCut(verts, self.classification.geometry[element],
                                  self.beta_minus, self.beta_plus, element)
        beta = self.beta_minus if side < 0 else self.beta_plus
        return StandardBasis(verts, beta, element, side=-1 if side < 0 else 1)

    def evaluate(self, coefficients, element: int, points, sides=None):
        """Value and gradient of the global function on one element."""
        basis = self.local_basis(element)
        vals, grads = basis.evaluate(points, sides)
        c = np.asarray(coefficients)[self.mesh.elements[element]]
        return c @ vals, np.einsum("s,spd->pd", c, grads)


class _StandardOnCut(StandardBasis):
    """Standard shapes on an interface element with beta split by the cut line."""

    def __init__(self, vertices, geom, beta_minus, beta_plus, element):
        super().__init__(vertices, 1.0, element)
        self.geom = geom
        self.beta_minus = beta_minus
        self.beta_plus = beta_plus

    def side_of(self, points):
        return self.geom.line_side(points)

    def beta_at(self, sides):
        return np.where(np.asarray(sides) < 0, self.beta_minus, self.beta_plus)


def interpolate_ife(u, space: IFESpace) -> np.ndarray:
    """Nodal values of the IFE interpolant of a side-aware function.

    ``u(x, y, side)`` is evaluated at every node with the node's side
    (nodes on the interface count as ``+``).
    """
    nodes = space.mesh.nodes
    side = space.classification.vertex_side
    return np.asarray(u(nodes[:, 0], nodes[:, 1], side), dtype=complex)


def interpolate_nodal(v, mesh: Mesh) -> np.ndarray:
    """Nodal values of the standard Lagrange interpolant of ``v(x, y)``."""
    return np.asarray(v(mesh.nodes[:, 0], mesh.nodes[:, 1]), dtype=complex)
