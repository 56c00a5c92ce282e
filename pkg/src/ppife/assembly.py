"""Assembly of the symmetric partially penalized IFE Helmholtz system.

The discrete operator is split into real sparse pieces so that the pieces
can be reused by the energy norms::

    A = K + C + 1j*P - k**2 * M + 1j*k*B

with ``K`` the weighted stiffness, ``C`` the symmetric flux-consistency
terms, ``P`` the jump penalty, ``M`` the mass and ``B`` the boundary mass.
``F`` (the edge flux-average Gram matrix) is assembled alongside; it only
enters the energy norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .basis import IFESpace, physical_gradients, reference_shapes
from .interface import interface_edges
from .quadrature import (QuadratureRule, batched_element_points, cut_element_rule,
                         edge_rule, element_rule, gauss_legendre)

DEFAULT_VOLUME_ORDER = 4
DEFAULT_EDGE_ORDER = 4


@dataclass
class ProblemParams:
    """Physical and discretization parameters.

    ``f(x, y, side)`` is the complex source, ``g(x, y, nx, ny)`` the complex
    boundary datum (``(nx, ny)`` the outward unit normal). ``sigma0``
    defaults to ``30 * max(beta_minus, beta_plus)``.
    """

    k: float
    beta_minus: float
    beta_plus: float
    f: callable = None
    g: callable = None
    sigma0: float | None = None
    volume_order: int = DEFAULT_VOLUME_ORDER
    edge_order: int = DEFAULT_EDGE_ORDER

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"wave number must be positive, got {self.k!r}")
        if not (self.beta_minus > 0 and self.beta_plus > 0):
            raise ValueError("beta values must be positive")
        if self.sigma0 is None:
            self.sigma0 = 30.0 * max(self.beta_minus, self.beta_plus)
        if self.sigma0 < 0:
            raise ValueError("sigma0 must be nonnegative")


@dataclass
class LocalContribution:
    stiffness: np.ndarray
    mass: np.ndarray
    load: np.ndarray

    def matrix(self, k):
        return self.stiffness - k ** 2 * self.mass


@dataclass
class EdgeBlock:
    """Coupling of the union ``dofs`` of the two elements sharing an edge."""

    edge: int
    dofs: np.ndarray
    consistency: np.ndarray
    penalty: np.ndarray
    flux_norm: np.ndarray
    normal: np.ndarray

    def matrix(self):
        return self.consistency + 1j * self.penalty


@dataclass(eq=False)
class ComplexSparseSystem:
    """Assembled complex-symmetric system with its real building blocks."""

    A: sp.csr_matrix
    b: np.ndarray
    k: float
    sigma0: float
    stiffness: sp.csr_matrix
    consistency: sp.csr_matrix
    penalty: sp.csr_matrix
    flux_norm: sp.csr_matrix
    mass: sp.csr_matrix
    boundary_mass: sp.csr_matrix
    load_volume: np.ndarray
    load_boundary: np.ndarray
    edges: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def dimension(self) -> int:
        return self.A.shape[0]

    @property
    def a_h(self):
        """Matrix of the interior form ``K + C + iP``."""
        return (self.stiffness + self.consistency).astype(complex) + 1j * self.penalty

    def symmetry_defect(self) -> float:
        d = (self.A - self.A.T).tocoo()
        return float(np.max(np.abs(d.data))) if d.nnz else 0.0


class _Triplets:
    def __init__(self):
        self.rows, self.cols, self.vals = [], [], []

    def add(self, dofs, block):
        dofs = np.asarray(dofs)
        self.rows.append(np.repeat(dofs, len(dofs)))
        self.cols.append(np.tile(dofs, len(dofs)))
        self.vals.append(np.asarray(block).ravel())

    def add_batched(self, dofs, blocks):
        n, nv = dofs.shape
        self.rows.append(np.repeat(dofs, nv, axis=1).ravel())
        self.cols.append(np.tile(dofs, (1, nv)).ravel())
        self.vals.append(blocks.reshape(n, -1).ravel())

    def tocsr(self, n):
        if not self.rows:
            return sp.csr_matrix((n, n))
        m = sp.coo_matrix((np.concatenate(self.vals),
                           (np.concatenate(self.rows), np.concatenate(self.cols))),
                          shape=(n, n))
        return m.tocsr()


def element_contribution(basis, params: ProblemParams, rule: QuadratureRule | None = None,
                         interface=None) -> LocalContribution:
    """Local stiffness, mass and load of one element.

    On interface elements the rule must carry side tags (see
    ``cut_element_rule``); shapes and ``beta`` follow the cut line. The
    source is evaluated on the side given by ``interface`` when supplied,
    otherwise on the rule's side tags.
    """
    if rule is None:
        if getattr(basis, "geom", None) is not None:
            rule = cut_element_rule(basis.geom, params.volume_order)
        else:
            rule = element_rule(basis.vertices, params.volume_order)
    sides = rule.sides if rule.sides is not None else basis.side_of(rule.points)
    if basis.is_ife and rule.sides is None:
        raise ValueError("interface elements need a side-tagged cut rule")
    vals, grads = basis.evaluate(rule.points, sides)
    wb = rule.weights * basis.beta_at(sides)
    K = np.einsum("q,iqd,jqd->ij", wb, grads, grads)
    M = np.einsum("q,iq,jq->ij", rule.weights, vals, vals)
    load = np.zeros(basis.n_shapes, dtype=complex)
    if params.f is not None:
        if interface is not None:
            fs = interface.side(rule.points[:, 0], rule.points[:, 1])
        elif rule.sides is not None:
            fs = rule.sides
        else:
            fs = np.full(len(rule), getattr(basis, "side", 1))
        fv = params.f(rule.points[:, 0], rule.points[:, 1], fs)
        load = vals @ (rule.weights * fv)
    return LocalContribution(K, M, load)


def edge_normal(mesh, edge: int) -> np.ndarray:
    """Unit normal of an interior edge pointing from its lower to its higher element."""
    n0, n1 = mesh.edges[edge]
    a, b = mesh.nodes[n0], mesh.nodes[n1]
    t = b - a
    n = np.array([t[1], -t[0]]) / np.hypot(*t)
    c1 = mesh.nodes[mesh.elements[mesh.edge_elements[edge, 0]]].mean(axis=0)
    if np.dot(0.5 * (a + b) - c1, n) < 0:
        n = -n
    return n


def edge_traces(space: IFESpace, edge: int, order: int = DEFAULT_EDGE_ORDER):
    """Quadrature on an interior edge and the traces of both elements' shapes.

    Returns ``(rule, dofs, jump, avg_flux, normal)`` where ``jump[a]`` and
    ``avg_flux[a]`` hold ``[phi_a]`` and ``{beta grad phi_a . n}`` at the
    quadrature points for every global shape ``a`` in ``dofs``.
    """
    mesh = space.mesh
    T1, T2 = mesh.edge_elements[edge]
    if T2 < 0:
        raise ValueError(f"edge {edge} is on the boundary")
    n0, n1 = mesh.edges[edge]
    split = []
    if edge in space.classification.edge_points:
        split.append(space.classification.edge_points[edge])
    rule = edge_rule(mesh.nodes[n0], mesh.nodes[n1], split, order)
    normal = edge_normal(mesh, edge)
    nodes1, nodes2 = mesh.elements[T1], mesh.elements[T2]
    dofs = list(nodes1) + [a for a in nodes2 if a not in set(nodes1)]
    pos = {a: i for i, a in enumerate(dofs)}
    nq = len(rule)
    jump = np.zeros((len(dofs), nq))
    flux = np.zeros((len(dofs), nq))
    for sign, T, nodes in ((1.0, T1, nodes1), (-1.0, T2, nodes2)):
        basis = space.local_basis(T)
        sides = basis.side_of(rule.points)
        vals, grads = basis.evaluate(rule.points, sides)
        beta = basis.beta_at(sides)
        for loc, a in enumerate(nodes):
            jump[pos[a]] += sign * vals[loc]
            flux[pos[a]] += 0.5 * beta * (grads[loc] @ normal)
    return rule, np.array(dofs), jump, flux, normal


def interface_edge_contribution(space: IFESpace, edge: int, params: ProblemParams) -> EdgeBlock:
    """Consistency, penalty and flux-norm blocks of one interior interface edge.

    With ``[v] = v|T1 - v|T2`` and ``n`` pointing from ``T1`` to ``T2``:

    - consistency ``-int {b grad phi_j . n}[phi_i] - int {b grad phi_i . n}[phi_j]``
    - penalty ``(sigma0/|e|) int [phi_i][phi_j]`` (enters ``A`` times ``1j``)
    - flux norm ``(|e|/sigma0) int {b grad phi_i . n}{b grad phi_j . n}``
    """
    rule, dofs, jump, flux, normal = edge_traces(space, edge, params.edge_order)
    w = rule.weights
    length = float(np.sum(w))
    cross = (flux * w) @ jump.T          # [i, j] = int {flux_i}[phi_j]
    consistency = -(cross + cross.T)
    penalty = (params.sigma0 / length) * ((jump * w) @ jump.T)
    if params.sigma0 > 0:
        flux_norm = (length / params.sigma0) * ((flux * w) @ flux.T)
    else:
        flux_norm = np.zeros_like(penalty)
    return EdgeBlock(edge, dofs, consistency, penalty, flux_norm, normal)


def boundary_contribution(mesh, params: ProblemParams, edges=None):
    """Boundary mass ``int phi_i phi_j`` and load ``int g phi_i`` on boundary edges.

    Returns ``(edge_nodes (n, 2), mass_blocks (n, 2, 2), load_blocks (n, 2))``.
    The matrix contribution to ``A`` is ``1j * k * mass``.
    """
    bnd = np.nonzero(mesh.is_boundary_edge)[0]
    normals = mesh.boundary_outward_normals()
    if edges is not None:
        keep = np.isin(bnd, edges)
        bnd, normals = bnd[keep], normals[keep]
    ends = mesh.edges[bnd]
    a, b = mesh.nodes[ends[:, 0]], mesh.nodes[ends[:, 1]]
    L = np.hypot(*(b - a).T)
    n = max(1, (params.edge_order + 2) // 2)
    t, w = gauss_legendre(n)
    phi = np.column_stack([1 - t, t])                    # (q, 2)
    mass = L[:, None, None] * np.einsum("q,qa,qb->ab", w, phi, phi)[None]
    load = np.zeros((len(bnd), 2), dtype=complex)
    if params.g is not None:
        pts = a[:, None, :] + t[None, :, None] * (b - a)[:, None, :]
        nx = np.repeat(normals[:, :1], len(t), axis=1)
        ny = np.repeat(normals[:, 1:], len(t), axis=1)
        gv = params.g(pts[..., 0], pts[..., 1], nx, ny)
        load = L[:, None] * np.einsum("q,nq,qa->na", w, gv, phi)
    return ends, mass, load


def _bulk_elements(space: IFESpace, params: ProblemParams, elements):
    mesh = space.mesh
    coords = mesh.element_coords(elements)
    ref, pts, w = batched_element_points(coords, params.volume_order)
    vals, rgrads = reference_shapes(ref, coords.shape[1])
    grads = physical_gradients(coords, rgrads)
    beta = space.element_beta()[elements]
    K = np.einsum("nq,nqad,nqbd->nab", w * beta[:, None], grads, grads)
    M = np.einsum("nq,qa,qb->nab", w, vals, vals)
    load = None
    if params.f is not None:
        side = np.repeat(space.classification.element_side[elements][:, None],
                         pts.shape[1], axis=1)
        fv = params.f(pts[..., 0], pts[..., 1], side)
        load = np.einsum("nq,nq,qa->na", w, fv, vals)
    return K, M, load


def assemble(space: IFESpace, params: ProblemParams) -> ComplexSparseSystem:
    """Assemble ``A`` and ``b`` of the symmetric PPIFE scheme.

    Elements are processed in ascending order (non-interface elements in
    one vectorized batch), then interior interface edges, then boundary
    edges.
    """
    mesh = space.mesh
    n = mesh.n_nodes
    if (abs(space.beta_minus - params.beta_minus) > 0
            or abs(space.beta_plus - params.beta_plus) > 0):
        raise ValueError("space and params disagree on beta")
    Kt, Mt, Ct, Pt, Ft, Bt = (_Triplets() for _ in range(6))
    load = np.zeros(n, dtype=complex)

    non = space.noninterface_elements
    if len(non):
        K, M, lv = _bulk_elements(space, params, non)
        dofs = mesh.elements[non]
        Kt.add_batched(dofs, K)
        Mt.add_batched(dofs, M)
        if lv is not None:
            np.add.at(load, dofs.ravel(), lv.ravel())

    for el in space.interface_elements:
        basis = space.local_basis(int(el))
        if basis.is_ife:
            rule = cut_element_rule(basis.geom, params.volume_order)
        else:
            rule = element_rule(basis.vertices, params.volume_order)
        contrib = element_contribution(basis, params, rule, interface=space.interface)
        dofs = mesh.elements[el]
        Kt.add(dofs, contrib.stiffness)
        Mt.add(dofs, contrib.mass)
        np.add.at(load, dofs, contrib.load)

    edges = interface_edges(mesh, space.classification)
    for e in edges:
        blk = interface_edge_contribution(space, int(e), params)
        Ct.add(blk.dofs, blk.consistency)
        Pt.add(blk.dofs, blk.penalty)
        Ft.add(blk.dofs, blk.flux_norm)

    ends, bmass, bload = boundary_contribution(mesh, params)
    Bt.add_batched(ends, bmass)
    load_b = np.zeros(n, dtype=complex)
    np.add.at(load_b, ends.ravel(), bload.ravel())

    K, M, C, P, F, B = (t.tocsr(n) for t in (Kt, Mt, Ct, Pt, Ft, Bt))
    k = params.k
    A = ((K + C).astype(complex) + 1j * P - k ** 2 * M + 1j * k * B).tocsr()
    A.sum_duplicates()
    return ComplexSparseSystem(A=A, b=load + load_b, k=k, sigma0=params.sigma0,
                               stiffness=K, consistency=C, penalty=P, flux_norm=F,
                               mass=M, boundary_mass=B, load_volume=load,
                               load_boundary=load_b, edges=edges)


def dump_matrix(system: ComplexSparseSystem, path) -> None:
    """Write ``A`` as ``row col re im`` lines (0-based), sorted by row then column."""
    coo = system.A.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w") as fh:
        fh.write(f"# {system.dimension} {system.dimension} {coo.nnz}\n")
        for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{r} {c} {v.real:.17g} {v.imag:.17g}\n")
