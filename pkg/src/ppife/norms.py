"""Error norms against side-aware exact solutions and convergence rates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .assembly import ProblemParams, edge_traces
from .basis import IFESpace, physical_gradients, reference_shapes
from .interface import interface_edges
from .quadrature import (adaptive_interface_rule, batched_element_points, cut_element_rule,
                         element_rule, fan_triangles)

NORM_VOLUME_ORDER = 6
NORM_EDGE_ORDER = 8
SUBDIVISION_DEPTH = 4


@dataclass
class ErrorRecord:
    """Errors of one discrete solution.

    ``energy_h``, ``energy_tri_h`` and ``energy_H`` are the three energy
    norms; ``energy_H**2 == energy_tri_h**2 + k**2 * L2**2``.
    """

    N: int
    h: float
    L2: float
    H1semi: float
    energy_h: float
    energy_tri_h: float
    energy_H: float
    dofs: int = 0
    solve_seconds: float = float("nan")
    residual: float = float("nan")
    extra: dict = field(default_factory=dict)

    @property
    def H1(self) -> float:
        return math.hypot(self.L2, self.H1semi)


def _side_grad(problem, x, y, side):
    g = np.asarray(problem.grad(x, y, side))
    return g[..., 0], g[..., 1]


def error_norms(exact, uh, space: IFESpace, params: ProblemParams,
                volume_order: int = NORM_VOLUME_ORDER, edge_order: int = NORM_EDGE_ORDER,
                depth: int = SUBDIVISION_DEPTH) -> ErrorRecord:
    """Norms of ``u - u_h``.

    Parameters
    ----------
    exact : ExactProblem, array or None
        Side-aware exact solution with an explicit gradient. A nodal vector
        is treated as a function of ``space``; ``None`` means zero.
    uh : array
        Nodal coefficients of the discrete function.

    Notes
    -----
    With an exact solution, volume integrals on interface elements resolve
    the curved interface by recursive subdivision, the exact solution is
    evaluated on the side of the level set and ``beta`` follows the true
    interface. For purely discrete differences ``beta`` and the pieces
    follow the cut line, so the result agrees with the assembled quadratic
    forms.
    """
    mesh = space.mesh
    uh = np.asarray(uh, dtype=complex)
    problem = None
    if exact is None:
        coef = -uh
    elif isinstance(exact, np.ndarray) or np.ndim(exact) == 1:
        coef = np.asarray(exact, dtype=complex) - uh
    else:
        if not callable(getattr(exact, "grad", None)):
            raise ValueError("exact solution needs an explicit gradient")
        problem = exact
        coef = -uh
    # with a problem, e = u + (coef-function); otherwise e = coef-function

    beta_m, beta_p = space.beta_minus, space.beta_plus
    iface = space.interface
    l2 = h1 = wstiff = 0.0

    # non-interface elements, vectorized
    non = space.noninterface_elements
    if len(non):
        coords = mesh.element_coords(non)
        ref, pts, w = batched_element_points(coords, volume_order)
        vals, rgrads = reference_shapes(ref, coords.shape[1])
        grads = physical_gradients(coords, rgrads)
        c = coef[mesh.elements[non]]
        ev = np.einsum("na,qa->nq", c, vals)
        eg = np.einsum("na,nqad->nqd", c, grads)
        if problem is not None:
            side = iface.side(pts[..., 0], pts[..., 1])
            ev = ev + problem.u(pts[..., 0], pts[..., 1], side)
            eg = eg + np.asarray(problem.grad(pts[..., 0], pts[..., 1], side))
            beta = np.where(side < 0, beta_m, beta_p)
        else:
            beta = np.repeat(space.element_beta()[non][:, None], pts.shape[1], axis=1)
        gsq = np.sum(np.abs(eg) ** 2, axis=-1)
        l2 += float(np.sum(w * np.abs(ev) ** 2))
        h1 += float(np.sum(w * gsq))
        wstiff += float(np.sum(w * beta * gsq))

    # interface elements
    for el in space.interface_elements:
        el = int(el)
        basis = space.local_basis(el)
        geom = space.classification.geometry[el]
        if problem is not None:
            tris = (fan_triangles(geom.sub_minus, 1e-14 * geom.h ** 2)
                    + fan_triangles(geom.sub_plus, 1e-14 * geom.h ** 2))
            rule = adaptive_interface_rule(tris, iface.phi, volume_order, depth)
            line_sides = geom.line_side(rule.points)
            true_sides = rule.sides
        else:
            rule = cut_element_rule(geom, volume_order)
            line_sides = true_sides = rule.sides
        vals, grads = basis.evaluate(rule.points, line_sides)
        c = coef[mesh.elements[el]]
        ev = c @ vals
        eg = np.einsum("a,aqd->qd", c, grads)
        if problem is not None:
            x, y = rule.points[:, 0], rule.points[:, 1]
            ev = ev + problem.u(x, y, true_sides)
            eg = eg + np.asarray(problem.grad(x, y, true_sides))
        beta = np.where(true_sides < 0, beta_m, beta_p)
        gsq = np.sum(np.abs(eg) ** 2, axis=-1)
        l2 += float(np.sum(rule.weights * np.abs(ev) ** 2))
        h1 += float(np.sum(rule.weights * gsq))
        wstiff += float(np.sum(rule.weights * beta * gsq))

    # interior interface edges
    jump_sq = flux_sq = 0.0
    sigma0 = params.sigma0
    for e in interface_edges(mesh, space.classification):
        rule, dofs, jump, flux, normal = edge_traces(space, int(e), edge_order)
        length = float(np.sum(rule.weights))
        c = coef[dofs]
        ej = c @ jump
        ef = c @ flux
        if problem is not None:
            x, y = rule.points[:, 0], rule.points[:, 1]
            side = iface.side(x, y)
            gx, gy = _side_grad(problem, x, y, side)
            beta = np.where(side < 0, beta_m, beta_p)
            ef = ef + beta * (gx * normal[0] + gy * normal[1])
        jump_sq += sigma0 / length * float(np.sum(rule.weights * np.abs(ej) ** 2))
        if sigma0 > 0:
            flux_sq += length / sigma0 * float(np.sum(rule.weights * np.abs(ef) ** 2))

    k = params.k
    e_h2 = wstiff + jump_sq
    e_tri2 = e_h2 + flux_sq
    e_H2 = e_tri2 + k ** 2 * l2
    return ErrorRecord(N=mesh.N, h=mesh.h, L2=math.sqrt(l2), H1semi=math.sqrt(h1),
                       energy_h=math.sqrt(e_h2), energy_tri_h=math.sqrt(e_tri2),
                       energy_H=math.sqrt(e_H2), dofs=mesh.n_nodes,
                       extra={"weighted_stiffness": wstiff, "jump": jump_sq,
                              "flux": flux_sq})


def discrete_energy(system, coefficients) -> dict:
    """Squared norms of a discrete function from the assembled quadratic forms."""
    c = np.asarray(coefficients, dtype=complex)

    def q(Mat):
        return float(np.real(np.vdot(c, Mat @ c)))

    stiff, jump, flux, mass = (q(system.stiffness), q(system.penalty),
                               q(system.flux_norm), q(system.mass))
    e_h2 = stiff + jump
    return {"L2": mass, "weighted_stiffness": stiff, "jump": jump, "flux": flux,
            "energy_h": e_h2, "energy_tri_h": e_h2 + flux,
            "energy_H": e_h2 + flux + system.k ** 2 * mass}


RATE_FIELDS = ("L2", "H1semi", "energy_h", "energy_tri_h", "energy_H")


def convergence_rates(records, fields=RATE_FIELDS):
    """``log2(err_{N/2} / err_N)`` per norm; the first row is ``None``.

    Raises
    ------
    ValueError
        If consecutive ``N`` do not double.
    """
    records = list(records)
    for prev, cur in zip(records[:-1], records[1:]):
        if cur.N != 2 * prev.N:
            raise ValueError(f"N sequence must double, got {prev.N} -> {cur.N}")
    table = []
    for i, rec in enumerate(records):
        row = {}
        for name in fields:
            if i == 0:
                row[name] = None
            else:
                a, b = getattr(records[i - 1], name), getattr(rec, name)
                row[name] = rate(a, b)
        table.append(row)
    return table


def rate(coarse_error: float, fine_error: float) -> float:
    """Observed order from errors on meshes ``h`` and ``h/2``."""
    return math.log2(coarse_error / fine_error)
