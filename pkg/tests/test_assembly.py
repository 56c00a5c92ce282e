import numpy as np
import pytest

from ppife.assembly import (ProblemParams, assemble, boundary_contribution, dump_matrix,
                            element_contribution, interface_edge_contribution)
from ppife.basis import IFESpace, StandardBasis
from ppife.interface import circle_interface, interface_edges
from ppife.mesh import build_cartesian_mesh
from ppife.problems import polynomial_problem, radial_alpha
from ppife.quadrature import cut_element_rule
from ppife.solver import solve_direct
from oracles import UNIT_TRIANGLE, garding_fit, garding_samples
from reference_fem import assemble_reference


@pytest.fixture(scope="module")
def model_space():
    mesh = build_cartesian_mesh((-1, 1, -1, 1), 10, "tri")
    return IFESpace(mesh, circle_interface(), 1.0, 10.0)


@pytest.fixture(scope="module")
def model_system(model_space):
    prob = radial_alpha()
    return assemble(model_space, ProblemParams(10.0, 1.0, 10.0, prob.f, prob.g))


def test_p1_stiffness_unit_triangle():
    params = ProblemParams(1.0, 1.0, 1.0)
    loc = element_contribution(StandardBasis(UNIT_TRIANGLE), params)
    expected = [[1, -0.5, -0.5], [-0.5, 0.5, 0], [-0.5, 0, 0.5]]
    assert np.allclose(loc.stiffness, expected, atol=1e-14)
    assert np.allclose(loc.mass, (np.ones((3, 3)) + np.eye(3)) / 24, atol=1e-15)


def test_equal_beta_interface_element_matches_standard():
    mesh = build_cartesian_mesh((-1, 1, -1, 1), 10, "tri")
    space = IFESpace(mesh, circle_interface(), 2.0, 2.0)
    params = ProblemParams(3.0, 2.0, 2.0)
    for el in space.interface_elements[:10]:
        basis = space.local_basis(int(el))
        ife = element_contribution(basis, params, cut_element_rule(basis.geom, 4))
        std = element_contribution(StandardBasis(basis.vertices, 2.0), params)
        assert np.allclose(ife.matrix(3.0), std.matrix(3.0), atol=1e-12)


def test_local_matrices_symmetric(model_space):
    params = ProblemParams(10.0, 1.0, 10.0)
    for el in model_space.interface_elements:
        M = element_contribution(model_space.local_basis(int(el)), params).matrix(10.0)
        assert np.abs(M - M.T).max() <= 1e-13


def test_global_symmetry_and_imaginary_penalty(model_system):
    s = model_system
    assert s.symmetry_defect() <= 1e-12
    assert np.abs((s.penalty - s.penalty.T).toarray()).max() <= 1e-12
    # the only imaginary parts of A come from the penalty and the boundary mass
    imag = s.A.imag.toarray()
    assert np.allclose(imag, (s.penalty + s.k * s.boundary_mass).toarray(), atol=1e-12)
    real = s.A.real.toarray()
    expected = (s.stiffness + s.consistency - s.k ** 2 * s.mass).toarray()
    assert np.allclose(real, expected, atol=1e-12)


def test_edges_only_near_interface_elements(model_space, model_system):
    mesh = model_space.mesh
    is_if = model_space.classification.is_interface
    for e in model_system.edges:
        assert any(is_if[t] for t in mesh.edge_elements[e] if t >= 0)


def test_uncut_edge_has_no_jump(model_space):
    # edges of interface elements that the interface does not cross carry
    # continuous traces, so only the consistency block survives
    mesh = model_space.mesh
    params = ProblemParams(10.0, 1.0, 10.0)
    crossed = set(model_space.classification.edge_points)
    seen = 0
    for e in interface_edges(mesh, model_space.classification):
        blk = interface_edge_contribution(model_space, int(e), params)
        if int(e) not in crossed:
            assert np.abs(blk.penalty).max() <= 1e-12 * params.sigma0
            seen += 1
        assert np.abs(blk.consistency - blk.consistency.T).max() <= 1e-12
    assert seen > 0


def test_constants_annihilated_by_edge_terms(model_system):
    # IFE shapes sum to one, so the constant function has no jumps and no flux
    one = np.ones(model_system.dimension)
    assert np.abs(model_system.penalty @ one).max() <= 1e-10
    assert np.abs(model_system.consistency @ one).max() <= 1e-10
    assert np.abs(model_system.stiffness @ one).max() <= 1e-10


def _midpoint_edge_block(space, edge, sigma0, n):
    """Edge integrands by composite midpoint on each piece of the split edge."""
    mesh = space.mesh
    T1, T2 = mesh.edge_elements[edge]
    a, b = mesh.nodes[mesh.edges[edge]]
    L = np.hypot(*(b - a))
    tang = (b - a) / L
    normal = np.array([tang[1], -tang[0]])
    if normal @ (0.5 * (a + b) - mesh.nodes[mesh.elements[T1]].mean(axis=0)) < 0:
        normal = -normal
    ts = [0.0, 1.0]
    if edge in space.classification.edge_points:
        p = space.classification.edge_points[edge]
        ts.insert(1, float((p - a) @ (b - a)) / L ** 2)
    tq, wq = [], []
    for t0, t1 in zip(ts[:-1], ts[1:]):
        tq.append(t0 + (t1 - t0) * (np.arange(n) + 0.5) / n)
        wq.append(np.full(n, (t1 - t0) * L / n))
    tq, wq = np.concatenate(tq), np.concatenate(wq)
    pts = a + tq[:, None] * (b - a)
    dofs = list(mesh.elements[T1]) + [v for v in mesh.elements[T2] if v not in mesh.elements[T1]]
    jump = np.zeros((len(dofs), len(tq)))
    flux = np.zeros((len(dofs), len(tq)))
    for sign, T in ((1.0, T1), (-1.0, T2)):
        basis = space.local_basis(int(T))
        if basis.is_ife:
            coef = basis.physical_coefficients()
            side = np.where((pts - basis.geom.D) @ basis.geom.nbar < 0, 0, 1)
            beta = np.where(side == 0, space.beta_minus, space.beta_plus)
        else:
            # standard P1 shapes through the vertex values
            V = np.column_stack([basis.vertices, np.ones(3)])
            c = np.linalg.solve(V, np.eye(3)).T
            coef = np.repeat(c[:, None, :], 2, axis=1)
            side = np.zeros(len(tq), dtype=int)
            beta = np.full(len(tq), basis.beta)
        for loc, node in enumerate(mesh.elements[T]):
            cs = coef[loc, side]                          # (q, 3)
            val = cs[:, 0] * pts[:, 0] + cs[:, 1] * pts[:, 1] + cs[:, 2]
            dn = cs[:, 0] * normal[0] + cs[:, 1] * normal[1]
            jump[dofs.index(node)] += sign * val
            flux[dofs.index(node)] += 0.5 * beta * dn
    cross = (flux * wq) @ jump.T
    return np.array(dofs), -(cross + cross.T), sigma0 / L * (jump * wq) @ jump.T


def test_edge_block_against_brute_force(model_space):
    params = ProblemParams(10.0, 1.0, 10.0)
    mesh = model_space.mesh
    for e in map(int, interface_edges(mesh, model_space.classification)):
        blk = interface_edge_contribution(model_space, e, params)
        d1, c1, p1 = _midpoint_edge_block(model_space, e, params.sigma0, 200)
        _, c2, p2 = _midpoint_edge_block(model_space, e, params.sigma0, 400)
        # one Richardson step removes the h^2 term of the midpoint rule
        cons, pen = (4 * c2 - c1) / 3, (4 * p2 - p1) / 3
        assert np.array_equal(d1, blk.dofs)
        assert np.abs(blk.consistency - cons).max() <= 1e-9
        assert np.abs(blk.penalty - pen).max() <= 1e-9


def test_boundary_blocks():
    mesh = build_cartesian_mesh((-1, 1, -1, 1), 8, "rect")
    h = mesh.h
    params = ProblemParams(4.0, 1.0, 1.0, g=lambda x, y, nx, ny: np.ones(np.shape(x)))
    ends, mass, load = boundary_contribution(mesh, params)
    assert len(ends) == 4 * 8
    assert np.allclose(mass, h / 6 * np.array([[2, 1], [1, 2]]), atol=1e-15)
    assert np.allclose(load, h / 2, atol=1e-15)


@pytest.mark.parametrize("k", [0.5, 3.0])
def test_boundary_part_of_matrix_is_ik_mass(k):
    mesh = build_cartesian_mesh((-1, 1, -1, 1), 4, "tri")
    space = IFESpace(mesh, circle_interface(0.5, center=(20, 20)), 1.0, 1.0)
    s = assemble(space, ProblemParams(k, 1.0, 1.0))
    interior = (s.stiffness - k ** 2 * s.mass).toarray()
    boundary = s.A.toarray() - interior
    assert np.allclose(boundary, 1j * k * s.boundary_mass.toarray(), atol=1e-14)
    # the real boundary mass is k-independent, so the block vanishes as k -> 0
    assert s.boundary_mass.sum() == pytest.approx(8.0, abs=1e-13)


@pytest.mark.parametrize("etype", ["tri", "rect"])
def test_matches_reference_assembler(etype):
    k, beta = 1.0, 1.0
    prob = polynomial_problem(beta, k)
    mesh = build_cartesian_mesh((-1, 1, -1, 1), 6, etype)
    space = IFESpace(mesh, circle_interface(0.5, center=(40, 40)), beta, beta)
    s = assemble(space, ProblemParams(k, beta, beta, prob.f, prob.g))
    nodes, _, A_ref, b_ref = assemble_reference(6, etype, beta, k, lambda x, y: prob.f(x, y),
                                                prob.g)
    assert np.allclose(nodes, mesh.nodes, atol=1e-15)
    assert np.abs(s.A.toarray() - A_ref).max() <= 1e-12
    assert np.abs(s.b - b_ref).max() <= 1e-12


def test_dump_matrix(tmp_path, model_system):
    path = tmp_path / "A.txt"
    dump_matrix(model_system, path)
    lines = path.read_text().splitlines()
    n, _, nnz = map(int, lines[0].lstrip("# ").split())
    assert n == model_system.dimension and len(lines) == nnz + 1
    r, c, re, im = lines[1].split()
    assert model_system.A[int(r), int(c)] == pytest.approx(float(re) + 1j * float(im))


def test_garding_constant_positive(model_system):
    b, H, L = garding_samples(model_system)
    c1, c2 = garding_fit(b, H, L)
    assert c1 > 0 and c2 >= 0


@pytest.mark.parametrize("etype", ["tri", "rect"])
def test_solution_and_errors_match_reference(etype):
    from ppife.norms import error_norms
    from reference_fem import reference_errors

    prob = polynomial_problem(1.0, 1.0)
    mesh = build_cartesian_mesh((-1, 1, -1, 1), 8, etype)
    space = IFESpace(mesh, circle_interface(0.5, center=(40, 40)), 1.0, 1.0)
    params = ProblemParams(1.0, 1.0, 1.0, prob.f, prob.g)
    x = solve_direct(assemble(space, params)).solution
    nodes, elems, A_ref, b_ref = assemble_reference(8, etype, 1.0, 1.0,
                                                    lambda x, y: prob.f(x, y), prob.g)
    x_ref = np.linalg.solve(A_ref, b_ref)
    assert np.abs(x - x_ref).max() <= 1e-10 * np.abs(x_ref).max()
    rec = error_norms(prob, x, space, params)
    l2, h1 = reference_errors(nodes, elems, x_ref, lambda a, b: prob.u(a, b),
                              lambda a, b: prob.grad(a, b))
    assert rec.L2 == pytest.approx(l2, rel=1e-10)
    assert rec.H1semi == pytest.approx(h1, rel=1e-10)
