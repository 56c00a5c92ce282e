import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss

from ppife.assembly import ProblemParams, assemble, edge_traces
from ppife.basis import IFESpace
from ppife.interface import circle_interface, interface_edges
from ppife.mesh import build_cartesian_mesh
from ppife.norms import convergence_rates, discrete_energy, error_norms, rate
from ppife.problems import ExactProblem


def _smooth():
    def u(x, y, side=None):
        return np.sin(x) * np.cos(2 * y) + 1j * x * y ** 2

    def grad(x, y, side=None):
        gx = np.cos(x) * np.cos(2 * y) + 1j * y ** 2
        gy = -2 * np.sin(x) * np.sin(2 * y) + 2j * x * y
        return np.stack(np.broadcast_arrays(gx, gy), axis=-1)

    return ExactProblem(u, grad, None, None, "smooth")


@pytest.fixture(scope="module")
def space():
    mesh = build_cartesian_mesh((-1, 1, -1, 1), 10, "tri")
    return IFESpace(mesh, circle_interface(), 1.0, 10.0)


def test_zero_error_for_identical_functions(space):
    rng = np.random.default_rng(0)
    c = rng.standard_normal(space.n_dofs) + 1j * rng.standard_normal(space.n_dofs)
    rec = error_norms(c, c, space, ProblemParams(10.0, 1.0, 10.0))
    for v in (rec.L2, rec.H1semi, rec.energy_h, rec.energy_tri_h, rec.energy_H):
        assert v <= 1e-11


def test_smooth_function_against_dense_quadrature():
    v = _smooth()
    x, w = leggauss(120)
    X, Y = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w)
    l2 = np.sum(W * np.abs(v.u(X, Y)) ** 2)
    g = v.grad(X, Y)
    h1 = np.sum(W * np.sum(np.abs(g) ** 2, axis=-1))
    beta, k = 3.0, 2.0
    for etype in ("tri", "rect"):
        mesh = build_cartesian_mesh((-1, 1, -1, 1), 10, etype)
        space = IFESpace(mesh, circle_interface(), beta, beta)
        params = ProblemParams(k, beta, beta)
        rec = error_norms(v, np.zeros(mesh.n_nodes), space, params)
        assert rec.L2 ** 2 == pytest.approx(l2, rel=1e-6)
        assert rec.H1semi ** 2 == pytest.approx(h1, rel=1e-6)
        # the flux term of the energy norm, edge by edge with dense Gauss
        flux = 0.0
        t, wt = leggauss(60)
        for e in interface_edges(mesh, space.classification):
            a, b = mesh.nodes[mesh.edges[e]]
            L = np.hypot(*(b - a))
            pts = a + 0.5 * (t[:, None] + 1) * (b - a)
            _, _, _, _, n = edge_traces(space, int(e), 2)
            dn = v.grad(pts[:, 0], pts[:, 1]) @ n
            flux += L / params.sigma0 * 0.5 * L * np.sum(wt * np.abs(beta * dn) ** 2)
        assert rec.energy_h ** 2 == pytest.approx(beta * h1, rel=1e-6)
        assert rec.energy_tri_h ** 2 == pytest.approx(beta * h1 + flux, rel=1e-6)
        assert rec.energy_H ** 2 == pytest.approx(beta * h1 + flux + k ** 2 * l2, rel=1e-6)


def test_homogeneity_and_identity(space):
    rng = np.random.default_rng(1)
    c = rng.standard_normal(space.n_dofs)
    params = ProblemParams(10.0, 1.0, 10.0)
    r1 = error_norms(None, c, space, params)
    r2 = error_norms(None, (2 - 1j) * c, space, params)
    s = abs(2 - 1j)
    for name in ("L2", "H1semi", "energy_h", "energy_tri_h", "energy_H"):
        assert getattr(r2, name) == pytest.approx(s * getattr(r1, name), rel=1e-12)
    assert r1.energy_H ** 2 == pytest.approx(r1.energy_tri_h ** 2 + 100 * r1.L2 ** 2, rel=1e-12)
    assert r1.energy_H >= 10 * r1.L2
    assert r1.H1 == pytest.approx(np.hypot(r1.L2, r1.H1semi))


@pytest.mark.parametrize("etype", ["tri", "rect"])
def test_discrete_energy_matches_error_norms(etype):
    mesh = build_cartesian_mesh((-1, 1, -1, 1), 10, etype)
    space = IFESpace(mesh, circle_interface(), 1.0, 10.0)
    params = ProblemParams(10.0, 1.0, 10.0)
    system = assemble(space, params)
    c = np.random.default_rng(2).standard_normal(mesh.n_nodes)
    rec = error_norms(None, c, space, params)
    en = discrete_energy(system, c)
    assert en["L2"] == pytest.approx(rec.L2 ** 2, rel=1e-11)
    assert en["energy_h"] == pytest.approx(rec.energy_h ** 2, rel=1e-11)
    assert en["energy_tri_h"] == pytest.approx(rec.energy_tri_h ** 2, rel=1e-11)
    assert en["energy_H"] == pytest.approx(rec.energy_H ** 2, rel=1e-11)


def test_rate_examples():
    assert rate(4e-2, 1e-2) == pytest.approx(2.0)
    assert round(rate(1.9455e-05, 4.7698e-06), 4) == 2.0281
    assert rate(3e-3, 3e-3) == 0.0


def test_convergence_rates_table():
    class R:
        def __init__(self, N, e):
            self.N, self.L2 = N, e

    rows = convergence_rates([R(10, 4e-2), R(20, 1e-2), R(40, 2.5e-3)], fields=("L2",))
    assert rows[0]["L2"] is None
    assert rows[1]["L2"] == pytest.approx(2.0) and rows[2]["L2"] == pytest.approx(2.0)
    with pytest.raises(ValueError):
        convergence_rates([R(10, 1.0), R(30, 0.5)], fields=("L2",))
