import numpy as np
import pytest

from ppife.mesh import build_cartesian_mesh, edge_tables, normalize_element_type
from oracles import shoelace


def test_triangular_counts_n10():
    mesh = build_cartesian_mesh((-1, 1, -1, 1), 10, "triangular")
    assert mesh.n_nodes == 121
    assert mesh.n_elements == 200
    assert mesh.h == pytest.approx(0.2)


def test_rectangular_counts_n2():
    mesh = build_cartesian_mesh((-1, 1, -1, 1), 2, "rect")
    assert (mesh.n_nodes, mesh.n_elements, mesh.n_edges) == (9, 4, 12)
    interior, boundary = edge_tables(mesh)
    assert len(interior) == 4 and len(boundary) == 8


@pytest.mark.parametrize("etype", ["tri", "rect"])
@pytest.mark.parametrize("N", [2, 5, 8])
def test_areas_sum_and_orientation(etype, N):
    mesh = build_cartesian_mesh((-1, 1, -1, 1), N, etype)
    areas = [shoelace(mesh.nodes[el]) for el in mesh.elements]
    assert min(areas) > 0  # counterclockwise
    assert sum(areas) == pytest.approx(4.0, abs=1e-12)
    assert np.allclose(mesh.element_areas(), areas)


def test_n2_triangular_diagonals_are_interior():
    mesh = build_cartesian_mesh((-1, 1, -1, 1), 2, "tri")
    assert mesh.n_elements == 8
    interior, _ = edge_tables(mesh)
    N1 = 3
    diagonals = {(j * N1 + i, (j + 1) * N1 + i + 1) for j in range(2) for i in range(2)}
    found = {tuple(mesh.edges[e]) for e in interior}
    assert diagonals <= found


@pytest.mark.parametrize("etype", ["tri", "rect"])
def test_edge_partition_and_adjacency(etype):
    mesh = build_cartesian_mesh((0, 3, -1, 1), 6, etype)
    interior, boundary = edge_tables(mesh)
    assert interior.isdisjoint(boundary)
    assert len(interior) + len(boundary) == mesh.n_edges
    # every element lists its edges, and every edge lists the element back
    for el, edges in enumerate(mesh.element_edges):
        for e in edges:
            assert el in mesh.edge_elements[e]
    T1, T2 = mesh.edge_elements[sorted(interior)].T
    assert np.all(T1 < T2)
    # Euler: V - E + F = 1 for a simply connected planar mesh
    assert mesh.n_nodes - mesh.n_edges + mesh.n_elements == 1


def test_boundary_normals_point_out():
    mesh = build_cartesian_mesh((-1, 1, -1, 1), 4, "tri")
    bnd = np.nonzero(mesh.is_boundary_edge)[0]
    normals = mesh.boundary_outward_normals()
    mids = mesh.nodes[mesh.edges[bnd]].mean(axis=1)
    assert np.allclose(np.linalg.norm(normals, axis=1), 1.0)
    assert np.all(np.sum(mids * normals, axis=1) > 0)


def test_deterministic():
    a = build_cartesian_mesh((-1, 1, -1, 1), 7, "tri")
    b = build_cartesian_mesh((-1, 1, -1, 1), 7, "tri")
    assert np.array_equal(a.elements, b.elements)
    assert np.array_equal(a.edges, b.edges)
    assert np.array_equal(a.nodes, b.nodes)


@pytest.mark.parametrize("bad", [dict(N=1), dict(N=0), dict(domain=(1, 1, 0, 1)),
                                 dict(element_type="hex")])
def test_invalid_arguments(bad):
    kwargs = dict(domain=(-1, 1, -1, 1), N=4, element_type="tri")
    kwargs.update(bad)
    with pytest.raises(ValueError):
        build_cartesian_mesh(**kwargs)


def test_element_type_aliases():
    assert normalize_element_type("tri") == "triangular"
    assert normalize_element_type("rect") == "rectangular"
