"""Uniform Cartesian triangular and rectangular meshes of a rectangle."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TRIANGULAR = "triangular"
RECTANGULAR = "rectangular"

_ALIASES = {"tri": TRIANGULAR, "triangular": TRIANGULAR,
            "rect": RECTANGULAR, "rectangular": RECTANGULAR, "quad": RECTANGULAR}


def normalize_element_type(element_type: str) -> str:
    try:
        return _ALIASES[element_type.lower()]
    except (KeyError, AttributeError):
        raise ValueError(f"unknown element type {element_type!r}") from None


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable Cartesian mesh.

    Attributes
    ----------
    domain : tuple
        ``(xmin, xmax, ymin, ymax)``.
    N : int
        Number of cells per axis.
    element_type : str
        ``"triangular"`` or ``"rectangular"``.
    nodes : (n_nodes, 2) float array
        Row-major from the lower-left corner.
    elements : (n_elements, 3|4) int array
        Counterclockwise vertex indices.
    edges : (n_edges, 2) int array
        Node pairs, sorted lexicographically with ``edges[:, 0] < edges[:, 1]``.
    edge_elements : (n_edges, 2) int array
        Adjacent elements, lower index first; ``-1`` in the second column
        marks a boundary edge.
    element_edges : (n_elements, 3|4) int array
        Global edge index of local edge ``k`` (vertex ``k`` to ``k+1``).
    """

    domain: tuple
    N: int
    element_type: str
    nodes: np.ndarray
    elements: np.ndarray
    edges: np.ndarray
    edge_elements: np.ndarray
    element_edges: np.ndarray
    hx: float
    hy: float
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def h(self) -> float:
        """Cell side length (``2/N`` on the square ``(-1, 1)^2``)."""
        return max(self.hx, self.hy)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def nodes_per_element(self) -> int:
        return self.elements.shape[1]

    @property
    def is_boundary_edge(self) -> np.ndarray:
        return self.edge_elements[:, 1] < 0

    def element_coords(self, elements=None) -> np.ndarray:
        """Vertex coordinates, shape ``(n, nv, 2)``."""
        if elements is None:
            return self.nodes[self.elements]
        return self.nodes[self.elements[elements]]

    def element_areas(self) -> np.ndarray:
        xy = self.element_coords()
        x, y = xy[..., 0], xy[..., 1]
        return 0.5 * np.sum(x * np.roll(y, -1, axis=1) - np.roll(x, -1, axis=1) * y, axis=1)

    def edge_lengths(self) -> np.ndarray:
        d = self.nodes[self.edges[:, 1]] - self.nodes[self.edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    def element_side_of_edge(self, edge: int, element: int) -> int:
        """Local edge index of global ``edge`` within ``element``."""
        (k,) = np.nonzero(self.element_edges[element] == edge)[0]
        return int(k)

    def boundary_outward_normals(self) -> np.ndarray:
        """Outward unit normals for every boundary edge, in edge order."""
        bnd = np.nonzero(self.is_boundary_edge)[0]
        normals = np.zeros((len(bnd), 2))
        for row, e in enumerate(bnd):
            el = self.edge_elements[e, 0]
            k = self.element_side_of_edge(e, el)
            nv = self.nodes_per_element
            a = self.nodes[self.elements[el, k]]
            b = self.nodes[self.elements[el, (k + 1) % nv]]
            t = (b - a) / np.hypot(*(b - a))
            # counterclockwise traversal: outward normal is the right-hand normal
            normals[row] = (t[1], -t[0])
        return normals


def build_cartesian_mesh(domain=(-1.0, 1.0, -1.0, 1.0), N: int = 10,
                         element_type: str = TRIANGULAR) -> Mesh:
    """Build an ``N x N`` Cartesian mesh of an axis-aligned rectangle.

    Triangular meshes split every cell along its lower-left to upper-right
    diagonal into two congruent triangles. Element ``2*c`` is the lower-right
    triangle of cell ``c = j*N + i`` and ``2*c + 1`` the upper-left one.

    Raises
    ------
    ValueError
        If ``N < 2``, the domain is degenerate, or the element type is unknown.
    """
    element_type = normalize_element_type(element_type)
    if int(N) != N or N < 2:
        raise ValueError(f"N must be an integer >= 2, got {N!r}")
    N = int(N)
    xmin, xmax, ymin, ymax = map(float, domain)
    if not (xmax > xmin and ymax > ymin):
        raise ValueError(f"degenerate domain {domain!r}")

    xs = np.linspace(xmin, xmax, N + 1)
    ys = np.linspace(ymin, ymax, N + 1)
    X, Y = np.meshgrid(xs, ys)  # rows vary in y
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    j, i = np.divmod(np.arange(N * N), N)
    n00 = j * (N + 1) + i
    n10 = n00 + 1
    n01 = n00 + N + 1
    n11 = n01 + 1
    if element_type == TRIANGULAR:
        lower = np.column_stack([n00, n10, n11])
        upper = np.column_stack([n00, n11, n01])
        elements = np.empty((2 * N * N, 3), dtype=np.int64)
        elements[0::2] = lower
        elements[1::2] = upper
    else:
        elements = np.column_stack([n00, n10, n11, n01]).astype(np.int64)

    edges, edge_elements, element_edges = _edge_structure(elements)
    return Mesh(domain=(xmin, xmax, ymin, ymax), N=N, element_type=element_type,
                nodes=nodes, elements=elements, edges=edges,
                edge_elements=edge_elements, element_edges=element_edges,
                hx=(xmax - xmin) / N, hy=(ymax - ymin) / N)


def _edge_structure(elements):
    nel, nv = elements.shape
    local = np.stack([elements, np.roll(elements, -1, axis=1)], axis=-1).reshape(-1, 2)
    keys = np.sort(local, axis=1)
    edges, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    element_edges = inverse.reshape(nel, nv)

    owner = np.repeat(np.arange(nel), nv)
    edge_elements = np.full((len(edges), 2), -1, dtype=np.int64)
    # owners arrive in ascending element order, so column 0 gets the lower index
    order = np.argsort(inverse, kind="stable")
    sorted_edges = inverse[order]
    first = np.ones(len(order), dtype=bool)
    first[1:] = sorted_edges[1:] != sorted_edges[:-1]
    edge_elements[sorted_edges[first], 0] = owner[order][first]
    edge_elements[sorted_edges[~first], 1] = owner[order][~first]
    return edges.astype(np.int64), edge_elements, element_edges.astype(np.int64)


def edge_tables(mesh: Mesh):
    """Return ``(interior_edges, boundary_edges)`` as sets of edge indices."""
    bnd = mesh.is_boundary_edge
    return set(np.nonzero(~bnd)[0].tolist()), set(np.nonzero(bnd)[0].tolist())


def dump_mesh(mesh: Mesh, path) -> None:
    """Write a plain-text node/element listing, one record per line."""
    with open(path, "w") as fh:
        fh.write(f"# {mesh.element_type} N={mesh.N} nodes={mesh.n_nodes} "
                 f"elements={mesh.n_elements}\n")
        for k, (x, y) in enumerate(mesh.nodes):
            fh.write(f"node {k} {x:.17g} {y:.17g}\n")
        for k, verts in enumerate(mesh.elements):
            fh.write(f"element {k} " + " ".join(map(str, verts)) + "\n")
