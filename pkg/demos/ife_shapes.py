"""A look at one linear IFE shape function on a cut triangle.

The reference triangle (0,0), (1,0), (0,1) is cut by the line x + y = 0.5.
The corner at the origin lies in the low-coefficient region.
"""

import numpy as np

from ppife import StandardBasis, build_linear_ife_basis, line_interface
from ppife.interface import edge_intersections, line_partition

tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
iface = line_interface([1.0, 1.0], 0.5)
D, E, kD, kE = edge_intersections(tri, iface)
geom = line_partition(tri, D, E, kD, kE, iface)
print("cut points", D, E, "piece areas", geom.area_minus, geom.area_plus)

# the shapes depend on the coefficient ratio only through the flux condition
for beta_plus in (1.0, 10.0, 1000.0):
    basis = build_linear_ife_basis(geom, 1.0, beta_plus)
    coef = basis.physical_coefficients()
    print(f"\nbeta+ / beta- = {beta_plus:g}, condition number {basis.cond:.1f}")
    for i in range(3):
        (am, bm, cm), (ap, bp, cp) = coef[i]
        print(f"  shape {i}: minus {am:+.4f} x {bm:+.4f} y {cm:+.4f}"
              f" | plus {ap:+.4f} x {bp:+.4f} y {cp:+.4f}")
    # flux jump across the cut: should be round-off
    print("  flux jump at D, E:", np.abs(basis.flux_jump()).max())

# with equal coefficients the IFE shapes are the usual hat functions
pts = np.array([[0.1, 0.1], [0.4, 0.3], [0.2, 0.6]])
same = build_linear_ife_basis(geom, 3.0, 3.0).evaluate(pts)[0]
hat = StandardBasis(tri).evaluate(pts)[0]
print("\nequal coefficients, max difference to hat functions:", np.abs(same - hat).max())

# shape 0 along the diagonal from the origin to (0.5, 0.5): piecewise linear
# with a kink where the diagonal crosses the cut
basis = build_linear_ife_basis(geom, 1.0, 10.0)
t = np.linspace(0.0, 0.5, 11)
line = np.column_stack([t, t])
vals = basis.evaluate(line)[0][0]
for ti, v in zip(t, vals):
    print(f"  s = {ti:.2f}  phi_0 = {v:+.4f}")
