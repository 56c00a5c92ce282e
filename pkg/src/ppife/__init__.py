"""Symmetric partially penalized immersed finite elements for Helmholtz interface problems."""

from .assembly import (ComplexSparseSystem, ProblemParams, assemble, boundary_contribution,
                       element_contribution, interface_edge_contribution)
from .basis import (IFESpace, LocalIFEBasis, StandardBasis, build_bilinear_ife_basis,
                    build_linear_ife_basis, eval_shape, interpolate_ife, interpolate_nodal)
from .interface import (CutElementGeometry, LevelSetInterface, circle_interface,
                        classify_elements, edge_intersections, line_interface, line_partition)
from .mesh import Mesh, build_cartesian_mesh, edge_tables
from .norms import ErrorRecord, convergence_rates, error_norms
from .problems import ExactProblem, radial_alpha, sine_problem
from .quadrature import QuadratureRule, cut_element_rule, edge_rule, element_rule
from .solver import SolveReport, solve_direct
from .study import ConvergenceReport, StudyConfig, manufactured_problem, run_study

__version__ = "0.1.0"
