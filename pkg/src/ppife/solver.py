"""Direct (and optional iterative) solution of the assembled complex system."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class SingularSystemError(ArithmeticError):
    """Factorization hit a zero pivot; typically the mesh is too coarse for k."""


@dataclass
class SolveReport:
    solution: np.ndarray
    residual: float
    seconds: float
    method: str
    stats: dict = field(default_factory=dict)


def _relative_residual(A, x, b):
    nb = np.linalg.norm(b)
    r = np.linalg.norm(A @ x - b)
    return float(r / nb) if nb > 0 else float(r)


def solve_direct(system, tol: float = 1e-10) -> SolveReport:
    """Sparse LU (SuperLU, partial pivoting) on the complex matrix.

    Accepts an assembled system or any ``(A, b)`` pair. ``tol`` is only
    reported against; the direct solve is not repeated.
    """
    A, b = (system.A, system.b) if hasattr(system, "A") else system
    A = sp.csc_matrix(A, dtype=complex)
    b = np.asarray(b, dtype=complex)
    t0 = time.perf_counter()
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise SingularSystemError(f"sparse LU failed: {exc}") from exc
    x = lu.solve(b)
    seconds = time.perf_counter() - t0
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("LU solve produced non-finite values")
    res = _relative_residual(A, x, b)
    stats = {"nnz_L": lu.L.nnz, "nnz_U": lu.U.nnz, "tol": tol,
             "converged": res <= tol}
    return SolveReport(x, res, seconds, "splu", stats)


def solve_bicgstab(system, tol: float = 1e-10, maxiter: int | None = None) -> SolveReport:
    """Unpreconditioned BiCGStab; may stall on indefinite Helmholtz systems."""
    A, b = (system.A, system.b) if hasattr(system, "A") else system
    A = sp.csr_matrix(A, dtype=complex)
    b = np.asarray(b, dtype=complex)
    t0 = time.perf_counter()
    x, info = spla.bicgstab(A, b, rtol=tol, maxiter=maxiter)
    seconds = time.perf_counter() - t0
    res = _relative_residual(A, x, b)
    return SolveReport(x, res, seconds, "bicgstab", {"info": info, "tol": tol,
                                                     "converged": info == 0})
