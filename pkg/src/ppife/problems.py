"""Model problems with known exact solutions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .interface import MODEL_R0


@dataclass(frozen=True)
class ExactProblem:
    """Side-aware exact solution with its data.

    ``u(x, y, side)`` and ``grad(x, y, side)`` (trailing axis of length 2)
    evaluate the solution on the given side of the interface;
    ``f(x, y, side)`` is the source and ``g(x, y, nx, ny)`` the absorbing
    boundary datum.
    """

    u: callable
    grad: callable
    f: callable
    g: callable
    name: str = ""


def radial_alpha(alpha: float = 1.5, r0: float = MODEL_R0, beta_minus: float = 1.0,
                 beta_plus: float = 10.0, k: float = 10.0) -> ExactProblem:
    """Radial solution ``(2+i)/beta_s * r**alpha`` plus a constant outside ``r0``.

    The constant on the plus side makes the solution continuous on the
    circle; the flux ``beta_s du/dr`` is continuous by construction.

    Raises
    ------
    ValueError
        If ``alpha <= 1`` (the solution would leave piecewise H^2).
    """
    if not alpha > 1:
        raise ValueError(f"alpha must exceed 1, got {alpha!r}")
    if not (beta_minus > 0 and beta_plus > 0 and r0 > 0):
        raise ValueError("beta values and r0 must be positive")
    c_minus = (2 + 1j) / beta_minus
    c_plus = (2 + 1j) / beta_plus
    shift = (c_minus - c_plus) * r0 ** alpha

    def coeffs(side):
        side = np.asarray(side)
        c = np.where(side < 0, c_minus, c_plus)
        return c, np.where(side < 0, 0.0, shift), np.where(side < 0, beta_minus, beta_plus)

    def u(x, y, side):
        c, s, _ = coeffs(side)
        return c * np.hypot(x, y) ** alpha + s

    def grad(x, y, side):
        c, _, _ = coeffs(side)
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        r = np.hypot(x, y)
        with np.errstate(divide="ignore", invalid="ignore"):
            fac = np.where(r > 0, c * alpha * r ** (alpha - 2), 0.0)
        return np.stack([fac * x, fac * y], axis=-1)

    def f(x, y, side):
        c, s, beta = coeffs(side)
        r = np.hypot(x, y)
        with np.errstate(divide="ignore"):
            lap = c * alpha ** 2 * r ** (alpha - 2)
        return -beta * lap - k ** 2 * (c * r ** alpha + s)

    def g(x, y, nx, ny):
        side = np.ones(np.shape(x), dtype=np.int8)
        du = grad(x, y, side)
        return beta_plus * (du[..., 0] * nx + du[..., 1] * ny) + 1j * k * u(x, y, side)

    return ExactProblem(u, grad, f, g, name=f"radial_alpha(alpha={alpha})")


def sine_problem(beta: float = 1.0, k: float = 1.0, amplitude=2 + 1j) -> ExactProblem:
    """Smooth ``amplitude * sin(pi x) sin(pi y)`` with a single coefficient."""
    pi = np.pi

    def u(x, y, side=None):
        return amplitude * np.sin(pi * x) * np.sin(pi * y)

    def grad(x, y, side=None):
        gx = amplitude * pi * np.cos(pi * x) * np.sin(pi * y)
        gy = amplitude * pi * np.sin(pi * x) * np.cos(pi * y)
        return np.stack(np.broadcast_arrays(gx, gy), axis=-1)

    def f(x, y, side=None):
        return (2 * pi ** 2 * beta - k ** 2) * u(x, y)

    def g(x, y, nx, ny):
        du = grad(x, y)
        return beta * (du[..., 0] * nx + du[..., 1] * ny) + 1j * k * u(x, y)

    return ExactProblem(u, grad, f, g, name="sine")


def polynomial_problem(beta: float = 1.0, k: float = 1.0) -> ExactProblem:
    """Quadratic ``(1+2i)(x^2 + x y) + (0.5-i) y``; data are polynomials."""
    a, b = 1 + 2j, 0.5 - 1j

    def u(x, y, side=None):
        return a * (x * x + x * y) + b * y

    def grad(x, y, side=None):
        gx = a * (2 * x + y)
        gy = a * x + b
        return np.stack(np.broadcast_arrays(gx, gy), axis=-1)

    def f(x, y, side=None):
        return -beta * 2 * a - k ** 2 * u(x, y)

    def g(x, y, nx, ny):
        du = grad(x, y)
        return beta * (du[..., 0] * nx + du[..., 1] * ny) + 1j * k * u(x, y)

    return ExactProblem(u, grad, f, g, name="polynomial")
