"""Powell's dogleg trust-region method for square nonlinear systems.

The solver minimizes ``0.5 * ||f(x)||^2`` with steps that blend the
Gauss-Newton step and the Cauchy (steepest-descent) point inside a trust
region. When the Jacobian is numerically singular the Gauss-Newton step is
skipped, the Cauchy step is used, and the report records that this happened so
callers can tell a degenerate system from a clean solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from sinkwinch.errors import DimensionMismatch, NonFiniteResidual

ResidualFn = Callable[[NDArray[np.float64]], NDArray[np.float64]]
JacobianFn = Callable[[NDArray[np.float64]], NDArray[np.float64]]


class Termination(str, Enum):
    CONVERGED = "converged"
    MAX_ITER = "max-iter"
    TRUST_RADIUS_COLLAPSE = "trust-radius-collapse"
    SINGULAR_JACOBIAN = "singular-jacobian"


@dataclass(frozen=True)
class SolverOptions:
    max_iterations: int = 200
    residual_tolerance: float = 1e-10
    step_tolerance: float = 1e-12
    initial_trust_radius: float = 1.0
    min_trust_radius: float = 1e-14
    max_trust_radius: float = 1e3
    jacobian_mode: str = "analytic"
    fd_step: float = 1e-7
    singular_condition: float = 1e14

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        for name in ("residual_tolerance", "step_tolerance", "initial_trust_radius",
                     "min_trust_radius", "max_trust_radius", "fd_step", "singular_condition"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.min_trust_radius <= self.initial_trust_radius <= self.max_trust_radius:
            raise ValueError("trust radii must satisfy min <= initial <= max")
        if self.jacobian_mode not in ("analytic", "forward"):
            raise ValueError(f"unknown jacobian_mode {self.jacobian_mode!r}")


@dataclass
class SolveReport:
    x: NDArray[np.float64]
    converged: bool
    iterations: int
    residual_norm: float
    termination: Termination
    used_cauchy_fallback: bool = False
    history: list[float] = field(default_factory=list, repr=False)


def _check_finite(f, where):
    if not np.all(np.isfinite(f)):
        raise NonFiniteResidual(f"residual is not finite at {where}")


def jacobian(
    residual_fn: ResidualFn,
    point: ArrayLike,
    mode: str = "forward",
    step: float = 1e-7,
    analytic: Optional[JacobianFn] = None,
    f0: Optional[NDArray[np.float64]] = None,
) -> NDArray[np.float64]:
    """Jacobian of ``residual_fn`` at ``point``.

    ``mode="forward"`` uses one-sided differences with per-coordinate step
    ``step * max(1, |x_i|)``. ``mode="analytic"`` delegates to ``analytic``.
    """
    x = np.asarray(point, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFiniteResidual("jacobian requested at a non-finite point")
    if mode == "analytic":
        if analytic is None:
            raise ValueError("analytic mode needs a derivative callable")
        J = np.asarray(analytic(x), dtype=float)
        _check_finite(J, "analytic jacobian")
        return J
    if mode != "forward":
        raise ValueError(f"unknown jacobian mode {mode!r}")
    if f0 is None:
        f0 = np.asarray(residual_fn(x), dtype=float)
    _check_finite(f0, "jacobian base point")
    J = np.empty((f0.size, x.size))
    for i in range(x.size):
        hi = step * max(1.0, abs(x[i]))
        xp = x.copy()
        xp[i] += hi
        # use the representable step actually taken
        hi = xp[i] - x[i]
        fp = np.asarray(residual_fn(xp), dtype=float)
        _check_finite(fp, "jacobian probe")
        J[:, i] = (fp - f0) / hi
    return J


def dogleg_step(J, f, radius, singular_condition=1e14):
    """Dogleg step for the model ``||f + J p||`` within ``||p|| <= radius``.

    Returns ``(step, used_cauchy_fallback)``.
    """
    g = J.T @ f
    gnorm = np.linalg.norm(g)
    fallback = False
    p_gn = None
    cond = np.linalg.cond(J)
    if math.isfinite(cond) and cond <= singular_condition:
        try:
            p_gn = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            p_gn = None
    if p_gn is None:
        fallback = True
    elif np.linalg.norm(p_gn) <= radius:
        return p_gn, False

    if gnorm == 0.0:
        return np.zeros_like(f), fallback
    Jg = J @ g
    jg2 = float(Jg @ Jg)
    alpha = gnorm**2 / jg2 if jg2 > 0.0 else math.inf
    p_sd = -alpha * g
    sd_norm = alpha * gnorm
    if sd_norm >= radius:
        return -(radius / gnorm) * g, fallback
    if p_gn is None:
        return p_sd, fallback

    # walk from the Cauchy point towards the Gauss-Newton point up to the boundary
    d = p_gn - p_sd
    A = float(d @ d)
    B = 2.0 * float(p_sd @ d)
    Cq = float(p_sd @ p_sd) - radius**2
    s = (-B + math.sqrt(B * B - 4.0 * A * Cq)) / (2.0 * A)
    return p_sd + s * d, fallback


def solve(
    residual_fn: ResidualFn,
    guess: ArrayLike,
    options: SolverOptions = SolverOptions(),
    jac: Optional[JacobianFn] = None,
) -> SolveReport:
    """Solve ``residual_fn(x) = 0`` from ``guess`` by the dogleg method.

    The analytic Jacobian ``jac`` is used when supplied and
    ``options.jacobian_mode`` is ``"analytic"``; otherwise forward differences.
    Convergence is declared when the Euclidean residual norm drops to
    ``options.residual_tolerance``.

    Raises:
        DimensionMismatch: the residual length differs from the guess length.
        NonFiniteResidual: the residual at the guess contains NaN or inf.
    """
    x = np.array(guess, dtype=float).reshape(-1)
    f = np.asarray(residual_fn(x), dtype=float).reshape(-1)
    if f.size != x.size:
        raise DimensionMismatch(f"residual has {f.size} components for {x.size} unknowns")
    _check_finite(f, "the initial guess")

    mode = options.jacobian_mode if jac is not None else "forward"
    radius = options.initial_trust_radius
    fnorm = float(np.linalg.norm(f))
    history = [fnorm]
    fallback_seen = False

    def report(iters, reason):
        return SolveReport(
            x=x,
            converged=reason is Termination.CONVERGED,
            iterations=iters,
            residual_norm=fnorm,
            termination=reason,
            used_cauchy_fallback=fallback_seen,
            history=history,
        )

    J = None
    for it in range(options.max_iterations):
        if fnorm <= options.residual_tolerance:
            return report(it, Termination.CONVERGED)
        if J is None:
            J = jacobian(residual_fn, x, mode, options.fd_step, analytic=jac, f0=f)
        p, fallback = dogleg_step(J, f, radius, options.singular_condition)
        fallback_seen |= fallback
        pnorm = float(np.linalg.norm(p))
        if pnorm == 0.0:
            # zero gradient away from a root: nothing left to descend
            return report(it, Termination.SINGULAR_JACOBIAN)

        x_new = x + p
        f_new = np.asarray(residual_fn(x_new), dtype=float).reshape(-1)
        if np.all(np.isfinite(f_new)):
            fnew_norm = float(np.linalg.norm(f_new))
            model = f + J @ p
            predicted = fnorm**2 - float(model @ model)
            actual = fnorm**2 - fnew_norm**2
            rho = actual / predicted if predicted > 0.0 else -1.0
        else:
            rho = -1.0

        if rho < 0.25:
            radius = 0.25 * min(radius, pnorm)
        elif rho > 0.75 and pnorm >= 0.99 * radius:
            radius = min(2.0 * radius, options.max_trust_radius)

        if rho > 1e-4:
            x, f, fnorm = x_new, f_new, fnew_norm
            history.append(fnorm)
            J = None
            if pnorm <= options.step_tolerance * (np.linalg.norm(x) + options.step_tolerance):
                reason = (Termination.CONVERGED if fnorm <= options.residual_tolerance
                          else Termination.TRUST_RADIUS_COLLAPSE)
                return report(it + 1, reason)
        elif radius < options.min_trust_radius:
            reason = Termination.SINGULAR_JACOBIAN if fallback else Termination.TRUST_RADIUS_COLLAPSE
            return report(it + 1, reason)

    reason = Termination.CONVERGED if fnorm <= options.residual_tolerance else Termination.MAX_ITER
    return report(options.max_iterations, reason)
