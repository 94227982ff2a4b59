"""Planar reduction for adjacent cables of equal length.

With ``l1 = l2`` and ``l3 = l4`` the platform only tilts about the ``x`` axis,
and the four-cable structure matrix is nearly singular. The mechanism is
projected onto the ``yoz`` plane, where cables 1 and 2 collapse into one
cable and cables 3 and 4 into another. The eight-equation planar model is
solved, lifted back to 3-D, and the individual tensions are recovered with
the Moore-Penrose pseudoinverse of the structure matrix.

The other adjacent pattern, ``l1 = l4`` and ``l2 = l3``, is handled by
mirroring the mechanism through ``x = y`` (see
:meth:`MechanismConfig.swapped`), which maps it onto the first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from sinkwinch.errors import RankCollapse, SolverFailed
from sinkwinch.geometry import (
    CableLengths,
    MechanismConfig,
    PlatformPose,
    gravity_wrench,
    lengths_equal,
    structure_matrix,
    swap_cables,
    swap_pose,
)
from sinkwinch.solver import SolveReport, SolverOptions, solve

PINV_RCOND = 1e-8


class AdjacentPattern(str, Enum):
    FRONT_BACK = "l1=l2,l3=l4"
    RIGHT_LEFT = "l1=l4,l2=l3"
    NONE = "none"


@dataclass(frozen=True)
class PlanarPose:
    """Projected points in the ``(y, z)`` plane (m)."""

    B1P: NDArray[np.float64]
    B4P: NDArray[np.float64]
    CP: NDArray[np.float64]


@dataclass(frozen=True)
class PlanarTensions:
    """Resultant tensions of the front pair (1, 2) and back pair (3, 4), in N."""

    tau12: float
    tau34: float


@dataclass(frozen=True)
class PlanarSolution:
    pose: PlanarPose
    tensions: PlanarTensions
    report: SolveReport


@dataclass(frozen=True)
class AdjacentSolution:
    """Result of the planar branch, lifted to 3-D."""

    pattern: AdjacentPattern
    planar: PlanarSolution
    pose: PlatformPose
    tensions: NDArray[np.float64]


def detect_adjacent_equal(lengths: CableLengths) -> AdjacentPattern:
    """Classify equal adjacent pairs; four equal lengths count as ``NONE``."""
    l1, l2, l3, l4 = lengths
    if lengths.all_equal():
        return AdjacentPattern.NONE
    if lengths_equal(l1, l2) and lengths_equal(l3, l4):
        return AdjacentPattern.FRONT_BACK
    if lengths_equal(l1, l4) and lengths_equal(l2, l3):
        return AdjacentPattern.RIGHT_LEFT
    return AdjacentPattern.NONE


def planar_radii(config: MechanismConfig) -> tuple[float, float]:
    """Projected lengths of ``C B1`` and ``C B4`` on the ``yoz`` plane."""
    b, h, k2 = config.b, config.h, config.k2
    return math.hypot((1.0 - k2) * b, h), math.hypot((1.0 + k2) * b, h)


class PlanarSystem:
    """Residuals of the planar model in units of ``b`` and ``m*g``.

    Unknowns: ``y1, z1, y4, z4, yc, zc`` (divided by ``b``) then ``tau12,
    tau34`` (divided by ``m*g``). Rows: the five planar distance constraints,
    then horizontal force, vertical force, and moment about ``C``.
    """

    size = 8

    def __init__(self, l_front: float, l_back: float, config: MechanismConfig):
        b = config.b
        r1p, r4p = planar_radii(config)
        self.config = config
        self._targets = np.array([l_front, l_back, 2.0 * b, r1p, r4p]) / b

    def __call__(self, x):
        y1, z1, y4, z4, yc, zc, t12, t34 = x
        # anchors sit at y = +1 and y = -1 in units of b
        L1 = math.hypot(y1 - 1.0, z1)
        L4 = math.hypot(y4 + 1.0, z4)
        geo = np.array(
            [
                L1,
                L4,
                math.hypot(y1 - y4, z1 - z4),
                math.hypot(yc - y1, zc - z1),
                math.hypot(yc - y4, zc - z4),
            ]
        ) - self._targets
        m1 = (y1 - yc) * z1 - (y1 - 1.0) * (z1 - zc)
        m4 = (y4 - yc) * z4 - (y4 + 1.0) * (z4 - zc)
        eq = np.array(
            [
                t12 * (y1 - 1.0) / L1 + t34 * (y4 + 1.0) / L4,
                t12 * z1 / L1 + t34 * z4 / L4 + 1.0,
                t12 * m1 / L1 + t34 * m4 / L4,
            ]
        )
        return np.concatenate([geo, eq])

    def guess(self, l_ave: float) -> NDArray[np.float64]:
        cfg = self.config
        b = cfg.b
        return np.array(
            [1.0, -l_ave / b, -1.0, -l_ave / b, cfg.k2, -(l_ave + cfg.h) / b, 0.5, 0.5]
        )


def planar_fk(
    l_front: float,
    l_back: float,
    config: MechanismConfig,
    options: SolverOptions = SolverOptions(),
    l_ave: Optional[float] = None,
) -> PlanarSolution:
    """Solve the planar model for front length ``l_front`` (cables 1, 2) and back ``l_back``.

    Raises:
        SolverFailed: the dogleg iteration did not converge.
    """
    system = PlanarSystem(l_front, l_back, config)
    if l_ave is None:
        l_ave = 0.5 * (l_front + l_back)
    report = solve(system, system.guess(l_ave), options)
    if not report.converged:
        raise SolverFailed(
            f"planar solve stopped: {report.termination.value}, residual {report.residual_norm:.3e}",
            report,
        )
    b = config.b
    y1, z1, y4, z4, yc, zc, t12, t34 = report.x
    pose = PlanarPose(np.array([y1, z1]) * b, np.array([y4, z4]) * b, np.array([yc, zc]) * b)
    return PlanarSolution(pose, PlanarTensions(t12 * config.mg, t34 * config.mg), report)


def lift_to_3d(planar: PlanarPose, config: MechanismConfig) -> PlatformPose:
    """Rebuild the 3-D pose from a front/back planar solution.

    For the ``RIGHT_LEFT`` pattern call this with the swapped config and map
    the result through :func:`~sinkwinch.geometry.swap_pose`;
    :func:`solve_adjacent_equal` does that.
    """
    a = config.a
    (y1, z1), (y4, z4), (yc, zc) = planar.B1P, planar.B4P, planar.CP
    return PlatformPose(
        np.array([a, y1, z1]),
        np.array([-a, y1, z1]),
        np.array([-a, y4, z4]),
        np.array([config.k1 * a, yc, zc]),
    )


def project_to_plane(pose: PlatformPose) -> PlanarPose:
    """Inverse of :func:`lift_to_3d` for front/back symmetric poses."""
    return PlanarPose(pose.B1[1:].copy(), pose.B4[1:].copy(), pose.C[1:].copy())


def tensions_by_pseudoinverse(
    pose: PlatformPose, config: MechanismConfig, rcond: float = PINV_RCOND
) -> NDArray[np.float64]:
    """Minimum-norm tensions balancing gravity at ``pose``.

    Singular values of the structure matrix below ``rcond`` times the largest
    are treated as zero. Components within ``-1e-9*m*g`` of zero are clamped
    to zero.

    Raises:
        RankCollapse: the least-squares tensions leave a wrench residual above
            ``1e-6*m*g``.
    """
    Jt = structure_matrix(pose, config)
    U, s, Vt = np.linalg.svd(Jt, full_matrices=False)
    keep = s > rcond * s[0]
    F = gravity_wrench(config)
    T = Vt[keep].T @ ((U[:, keep].T @ F) / s[keep])
    residual = float(np.max(np.abs(Jt @ T - F)))
    if residual > 1e-6 * config.mg:
        raise RankCollapse(f"pseudoinverse tensions leave residual {residual:.3e} N")
    T[(T < 0.0) & (T >= -1e-9 * config.mg)] = 0.0
    return T


def solve_adjacent_equal(
    lengths: CableLengths,
    config: MechanismConfig,
    options: SolverOptions = SolverOptions(),
    pattern: Optional[AdjacentPattern] = None,
) -> AdjacentSolution:
    """Planar branch for either adjacent-equal pattern."""
    if pattern is None:
        pattern = detect_adjacent_equal(lengths)
    if pattern is AdjacentPattern.NONE:
        raise ValueError(f"lengths {tuple(lengths)} have no equal adjacent pairs")
    l1, l2, l3, l4 = lengths
    if pattern is AdjacentPattern.FRONT_BACK:
        planar = planar_fk(0.5 * (l1 + l2), 0.5 * (l3 + l4), config, options, lengths.average)
        pose = lift_to_3d(planar.pose, config)
    else:
        mirrored = config.swapped()
        planar = planar_fk(0.5 * (l1 + l4), 0.5 * (l2 + l3), mirrored, options, lengths.average)
        pose = swap_pose(lift_to_3d(planar.pose, mirrored))
    tensions = tensions_by_pseudoinverse(pose, config)
    return AdjacentSolution(pattern, planar, pose, tensions)
