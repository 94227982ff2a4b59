"""Closed-form treatment of four cables with one common length.

With equal lengths the platform hangs level with every cable plumb. The
equilibrium then has rank three, so the tensions form a one-parameter family
indexed by the tension of cable 4. Among that family we pick the member with
the smallest spread of tensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from sinkwinch.geometry import MechanismConfig, PlatformPose, horizontal_pose

FAMILY_DIRECTION = np.array([-1.0, 1.0, -1.0, 1.0])


@dataclass(frozen=True)
class TensionFamily:
    """Tensions ``base + tau4 * direction`` for ``tau4`` in ``[tau4_low, tau4_high]`` (N)."""

    base: NDArray[np.float64]
    direction: NDArray[np.float64]
    tau4_low: float
    tau4_high: float

    def at(self, tau4: float) -> NDArray[np.float64]:
        return self.base + tau4 * self.direction


@dataclass(frozen=True)
class EvenTensionResult:
    tensions: NDArray[np.float64]
    delta_t: float
    tau4_used: float
    boundary_clamped: bool


def equal_length_pose(length: float, config: MechanismConfig) -> PlatformPose:
    """Level pose reached when every cable has length ``length``."""
    if not length > 0:
        raise ValueError(f"cable length must be positive, got {length}")
    return horizontal_pose(length, config)


def _family(k1: float, k2: float, mg: float) -> TensionFamily:
    base = np.array([(1.0 + k1) / 2.0, (k2 - k1) / 2.0, (1.0 - k2) / 2.0, 0.0]) * mg
    # each component of base + t*direction must stay non-negative
    low = max(0.0, (k1 - k2) / 2.0) * mg
    high = min((1.0 + k1) / 2.0, (1.0 - k2) / 2.0) * mg
    return TensionFamily(base, FAMILY_DIRECTION.copy(), low, high)


def tension_family(config: MechanismConfig) -> TensionFamily:
    return _family(config.k1, config.k2, config.mg)


def tension_difference(tensions) -> float:
    """Root of the summed squared differences over the six unordered cable pairs."""
    t = np.asarray(tensions, dtype=float)
    diffs = t[:, None] - t[None, :]
    return math.sqrt(float(np.sum(np.triu(diffs, 1) ** 2)))


def _even(k1: float, k2: float, mg: float) -> EvenTensionResult:
    family = _family(k1, k2, mg)
    best = (1.0 + k1 - k2) * mg / 4.0
    used = min(max(best, family.tau4_low), family.tau4_high)
    tensions = family.at(used)
    return EvenTensionResult(
        tensions=tensions,
        delta_t=tension_difference(tensions),
        tau4_used=used,
        boundary_clamped=used != best,
    )


def even_tension(config: MechanismConfig) -> EvenTensionResult:
    """Member of the equal-length tension family with minimal tension difference."""
    return _even(config.k1, config.k2, config.mg)


def delta_t_min_grid(resolution: int, config: MechanismConfig):
    """Minimal tension difference over a ``resolution x resolution`` grid of ``(k1, k2)``.

    Nodes are ``linspace(-1, 1, resolution)`` on both axes, boundaries
    included, and ``m`` and ``g`` come from ``config``. Returns
    ``(k1_nodes, k2_nodes, values)`` where ``values[i, j]`` belongs to
    ``(k1_nodes[i], k2_nodes[j])``.
    """
    if resolution < 2:
        raise ValueError("grid resolution must be at least 2")
    raw = np.linspace(-1.0, 1.0, resolution)
    # exact antisymmetry, so k -> -k maps nodes onto nodes and the centre is 0
    nodes = 0.5 * (raw - raw[::-1])
    values = np.empty((resolution, resolution))
    for i, k1 in enumerate(nodes):
        for j, k2 in enumerate(nodes):
            values[i, j] = _even(float(k1), float(k2), config.mg).delta_t
    return nodes, nodes.copy(), values
