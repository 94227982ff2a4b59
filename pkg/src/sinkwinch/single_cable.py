"""Detection of a platform hanging from a single cable.

When one cable carries the whole load, ``C`` lies plumb below that cable's
attachment point and the platform is free to spin about the vertical through
the anchor. Each of the other cables stays slack only over a range of spin
angles. If the ranges of all three share an angle, the single-cable state is
reachable and the pose is indefinite.

Angles follow the rotation model ``B_j(theta) = axis + d_j (cos(theta_j +
theta), sin(theta_j + theta))`` at constant height ``z_j``, with ``theta = 0``
at the pose where the neighbouring cable on the same ``2a`` side is at its
minimal critical length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import brentq

from sinkwinch.errors import GeometryInfeasible
from sinkwinch.geometry import CableLengths, MechanismConfig, PlatformPose

TWO_PI = 2.0 * math.pi

# the cable sharing the 2a side with each suspension cable
NEIGHBOUR = {1: 2, 2: 1, 3: 4, 4: 3}

ROOT_TOL = 1e-10


@dataclass(frozen=True)
class RotationRigidBody:
    """Platform spinning about the vertical line through one anchor.

    Per-cable arrays are indexed 0..3 by cable; the suspension cable's own
    entries are zero for ``d`` and ``theta0``.
    """

    suspension: int
    length: float
    axis: NDArray[np.float64]
    d: NDArray[np.float64]
    theta0: NDArray[np.float64]
    z: NDArray[np.float64]
    anchors: NDArray[np.float64]
    initial_pose: PlatformPose

    @property
    def others(self) -> tuple[int, ...]:
        return tuple(j for j in (1, 2, 3, 4) if j != self.suspension)

    def attachment(self, j: int, theta: ArrayLike) -> NDArray[np.float64]:
        """Position of ``B_j`` after spinning by ``theta``; shape ``(..., 3)``."""
        theta = np.asarray(theta, dtype=float)
        ang = self.theta0[j - 1] + theta
        x = self.axis[0] + self.d[j - 1] * np.cos(ang)
        y = self.axis[1] + self.d[j - 1] * np.sin(ang)
        z = np.broadcast_to(self.z[j - 1], np.shape(theta))
        return np.stack([x, y, z], axis=-1)


@dataclass(frozen=True)
class CriticalLengths:
    """Minimal and maximal anchor distance of each slack cable over a full spin (m)."""

    suspension: int
    minimum: dict[int, float]
    maximum: dict[int, float]


@dataclass(frozen=True)
class RotationalRange:
    """Union of disjoint closed angle intervals inside ``[0, 2*pi]``."""

    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        ivs = tuple((float(lo), float(hi)) for lo, hi in self.intervals)
        for lo, hi in ivs:
            if not (0.0 <= lo <= hi <= TWO_PI):
                raise ValueError(f"interval [{lo}, {hi}] is not inside [0, 2pi]")
        for (_, hi), (lo, _) in zip(ivs, ivs[1:]):
            if lo <= hi:
                raise ValueError("intervals must be sorted and disjoint")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def full(cls) -> "RotationalRange":
        return cls(((0.0, TWO_PI),))

    @classmethod
    def empty(cls) -> "RotationalRange":
        return cls(())

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def contains(self, theta: float) -> bool:
        return any(lo <= theta <= hi for lo, hi in self.intervals)

    def intersect(self, other: "RotationalRange") -> "RotationalRange":
        out = []
        for lo1, hi1 in self.intervals:
            for lo2, hi2 in other.intervals:
                lo, hi = max(lo1, lo2), min(hi1, hi2)
                if lo <= hi:
                    out.append((lo, hi))
        out.sort()
        merged: list[list[float]] = []
        for lo, hi in out:
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return RotationalRange(tuple((lo, hi) for lo, hi in merged))

    def gaps(self) -> list[tuple[float, float]]:
        """Maximal open sub-intervals of ``[0, 2*pi]`` not covered by the range."""
        out = []
        cursor = 0.0
        for lo, hi in self.intervals:
            if lo > cursor:
                out.append((cursor, lo))
            cursor = hi
        if cursor < TWO_PI:
            out.append((cursor, TWO_PI))
        return out

    def __str__(self) -> str:
        if not self.intervals:
            return "empty"
        return " U ".join(f"[{lo:.3f}, {hi:.3f}]" for lo, hi in self.intervals)


@dataclass(frozen=True)
class SingleCableCheck:
    """Verdict of the single-cable test for one candidate suspension cable."""

    suspended: bool
    cable: int
    phi: RotationalRange
    per_cable: dict[int, RotationalRange]
    critical: CriticalLengths


def _rotation_to_down(v: NDArray[np.float64]) -> NDArray[np.float64]:
    """Proper rotation taking the unit vector ``v`` onto ``(0, 0, -1)``."""
    target = np.array([0.0, 0.0, -1.0])
    axis = np.cross(v, target)
    s = np.linalg.norm(axis)
    c = float(np.dot(v, target))
    if s < 1e-15:
        if c > 0:
            return np.eye(3)
        return np.diag([1.0, -1.0, -1.0])
    k = axis / s
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + s * K + (1.0 - c) * (K @ K)


def _check_cable(cable: int) -> int:
    if cable not in (1, 2, 3, 4):
        raise ValueError(f"cable number must be in 1..4, got {cable}")
    return cable


def initial_pose_under_single_cable(
    shortest: int, lengths: CableLengths, config: MechanismConfig
) -> RotationRigidBody:
    """Rigid body hanging plumb from cable ``shortest`` at its reference spin angle.

    The height of every other corner below the suspension point follows from
    the law of cosines in the triangle ``B_s B_j C``; its horizontal offset
    from the spin axis is ``d_j``. The initial spin puts the neighbouring
    corner on the side facing its own anchor.

    Raises:
        GeometryInfeasible: a corner's horizontal offset would be imaginary.
    """
    s = _check_cable(shortest)
    i = s - 1
    l_s = lengths[i]
    A = config.anchors
    local = config.local_attachments
    r = config.radii
    r_s = r[i]

    z = np.zeros(4)
    d = np.zeros(4)
    z[i] = -l_s
    for j in range(4):
        if j == i:
            continue
        chord = float(np.linalg.norm(local[j] - local[i]))
        drop = (r[j] ** 2 - chord**2 - r_s**2) / (2.0 * r_s)
        arg = chord**2 - drop**2
        if arg < 0.0 or not math.isfinite(arg):
            raise GeometryInfeasible(
                f"corner {j + 1} cannot hang from cable {s}: offset argument {arg:.3e} < 0"
            )
        z[j] = drop - l_s
        d[j] = math.sqrt(arg)
    if np.any(np.delete(d, i) < 1e-12 * config.a):
        raise GeometryInfeasible("a corner lies on the spin axis; spin angle undefined")

    # orientation of the corners around the axis from an explicit rigid placement
    R = _rotation_to_down((config.local_cog - local[i]) / r_s)
    placed = (local - local[i]) @ R.T
    angles = np.arctan2(placed[:, 1], placed[:, 0])
    n = NEIGHBOUR[s] - 1
    toward = A[n] - A[i]
    shift = math.atan2(toward[1], toward[0]) - angles[n]
    theta0 = np.mod(angles + shift, TWO_PI)
    theta0[i] = 0.0

    axis = A[i, :2].copy()
    pts = np.column_stack([axis[0] + d * np.cos(theta0), axis[1] + d * np.sin(theta0), z])
    pts[i] = [axis[0], axis[1], -l_s]
    C = np.array([axis[0], axis[1], -l_s - r_s])
    pose = PlatformPose(pts[0], pts[1], pts[2], C)
    return RotationRigidBody(s, l_s, axis, d, theta0, z, np.array(A), pose)


def cable_distance_curve(body: RotationRigidBody, j: int, theta: ArrayLike):
    """Distance ``|A_j B_j(theta)|``; accepts scalar or array ``theta``."""
    _check_cable(j)
    out = np.linalg.norm(body.attachment(j, theta) - body.anchors[j - 1], axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def _extremes(body: RotationRigidBody, j: int) -> tuple[float, float]:
    # B_j circles the axis at radius d_j; the anchor sits at horizontal distance D_j
    D = float(np.linalg.norm(body.anchors[j - 1, :2] - body.axis))
    dj, zj = body.d[j - 1], body.z[j - 1]
    return math.hypot(D - dj, zj), math.hypot(D + dj, zj)


def critical_lengths(shortest: int, l_short: float, config: MechanismConfig) -> CriticalLengths:
    """Critical lengths of the three cables other than ``shortest``.

    Only the suspension cable's length matters, so the other lengths passed to
    the rigid-body construction are placeholders.
    """
    body = initial_pose_under_single_cable(
        shortest, CableLengths(*([l_short] * 4)), config
    )
    lo, hi = {}, {}
    for j in body.others:
        lo[j], hi[j] = _extremes(body, j)
    return CriticalLengths(shortest, lo, hi)


def isolate_roots(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    lipschitz: float,
    tol: float = ROOT_TOL,
    leaf: float = 1e-3,
) -> list[float]:
    """All roots of ``f`` in ``[lo, hi]`` by interval subdivision.

    A cell ``[u, v]`` is discarded when the Lipschitz enclosure
    ``f(mid) +/- L (v - u) / 2`` excludes zero. Cells narrower than ``leaf``
    with a sign change are refined to ``tol`` by bracketing. A leaf that cannot
    be excluded and has no sign change is a grazing contact, reported at the
    point of smallest ``|f|`` if that value is within the enclosure noise.
    """
    roots: list[float] = []
    stack = [(lo, hi)]
    while stack:
        u, v = stack.pop()
        mid = 0.5 * (u + v)
        fm = f(mid)
        if abs(fm) > lipschitz * (v - u) / 2.0:
            continue
        if v - u > leaf:
            stack.append((mid, v))
            stack.append((u, mid))
            continue
        fu, fv = f(u), f(v)
        if fu == 0.0:
            roots.append(u)
        elif fv == 0.0:
            roots.append(v)
        elif fu * fv < 0.0:
            roots.append(brentq(f, u, v, xtol=tol, rtol=4 * np.finfo(float).eps))
        else:
            grid = np.linspace(u, v, 33)
            vals = np.array([abs(f(t)) for t in grid])
            k = int(np.argmin(vals))
            if vals[k] <= tol * max(lipschitz, 1.0):
                roots.append(float(grid[k]))
    roots.sort()
    deduped: list[float] = []
    for t in roots:
        if not deduped or t - deduped[-1] > 10 * tol:
            deduped.append(t)
    return deduped


def _cable_range(body: RotationRigidBody, j: int, length: float) -> RotationalRange:
    l_min, l_max = _extremes(body, j)
    if length <= l_min:
        return RotationalRange.empty()
    if length >= l_max:
        return RotationalRange.full()
    D = float(np.linalg.norm(body.anchors[j - 1, :2] - body.axis))
    # |d l/d theta| = d D |sin| / l <= d D / l_min
    lip = body.d[j - 1] * D / max(l_min, 1e-12)
    f = lambda t: cable_distance_curve(body, j, t) - length  # noqa: E731
    roots = isolate_roots(f, 0.0, TWO_PI, lip)
    cuts = [0.0] + [t for t in roots if 0.0 < t < TWO_PI] + [TWO_PI]
    kept: list[list[float]] = []
    for u, v in zip(cuts, cuts[1:]):
        if v <= u:
            continue
        if f(0.5 * (u + v)) <= 0.0:
            if kept and kept[-1][1] == u:
                kept[-1][1] = v
            else:
                kept.append([u, v])
    return RotationalRange(tuple((u, v) for u, v in kept))


def rotational_range(
    shortest: int, lengths: CableLengths, config: MechanismConfig
) -> RotationalRange:
    """Spin angles about cable ``shortest`` at which every other cable is slack."""
    return _ranges(shortest, lengths, config)[0]


def _ranges(shortest, lengths, config):
    body = initial_pose_under_single_cable(shortest, lengths, config)
    per_cable = {j: _cable_range(body, j, lengths[j - 1]) for j in body.others}
    phi = RotationalRange.full()
    for rng in per_cable.values():
        phi = phi.intersect(rng)
    return phi, per_cable, body


def suspension_candidate(lengths: CableLengths, config: MechanismConfig) -> int:
    """Cable whose single-cable hanging pose puts ``C`` lowest.

    Hanging from cable ``i`` alone places ``C`` at depth ``l_i + r_i``, and no
    pose can put ``C`` deeper than ``min_i(l_i + r_i)``. So only the minimizer
    can possibly carry the platform alone. Ties go to the lowest cable number.
    """
    reach = lengths.as_array() + config.radii
    return int(np.argmin(reach)) + 1


def is_single_cable_suspended(
    lengths: CableLengths, config: MechanismConfig, cable: int | None = None
) -> SingleCableCheck:
    """Test whether the platform hangs from one cable with the other three slack.

    ``cable`` overrides the automatically chosen candidate.
    """
    if lengths.all_equal():
        raise ValueError("single-cable test does not apply to four equal lengths")
    s = suspension_candidate(lengths, config) if cable is None else _check_cable(cable)
    phi, per_cable, body = _ranges(s, lengths, config)
    lo, hi = {}, {}
    for j in body.others:
        lo[j], hi[j] = _extremes(body, j)
    return SingleCableCheck(bool(phi), s, phi, per_cable, CriticalLengths(s, lo, hi))
