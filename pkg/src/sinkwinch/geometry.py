"""Mechanism parameters, platform pose, and the constraint equations of the
four-cable sinking-winches mechanism.

Frames and numbering follow one convention throughout the package. The
inertial frame sits at the centroid of the anchor rectangle with ``z`` pointing
up, so a hanging platform has negative ``z`` coordinates. Cables are numbered
1 to 4 counterclockwise starting from the ``(+a, +b)`` corner. A pose is stored
as the attachment points ``B1, B2, B3`` and the center of gravity ``C``; ``B4``
is always derived from the other three corners.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from functools import cached_property
from typing import Iterable, Iterator, Mapping

import numpy as np
from numpy.typing import ArrayLike, NDArray

from sinkwinch.errors import ConfigError, ZeroLengthCable

Vec3 = NDArray[np.float64]

#: Relative tolerance used when comparing cable lengths for equality.
EQUAL_LENGTH_RTOL = 1e-9


@dataclass(frozen=True)
class MechanismConfig:
    """Geometric and inertial parameters of the mechanism.

    Defaults are the mine-shaft platform used in the worked examples. ``g`` is
    9.8 m/s^2, which makes the published four-cable tensions sum to ``m*g``.
    """

    a: float = 2.0
    b: float = 2.5
    h: float = 10.0
    k1: float = 0.25
    k2: float = 0.2
    m: float = 1.0e4
    g: float = 9.8

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError(f"{f.name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ConfigError(f"{f.name} must be finite, got {value!r}")
            object.__setattr__(self, f.name, float(value))
        for name in ("a", "b", "h", "m", "g"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("k1", "k2"):
            if not -1.0 < getattr(self, name) < 1.0:
                raise ConfigError(f"{name} must lie in (-1, 1), got {getattr(self, name)}")

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "MechanismConfig":
        """Build a config from a flat mapping, rejecting unknown keys."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"unknown mechanism keys: {', '.join(unknown)}")
        return cls(**values)

    def to_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @property
    def mg(self) -> float:
        """Platform weight in newtons."""
        return self.m * self.g

    @cached_property
    def anchors(self) -> NDArray[np.float64]:
        """Tangent points ``A1..A4`` as a read-only (4, 3) array."""
        a, b = self.a, self.b
        pts = np.array([[a, b, 0.0], [-a, b, 0.0], [-a, -b, 0.0], [a, -b, 0.0]])
        pts.flags.writeable = False
        return pts

    @cached_property
    def local_attachments(self) -> NDArray[np.float64]:
        """Attachment points in the platform frame; identical to the anchors."""
        return self.anchors

    @cached_property
    def local_cog(self) -> Vec3:
        c = np.array([self.k1 * self.a, self.k2 * self.b, -self.h])
        c.flags.writeable = False
        return c

    @cached_property
    def radii(self) -> NDArray[np.float64]:
        """Distances ``|C B_i|`` for all four corners (``r1, r2, r3, r4``)."""
        r = np.linalg.norm(self.local_attachments - self.local_cog, axis=1)
        r.flags.writeable = False
        return r

    @property
    def r1(self) -> float:
        return float(self.radii[0])

    @property
    def r2(self) -> float:
        return float(self.radii[1])

    @property
    def r3(self) -> float:
        return float(self.radii[2])

    @property
    def diagonal(self) -> float:
        return 2.0 * math.hypot(self.a, self.b)

    def swapped(self) -> "MechanismConfig":
        """Mirror the mechanism through the plane ``x = y``.

        The mirror exchanges ``a`` with ``b`` and ``k1`` with ``k2``; cables 2
        and 4 trade places (see :func:`swap_pose`).
        """
        return replace(self, a=self.b, b=self.a, k1=self.k2, k2=self.k1)


@dataclass(frozen=True)
class CableLengths:
    """Lengths of the four cables from tangent point to attachment point (m)."""

    l1: float
    l2: float
    l3: float
    l4: float

    def __post_init__(self):
        for f in fields(self):
            value = float(getattr(self, f.name))
            if not math.isfinite(value) or value <= 0:
                raise ConfigError(f"{f.name} must be a positive finite length, got {value!r}")
            object.__setattr__(self, f.name, value)

    @classmethod
    def of(cls, values: Iterable[float]) -> "CableLengths":
        values = list(values)
        if len(values) != 4:
            raise ConfigError(f"expected four cable lengths, got {len(values)}")
        return cls(*values)

    def __iter__(self) -> Iterator[float]:
        return iter((self.l1, self.l2, self.l3, self.l4))

    def __getitem__(self, index: int) -> float:
        return (self.l1, self.l2, self.l3, self.l4)[index]

    def as_array(self) -> NDArray[np.float64]:
        return np.array(tuple(self))

    @property
    def average(self) -> float:
        return (self.l1 + self.l2 + self.l3 + self.l4) / 4.0

    def all_equal(self, rtol: float = EQUAL_LENGTH_RTOL) -> bool:
        return all(lengths_equal(self.l1, other, rtol) for other in (self.l2, self.l3, self.l4))


def lengths_equal(x: float, y: float, rtol: float = EQUAL_LENGTH_RTOL) -> bool:
    return abs(x - y) <= rtol * max(abs(x), abs(y))


def _frozen_vec(value: ArrayLike) -> Vec3:
    v = np.array(value, dtype=float).reshape(3)
    v.flags.writeable = False
    return v


def fourth_corner(B1: ArrayLike, B2: ArrayLike, B3: ArrayLike) -> Vec3:
    """Return the corner that completes the parallelogram ``B1 B2 B3``."""
    return np.asarray(B1, float) - np.asarray(B2, float) + np.asarray(B3, float)


@dataclass(frozen=True, eq=False)
class PlatformPose:
    """Platform pose as three attachment points and the center of gravity."""

    B1: Vec3
    B2: Vec3
    B3: Vec3
    C: Vec3

    def __post_init__(self):
        for name in ("B1", "B2", "B3", "C"):
            v = _frozen_vec(getattr(self, name))
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} has non-finite coordinates: {v}")
            object.__setattr__(self, name, v)

    @property
    def B4(self) -> Vec3:
        return fourth_corner(self.B1, self.B2, self.B3)

    @property
    def attachments(self) -> NDArray[np.float64]:
        """All four attachment points as a (4, 3) array."""
        return np.stack([self.B1, self.B2, self.B3, self.B4])

    def as_vector(self) -> NDArray[np.float64]:
        """Twelve coordinates in the order B1X, B1Y, B1Z, ..., CX, CY, CZ."""
        return np.concatenate([self.B1, self.B2, self.B3, self.C])

    @classmethod
    def from_vector(cls, values: ArrayLike) -> "PlatformPose":
        v = np.asarray(values, dtype=float).reshape(12)
        return cls(v[0:3], v[3:6], v[6:9], v[9:12])

    def __eq__(self, other):
        if not isinstance(other, PlatformPose):
            return NotImplemented
        return bool(np.array_equal(self.as_vector(), other.as_vector()))

    def __hash__(self):
        return hash(self.as_vector().tobytes())


@dataclass(frozen=True)
class TautSet:
    """Cables assumed or found to carry tension, as sorted 1-based numbers."""

    members: tuple[int, ...]

    def __post_init__(self):
        members = tuple(sorted(set(int(i) for i in self.members)))
        if not members:
            raise ValueError("a taut set needs at least one cable")
        if any(i not in (1, 2, 3, 4) for i in members):
            raise ValueError(f"cable numbers must be in 1..4, got {members}")
        object.__setattr__(self, "members", members)

    @classmethod
    def of(cls, *cables: int) -> "TautSet":
        return cls(tuple(cables))

    @classmethod
    def from_mask(cls, mask: Iterable[bool]) -> "TautSet":
        return cls(tuple(i + 1 for i, flag in enumerate(mask) if flag))

    @property
    def indices(self) -> tuple[int, ...]:
        """Zero-based array indices of the taut cables."""
        return tuple(i - 1 for i in self.members)

    @property
    def slack_indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(4) if i + 1 not in self.members)

    @property
    def mask(self) -> tuple[bool, ...]:
        return tuple(i in self.members for i in (1, 2, 3, 4))

    def __contains__(self, cable: int) -> bool:
        return cable in self.members

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __str__(self) -> str:
        return "{" + ",".join(str(i) for i in self.members) + "}"


def anchor_distances(pose: PlatformPose, config: MechanismConfig) -> NDArray[np.float64]:
    """Distances ``|A_i B_i|`` for the four cables."""
    return np.linalg.norm(pose.attachments - config.anchors, axis=1)


def geometric_residuals(pose: PlatformPose, config: MechanismConfig) -> NDArray[np.float64]:
    """Rigid-body distance residuals among ``B1, B2, B3`` and ``C`` (m).

    Order: ``|B1B2| - 2a``, ``|B2B3| - 2b``, ``|B1B3| - diagonal``,
    ``|CB1| - r1``, ``|CB2| - r2``, ``|CB3| - r3``.
    """
    B1, B2, B3, C = pose.B1, pose.B2, pose.B3, pose.C
    dist = lambda p, q: float(np.linalg.norm(p - q))  # noqa: E731
    return np.array(
        [
            dist(B1, B2) - 2.0 * config.a,
            dist(B2, B3) - 2.0 * config.b,
            dist(B1, B3) - config.diagonal,
            dist(C, B1) - config.r1,
            dist(C, B2) - config.r2,
            dist(C, B3) - config.r3,
        ]
    )


def cable_directions(pose: PlatformPose, config: MechanismConfig) -> NDArray[np.float64]:
    """Unit vectors along ``A_i B_i`` as rows of a (4, 3) array."""
    vec = pose.attachments - config.anchors
    lengths = np.linalg.norm(vec, axis=1)
    if np.any(lengths == 0.0):
        cables = [i + 1 for i in np.flatnonzero(lengths == 0.0)]
        raise ZeroLengthCable(f"cable(s) {cables} have zero length")
    return vec / lengths[:, None]


def structure_matrix(pose: PlatformPose, config: MechanismConfig) -> NDArray[np.float64]:
    """The 6x4 structure matrix; column i is ``[u_i ; CB_i x u_i]``."""
    u = cable_directions(pose, config)
    arms = pose.attachments - pose.C
    return np.vstack([u.T, np.cross(arms, u).T])


def gravity_wrench(config: MechanismConfig) -> NDArray[np.float64]:
    return np.array([0.0, 0.0, -config.mg, 0.0, 0.0, 0.0])


def equilibrium_residual(
    pose: PlatformPose, tensions: ArrayLike, config: MechanismConfig
) -> NDArray[np.float64]:
    """``J^T T - F`` in newtons (rows 1-3) and newton-metres (rows 4-6)."""
    T = np.asarray(tensions, dtype=float).reshape(4)
    return structure_matrix(pose, config) @ T - gravity_wrench(config)


def platform_normal(pose: PlatformPose) -> Vec3:
    """Upward normal of an upright platform, ``(B2 - B1) x (B3 - B2)``."""
    return np.cross(pose.B2 - pose.B1, pose.B3 - pose.B2)


def is_first_configuration(pose: PlatformPose) -> bool:
    """True for the hanging, upright arrangement of the platform.

    All attachment points must be below the anchors, the platform normal must
    point up, and ``C`` must sit on the underside of the platform plane. The
    last test rejects mirror-image solutions that satisfy every distance
    constraint.
    """
    if np.any(pose.attachments[:, 2] >= 0.0):
        return False
    n = platform_normal(pose)
    if n[2] <= 0.0:
        return False
    return float(np.dot(pose.C - pose.B1, n)) < 0.0


def swap_pose(pose: PlatformPose) -> PlatformPose:
    """Map a pose through the ``x = y`` mirror used by :meth:`MechanismConfig.swapped`.

    Coordinates ``x`` and ``y`` are exchanged and cables 2 and 4 swap labels.
    Applying the map twice returns the original pose.
    """
    P = np.array([1, 0, 2])
    B1 = pose.B1[P]
    B2 = pose.B4[P]
    B3 = pose.B3[P]
    return PlatformPose(B1, B2, B3, pose.C[P])


def swap_cables(values: ArrayLike) -> NDArray[np.float64]:
    """Relabel a per-cable quantity for the ``x = y`` mirror (cables 2 <-> 4)."""
    v = np.asarray(values, dtype=float)
    return v[[0, 3, 2, 1]]


def horizontal_pose(depth: float, config: MechanismConfig) -> PlatformPose:
    """Level pose with every attachment point ``depth`` below its anchor."""
    A = config.anchors
    drop = np.array([0.0, 0.0, -depth])
    return PlatformPose(A[0] + drop, A[1] + drop, A[2] + drop, config.local_cog + drop)


def _skew(v: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


# B4 = B1 - B2 + B3 expressed as weights on the three stored corners.
_B4_WEIGHTS = ((0, 1.0), (1, -1.0), (2, 1.0))


@dataclass(frozen=True)
class FkSystem:
    """Square forward-kinematics residual map for one assumed taut set.

    The unknown vector is nondimensional: the twelve pose coordinates divided
    by ``a`` followed by one tension per taut cable divided by ``m*g``. The
    residual stacks six rigid-body distance rows, one cable-length row per taut
    cable (both in units of ``a``), three force rows (units of ``m*g``) and
    three moment rows about ``C`` (units of ``m*g*a``). Slack tensions are
    pinned to zero and do not appear as unknowns.
    """

    taut: TautSet
    lengths: CableLengths
    config: MechanismConfig
    _anchors: NDArray[np.float64] = field(init=False, repr=False)
    _targets: NDArray[np.float64] = field(init=False, repr=False)

    def __post_init__(self):
        cfg = self.config
        object.__setattr__(self, "_anchors", cfg.anchors / cfg.a)
        targets = np.array(
            [2.0, 2.0 * cfg.b / cfg.a, cfg.diagonal / cfg.a, cfg.r1 / cfg.a, cfg.r2 / cfg.a, cfg.r3 / cfg.a]
        )
        object.__setattr__(self, "_targets", targets)

    @property
    def size(self) -> int:
        return 12 + len(self.taut)

    def pack(self, pose: PlatformPose, tensions: ArrayLike) -> NDArray[np.float64]:
        """Scaled unknown vector for a pose and a full four-cable tension vector."""
        T = np.asarray(tensions, dtype=float).reshape(4)
        return np.concatenate(
            [pose.as_vector() / self.config.a, T[list(self.taut.indices)] / self.config.mg]
        )

    def unpack(self, x: ArrayLike) -> tuple[PlatformPose, NDArray[np.float64]]:
        """Pose in metres and four tensions in newtons (zeros for slack cables)."""
        x = np.asarray(x, dtype=float)
        pose = PlatformPose.from_vector(x[:12] * self.config.a)
        T = np.zeros(4)
        T[list(self.taut.indices)] = x[12:] * self.config.mg
        return pose, T

    def _points(self, x):
        P = x[:12].reshape(4, 3)
        B = np.vstack([P[:3], P[0] - P[1] + P[2]])
        return B, P[3]

    def __call__(self, x: ArrayLike) -> NDArray[np.float64]:
        x = np.asarray(x, dtype=float)
        B, C = self._points(x)
        taut = self.taut.indices
        tau = x[12:]
        geo = np.array(
            [
                np.linalg.norm(B[0] - B[1]),
                np.linalg.norm(B[1] - B[2]),
                np.linalg.norm(B[0] - B[2]),
                np.linalg.norm(C - B[0]),
                np.linalg.norm(C - B[1]),
                np.linalg.norm(C - B[2]),
            ]
        ) - self._targets
        cable = B[list(taut)] - self._anchors[list(taut)]
        dist = np.linalg.norm(cable, axis=1)
        length_rows = dist - np.array([self.lengths[i] for i in taut]) / self.config.a
        u = cable / dist[:, None]
        force = tau @ u - np.array([0.0, 0.0, -1.0])
        moment = tau @ np.cross(B[list(taut)] - C, u)
        return np.concatenate([geo, length_rows, force, moment])

    def jacobian(self, x: ArrayLike) -> NDArray[np.float64]:
        """Analytic Jacobian of :meth:`__call__` with respect to the scaled unknowns."""
        x = np.asarray(x, dtype=float)
        B, C = self._points(x)
        taut = self.taut.indices
        tau = x[12:]
        n = self.size
        J = np.zeros((n, n))

        def corner_cols(i):
            # columns of the stored coordinates that corner i depends on, with weights
            if i < 3:
                return ((i, 1.0),)
            return _B4_WEIGHTS

        def put(row, i, grad, sign=1.0):
            for k, w in corner_cols(i):
                J[row, 3 * k : 3 * k + 3] += sign * w * grad

        pairs = ((0, 1), (1, 2), (0, 2))
        for row, (i, j) in enumerate(pairs):
            e = (B[i] - B[j]) / np.linalg.norm(B[i] - B[j])
            put(row, i, e)
            put(row, j, -e)
        for row, i in enumerate(range(3), start=3):
            e = (C - B[i]) / np.linalg.norm(C - B[i])
            J[row, 9:12] += e
            put(row, i, -e)

        r_force = 6 + len(taut)
        r_moment = r_force + 3
        for k, i in enumerate(taut):
            v = B[i] - self._anchors[i]
            L = np.linalg.norm(v)
            u = v / L
            put(6 + k, i, u)
            # d u / d B_i
            du = (np.eye(3) - np.outer(u, u)) / L
            arm = B[i] - C
            for axis in range(3):
                put(r_force + axis, i, tau[k] * du[axis])
            dmom_dB = tau[k] * (-_skew(u) + _skew(arm) @ du)
            for axis in range(3):
                put(r_moment + axis, i, dmom_dB[axis])
            J[r_moment : r_moment + 3, 9:12] += tau[k] * _skew(u)
            J[r_force : r_force + 3, 12 + k] = u
            J[r_moment : r_moment + 3, 12 + k] = np.cross(arm, u)
        return J

    def scaled_residual_norm(self, pose: PlatformPose, tensions: ArrayLike) -> float:
        """Max-abs scaled residual of a pose/tension pair."""
        return float(np.max(np.abs(self(self.pack(pose, tensions)))))


def fk_residual_system(taut: TautSet, lengths: CableLengths, config: MechanismConfig) -> FkSystem:
    return FkSystem(taut, lengths, config)
