"""Forward kinematics with unknown tension state, by try-and-error traversal.

Given four cable lengths, :func:`solve` runs the ordered procedure:

1. build the average-length guess;
2. four equal lengths: return the level pose and the even tensions;
3. single-cable suspension possible: report an indefinite pose;
4. try every pair of taut cables, then every triple;
5. equal adjacent pairs: use the planar reduction;
6. otherwise solve with all four cables taut.

Each assumed tension state is solved with the dogleg method and accepted only
if taut cables pull, slack cables are strictly short of their lengths, and the
platform hangs upright. The first state that passes wins.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from numpy.typing import NDArray

from sinkwinch.equal_length import equal_length_pose, even_tension
from sinkwinch.errors import RankCollapse, SolverFailed
from sinkwinch.geometry import (
    CableLengths,
    FkSystem,
    MechanismConfig,
    PlatformPose,
    TautSet,
    anchor_distances,
    is_first_configuration,
)
from sinkwinch.planar import AdjacentPattern, detect_adjacent_equal, solve_adjacent_equal
from sinkwinch.single_cable import RotationalRange, is_single_cable_suspended
from sinkwinch.solver import SolveReport, SolverOptions, solve as dogleg_solve

PAIRS = tuple(TautSet(c) for c in itertools.combinations((1, 2, 3, 4), 2))
TRIPLES = tuple(TautSet(c) for c in itertools.combinations((1, 2, 3, 4), 3))
ALL_FOUR = TautSet((1, 2, 3, 4))

# residual bound for the full FK system at any accepted solution (scaled units)
ACCEPT_RESIDUAL = 1e-8


@dataclass(frozen=True)
class TraversalOptions:
    """Solver settings plus the margins used when checking an assumed tension state.

    ``tau_tol`` is a fraction of ``m*g``; ``eps_slack`` is a fraction of each
    slack cable's length.
    """

    solver: SolverOptions = SolverOptions()
    tau_tol: float = 1e-6
    eps_slack: float = 1e-9

    def __post_init__(self):
        if self.tau_tol < 0 or self.eps_slack < 0:
            raise ValueError("verification margins must be non-negative")


@dataclass(frozen=True)
class Guess:
    l_ave: float
    pose: PlatformPose
    tensions: NDArray[np.float64]
    taut: TautSet

    def vector(self, system: FkSystem) -> NDArray[np.float64]:
        full = np.zeros(4)
        full[list(self.taut.indices)] = self.tensions
        return system.pack(self.pose, full)


@dataclass(frozen=True)
class Verdict:
    holds: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.holds


@dataclass(frozen=True)
class Definite:
    pose: PlatformPose
    tensions: NDArray[np.float64]
    taut: TautSet
    branch: str
    diagnostics: tuple[str, ...] = ()

    outcome = "definite"


@dataclass(frozen=True)
class SingleCableIndefinite:
    shortest: int
    phi: RotationalRange
    diagnostics: tuple[str, ...] = ()

    outcome = "single-cable"
    message = "the platform is suspended by a single cable; a definite pose cannot be solved"


@dataclass(frozen=True)
class Infeasible:
    diagnostics: tuple[str, ...] = ()

    outcome = "infeasible"


FkOutcome = Union[Definite, SingleCableIndefinite, Infeasible]


def build_guess(lengths: CableLengths, taut: TautSet, config: MechanismConfig) -> Guess:
    """Level pose at the average length with the even tensions of the taut cables."""
    l_ave = lengths.average
    even = even_tension(config).tensions
    return Guess(l_ave, equal_length_pose(l_ave, config), even[list(taut.indices)], taut)


def verify_assumption(
    pose: PlatformPose,
    tensions: NDArray[np.float64],
    taut: TautSet,
    lengths: CableLengths,
    config: MechanismConfig,
    report: Optional[SolveReport] = None,
    options: TraversalOptions = TraversalOptions(),
) -> Verdict:
    """Check a candidate solution against its assumed tension state."""
    if report is not None and not report.converged:
        return Verdict(False, f"solver {report.termination.value} at residual {report.residual_norm:.2e}")
    tau_tol = options.tau_tol * config.mg
    for i in taut.indices:
        if not tensions[i] > tau_tol:
            return Verdict(False, f"cable {i + 1} tension {tensions[i]:.6g} N is not positive")
    dist = anchor_distances(pose, config)
    for j in taut.slack_indices:
        limit = lengths[j] * (1.0 - options.eps_slack)
        if not dist[j] < limit:
            return Verdict(
                False, f"slack cable {j + 1} would need {dist[j]:.6f} m > length {lengths[j]:.6f} m"
            )
    if not is_first_configuration(pose):
        return Verdict(False, "solution is not the upright hanging configuration")
    return Verdict(True)


def _try_state(taut, lengths, config, options):
    system = FkSystem(taut, lengths, config)
    guess = build_guess(lengths, taut, config)
    report = dogleg_solve(system, guess.vector(system), options.solver, jac=system.jacobian)
    pose, tensions = system.unpack(report.x)
    verdict = verify_assumption(pose, tensions, taut, lengths, config, report, options)
    return pose, tensions, verdict


def solve(
    lengths: CableLengths,
    config: MechanismConfig = MechanismConfig(),
    options: TraversalOptions = TraversalOptions(),
) -> FkOutcome:
    """Tension state, pose, and tensions of the platform for four cable lengths."""
    if not isinstance(lengths, CableLengths):
        lengths = CableLengths.of(lengths)
    notes: list[str] = []

    if lengths.all_equal():
        even = even_tension(config)
        taut = TautSet.from_mask(even.tensions > 0.0)
        pose = equal_length_pose(lengths.average, config)
        return Definite(pose, even.tensions, taut, "equal-length")

    single = is_single_cable_suspended(lengths, config)
    if single.suspended:
        return SingleCableIndefinite(single.cable, single.phi)
    notes.append(f"single cable {single.cable}: rotational range empty")

    for branch, states in (("pair", PAIRS), ("triple", TRIPLES)):
        for taut in states:
            pose, tensions, verdict = _try_state(taut, lengths, config, options)
            if verdict:
                return Definite(pose, tensions, taut, branch, tuple(notes))
            notes.append(f"{branch} {taut}: {verdict.reason}")

    pattern = detect_adjacent_equal(lengths)
    if pattern is not AdjacentPattern.NONE:
        try:
            sol = solve_adjacent_equal(lengths, config, options.solver, pattern)
        except (SolverFailed, RankCollapse) as exc:
            notes.append(f"planar {pattern.value}: {exc}")
            return Infeasible(tuple(notes))
        verdict = verify_assumption(sol.pose, sol.tensions, ALL_FOUR, lengths, config, None, options)
        if verdict:
            return Definite(sol.pose, sol.tensions, ALL_FOUR, "planar", tuple(notes))
        notes.append(f"planar {pattern.value}: {verdict.reason}")
        return Infeasible(tuple(notes))

    pose, tensions, verdict = _try_state(ALL_FOUR, lengths, config, options)
    if verdict:
        return Definite(pose, tensions, ALL_FOUR, "four-cable", tuple(notes))
    notes.append(f"four-cable {ALL_FOUR}: {verdict.reason}")
    return Infeasible(tuple(notes))


def outcome_residual(outcome: Definite, lengths: CableLengths, config: MechanismConfig) -> float:
    """Max-abs scaled FK residual of a definite outcome for its own taut set."""
    system = FkSystem(outcome.taut, lengths, config)
    return system.scaled_residual_norm(outcome.pose, outcome.tensions)


__all__ = [
    "ALL_FOUR",
    "Definite",
    "FkOutcome",
    "Guess",
    "Infeasible",
    "PAIRS",
    "SingleCableIndefinite",
    "TRIPLES",
    "TraversalOptions",
    "Verdict",
    "build_guess",
    "outcome_residual",
    "solve",
    "verify_assumption",
]
