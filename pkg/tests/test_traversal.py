import numpy as np
import pytest

from sinkwinch.equal_length import even_tension
from sinkwinch.geometry import CableLengths, FkSystem, MechanismConfig, TautSet, anchor_distances
from sinkwinch.solver import SolveReport, SolverOptions, Termination
from sinkwinch.solver import solve as dogleg
from sinkwinch.traversal import (
    ALL_FOUR,
    PAIRS,
    TRIPLES,
    Definite,
    Infeasible,
    SingleCableIndefinite,
    TraversalOptions,
    build_guess,
    outcome_residual,
    solve,
    verify_assumption,
)

from oracles import lowest_cog
from worked_examples import LENGTHS, POSE, TAUT, TENSIONS_KN

CFG = MechanismConfig()


def solve_state(example, taut):
    lengths = CableLengths.of(LENGTHS[example])
    system = FkSystem(TautSet(taut), lengths, CFG)
    guess = build_guess(lengths, system.taut, CFG)
    report = dogleg(system, guess.vector(system), jac=system.jacobian)
    pose, tensions = system.unpack(report.x)
    return pose, tensions, system.taut, lengths, report


def test_enumeration_order():
    assert [str(t) for t in PAIRS] == ["{1,2}", "{1,3}", "{1,4}", "{2,3}", "{2,4}", "{3,4}"]
    assert [str(t) for t in TRIPLES] == ["{1,2,3}", "{1,2,4}", "{1,3,4}", "{2,3,4}"]


def test_guess_for_example_4():
    guess = build_guess(CableLengths.of(LENGTHS[4]), ALL_FOUR, CFG)
    assert guess.l_ave == pytest.approx(20.275)
    np.testing.assert_allclose(guess.pose.B1, [2.0, 2.5, -20.275])


def test_guess_tensions_restricted_to_taut_cables():
    guess = build_guess(CableLengths.of(LENGTHS[4]), TautSet((1, 2, 3)), CFG)
    np.testing.assert_allclose(guess.tensions / CFG.mg, [0.3625, 0.2375, 0.1375], rtol=1e-12)


def test_verify_example_3_pair_holds():
    pose, T, taut, L, report = solve_state(3, (1, 2))
    assert verify_assumption(pose, T, taut, L, CFG, report)
    assert np.all(anchor_distances(pose, CFG)[2:] < np.array(LENGTHS[3][2:]))


def test_verify_example_4_pair_fails():
    pose, T, taut, L, report = solve_state(4, (1, 2))
    verdict = verify_assumption(pose, T, taut, L, CFG, report)
    assert not verdict and verdict.reason


def test_verify_example_4_triple_holds():
    pose, T, taut, L, report = solve_state(4, (1, 2, 4))
    assert verify_assumption(pose, T, taut, L, CFG, report)


def test_verify_rejects_unconverged_report():
    pose, T, taut, L, _ = solve_state(4, (1, 2, 4))
    bad = SolveReport(np.zeros(15), False, 200, 1.0, Termination.MAX_ITER)
    assert not verify_assumption(pose, T, taut, L, CFG, bad)


def test_example_1_single_cable():
    outcome = solve(CableLengths.of(LENGTHS[1]), CFG)
    assert isinstance(outcome, SingleCableIndefinite)
    assert outcome.shortest == 1 and outcome.phi
    assert outcome.outcome == "single-cable"


@pytest.mark.parametrize("example, branch", [(2, "planar"), (3, "pair"), (4, "triple")])
def test_examples_are_definite(example, branch):
    outcome = solve(CableLengths.of(LENGTHS[example]), CFG)
    assert isinstance(outcome, Definite)
    assert outcome.branch == branch
    assert outcome.taut.members == TAUT[example]
    np.testing.assert_allclose(outcome.pose.attachments[:3], POSE[example][:3], atol=1e-2)
    np.testing.assert_allclose(outcome.pose.C, POSE[example][3], atol=1e-2)


@pytest.mark.parametrize("example", [2, 4])
def test_example_tensions(example):
    outcome = solve(CableLengths.of(LENGTHS[example]), CFG)
    np.testing.assert_allclose(outcome.tensions / 1e3, TENSIONS_KN[example], atol=0.15)


def test_example_3_tensions_balance_moment():
    # with cables 3 and 4 slack the pair shares the load by the lever arms of C
    outcome = solve(CableLengths.of(LENGTHS[3]), CFG)
    np.testing.assert_allclose(outcome.tensions / 1e3, (61.25, 36.75, 0.0, 0.0), atol=1e-6)
    assert outcome.tensions[:2].sum() == pytest.approx(CFG.mg)


def test_equal_lengths_shortcut_returns_even_tensions_exactly():
    outcome = solve(CableLengths(20, 20, 20, 20), CFG)
    assert outcome.branch == "equal-length"
    np.testing.assert_array_equal(outcome.tensions, even_tension(CFG).tensions)
    np.testing.assert_allclose(outcome.pose.attachments[:, 2], -20.0)


@pytest.mark.parametrize("example", [2, 3, 4])
def test_definite_outcomes_have_small_residual(example):
    lengths = CableLengths.of(LENGTHS[example])
    outcome = solve(lengths, CFG)
    assert outcome_residual(outcome, lengths, CFG) < 1e-8


def test_deterministic():
    lengths = CableLengths.of(LENGTHS[4])
    a, b = solve(lengths, CFG), solve(lengths, CFG)
    assert a.branch == b.branch and a.taut == b.taut
    assert a.pose.as_vector().tobytes() == b.pose.as_vector().tobytes()
    assert a.tensions.tobytes() == b.tensions.tobytes()


def test_starved_solver_reports_infeasible_with_diagnostics():
    opts = TraversalOptions(solver=SolverOptions(max_iterations=1))
    outcome = solve(CableLengths.of(LENGTHS[4]), CFG, opts)
    assert isinstance(outcome, Infeasible)
    assert any("{1,2,4}" in note for note in outcome.diagnostics)


@pytest.mark.parametrize("seed", range(6))
def test_agrees_with_energy_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    lengths = CableLengths.of(rng.uniform(19.5, 20.5, 4))
    outcome = solve(lengths, CFG)
    ref = lowest_cog(tuple(lengths), CFG)
    assert isinstance(outcome, Definite)
    assert outcome.pose.C[2] == pytest.approx(ref.cz, abs=1e-4)
    assert outcome.taut.members == ref.active


def test_options_validation():
    with pytest.raises(ValueError):
        TraversalOptions(tau_tol=-1.0)
