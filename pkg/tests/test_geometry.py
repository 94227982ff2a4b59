import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sinkwinch.errors import ConfigError, ZeroLengthCable
from sinkwinch.geometry import (
    CableLengths,
    FkSystem,
    MechanismConfig,
    PlatformPose,
    TautSet,
    anchor_distances,
    equilibrium_residual,
    fk_residual_system,
    fourth_corner,
    geometric_residuals,
    gravity_wrench,
    horizontal_pose,
    is_first_configuration,
    structure_matrix,
    swap_cables,
    swap_pose,
)
from sinkwinch.solver import jacobian

from worked_examples import LENGTHS, POSE, STRUCTURE_MATRIX_EXAMPLE_2, TENSIONS_KN

CFG = MechanismConfig()


def pose_from_table(example):
    B1, B2, B3, C = POSE[example]
    return PlatformPose(B1, B2, B3, C)


def random_rigid_pose(rng, cfg=CFG, depth=20.0):
    """Level reference pose moved by a random small rotation and shift."""
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(-0.2, 0.2)
    K = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    R = np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * K @ K
    shift = np.array([*rng.normal(0, 0.3, 2), -depth])
    B = cfg.local_attachments @ R.T + shift
    C = R @ cfg.local_cog + shift
    return PlatformPose(B[0], B[1], B[2], C)


# -- config ---------------------------------------------------------------------


def test_default_config_values():
    assert (CFG.a, CFG.b, CFG.h, CFG.k1, CFG.k2, CFG.m, CFG.g) == (2.0, 2.5, 10.0, 0.25, 0.2, 1e4, 9.8)
    assert CFG.mg == pytest.approx(98000.0)


def test_anchor_layout():
    np.testing.assert_array_equal(
        CFG.anchors, [[2, 2.5, 0], [-2, 2.5, 0], [-2, -2.5, 0], [2, -2.5, 0]]
    )


def test_radii_from_cog_offset():
    # |C B1| with C = (0.5, 0.5, -10) below the level platform
    assert CFG.r1 == pytest.approx(math.sqrt(1.5**2 + 2.0**2 + 100.0))
    assert CFG.radii[3] == pytest.approx(math.sqrt(1.5**2 + 3.0**2 + 100.0))


@pytest.mark.parametrize(
    "bad",
    [{"a": 0.0}, {"b": -1.0}, {"h": 0.0}, {"k1": 1.5}, {"k2": -1.01}, {"m": 0.0}, {"g": -9.8},
     {"a": float("nan")}],
)
def test_config_rejects_invalid(bad):
    with pytest.raises(ConfigError):
        MechanismConfig(**bad)


def test_config_mapping_round_trip_and_unknown_keys():
    cfg = MechanismConfig.from_mapping({"a": 3.0, "k1": -0.5})
    assert MechanismConfig.from_mapping(cfg.to_dict()) == cfg
    with pytest.raises(ConfigError, match="c"):
        MechanismConfig.from_mapping({"c": 1.0})


def test_swapped_config_mirrors_through_diagonal():
    sw = CFG.swapped()
    assert (sw.a, sw.b, sw.k1, sw.k2) == (CFG.b, CFG.a, CFG.k2, CFG.k1)
    assert sw.swapped() == CFG


# -- value types ----------------------------------------------------------------


def test_cable_lengths_validation():
    with pytest.raises(ValueError):
        CableLengths(20.0, 20.0, 0.0, 20.0)
    with pytest.raises(ValueError):
        CableLengths(20.0, float("inf"), 20.0, 20.0)
    L = CableLengths.of([20, 21, 22, 21.5])
    assert L[2] == 22.0 and L.average == pytest.approx(21.125)
    assert CableLengths(20, 20, 20, 20).all_equal()
    assert not L.all_equal()


def test_taut_set():
    t = TautSet.of(4, 1, 2)
    assert t.members == (1, 2, 4)
    assert t.indices == (0, 1, 3) and t.slack_indices == (2,)
    assert str(t) == "{1,2,4}"
    assert TautSet.from_mask([True, True, False, True]) == t
    with pytest.raises(ValueError):
        TautSet.of(0, 1)


def test_pose_vector_round_trip():
    pose = pose_from_table(4)
    assert PlatformPose.from_vector(pose.as_vector()) == pose
    assert pose.as_vector()[:3].tolist() == POSE[4][0].tolist()


# -- fourth corner --------------------------------------------------------------


def test_fourth_corner_of_rectangle():
    np.testing.assert_allclose(fourth_corner((2, 2.5, 0), (-2, 2.5, 0), (-2, -2.5, 0)), (2, -2.5, 0))


def test_fourth_corner_degenerate():
    np.testing.assert_array_equal(fourth_corner((0, 0, 0), (0, 0, 0), (0, 0, 0)), (0, 0, 0))


def test_fourth_corner_tilted():
    np.testing.assert_allclose(
        fourth_corner((2, 2.5, -20), (-2, 2.5, -20), (-2, -2.5, -20.1)), (2, -2.5, -20.1), atol=1e-12
    )


# -- distances and residuals ----------------------------------------------------


def test_anchor_distances_of_horizontal_pose():
    np.testing.assert_allclose(anchor_distances(horizontal_pose(20.0, CFG), CFG), [20.0] * 4)


def test_anchor_distances_of_example_2_pose():
    np.testing.assert_allclose(anchor_distances(pose_from_table(2), CFG), LENGTHS[2], atol=2e-2)


def test_anchor_distances_match_norm_oracle():
    rng = np.random.default_rng(3)
    for _ in range(20):
        pose = PlatformPose(*rng.normal(0, 5, (4, 3)))
        B = pose.attachments
        expected = [math.sqrt(sum((B[i][k] - CFG.anchors[i][k]) ** 2 for k in range(3))) for i in range(4)]
        np.testing.assert_allclose(anchor_distances(pose, CFG), expected, rtol=1e-14)


def test_geometric_residuals_vanish_for_rigid_motion():
    rng = np.random.default_rng(5)
    np.testing.assert_allclose(geometric_residuals(horizontal_pose(20.0, CFG), CFG), 0.0, atol=1e-14)
    for _ in range(10):
        np.testing.assert_allclose(geometric_residuals(random_rigid_pose(rng), CFG), 0.0, atol=1e-12)


def test_geometric_residual_under_vertical_displacement():
    pose = horizontal_pose(20.0, CFG)
    delta = 0.3
    moved = PlatformPose(pose.B1 + [0, 0, delta], pose.B2, pose.B3, pose.C)
    # |B1 B2| becomes hypot(2a, delta)
    assert geometric_residuals(moved, CFG)[0] == pytest.approx(math.hypot(4.0, delta) - 4.0, rel=1e-12)


def test_geometric_residuals_of_example_3_pose():
    assert np.max(np.abs(geometric_residuals(pose_from_table(3), CFG))) < 5e-3


# -- structure matrix and equilibrium -------------------------------------------


def test_structure_matrix_of_horizontal_pose():
    Jt = structure_matrix(horizontal_pose(20.0, CFG), CFG)
    np.testing.assert_allclose(Jt[:2], 0.0, atol=1e-15)
    np.testing.assert_allclose(Jt[2], -1.0)


def test_structure_matrix_columns_are_unit_forces():
    rng = np.random.default_rng(11)
    for _ in range(10):
        Jt = structure_matrix(random_rigid_pose(rng), CFG)
        np.testing.assert_allclose(np.linalg.norm(Jt[:3], axis=0), 1.0, rtol=1e-13)


def test_structure_matrix_at_example_2_pose_matches_printed_matrix():
    # table coordinates are rounded to 1 mm, so the check runs at the solved pose
    from sinkwinch.traversal import solve

    outcome = solve(CableLengths.of(LENGTHS[2]), CFG)
    Jt = structure_matrix(outcome.pose, CFG)
    np.testing.assert_allclose(Jt, STRUCTURE_MATRIX_EXAMPLE_2, atol=1e-4)


def test_zero_length_cable_rejected():
    pose = horizontal_pose(20.0, CFG)
    degenerate = PlatformPose(CFG.anchors[0], pose.B2, pose.B3, pose.C)
    with pytest.raises(ZeroLengthCable):
        structure_matrix(degenerate, CFG)


def test_equilibrium_residual_with_zero_tensions_is_gravity():
    res = equilibrium_residual(pose_from_table(2), np.zeros(4), CFG)
    np.testing.assert_allclose(res, [0, 0, CFG.mg, 0, 0, 0])


def test_equilibrium_residual_of_example_2_table_values():
    T = np.array(TENSIONS_KN[2]) * 1e3
    res = equilibrium_residual(pose_from_table(2), T, CFG)
    assert np.max(np.abs(res)) < 2e-3 * CFG.mg


def test_equilibrium_residual_with_even_tensions():
    from sinkwinch.equal_length import even_tension

    res = equilibrium_residual(horizontal_pose(20.0, CFG), even_tension(CFG).tensions, CFG)
    assert np.max(np.abs(res)) < 1e-9 * CFG.mg


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(0, 1e5), min_size=4, max_size=4),
    st.lists(st.floats(0, 1e5), min_size=4, max_size=4),
    st.floats(-3, 3),
)
def test_equilibrium_residual_is_affine_in_tensions(t1, t2, s):
    pose = pose_from_table(4)
    F = gravity_wrench(CFG)
    r = lambda t: equilibrium_residual(pose, t, CFG) + F  # noqa: E731
    lhs = r(np.array(t1) + s * np.array(t2))
    rhs = r(np.array(t1)) + s * r(np.array(t2))
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * (1 + np.max(np.abs(lhs))))


# -- configuration filters ------------------------------------------------------


def test_first_configuration_accepts_hanging_pose_and_rejects_flips():
    pose = horizontal_pose(20.0, CFG)
    assert is_first_configuration(pose)
    above = PlatformPose(pose.B1 + [0, 0, 40], pose.B2 + [0, 0, 40], pose.B3 + [0, 0, 40], pose.C + [0, 0, 40])
    assert not is_first_configuration(above)
    # C reflected to the upper side of the platform plane
    mirrored = PlatformPose(pose.B1, pose.B2, pose.B3, pose.C + [0, 0, 2 * CFG.h])
    assert not is_first_configuration(mirrored)


def test_swap_pose_is_an_involution():
    pose = pose_from_table(4)
    assert swap_pose(swap_pose(pose)) == pose
    np.testing.assert_array_equal(swap_cables([1, 2, 3, 4]), [1, 4, 3, 2])


# -- FK residual system ---------------------------------------------------------


@pytest.mark.parametrize("taut, size", [((1, 2, 3), 15), ((1, 2, 3, 4), 16), ((1, 2), 14)])
def test_fk_system_dimensions(taut, size):
    system = fk_residual_system(TautSet(taut), CableLengths.of(LENGTHS[4]), CFG)
    x = system.pack(pose_from_table(4), np.array(TENSIONS_KN[4]) * 1e3)
    assert system.size == size == x.size == system(x).size


def test_fk_system_vanishes_at_constructed_solution():
    # level pose at depth 20 with the even tensions solves the four-cable system exactly
    from sinkwinch.equal_length import even_tension

    system = FkSystem(TautSet((1, 2, 3, 4)), CableLengths(20, 20, 20, 20), CFG)
    x = system.pack(horizontal_pose(20.0, CFG), even_tension(CFG).tensions)
    assert np.max(np.abs(system(x))) < 1e-13


def test_fk_system_pack_unpack():
    system = FkSystem(TautSet((1, 2, 4)), CableLengths.of(LENGTHS[4]), CFG)
    T = np.array([5856.0, 49018.0, 0.0, 43126.0])
    pose, back = system.unpack(system.pack(pose_from_table(4), T))
    assert pose == pose_from_table(4)
    np.testing.assert_allclose(back, T)


@pytest.mark.parametrize("taut", [(1, 2), (1, 2, 4), (2, 3, 4), (1, 2, 3, 4)])
def test_analytic_jacobian_matches_central_differences(taut):
    rng = np.random.default_rng(len(taut))
    system = FkSystem(TautSet(taut), CableLengths.of(LENGTHS[4]), CFG)
    T = np.zeros(4)
    T[list(system.taut.indices)] = rng.uniform(1e4, 5e4, len(taut))
    x = system.pack(random_rigid_pose(rng), T) + rng.normal(0, 1e-3, system.size)
    h = 1e-6
    fd = np.column_stack([(system(x + h * e) - system(x - h * e)) / (2 * h) for e in np.eye(system.size)])
    np.testing.assert_allclose(system.jacobian(x), fd, atol=1e-7)
    np.testing.assert_allclose(jacobian(system, x, step=1e-8), fd, atol=1e-5)
