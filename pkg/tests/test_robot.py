"""Planar plant: kinematics, statics, trajectories, contact, tracking."""

import math

import pytest
from hypothesis import given, strategies as st

from cobotsim.errors import ReachabilityError
from cobotsim.robot import (
    Elbow,
    RobotConfig,
    WorkObject,
    WorldState,
    evaluate_trajectory,
    forward_kinematics,
    gravity_compensation,
    inverse_kinematics,
    plan_min_jerk,
    reachable,
    sense_contact,
    set_grasped,
    track_target,
)

CONFIG = RobotConfig()


def test_fk_reference_poses():
    assert forward_kinematics(CONFIG, (0.0, 0.0)) == pytest.approx((1.0, 0.0))
    assert forward_kinematics(CONFIG, (math.pi / 2, 0.0)) == pytest.approx((0.0, 1.0))
    # q=[pi/2, -pi/2]: distal link swings back to horizontal, giving (0.5, 0.5)
    assert forward_kinematics(CONFIG, (math.pi / 2, -math.pi / 2)) == pytest.approx((0.5, 0.5))


def test_ik_full_extension_boundary():
    for elbow in (Elbow.UP, Elbow.DOWN):
        q = inverse_kinematics(CONFIG, (1.0, 0.0), elbow)
        assert q == pytest.approx((0.0, 0.0), abs=1e-9)


def test_ik_elbow_branches_mirror():
    up = inverse_kinematics(CONFIG, (0.5, 0.5), Elbow.UP)
    down = inverse_kinematics(CONFIG, (0.5, 0.5), Elbow.DOWN)
    assert up[1] == pytest.approx(-down[1])
    assert up != down
    for q in (up, down):
        assert forward_kinematics(CONFIG, q) == pytest.approx((0.5, 0.5), abs=1e-9)
    # Up keeps the elbow counterclockwise of the chord to the target
    elbow_up_y = 0.5 * math.sin(up[0])
    elbow_down_y = 0.5 * math.sin(down[0])
    assert elbow_up_y > elbow_down_y


def test_ik_rejects_outside_annulus():
    with pytest.raises(ReachabilityError):
        inverse_kinematics(CONFIG, (2.1, 0.0))
    short = RobotConfig(link_lengths=(0.7, 0.3))
    with pytest.raises(ReachabilityError):
        inverse_kinematics(short, (0.1, 0.0))  # inside the inner hole


@given(
    st.floats(0.0, 1.0, allow_nan=False),
    st.floats(-math.pi, math.pi, allow_nan=False),
    st.sampled_from([Elbow.UP, Elbow.DOWN]),
)
def test_ik_fk_roundtrip_on_reachable_set(radius, angle, elbow):
    target = (radius * math.cos(angle), radius * math.sin(angle))
    if not reachable(CONFIG, target):
        return
    q = inverse_kinematics(CONFIG, target, elbow)
    out = forward_kinematics(CONFIG, q)
    assert math.hypot(out[0] - target[0], out[1] - target[1]) < 1e-9


def test_gravity_compensation_horizontal_reference():
    # symbolic statics at q=[0,0]: tau1 = g*(m1*l1/2 + m2*(l1 + l2/2)) = 19.62,
    # tau2 = g*m2*l2/2 = 4.905; with a 5 kg payload: 68.67 and 29.43
    assert gravity_compensation(CONFIG, (0.0, 0.0)) == pytest.approx((19.62, 4.905))
    assert gravity_compensation(CONFIG, (0.0, 0.0), payload_mass=5.0) == pytest.approx(
        (68.67, 29.43)
    )


def test_gravity_compensation_bent_pose_reference():
    # frozen from an independent symbolic-differentiation run at
    # q=[0.3, -0.4] with payload 1.5 kg
    tau = gravity_compensation(CONFIG, (0.3, -0.4), payload_mass=1.5)
    assert tau == pytest.approx((33.28790323294673, 12.20123857672179), rel=1e-12)


def test_gravity_compensation_vertical_pose_vanishes():
    tau = gravity_compensation(CONFIG, (math.pi / 2, 0.0), payload_mass=5.0)
    assert tau == pytest.approx((0.0, 0.0), abs=1e-12)


def test_gravity_compensation_zero_field():
    cfg = RobotConfig(gravity=0.0)
    assert gravity_compensation(cfg, (0.3, 0.7), payload_mass=3.0) == (0.0, 0.0)


@given(
    st.floats(-math.pi, math.pi),
    st.floats(-math.pi, math.pi),
    st.floats(0.0, 10.0),
)
def test_gravity_compensation_linear_in_payload(q1, q2, mp):
    base = gravity_compensation(CONFIG, (q1, q2), payload_mass=0.0)
    once = gravity_compensation(CONFIG, (q1, q2), payload_mass=mp)
    twice = gravity_compensation(CONFIG, (q1, q2), payload_mass=2.0 * mp)
    for axis in range(2):
        assert twice[axis] - once[axis] == pytest.approx(once[axis] - base[axis], abs=1e-9)


def test_min_jerk_boundaries_and_midpoint():
    traj = plan_min_jerk((0.0, 0.0), (0.4, -0.2), 2.0, origin_time=1.0)
    x0, v0 = evaluate_trajectory(traj, 1.0)
    assert x0 == (0.0, 0.0) and v0 == (0.0, 0.0)
    x1, v1 = evaluate_trajectory(traj, 3.0)
    assert x1 == (0.4, -0.2) and v1 == (0.0, 0.0)
    xm, _vm = evaluate_trajectory(traj, 2.0)
    assert xm == pytest.approx((0.2, -0.1))


def test_min_jerk_clamps_outside_segment():
    traj = plan_min_jerk((0.1, 0.1), (0.2, 0.3), 1.0, origin_time=5.0)
    assert evaluate_trajectory(traj, 0.0) == ((0.1, 0.1), (0.0, 0.0))
    assert evaluate_trajectory(traj, 100.0) == ((0.2, 0.3), (0.0, 0.0))


def test_min_jerk_peak_velocity():
    # s'(1/2) = 15/8, so the cruise peak is 1.875*(goal-start)/T
    traj = plan_min_jerk((0.0, 0.0), (0.8, 0.0), 4.0)
    _x, v = evaluate_trajectory(traj, 2.0)
    assert v[0] == pytest.approx(1.875 * 0.8 / 4.0)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_min_jerk_monotone_profile(t1, t2):
    lo, hi = sorted((t1, t2))
    traj = plan_min_jerk((0.0, 0.0), (1.0, 0.0), 1.0)
    x_lo, _ = evaluate_trajectory(traj, lo)
    x_hi, _ = evaluate_trajectory(traj, hi)
    assert x_lo[0] <= x_hi[0] + 1e-12


def test_contact_separated_is_zero():
    objects = (WorkObject(id="beam", position=(1.0, 1.0), radius=0.1, mass=1.0),)
    assert sense_contact(objects, (0.0, 0.0), probe_radius=0.05) == (0.0, 0.0)


def test_contact_reference_penetration():
    # probe 0.05 + object 0.10 = 0.15 m touch distance; center gap 0.14 m
    # leaves 0.01 m penetration, so the probe feels 2000*0.01 = 20 N along -x
    objects = (WorkObject(id="beam", position=(0.14, 0.0), radius=0.10, mass=1.0),)
    f = sense_contact(objects, (0.0, 0.0), probe_radius=0.05)
    assert f == pytest.approx((-20.0, 0.0))


def test_contact_ignores_grasped_objects():
    objects = (
        WorkObject(id="beam", position=(0.14, 0.0), radius=0.10, mass=1.0, grasped=True),
    )
    assert sense_contact(objects, (0.0, 0.0), probe_radius=0.05) == (0.0, 0.0)


def test_contact_force_is_continuous_across_boundary():
    objects = (WorkObject(id="beam", position=(0.5, 0.0), radius=0.10, mass=1.0),)
    touch = 0.15  # probe 0.05 + object 0.10
    prev = None
    for i in range(200):
        x = 0.5 - touch - 0.01 + 0.0001 * i  # sweep across the boundary
        f = sense_contact(objects, (x, 0.0), probe_radius=0.05)
        mag = math.hypot(*f)
        if prev is not None:
            assert abs(mag - prev) < 0.25  # 2000 N/m * 0.0001 m + slack
        prev = mag


def test_track_target_velocity_clamp_is_exact():
    world = WorldState(q=(0.0, 0.0))
    # target requires a large joint move; one tick may advance 2 rad/s * dt
    out, tracked = track_target(CONFIG, world, (0.0, 1.0), dt=0.01)
    assert tracked
    assert abs(out.q[0] - world.q[0]) == pytest.approx(0.02)
    assert out.q_dot[0] == pytest.approx(2.0)
    assert out.time == pytest.approx(0.01)


def test_track_target_fixed_point():
    world = WorldState(q=(0.4, 0.6))
    ee = world.end_effector(CONFIG)
    out, tracked = track_target(CONFIG, world, ee, dt=0.01)
    assert tracked
    assert out.q == pytest.approx(world.q, abs=1e-9)
    assert out.q_dot == pytest.approx((0.0, 0.0), abs=1e-7)
    assert out.time == pytest.approx(world.time + 0.01)


def test_track_target_unreachable_holds_pose():
    world = WorldState(q=(0.4, 0.6), q_dot=(1.0, 1.0))
    out, tracked = track_target(CONFIG, world, (5.0, 5.0), dt=0.01)
    assert not tracked
    assert out.q == world.q
    assert out.q_dot == (0.0, 0.0)
    assert out.time == pytest.approx(0.01)


def test_track_target_converges_to_target():
    world = WorldState(q=(0.1, 0.2))
    target = (0.3, 0.55)
    for _ in range(400):
        world, tracked = track_target(CONFIG, world, target, dt=0.01)
        assert tracked
    ee = world.end_effector(CONFIG)
    assert ee == pytest.approx(target, abs=1e-6)


def test_grasped_object_rides_end_effector():
    world = WorldState(
        q=(0.1, 0.2),
        objects=(WorkObject(id="beam", position=(0.9, 0.0), radius=0.05, mass=5.0),),
    )
    world = set_grasped(world, "beam", True, world.end_effector(CONFIG))
    assert world.object_by_id("beam").position == world.end_effector(CONFIG)
    world, _ = track_target(CONFIG, world, (0.4, 0.4), dt=0.05)
    assert world.object_by_id("beam").position == world.end_effector(CONFIG)
    world = set_grasped(world, "beam", False, world.end_effector(CONFIG))
    pos = world.object_by_id("beam").position
    world, _ = track_target(CONFIG, world, (0.2, 0.6), dt=0.05)
    assert world.object_by_id("beam").position == pos  # released objects stay put


def test_grasping_second_object_releases_first():
    world = WorldState(
        objects=(
            WorkObject(id="a", position=(0.5, 0.0), radius=0.05, mass=1.0, grasped=True),
            WorkObject(id="b", position=(0.0, 0.5), radius=0.05, mass=1.0),
        )
    )
    world = set_grasped(world, "b", True, (0.0, 0.5))
    assert not world.object_by_id("a").grasped
    assert world.object_by_id("b").grasped


def test_unknown_object_id_raises():
    with pytest.raises(KeyError):
        set_grasped(WorldState(), "ghost", True, (0.0, 0.0))


def test_world_rejects_double_grasp():
    with pytest.raises(ValueError):
        WorldState(
            objects=(
                WorkObject(id="a", position=(0.0, 0.0), radius=0.1, mass=1.0, grasped=True),
                WorkObject(id="b", position=(0.0, 0.0), radius=0.1, mass=1.0, grasped=True),
            )
        )


def test_config_validation():
    with pytest.raises(ValueError):
        RobotConfig(link_lengths=(0.0, 0.5))
    with pytest.raises(ValueError):
        RobotConfig(payload_mass=-1.0)
    with pytest.raises(ValueError):
        WorkObject(id="x", position=(0.0, 0.0), radius=0.0, mass=1.0)
