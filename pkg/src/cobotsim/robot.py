"""Planar two-link workcell plant.

Kinematics, gravity and payload compensation, minimum-jerk desired
trajectories, penalty-based contact sensing, and the velocity-limited joint
update that tracks the compliant target. Joints are kinematic: the session
layer owns compliance and arbitration, so joint-space dynamics would add
nothing observable. Gravity compensation is still computed as a telemetry
channel because operator effort is measured against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

from .errors import ReachabilityError

Vec2 = tuple[float, float]

JOINT_VELOCITY_LIMIT = 2.0  # rad/s
K_CONTACT = 2000.0  # N/m
PROBE_RADIUS = 0.05  # m

TWO_PI = 2.0 * math.pi


class Elbow(str, Enum):
    UP = "up"
    DOWN = "down"


def _vec2(values: Sequence[float], name: str) -> Vec2:
    out = tuple(float(x) for x in values)
    if len(out) != 2:
        raise ValueError(f"{name} must have exactly 2 components, got {len(out)}")
    if any(not math.isfinite(x) for x in out):
        raise ValueError(f"{name} has non-finite component: {out}")
    return out  # type: ignore[return-value]


@dataclass(frozen=True)
class RobotConfig:
    link_lengths: Vec2 = (0.5, 0.5)
    link_masses: Vec2 = (2.0, 2.0)
    gravity: float = 9.81  # m/s^2, acting along -y in the plane
    payload_mass: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "link_lengths", _vec2(self.link_lengths, "link_lengths"))
        object.__setattr__(self, "link_masses", _vec2(self.link_masses, "link_masses"))
        if any(l <= 0 for l in self.link_lengths):
            raise ValueError(f"link lengths must be strictly positive: {self.link_lengths}")
        if any(m <= 0 for m in self.link_masses):
            raise ValueError(f"link masses must be strictly positive: {self.link_masses}")
        if self.payload_mass < 0:
            raise ValueError(f"payload mass must be >= 0: {self.payload_mass}")

    @property
    def reach_max(self) -> float:
        return self.link_lengths[0] + self.link_lengths[1]

    @property
    def reach_min(self) -> float:
        return abs(self.link_lengths[0] - self.link_lengths[1])


@dataclass(frozen=True)
class WorkObject:
    id: str
    position: Vec2
    radius: float
    mass: float
    grasped: bool = False

    def __post_init__(self):
        object.__setattr__(self, "position", _vec2(self.position, "position"))
        if self.radius <= 0:
            raise ValueError(f"object {self.id!r} radius must be > 0")
        if self.mass < 0:
            raise ValueError(f"object {self.id!r} mass must be >= 0")


@dataclass(frozen=True)
class WorldState:
    """Joint state plus scene; the end effector is derived, never stored."""

    q: Vec2 = (0.0, 0.0)
    q_dot: Vec2 = (0.0, 0.0)
    objects: tuple[WorkObject, ...] = field(default_factory=tuple)
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "q", _vec2(self.q, "q"))
        object.__setattr__(self, "q_dot", _vec2(self.q_dot, "q_dot"))
        object.__setattr__(self, "objects", tuple(self.objects))
        if sum(1 for o in self.objects if o.grasped) > 1:
            raise ValueError("at most one object may be grasped")

    def end_effector(self, config: RobotConfig) -> Vec2:
        return forward_kinematics(config, self.q)

    def grasped_object(self) -> Optional[WorkObject]:
        for obj in self.objects:
            if obj.grasped:
                return obj
        return None

    def object_by_id(self, object_id: str) -> WorkObject:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        raise KeyError(f"no object with id {object_id!r}")


@dataclass(frozen=True)
class DesiredTrajectory:
    """Minimum-jerk segment; evaluation clamps outside [0, duration]."""

    start: Vec2
    goal: Vec2
    duration: float
    origin_time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "start", _vec2(self.start, "start"))
        object.__setattr__(self, "goal", _vec2(self.goal, "goal"))
        if not (self.duration > 0):
            raise ValueError(f"duration must be > 0: {self.duration}")


def forward_kinematics(config: RobotConfig, q: Sequence[float]) -> Vec2:
    q1, q2 = float(q[0]), float(q[1])
    l1, l2 = config.link_lengths
    return (
        l1 * math.cos(q1) + l2 * math.cos(q1 + q2),
        l1 * math.sin(q1) + l2 * math.sin(q1 + q2),
    )


def reachable(config: RobotConfig, target: Sequence[float]) -> bool:
    r = math.hypot(float(target[0]), float(target[1]))
    return config.reach_min - 1e-12 <= r <= config.reach_max + 1e-12


def inverse_kinematics(
    config: RobotConfig, target: Sequence[float], elbow: Elbow = Elbow.DOWN
) -> Vec2:
    """Analytic two-link inverse kinematics on the requested elbow branch.

    Up keeps the elbow on the counterclockwise side of the shoulder-target
    chord, Down on the clockwise side; both coincide on the annulus boundary.
    """
    t = _vec2(target, "target")
    l1, l2 = config.link_lengths
    r = math.hypot(t[0], t[1])
    if not reachable(config, t):
        raise ReachabilityError(
            f"target {t} at distance {r:.6f} outside annulus "
            f"[{config.reach_min:.6f}, {config.reach_max:.6f}]"
        )
    c2 = (r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    c2 = min(1.0, max(-1.0, c2))  # roundoff at the annulus boundary
    q2 = math.acos(c2)
    if elbow is Elbow.UP:
        q2 = -q2
    q1 = math.atan2(t[1], t[0]) - math.atan2(l2 * math.sin(q2), l1 + l2 * c2)
    return (q1, q2)


def gravity_compensation(
    config: RobotConfig, q: Sequence[float], payload_mass: Optional[float] = None
) -> Vec2:
    """Joint torques cancelling link weight (point masses at link midpoints)
    plus an optional payload carried at the end effector."""
    mp = config.payload_mass if payload_mass is None else float(payload_mass)
    if mp < 0:
        raise ValueError(f"payload mass must be >= 0: {mp}")
    q1, q2 = float(q[0]), float(q[1])
    l1, l2 = config.link_lengths
    m1, m2 = config.link_masses
    g = config.gravity
    c1 = math.cos(q1)
    c12 = math.cos(q1 + q2)
    tau1 = g * (m1 * (l1 / 2.0) * c1 + m2 * (l1 * c1 + (l2 / 2.0) * c12) + mp * (l1 * c1 + l2 * c12))
    tau2 = g * (m2 * (l2 / 2.0) * c12 + mp * l2 * c12)
    return (tau1, tau2)


def plan_min_jerk(
    start: Sequence[float], goal: Sequence[float], duration: float, origin_time: float = 0.0
) -> DesiredTrajectory:
    return DesiredTrajectory(
        start=_vec2(start, "start"),
        goal=_vec2(goal, "goal"),
        duration=float(duration),
        origin_time=float(origin_time),
    )


def evaluate_trajectory(traj: DesiredTrajectory, t: float) -> tuple[Vec2, Vec2]:
    """Position and velocity of the minimum-jerk profile at absolute time t."""
    tau = (t - traj.origin_time) / traj.duration
    if tau <= 0.0:
        return traj.start, (0.0, 0.0)
    if tau >= 1.0:
        return traj.goal, (0.0, 0.0)
    s = tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau))
    s_dot = tau * tau * (30.0 + tau * (-60.0 + 30.0 * tau)) / traj.duration
    x = tuple(a + (b - a) * s for a, b in zip(traj.start, traj.goal))
    v = tuple((b - a) * s_dot for a, b in zip(traj.start, traj.goal))
    return x, v  # type: ignore[return-value]


def sense_contact(
    objects: Sequence[WorkObject],
    end_effector: Sequence[float],
    probe_radius: float = PROBE_RADIUS,
    k_contact: float = K_CONTACT,
) -> Vec2:
    """Linear penalty force on the probe from overlapping non-grasped objects.

    Continuous across the contact boundary: force grows from zero with
    penetration depth along the separation normal. Exact center coincidence
    has no defined normal and contributes nothing.
    """
    ee = _vec2(end_effector, "end_effector")
    fx, fy = 0.0, 0.0
    for obj in objects:
        if obj.grasped:
            continue
        dx = ee[0] - obj.position[0]
        dy = ee[1] - obj.position[1]
        dist = math.hypot(dx, dy)
        overlap = (probe_radius + obj.radius) - dist
        if overlap <= 0.0 or dist == 0.0:
            continue
        scale = k_contact * overlap / dist
        fx += scale * dx
        fy += scale * dy
    return (fx, fy)


def _wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi] so the joint takes the short way around."""
    a = math.fmod(a + math.pi, TWO_PI)
    if a <= 0.0:
        a += TWO_PI
    return a - math.pi


def _nearest_branch(config: RobotConfig, target: Vec2, q: Vec2) -> Vec2:
    """IK solution (over both elbow branches) closest to the current joints."""
    best = None
    best_cost = math.inf
    for elbow in (Elbow.DOWN, Elbow.UP):
        cand = inverse_kinematics(config, target, elbow)
        cost = abs(_wrap_angle(cand[0] - q[0])) + abs(_wrap_angle(cand[1] - q[1]))
        if cost < best_cost:
            best = cand
            best_cost = cost
    assert best is not None
    return best


def track_target(
    config: RobotConfig,
    world: WorldState,
    target: Sequence[float],
    dt: float,
    velocity_limit: float = JOINT_VELOCITY_LIMIT,
) -> tuple[WorldState, bool]:
    """Move joints toward the IK solution of target, one velocity-limited step.

    Picks the elbow branch nearest the current pose. An unreachable target
    holds the pose (joints stop, time still advances); the boolean reports
    whether tracking was possible. A grasped object rides the end effector.
    """
    if not (dt > 0):
        raise ValueError(f"dt must be > 0, got {dt}")
    t = _vec2(target, "target")
    if reachable(config, t):
        q_goal = _nearest_branch(config, t, world.q)
        max_step = velocity_limit * dt
        dq = tuple(
            min(max(_wrap_angle(g - c), -max_step), max_step)
            for g, c in zip(q_goal, world.q)
        )
        q_new = (world.q[0] + dq[0], world.q[1] + dq[1])
        q_dot = (dq[0] / dt, dq[1] / dt)
        tracked = True
    else:
        q_new = world.q
        q_dot = (0.0, 0.0)
        tracked = False
    ee = forward_kinematics(config, q_new)
    objects = tuple(
        replace(o, position=ee) if o.grasped else o for o in world.objects
    )
    world = replace(world, q=q_new, q_dot=q_dot, objects=objects, time=world.time + dt)
    return world, tracked


def set_grasped(world: WorldState, object_id: str, grasped: bool, ee: Vec2) -> WorldState:
    """Scripted grasp/release. Grasping snaps the object to the end effector
    and releases any other held object; releasing leaves it where it is."""
    world.object_by_id(object_id)  # raise KeyError early for unknown ids
    objects = []
    for obj in world.objects:
        if obj.id == object_id:
            if grasped:
                objects.append(replace(obj, grasped=True, position=ee))
            else:
                objects.append(replace(obj, grasped=False))
        elif grasped and obj.grasped:
            objects.append(replace(obj, grasped=False))
        else:
            objects.append(obj)
    return replace(world, objects=tuple(objects))
