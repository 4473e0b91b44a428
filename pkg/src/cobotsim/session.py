"""Authoritative tick-based session engine.

One session owns the whole simulation state: world, compliance, arbitration,
vocabulary, knowledge graph, planner, and the inbound message queue. Ticks
are the only place state changes; messages apply at tick boundaries after a
seeded latency model, so the evolution is a pure function of (scenario,
ordered applied messages) and replays bitwise. Every tick appends a record
with the applied messages and a canonical snapshot hash; the hash excludes
the tick counter and clock so a stationary world hashes constant.
"""

from __future__ import annotations

import math
import random
from bisect import insort
from dataclasses import dataclass, field, replace
from typing import Optional

from . import admittance as adm
from . import arbitration as arb
from . import robot as rb
from .errors import CobotSimError, DivergenceError, ProtocolError, StaleSeqError
from .knowledge import KnowledgeGraph, KnowledgeTriple, assert_triple, infer_intent
from .language import Effect, apply_command, interpret
from .protocol import (
    COMMAND_TYPES,
    Envelope,
    envelope_from_dict,
    make_ack,
    make_error,
    state_hash,
)
from .scenario import Scenario


@dataclass(frozen=True)
class LatencyModel:
    """Seeded one-way delay and loss applied to one client's messages."""

    base_ms: float = 0.0
    jitter_ms: float = 0.0
    loss: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.base_ms < 0 or self.jitter_ms < 0:
            raise ValueError("delays must be >= 0")
        if not (0.0 <= self.loss < 1.0):
            raise ValueError(f"loss {self.loss} outside [0, 1)")

    def sampler(self) -> "LatencySampler":
        return LatencySampler(self)


class LatencySampler:
    """Draws (delay_ms, lost) pairs; two fixed draws per message so the
    stream is reproducible regardless of parameter values."""

    def __init__(self, model: LatencyModel):
        self.model = model
        self._rng = random.Random(model.seed)

    def sample(self) -> tuple[float, bool]:
        u = self._rng.random()
        v = self._rng.random()
        delay = self.model.base_ms + (2.0 * u - 1.0) * self.model.jitter_ms
        return max(0.0, delay), v < self.model.loss


def _event_tick(at: float, dt: float) -> int:
    """Tick whose window [k*dt, (k+1)*dt) contains the event time."""
    return max(0, math.ceil(at / dt - 1e-9))


@dataclass
class TickRecord:
    tick: int
    applied: list[dict]
    hash: str

    def to_dict(self) -> dict:
        return {"tick": self.tick, "applied": self.applied, "hash": self.hash}


class Session:
    """One isolated simulation session driven by tick()."""

    def __init__(self, scenario: Scenario, sid: str = "local"):
        self.scenario = scenario
        self.sid = sid
        self.dt = scenario.dt
        self.tick_index = 0
        self.frozen = False

        self.world = rb.WorldState(
            q=scenario.start_joints, objects=scenario.objects, time=0.0
        )
        self.params = adm.clamp_to_stable(scenario.admittance, scenario.bounds, self.dt)
        self.compliance = adm.ComplianceState.at_rest(
            self.world.end_effector(scenario.robot)
        )
        lam = scenario.initial_lambda
        self.arbitration = arb.ArbitrationState(
            lambda_=lam,
            mode=arb.classify_mode(lam),
            source=scenario.source,
            filtered_lambda=lam,
        )
        graph = KnowledgeGraph()
        for triple in scenario.triples:
            graph = assert_triple(graph, triple)
        self.graph = graph
        self.intent = infer_intent(graph, scenario.worker, scenario.rules)
        self.trajectory: Optional[rb.DesiredTrajectory] = None
        self.speed_scale = 1.0
        self.u_h: tuple[float, float] = (0.0, 0.0)

        self._queue: list[tuple[int, str, int, Envelope]] = []
        self._last_seq: dict[str, int] = {}
        self._last_apply_tick: dict[str, int] = {}
        self._latency: dict[str, LatencySampler] = {}
        self._goals: dict[int, list] = {}
        for event in scenario.timeline:
            if event.action == "goal":
                tick = _event_tick(event.at, self.dt)
                self._goals.setdefault(tick, []).append(event)

        self.log: list[TickRecord] = []
        self.outbox: list[Envelope] = []
        self.notes: list[str] = []
        self.mode_timeline: list[tuple[float, str]] = [(0.0, self.arbitration.mode.value)]
        self._server_seq = 0

    # -- transport-facing API -------------------------------------------------

    def set_latency(self, client: str, model: LatencyModel) -> None:
        self._latency[client] = model.sampler()

    def submit(self, client: str, env: Envelope) -> list[Envelope]:
        """Queue one inbound message; returns immediate replies only.

        Acks for applied commands are emitted from tick() via the outbox.
        Never raises on bad input: every rejection is a typed error frame.
        """
        if self.frozen:
            return [self._error("session_frozen", "session halted by invariant failure", env.seq)]
        if env.type not in COMMAND_TYPES:
            return [self._error("unexpected_type", f"{env.type!r} is not a command", env.seq)]
        last = self._last_seq.get(client, -1)
        if env.seq <= last:
            err = StaleSeqError(f"seq {env.seq} not beyond {last} for client {client!r}")
            return [self._error(err.code, err.reason, env.seq)]
        if env.type == "inject_latency":
            self._last_seq[client] = env.seq
            p = env.payload
            try:
                model = LatencyModel(
                    base_ms=p["base_ms"], jitter_ms=p["jitter_ms"], loss=p["loss"], seed=p["seed"]
                )
            except (KeyError, ValueError) as exc:
                return [self._error("bad_payload", str(exc), env.seq)]
            self.set_latency(client, model)
            return [make_ack(self.sid, self._next_seq(), env.seq, note="latency set")]
        self._last_seq[client] = env.seq
        sampler = self._latency.get(client)
        delay_ms, lost = sampler.sample() if sampler else (0.0, False)
        if lost:
            self.notes.append(f"tick {self.tick_index}: dropped seq {env.seq} from {client!r}")
            return []
        delay_ticks = math.ceil(delay_ms / (self.dt * 1000.0))
        apply_tick = max(
            self.tick_index + delay_ticks, self._last_apply_tick.get(client, 0)
        )
        self._last_apply_tick[client] = apply_tick
        insort(self._queue, (apply_tick, client, env.seq, env), key=lambda r: r[:3])
        return []

    def drain_outbox(self) -> list[Envelope]:
        out = self.outbox
        self.outbox = []
        return out

    # -- tick loop ------------------------------------------------------------

    def tick(self) -> Optional[dict]:
        """Advance one tick; returns the snapshot payload on broadcast ticks."""
        due = []
        while self._queue and self._queue[0][0] <= self.tick_index:
            due.append(self._queue.pop(0)[3])
        return self._run_tick(due)

    def run_until(self, t: float) -> None:
        while self.tick_index * self.dt < t - 1e-9:
            self.tick()

    def _run_tick(self, due: list[Envelope]) -> Optional[dict]:
        if self.frozen:
            raise CobotSimError("session is frozen")
        k = self.tick_index
        applied: list[dict] = []
        try:
            for event in self._goals.pop(k, []):
                self._apply_goal(event)
            for env in due:
                self._apply(env)
                applied.append(env.to_dict())
            self._advance_dynamics()
        except Exception as exc:
            self.frozen = True
            self.outbox.append(
                self._error("session_frozen", f"invariant failure at tick {k}: {exc}")
            )
            raise
        self.tick_index = k + 1
        snapshot = self.snapshot_payload()
        record = TickRecord(tick=k, applied=applied, hash=self._hash_snapshot(snapshot))
        self.log.append(record)
        if k % self.scenario.broadcast_every == 0:
            return snapshot
        return None

    def _advance_dynamics(self) -> None:
        scenario = self.scenario
        state = self.arbitration
        if state.source is arb.ArbitrationSource.SHARED_AUTONOMY:
            force_mag = math.hypot(*self.u_h)
            state = arb.auto_tune_lambda(scenario.policy, force_mag, self.intent, self.dt, state)
            self.arbitration = state
        if state.mode.value != self.mode_timeline[-1][1]:
            self.mode_timeline.append((self.world.time, state.mode.value))

        blended = arb.blend(state.lambda_, self.u_h, (0.0, 0.0))
        ee = self.world.end_effector(scenario.robot)
        contact = rb.sense_contact(
            self.world.objects, ee, scenario.probe_radius, scenario.k_contact
        )
        f_ext = (contact[0] + blended[0], contact[1] + blended[1])

        c = self.compliance
        if state.mode is arb.Mode.MANUAL:
            # full human authority: the desired trajectory follows the hand,
            # leaving a pure mass-damper feel with no spring pull-back
            dx, v_new = adm.guidance_step(self.params, c.v_c, f_ext, self.dt)
            x_c = (c.x_c[0] + dx[0], c.x_c[1] + dx[1])
            self.compliance = adm.ComplianceState(
                x_c=x_c, v_c=v_new, x_d=x_c, v_d=(0.0, 0.0), f_ext=f_ext
            )
        else:
            if self.trajectory is not None:
                x_d, v_d = rb.evaluate_trajectory(self.trajectory, self.world.time)
            else:
                x_d, v_d = c.x_d, (0.0, 0.0)
            c = adm.ComplianceState(x_c=c.x_c, v_c=c.v_c, x_d=x_d, v_d=v_d, f_ext=f_ext)
            self.compliance = adm.step(self.params, c, self.dt)

        self.world, tracked = rb.track_target(
            scenario.robot,
            self.world,
            self.compliance.x_c,
            self.dt,
            scenario.joint_velocity_limit,
        )
        if not tracked:
            self.notes.append(
                f"tick {self.tick_index}: compliant target outside reach, holding pose"
            )

    # -- message application --------------------------------------------------

    def _apply(self, env: Envelope) -> None:
        handler = {
            "set_lambda": self._apply_set_lambda,
            "set_mode": self._apply_set_mode,
            "nl_command": self._apply_nl_command,
            "wrench": self._apply_wrench,
            "grasp": self._apply_grasp,
            "release": self._apply_release,
            "assert_triple": self._apply_assert_triple,
        }.get(env.type)
        if handler is None:
            self.outbox.append(
                self._error("unexpected_type", f"{env.type!r} cannot apply", env.seq)
            )
            return
        try:
            note = handler(env.payload)
        except (ValueError, KeyError, CobotSimError) as exc:
            self.outbox.append(self._error("rejected", str(exc), env.seq))
            return
        self.outbox.append(make_ack(self.sid, self._next_seq(), env.seq, note=note))

    def _apply_set_lambda(self, payload: dict) -> str:
        self.arbitration = arb.set_lambda(self.arbitration, payload["value"])
        return f"lambda={self.arbitration.lambda_:g}"

    def _apply_set_mode(self, payload: dict) -> str:
        source = arb.ArbitrationSource(payload["source"])
        state = self.arbitration
        self.arbitration = replace(state, source=source, filtered_lambda=state.lambda_)
        return f"source={source.value}"

    def _apply_nl_command(self, payload: dict) -> str:
        ids = tuple(o.id for o in self.world.objects)
        cmd = interpret(payload["text"], self.scenario.bank, object_ids=ids)
        if cmd is None:
            return "no_command"
        if cmd.effect is Effect.SCALE_SPEED:
            self._rescale_speed(cmd.factor)
        else:
            self.params = apply_command(cmd, self.params, self.scenario.bounds, self.dt)
        return f"matched={cmd.matched_token}"

    def _rescale_speed(self, factor: float) -> None:
        """Speed factor < 1 slows motion: active segment is retimed from the
        current desired point, future goals stretch the same way."""
        self.speed_scale *= factor
        traj = self.trajectory
        if traj is None:
            return
        now = self.world.time
        end = traj.origin_time + traj.duration
        if now >= end:
            return
        x_now, _ = rb.evaluate_trajectory(traj, now)
        remaining = (end - now) / factor
        self.trajectory = rb.plan_min_jerk(x_now, traj.goal, remaining, origin_time=now)

    def _apply_wrench(self, payload: dict) -> str:
        f = payload["f"]
        self.u_h = (float(f[0]), float(f[1]))
        return f"wrench=({self.u_h[0]:g},{self.u_h[1]:g})"

    def _apply_grasp(self, payload: dict) -> str:
        ee = self.world.end_effector(self.scenario.robot)
        self.world = rb.set_grasped(self.world, payload["object_id"], True, ee)
        return f"grasped={payload['object_id']}"

    def _apply_release(self, payload: dict) -> str:
        ee = self.world.end_effector(self.scenario.robot)
        self.world = rb.set_grasped(self.world, payload["object_id"], False, ee)
        return f"released={payload['object_id']}"

    def _apply_assert_triple(self, payload: dict) -> str:
        triple = KnowledgeTriple(
            head=payload["head"],
            relation=payload["relation"],
            tail=payload["tail"],
            confidence=payload["confidence"],
        )
        self.graph = assert_triple(self.graph, triple)
        self.intent = infer_intent(self.graph, self.scenario.worker, self.scenario.rules)
        return f"asserted={triple.head},{triple.relation},{triple.tail}"

    def _apply_goal(self, event) -> None:
        duration = event.duration / self.speed_scale
        self.trajectory = rb.plan_min_jerk(
            self.compliance.x_d, event.waypoint, duration, origin_time=self.world.time
        )

    # -- snapshots and replay -------------------------------------------------

    def grasped_mass(self) -> float:
        obj = self.world.grasped_object()
        return obj.mass if obj is not None else 0.0

    def snapshot_payload(self) -> dict:
        c = self.compliance
        s = self.arbitration
        traj = self.trajectory
        return {
            "tick": self.tick_index,
            "time": self.world.time,
            "world": {
                "q": list(self.world.q),
                "q_dot": list(self.world.q_dot),
                "ee": list(self.world.end_effector(self.scenario.robot)),
                "objects": [
                    {
                        "id": o.id,
                        "position": list(o.position),
                        "radius": o.radius,
                        "mass": o.mass,
                        "grasped": o.grasped,
                    }
                    for o in self.world.objects
                ],
            },
            "compliance": {
                "x_c": list(c.x_c),
                "v_c": list(c.v_c),
                "x_d": list(c.x_d),
                "v_d": list(c.v_d),
                "f_ext": list(c.f_ext),
                "mass": list(self.params.mass),
                "damping": list(self.params.damping),
                "stiffness": list(self.params.stiffness),
            },
            "arbitration": {
                "lambda": s.lambda_,
                "filtered_lambda": s.filtered_lambda,
                "mode": s.mode.value,
                "source": s.source.value,
            },
            "intent": {
                "intent": self.intent.intent.value,
                "confidence": self.intent.confidence,
            },
            "wrench": list(self.u_h),
            "speed_scale": self.speed_scale,
            "trajectory": None
            if traj is None
            else {
                "start": list(traj.start),
                "goal": list(traj.goal),
                "duration": traj.duration,
                "origin_time": traj.origin_time,
            },
        }

    @staticmethod
    def _hash_snapshot(snapshot: dict) -> str:
        # tick and clock are excluded so a stationary world hashes constant
        doc = {k: v for k, v in snapshot.items() if k not in ("tick", "time")}
        return state_hash(doc)

    def _next_seq(self) -> int:
        self._server_seq += 1
        return self._server_seq

    def _error(self, code: str, reason: str, of_seq: Optional[int] = None) -> Envelope:
        return make_error(self.sid, self._next_seq(), code, reason, of_seq=of_seq)


def handle_frame(session: Session, client: str, text: str) -> list[Envelope]:
    """Transport shim: decode one raw frame and submit it. Malformed input
    yields exactly one typed error frame, never an exception."""
    try:
        env = envelope_from_dict_or_text(text)
    except ProtocolError as exc:
        return [make_error(session.sid, session._next_seq(), exc.code, exc.reason)]
    return session.submit(client, env)


def envelope_from_dict_or_text(frame) -> Envelope:
    if isinstance(frame, (str, bytes)):
        from .protocol import decode_envelope

        return decode_envelope(frame if isinstance(frame, str) else frame.decode("utf-8", "replace"))
    return envelope_from_dict(frame)


def replay(records: list[dict], scenario: Scenario, sid: str = "replay") -> list[str]:
    """Re-execute logged ticks and compare snapshot hashes.

    Returns the hash sequence; raises DivergenceError at the first tick
    whose recomputed hash differs from the recorded one.
    """
    session = Session(scenario, sid=sid)
    hashes: list[str] = []
    expected_tick = 0
    for record in records:
        if not isinstance(record, dict) or "tick" not in record:
            continue  # header or foreign line
        tick = record["tick"]
        if tick != expected_tick:
            raise ProtocolError("log_gap", f"expected tick {expected_tick}, log has {tick}")
        due = [envelope_from_dict(doc) for doc in record.get("applied", [])]
        session._run_tick(due)
        actual = session.log[-1].hash
        if actual != record.get("hash"):
            raise DivergenceError(tick, record.get("hash", "?"), actual)
        hashes.append(actual)
        expected_tick += 1
    return hashes
