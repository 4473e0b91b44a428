"""Scenario files: the complete, validated description of one session.

A scenario is a JSON document holding the robot and scene, admittance
defaults and clamp bounds, the vocabulary bank, initial knowledge triples,
the arbitration source and tuning policy, and a time-sorted event timeline.
Validation never stops at the first problem: every finding carries a path
into the document (for example "timeline[2].waypoint").

Document shape:

    {
      "name": "carpenter", "seed": 7, "duration": 16.0,
      "tick_hz": 100.0, "broadcast_every": 5,
      "robot": {"link_lengths": [0.5, 0.5], "link_masses": [2.0, 2.0],
                "gravity": 9.81, "start_joints": [0.3, 0.9],
                "joint_velocity_limit": 2.0, "probe_radius": 0.05,
                "k_contact": 2000.0, "gravity_compensation": true},
      "objects": [{"id": "beam", "position": [0.8, 0.0], "radius": 0.05,
                   "mass": 5.0}],
      "admittance": {"mass": [1, 1], "damping": [20, 20],
                     "stiffness": [100, 100],
                     "bounds": {"mass": {"min": [...], "max": [...]},
                                "damping": {...}, "stiffness": {...}}},
      "vocabulary": [{"token": "softly", "effect": "scale_stiffness",
                      "factor": 0.5, "aliases": ["soft"]}],
      "knowledge": {"worker": "worker1",
                    "triples": [{"head": "worker1", "relation": "requests",
                                 "tail": "guidance", "confidence": 0.9}]},
      "arbitration": {"source": "shared_control", "initial_lambda": 0.0,
                      "policy": {"force_threshold": 5.0, "gain": 0.5,
                                 "time_constant": 0.3, "intent_floor": 0.8}},
      "timeline": [{"at": 0.5, "action": "goal", "waypoint": [0.7, 0.0],
                    "duration": 3.0},
                   {"at": 4.0, "action": "grasp", "object_id": "beam"},
                   {"at": 4.5, "action": "set_lambda", "value": 0.5},
                   {"at": 5.5, "action": "wrench", "f": [2.0, 1.5]},
                   {"at": 9.0, "action": "nl_command", "text": "softly"}]
    }

"vocabulary" and "knowledge" may be omitted (stock bank, empty graph).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Optional

from .admittance import AdmittanceParams, ParamBounds, validate_bounds
from .arbitration import ArbitrationSource, AutoTunePolicy
from .errors import ScenarioError, StabilityError
from .knowledge import DEFAULT_RULES, CompletionRule, KnowledgeTriple
from .language import Effect, VocabEntry, VocabularyBank, default_bank
from .robot import RobotConfig, WorkObject, reachable

Findings = list[tuple[str, str]]

EVENT_ACTIONS = frozenset(
    {"set_lambda", "set_mode", "nl_command", "wrench", "grasp", "release", "goal"}
)


@dataclass(frozen=True)
class TimelineEvent:
    at: float
    action: str
    value: Optional[float] = None  # set_lambda
    source: Optional[str] = None  # set_mode
    text: Optional[str] = None  # nl_command
    f: Optional[tuple[float, float]] = None  # wrench
    object_id: Optional[str] = None  # grasp / release
    waypoint: Optional[tuple[float, float]] = None  # goal
    duration: Optional[float] = None  # goal


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    duration: float
    robot: RobotConfig
    start_joints: tuple[float, float]
    objects: tuple[WorkObject, ...]
    admittance: AdmittanceParams
    bounds: ParamBounds
    bank: VocabularyBank
    triples: tuple[KnowledgeTriple, ...]
    source: ArbitrationSource
    policy: AutoTunePolicy
    timeline: tuple[TimelineEvent, ...]
    tick_hz: float = 100.0
    broadcast_every: int = 5
    joint_velocity_limit: float = 2.0
    probe_radius: float = 0.05
    k_contact: float = 2000.0
    gravity_compensation: bool = True
    initial_lambda: float = 0.0
    worker: str = "worker1"
    rules: tuple[CompletionRule, ...] = DEFAULT_RULES
    raw: dict = field(default=None, repr=False, compare=False)  # type: ignore[assignment]

    @property
    def dt(self) -> float:
        return 1.0 / self.tick_hz

    def without_compensation(self) -> "Scenario":
        return replace(self, gravity_compensation=False)

    def with_compensation(self, enabled: bool) -> "Scenario":
        return replace(self, gravity_compensation=enabled)


def _number(doc: dict, key: str, path: str, findings: Findings, default=None):
    value = doc.get(key, default)
    if value is None:
        findings.append((f"{path}.{key}", "missing required number"))
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        findings.append((f"{path}.{key}", f"expected a number, got {value!r}"))
        return None
    if not math.isfinite(float(value)):
        findings.append((f"{path}.{key}", "must be finite"))
        return None
    return float(value)


def _vec(doc: dict, key: str, path: str, findings: Findings, default=None):
    value = doc.get(key, default)
    if value is None:
        findings.append((f"{path}.{key}", "missing required [x, y] pair"))
        return None
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        findings.append((f"{path}.{key}", f"expected [x, y], got {value!r}"))
        return None
    out = []
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(float(v)):
            findings.append((f"{path}.{key}[{i}]", f"expected finite number, got {v!r}"))
            return None
        out.append(float(v))
    return (out[0], out[1])


def _parse_robot(doc: dict, findings: Findings) -> tuple[Optional[RobotConfig], dict]:
    section = doc.get("robot", {})
    if not isinstance(section, dict):
        findings.append(("robot", "must be an object"))
        return None, {}
    links = _vec(section, "link_lengths", "robot", findings, default=(0.5, 0.5))
    masses = _vec(section, "link_masses", "robot", findings, default=(2.0, 2.0))
    gravity = _number(section, "gravity", "robot", findings, default=9.81)
    if None in (links, masses, gravity):
        return None, section
    try:
        config = RobotConfig(link_lengths=links, link_masses=masses, gravity=gravity)
    except ValueError as exc:
        findings.append(("robot", str(exc)))
        return None, section
    return config, section


def _parse_bounds(section: dict, findings: Findings) -> Optional[ParamBounds]:
    bounds_doc = section.get("bounds")
    if not isinstance(bounds_doc, dict):
        findings.append(("admittance.bounds", "missing bounds object"))
        return None
    parts = {}
    for group in ("mass", "damping", "stiffness"):
        sub = bounds_doc.get(group)
        if not isinstance(sub, dict):
            findings.append((f"admittance.bounds.{group}", "missing {min, max} object"))
            continue
        lo = _vec(sub, "min", f"admittance.bounds.{group}", findings)
        hi = _vec(sub, "max", f"admittance.bounds.{group}", findings)
        if lo is None or hi is None:
            continue
        parts[f"{group}_min"] = lo
        parts[f"{group}_max"] = hi
    if len(parts) != 6:
        return None
    try:
        return ParamBounds(**parts)
    except ValueError as exc:
        findings.append(("admittance.bounds", str(exc)))
        return None


def _parse_admittance(
    doc: dict, dt: Optional[float], findings: Findings
) -> tuple[Optional[AdmittanceParams], Optional[ParamBounds]]:
    section = doc.get("admittance", {})
    if not isinstance(section, dict):
        findings.append(("admittance", "must be an object"))
        return None, None
    mass = _vec(section, "mass", "admittance", findings, default=(1.0, 1.0))
    damping = _vec(section, "damping", "admittance", findings, default=(20.0, 20.0))
    stiffness = _vec(section, "stiffness", "admittance", findings, default=(100.0, 100.0))
    params = None
    if None not in (mass, damping, stiffness):
        try:
            params = AdmittanceParams(mass=mass, damping=damping, stiffness=stiffness)
        except ValueError as exc:
            findings.append(("admittance", str(exc)))
    bounds = _parse_bounds(section, findings)
    if bounds is not None and dt is not None:
        try:
            validate_bounds(bounds, dt)
        except StabilityError as exc:
            findings.append(("admittance.bounds", str(exc)))
            bounds = None
    if params is not None and not params.positive():
        findings.append(("admittance", "mass, damping, stiffness must be positive"))
        params = None
    return params, bounds


def _parse_objects(doc: dict, findings: Findings) -> tuple[WorkObject, ...]:
    section = doc.get("objects", [])
    if not isinstance(section, list):
        findings.append(("objects", "must be an array"))
        return ()
    out = []
    seen = set()
    for i, entry in enumerate(section):
        path = f"objects[{i}]"
        if not isinstance(entry, dict):
            findings.append((path, "must be an object"))
            continue
        oid = entry.get("id")
        if not isinstance(oid, str) or not oid:
            findings.append((f"{path}.id", "must be a non-empty string"))
            continue
        if oid in seen:
            findings.append((f"{path}.id", f"duplicate object id {oid!r}"))
            continue
        seen.add(oid)
        position = _vec(entry, "position", path, findings)
        radius = _number(entry, "radius", path, findings)
        mass = _number(entry, "mass", path, findings, default=0.0)
        grasped = entry.get("grasped", False)
        if not isinstance(grasped, bool):
            findings.append((f"{path}.grasped", "must be a boolean"))
            continue
        if None in (position, radius, mass):
            continue
        try:
            out.append(
                WorkObject(id=oid, position=position, radius=radius, mass=mass, grasped=grasped)
            )
        except ValueError as exc:
            findings.append((path, str(exc)))
    if sum(1 for o in out if o.grasped) > 1:
        findings.append(("objects", "at most one object may start grasped"))
        return ()
    return tuple(out)


def _parse_vocabulary(doc: dict, findings: Findings) -> VocabularyBank:
    section = doc.get("vocabulary")
    if section is None:
        return default_bank()
    if not isinstance(section, list):
        findings.append(("vocabulary", "must be an array of entries"))
        return default_bank()
    entries = []
    for i, entry in enumerate(section):
        path = f"vocabulary[{i}]"
        if not isinstance(entry, dict):
            findings.append((path, "must be an object"))
            continue
        token = entry.get("token")
        if not isinstance(token, str) or not token.strip():
            findings.append((f"{path}.token", "must be a non-empty string"))
            continue
        effect_name = entry.get("effect")
        try:
            effect = Effect(effect_name)
        except ValueError:
            findings.append(
                (f"{path}.effect", f"unknown effect {effect_name!r}; one of "
                 f"{sorted(e.value for e in Effect)}")
            )
            continue
        factor = _number(entry, "factor", path, findings)
        if factor is None:
            continue
        aliases = entry.get("aliases", [])
        if not isinstance(aliases, list) or not all(isinstance(a, str) for a in aliases):
            findings.append((f"{path}.aliases", "must be an array of strings"))
            continue
        try:
            entries.append(VocabEntry(token, effect, factor, aliases=tuple(aliases)))
        except ValueError as exc:
            findings.append((path, str(exc)))
    try:
        return VocabularyBank(entries=tuple(entries))
    except ValueError as exc:
        findings.append(("vocabulary", str(exc)))
        return default_bank()


def _parse_knowledge(doc: dict, findings: Findings) -> tuple[tuple[KnowledgeTriple, ...], str]:
    section = doc.get("knowledge", {})
    if not isinstance(section, dict):
        findings.append(("knowledge", "must be an object"))
        return (), "worker1"
    worker = section.get("worker", "worker1")
    if not isinstance(worker, str) or not worker:
        findings.append(("knowledge.worker", "must be a non-empty string"))
        worker = "worker1"
    triples = []
    raw = section.get("triples", [])
    if not isinstance(raw, list):
        findings.append(("knowledge.triples", "must be an array"))
        raw = []
    for i, entry in enumerate(raw):
        path = f"knowledge.triples[{i}]"
        if not isinstance(entry, dict):
            findings.append((path, "must be an object"))
            continue
        confidence = _number(entry, "confidence", path, findings)
        if confidence is None:
            continue
        try:
            triples.append(
                KnowledgeTriple(
                    head=entry.get("head", ""),
                    relation=entry.get("relation", ""),
                    tail=entry.get("tail", ""),
                    confidence=confidence,
                )
            )
        except ValueError as exc:
            findings.append((path, str(exc)))
    return tuple(triples), worker


def _parse_arbitration(
    doc: dict, findings: Findings
) -> tuple[ArbitrationSource, AutoTunePolicy, float]:
    section = doc.get("arbitration", {})
    if not isinstance(section, dict):
        findings.append(("arbitration", "must be an object"))
        return ArbitrationSource.SHARED_CONTROL, AutoTunePolicy(), 0.0
    source_name = section.get("source", "shared_control")
    try:
        source = ArbitrationSource(source_name)
    except ValueError:
        findings.append(("arbitration.source", f"unknown source {source_name!r}"))
        source = ArbitrationSource.SHARED_CONTROL
    policy_doc = section.get("policy", {})
    policy = AutoTunePolicy()
    if not isinstance(policy_doc, dict):
        findings.append(("arbitration.policy", "must be an object"))
    else:
        kwargs = {}
        for key in ("force_threshold", "gain", "time_constant", "intent_floor"):
            if key in policy_doc:
                value = _number(policy_doc, key, "arbitration.policy", findings)
                if value is not None:
                    kwargs[key] = value
        try:
            policy = AutoTunePolicy(**kwargs)
        except ValueError as exc:
            findings.append(("arbitration.policy", str(exc)))
    initial = _number(section, "initial_lambda", "arbitration", findings, default=0.0)
    if initial is None:
        initial = 0.0
    elif not (0.0 <= initial <= 1.0):
        findings.append(("arbitration.initial_lambda", f"{initial} outside [0, 1]"))
        initial = 0.0
    return source, policy, initial


def _parse_timeline(
    doc: dict,
    robot: Optional[RobotConfig],
    objects: tuple[WorkObject, ...],
    findings: Findings,
) -> tuple[TimelineEvent, ...]:
    section = doc.get("timeline", [])
    if not isinstance(section, list):
        findings.append(("timeline", "must be an array"))
        return ()
    known_ids = {o.id for o in objects}
    events = []
    last_at = -math.inf
    for i, entry in enumerate(section):
        path = f"timeline[{i}]"
        if not isinstance(entry, dict):
            findings.append((path, "must be an object"))
            continue
        at = _number(entry, "at", path, findings)
        action = entry.get("action")
        if action not in EVENT_ACTIONS:
            findings.append(
                (f"{path}.action", f"unknown action {action!r}; one of {sorted(EVENT_ACTIONS)}")
            )
            continue
        if at is None:
            continue
        if at < 0:
            findings.append((f"{path}.at", "must be >= 0"))
            continue
        if at < last_at:
            findings.append((f"{path}.at", f"timeline not sorted: {at} after {last_at}"))
        last_at = max(last_at, at)
        kwargs: dict[str, Any] = {"at": at, "action": action}
        if action == "set_lambda":
            value = _number(entry, "value", path, findings)
            if value is None:
                continue
            if not (0.0 <= value <= 1.0):
                findings.append((f"{path}.value", f"{value} outside [0, 1]"))
                continue
            kwargs["value"] = value
        elif action == "set_mode":
            source = entry.get("source")
            if source not in ("shared_control", "shared_autonomy"):
                findings.append((f"{path}.source", f"unknown source {source!r}"))
                continue
            kwargs["source"] = source
        elif action == "nl_command":
            text = entry.get("text")
            if not isinstance(text, str):
                findings.append((f"{path}.text", "must be a string"))
                continue
            kwargs["text"] = text
        elif action == "wrench":
            f = _vec(entry, "f", path, findings)
            if f is None:
                continue
            kwargs["f"] = f
        elif action in ("grasp", "release"):
            oid = entry.get("object_id")
            if not isinstance(oid, str) or oid not in known_ids:
                findings.append((f"{path}.object_id", f"unknown object id {oid!r}"))
                continue
            kwargs["object_id"] = oid
        elif action == "goal":
            waypoint = _vec(entry, "waypoint", path, findings)
            goal_duration = _number(entry, "duration", path, findings)
            if waypoint is None or goal_duration is None:
                continue
            if goal_duration <= 0:
                findings.append((f"{path}.duration", "must be > 0"))
                continue
            if robot is not None and not reachable(robot, waypoint):
                findings.append(
                    (f"{path}.waypoint", f"waypoint {list(waypoint)} outside reachable annulus")
                )
                continue
            kwargs["waypoint"] = waypoint
            kwargs["duration"] = goal_duration
        events.append(TimelineEvent(**kwargs))
    return tuple(events)


def parse_scenario(doc: Any) -> Scenario:
    """Validate a scenario document; raises ScenarioError listing every
    finding with its document path."""
    findings: Findings = []
    if not isinstance(doc, dict):
        raise ScenarioError([("", "scenario must be a JSON object")])

    name = doc.get("name", "unnamed")
    if not isinstance(name, str) or not name:
        findings.append(("name", "must be a non-empty string"))
        name = "unnamed"
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        findings.append(("seed", f"must be a non-negative integer, got {seed!r}"))
        seed = 0
    duration = _number(doc, "duration", "", findings)
    tick_hz = _number(doc, "tick_hz", "", findings, default=100.0)
    if tick_hz is not None and tick_hz <= 0:
        findings.append(("tick_hz", "must be > 0"))
        tick_hz = None
    broadcast_every = doc.get("broadcast_every", 5)
    if isinstance(broadcast_every, bool) or not isinstance(broadcast_every, int) or broadcast_every < 1:
        findings.append(("broadcast_every", f"must be an integer >= 1, got {broadcast_every!r}"))
        broadcast_every = 5

    robot, robot_doc = _parse_robot(doc, findings)
    start_joints = _vec(robot_doc, "start_joints", "robot", findings, default=(0.0, 0.0))
    velocity_limit = _number(robot_doc, "joint_velocity_limit", "robot", findings, default=2.0)
    probe_radius = _number(robot_doc, "probe_radius", "robot", findings, default=0.05)
    k_contact = _number(robot_doc, "k_contact", "robot", findings, default=2000.0)
    compensation = robot_doc.get("gravity_compensation", True)
    if not isinstance(compensation, bool):
        findings.append(("robot.gravity_compensation", "must be a boolean"))
        compensation = True
    if velocity_limit is not None and velocity_limit <= 0:
        findings.append(("robot.joint_velocity_limit", "must be > 0"))
    if probe_radius is not None and probe_radius <= 0:
        findings.append(("robot.probe_radius", "must be > 0"))
    if k_contact is not None and k_contact < 0:
        findings.append(("robot.k_contact", "must be >= 0"))

    dt = (1.0 / tick_hz) if tick_hz else None
    params, bounds = _parse_admittance(doc, dt, findings)
    objects = _parse_objects(doc, findings)
    bank = _parse_vocabulary(doc, findings)
    triples, worker = _parse_knowledge(doc, findings)
    source, policy, initial_lambda = _parse_arbitration(doc, findings)
    timeline = _parse_timeline(doc, robot, objects, findings)

    if duration is not None:
        if duration <= 0:
            findings.append(("duration", "must be > 0"))
        elif timeline and duration < max(e.at for e in timeline):
            findings.append(("duration", "must cover the last timeline event"))

    if findings:
        raise ScenarioError(findings)
    assert robot is not None and params is not None and bounds is not None
    assert duration is not None and tick_hz is not None
    return Scenario(
        name=name,
        seed=seed,
        duration=duration,
        robot=robot,
        start_joints=start_joints,
        objects=objects,
        admittance=params,
        bounds=bounds,
        bank=bank,
        triples=triples,
        source=source,
        policy=policy,
        timeline=timeline,
        tick_hz=tick_hz,
        broadcast_every=broadcast_every,
        joint_velocity_limit=velocity_limit,
        probe_radius=probe_radius,
        k_contact=k_contact,
        gravity_compensation=compensation,
        initial_lambda=initial_lambda,
        worker=worker,
        raw=doc,
    )


def resolve_scenario_path(name: str | Path) -> Path:
    """Existing paths win; bare names (with or without .json) fall back to
    the packaged fixtures."""
    path = Path(name)
    if path.exists():
        return path
    text = str(name)
    if "/" not in text and "\\" not in text:
        for candidate in (text, f"{text}.json"):
            packaged = resources.files("cobotsim").joinpath("scenarios", candidate)
            if packaged.is_file():
                return Path(str(packaged))
    raise FileNotFoundError(text)


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate a scenario file or packaged fixture name."""
    text = resolve_scenario_path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError([("", f"not valid JSON: {exc}")]) from None
    return parse_scenario(doc)


def collect_findings(path: str | Path) -> Findings:
    """All validation findings for a file; empty means the scenario is ok."""
    try:
        load_scenario(path)
    except ScenarioError as exc:
        return list(exc.findings)
    return []
