"""Headless scenario runner: drives a session in-process, accumulates
operator-facing metrics, and exports reports.

Timeline events other than goals are submitted as ordinary wire messages
from a synthetic client (so an injected latency model delays them exactly
like live traffic); goal events are the autonomy layer's own schedule and
bypass the network path. Identical (scenario, seed, latency) runs produce
bitwise-identical reports.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import robot as rb
from .arbitration import Mode
from .errors import ScenarioError
from .protocol import Envelope, canonical_json
from .scenario import Scenario, TimelineEvent
from .session import LatencyModel, Session, _event_tick

SCRIPT_CLIENT = "script"


@dataclass(frozen=True)
class MetricsReport:
    """Run summary; every numeric field is finite by construction."""

    scenario: str
    seed: int
    duration: float
    ticks: int
    gravity_compensation: bool
    tracking_rms: float
    effort_integral: float
    comp_torque_integral: float
    manual_grasped_path: float
    manual_grasped_effort: float
    effort_per_meter: Optional[float]
    mode_timeline: tuple[tuple[float, str], ...]
    command_log: tuple[dict, ...]
    final_hash: str

    def __post_init__(self):
        for name in (
            "tracking_rms",
            "effort_integral",
            "comp_torque_integral",
            "manual_grasped_path",
            "manual_grasped_effort",
        ):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} is not finite: {value}")
        if self.effort_per_meter is not None and not math.isfinite(self.effort_per_meter):
            raise ValueError(f"effort_per_meter is not finite: {self.effort_per_meter}")

    def modes(self) -> tuple[str, ...]:
        return tuple(mode for _, mode in self.mode_timeline)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "duration": self.duration,
            "ticks": self.ticks,
            "gravity_compensation": self.gravity_compensation,
            "tracking_rms": self.tracking_rms,
            "effort_integral": self.effort_integral,
            "comp_torque_integral": self.comp_torque_integral,
            "manual_grasped_path": self.manual_grasped_path,
            "manual_grasped_effort": self.manual_grasped_effort,
            "effort_per_meter": self.effort_per_meter,
            "mode_timeline": [{"t": t, "mode": mode} for t, mode in self.mode_timeline],
            "command_log": list(self.command_log),
            "final_hash": self.final_hash,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MetricsReport":
        return cls(
            scenario=doc["scenario"],
            seed=doc["seed"],
            duration=doc["duration"],
            ticks=doc["ticks"],
            gravity_compensation=doc["gravity_compensation"],
            tracking_rms=doc["tracking_rms"],
            effort_integral=doc["effort_integral"],
            comp_torque_integral=doc["comp_torque_integral"],
            manual_grasped_path=doc["manual_grasped_path"],
            manual_grasped_effort=doc["manual_grasped_effort"],
            effort_per_meter=doc["effort_per_meter"],
            mode_timeline=tuple((e["t"], e["mode"]) for e in doc["mode_timeline"]),
            command_log=tuple(doc["command_log"]),
            final_hash=doc["final_hash"],
        )


@dataclass
class RunResult:
    report: MetricsReport
    session: Session
    log_records: list[dict] = field(default_factory=list)


def _event_envelope(event: TimelineEvent, seq: int, sid: str) -> Envelope:
    payloads = {
        "set_lambda": lambda e: {"value": e.value},
        "set_mode": lambda e: {"source": e.source},
        "nl_command": lambda e: {"text": e.text},
        "wrench": lambda e: {"f": list(e.f)},
        "grasp": lambda e: {"object_id": e.object_id},
        "release": lambda e: {"object_id": e.object_id},
    }
    return Envelope(
        type=event.action, seq=seq, sid=sid, payload=payloads[event.action](event)
    )


def run_scenario(
    scenario: Scenario,
    latency: Optional[LatencyModel] = None,
    sid: str = "run",
) -> RunResult:
    """Execute one full scenario headlessly and measure it."""
    session = Session(scenario, sid=sid)
    if latency is not None:
        session.set_latency(SCRIPT_CLIENT, latency)

    wire_events: list[tuple[int, TimelineEvent]] = [
        (_event_tick(event.at, scenario.dt), event)
        for event in scenario.timeline
        if event.action != "goal"
    ]
    next_event = 0
    total_ticks = round(scenario.duration / scenario.dt)

    g = scenario.robot.gravity
    sq_sum = 0.0
    effort = 0.0
    torque = 0.0
    slice_path = 0.0
    slice_effort = 0.0
    command_log: list[dict] = []
    seq = 0
    ee_prev = session.world.end_effector(scenario.robot)

    for k in range(total_ticks):
        while next_event < len(wire_events) and wire_events[next_event][0] <= k:
            replies = session.submit(
                SCRIPT_CLIENT, _event_envelope(wire_events[next_event][1], seq, sid)
            )
            for env in replies:
                command_log.append(_log_entry(session.world.time, env))
            seq += 1
            next_event += 1

        session.tick()

        ee = session.world.end_effector(scenario.robot)
        sq_sum += (ee[0] - session.compliance.x_c[0]) ** 2 + (
            ee[1] - session.compliance.x_c[1]
        ) ** 2
        payload_mass = session.grasped_mass()
        f_h = session.u_h
        supporting = (
            not scenario.gravity_compensation
            and payload_mass > 0.0
            and math.hypot(*f_h) > 0.0
        )
        f_required = (f_h[0], f_h[1] + (payload_mass * g if supporting else 0.0))
        f_mag = math.hypot(*f_required)
        effort += f_mag * scenario.dt
        if scenario.gravity_compensation:
            tau = rb.gravity_compensation(
                scenario.robot, session.world.q, payload_mass=payload_mass
            )
            torque += math.hypot(*tau) * scenario.dt
        if session.arbitration.mode is Mode.MANUAL and payload_mass > 0.0:
            slice_path += math.hypot(ee[0] - ee_prev[0], ee[1] - ee_prev[1])
            slice_effort += f_mag * scenario.dt
        ee_prev = ee
        for env in session.drain_outbox():
            command_log.append(_log_entry(session.world.time, env))

    records = [r.to_dict() for r in session.log]
    report = MetricsReport(
        scenario=scenario.name,
        seed=scenario.seed,
        duration=scenario.duration,
        ticks=total_ticks,
        gravity_compensation=scenario.gravity_compensation,
        tracking_rms=math.sqrt(sq_sum / total_ticks) if total_ticks else 0.0,
        effort_integral=effort,
        comp_torque_integral=torque,
        manual_grasped_path=slice_path,
        manual_grasped_effort=slice_effort,
        effort_per_meter=(slice_effort / slice_path) if slice_path > 1e-9 else None,
        mode_timeline=tuple(session.mode_timeline),
        command_log=tuple(command_log),
        final_hash=records[-1]["hash"] if records else "",
    )
    return RunResult(report=report, session=session, log_records=records)


def _log_entry(t: float, env: Envelope) -> dict:
    entry = {"t": t, "kind": env.type}
    entry.update(env.payload)
    return entry


def run_paired(
    scenario: Scenario, latency: Optional[LatencyModel] = None
) -> tuple[RunResult, RunResult]:
    """Same scenario with and without gravity compensation. The motion is
    identical; only the operator-effort accounting differs."""
    with_comp = run_scenario(scenario.with_compensation(True), latency=latency)
    without = run_scenario(scenario.with_compensation(False), latency=latency)
    return with_comp, without


# -- persistence ---------------------------------------------------------------

LOG_HEADER_TYPE = "session_log"


def save_log(path: Path | str, records: list[dict], scenario: Scenario) -> None:
    """NDJSON: one header line, then one record per tick."""
    path = Path(path)
    header = {
        "type": LOG_HEADER_TYPE,
        "v": 1,
        "scenario": scenario.name,
        "seed": scenario.seed,
    }
    with path.open("w", encoding="utf-8") as fh:
        fh.write(canonical_json(header) + "\n")
        for record in records:
            fh.write(canonical_json(record) + "\n")


def load_log(path: Path | str) -> list[dict]:
    records = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ScenarioError([(f"line {i + 1}", f"not JSON: {exc}")])
            if isinstance(doc, dict) and doc.get("type") == LOG_HEADER_TYPE:
                continue
            records.append(doc)
    return records


def export_json(report: MetricsReport, path: Path | str) -> None:
    Path(path).write_text(
        json.dumps(report.to_dict(), indent=2, allow_nan=False) + "\n", encoding="utf-8"
    )


def export_csv(report: MetricsReport, path: Path | str) -> None:
    """Flattened mode timeline: exactly one header row plus one row per entry."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "mode"])
        for t, mode in report.mode_timeline:
            writer.writerow([t, mode])


def load_report(path: Path | str) -> MetricsReport:
    return MetricsReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
