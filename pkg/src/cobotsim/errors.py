"""Exception types shared across the simulator."""

from __future__ import annotations


class CobotSimError(Exception):
    """Base class for all simulator errors."""


class DimensionError(CobotSimError):
    """Vector operands have mismatched dimensions."""


class StabilityError(CobotSimError):
    """An (admittance params, dt) pair fails the discrete stability gate."""


class ReachabilityError(CobotSimError):
    """A Cartesian target lies outside the manipulator's reachable annulus."""


class ScenarioError(CobotSimError):
    """A scenario document failed validation.

    Carries the full list of (path, message) findings so callers can report
    every problem at once.
    """

    def __init__(self, findings: list[tuple[str, str]]):
        self.findings = findings
        lines = "; ".join(f"{path}: {msg}" for path, msg in findings)
        super().__init__(f"invalid scenario: {lines}")


class ProtocolError(CobotSimError):
    """A wire frame was rejected. `code` is machine-readable."""

    def __init__(self, code: str, reason: str):
        self.code = code
        self.reason = reason
        super().__init__(f"{code}: {reason}")


class StaleSeqError(ProtocolError):
    """Per-client sequence number did not advance."""

    def __init__(self, reason: str):
        super().__init__("stale_seq", reason)


class DivergenceError(CobotSimError):
    """Replay produced a snapshot hash differing from the recorded one."""

    def __init__(self, tick: int, expected: str, actual: str):
        self.tick = tick
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"replay diverged at tick {tick}: recorded {expected}, got {actual}"
        )
