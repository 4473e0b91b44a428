"""Networked shared-autonomy workcell simulator.

A deterministic tick-based simulation of a planar robot workcell in which a
human operator and an autonomous controller share command of the end
effector. Human and autonomous inputs are blended by an arbitration weight,
the end effector complies with external forces through an admittance law,
plain-language commands retune that compliance, and a confidence-scored
knowledge base lets sessions infer how much guidance an operator wants.
"""

from .errors import (
    CobotSimError,
    DimensionError,
    DivergenceError,
    ProtocolError,
    ReachabilityError,
    ScenarioError,
    StabilityError,
    StaleSeqError,
)

__version__ = "0.1.0"

__all__ = [
    "CobotSimError",
    "DimensionError",
    "DivergenceError",
    "ProtocolError",
    "ReachabilityError",
    "ScenarioError",
    "StabilityError",
    "StaleSeqError",
    "__version__",
]
