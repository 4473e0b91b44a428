"""Minimal HTTP client used by `run --connect`: ships the scenario to a live
server, which executes it and returns the report plus the session log."""

from __future__ import annotations

import copy

import httpx

from .runner import MetricsReport
from .scenario import Scenario


def run_remote(address: str, scenario: Scenario) -> tuple[MetricsReport, list[dict]]:
    if not address.startswith("http"):
        address = f"http://{address}"
    doc = copy.deepcopy(scenario.raw)
    doc["seed"] = scenario.seed
    doc.setdefault("robot", {})["gravity_compensation"] = scenario.gravity_compensation
    try:
        response = httpx.post(
            f"{address.rstrip('/')}/runs", json={"scenario": doc}, timeout=120.0
        )
    except httpx.HTTPError as exc:
        raise ConnectionError(str(exc)) from exc
    if response.status_code != 200:
        raise ConnectionError(f"server returned {response.status_code}: {response.text}")
    body = response.json()
    return MetricsReport.from_dict(body["report"]), body["log"]
