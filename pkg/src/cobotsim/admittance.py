"""Second-order mass-damper-spring compliance around a desired trajectory.

Per axis the deviation e = x_c - x_d obeys M*e'' + D*e' + K*e = f_ext. A
step advances (e, e') by the exact zero-order-hold discretization of that
linear system (force held constant over the step), so the response is exact
to roundoff for piecewise-constant forces and the static gain is exactly
f/K. Stepping is gated by a conservative stability check built on the
one-step semi-implicit Euler transition matrix: its spectral radius must
stay below 1 - margin and M, D, K must be strictly positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from . import _kernels
from .errors import StabilityError

Vector = tuple[float, ...]

DEFAULT_MARGIN = 1e-6


def _vector(values: Sequence[float], name: str, finite: bool = True) -> Vector:
    out = tuple(float(x) for x in values)
    if finite and any(not math.isfinite(x) for x in out):
        raise ValueError(f"{name} has non-finite component: {out}")
    return out


@dataclass(frozen=True)
class AdmittanceParams:
    """Per-axis apparent mass (kg), damping (N*s/m) and stiffness (N/m)."""

    mass: Vector = (1.0, 1.0)
    damping: Vector = (20.0, 20.0)
    stiffness: Vector = (100.0, 100.0)

    def __post_init__(self):
        object.__setattr__(self, "mass", _vector(self.mass, "mass"))
        object.__setattr__(self, "damping", _vector(self.damping, "damping"))
        object.__setattr__(self, "stiffness", _vector(self.stiffness, "stiffness"))
        if not (len(self.mass) == len(self.damping) == len(self.stiffness)):
            raise ValueError("mass, damping, stiffness must share one dimension")

    @property
    def dim(self) -> int:
        return len(self.mass)

    def positive(self) -> bool:
        return all(m > 0 and d > 0 and k > 0 for m, d, k in self.axes())

    def axes(self):
        return zip(self.mass, self.damping, self.stiffness)


@dataclass(frozen=True)
class ComplianceState:
    """Compliant vs desired trajectory pair plus the sensed external force."""

    x_c: Vector
    v_c: Vector
    x_d: Vector
    v_d: Vector
    f_ext: Vector

    def __post_init__(self):
        for name in ("x_c", "v_c", "x_d", "v_d", "f_ext"):
            object.__setattr__(self, name, _vector(getattr(self, name), name))
        dims = {len(getattr(self, n)) for n in ("x_c", "v_c", "x_d", "v_d", "f_ext")}
        if len(dims) != 1:
            raise ValueError("compliance state vectors must share one dimension")

    @property
    def dim(self) -> int:
        return len(self.x_c)

    def deviation(self) -> Vector:
        return tuple(xc - xd for xc, xd in zip(self.x_c, self.x_d))

    @staticmethod
    def at_rest(position: Sequence[float]) -> "ComplianceState":
        p = _vector(position, "position")
        zero = (0.0,) * len(p)
        return ComplianceState(x_c=p, v_c=zero, x_d=p, v_d=zero, f_ext=zero)


@dataclass(frozen=True)
class StabilityReport:
    spectral_radius: float
    stable: bool
    per_axis_radii: Vector


@dataclass(frozen=True)
class ParamBounds:
    """Per-axis clamp box for M, D, K; every corner must be gate-stable."""

    mass_min: Vector
    mass_max: Vector
    damping_min: Vector
    damping_max: Vector
    stiffness_min: Vector
    stiffness_max: Vector

    def __post_init__(self):
        for name in (
            "mass_min",
            "mass_max",
            "damping_min",
            "damping_max",
            "stiffness_min",
            "stiffness_max",
        ):
            object.__setattr__(self, name, _vector(getattr(self, name), name))
        if any(lo > hi for lo, hi in zip(self.mass_min, self.mass_max)):
            raise ValueError("mass_min exceeds mass_max")
        if any(lo > hi for lo, hi in zip(self.damping_min, self.damping_max)):
            raise ValueError("damping_min exceeds damping_max")
        if any(lo > hi for lo, hi in zip(self.stiffness_min, self.stiffness_max)):
            raise ValueError("stiffness_min exceeds stiffness_max")

    @property
    def dim(self) -> int:
        return len(self.mass_min)

    def axis_corners(self, axis: int):
        """The eight (m, d, k) corners of the box on one axis."""
        for m in (self.mass_min[axis], self.mass_max[axis]):
            for d in (self.damping_min[axis], self.damping_max[axis]):
                for k in (self.stiffness_min[axis], self.stiffness_max[axis]):
                    yield m, d, k


def semi_implicit_matrix(m: float, d: float, k: float, dt: float):
    """One-step transition matrix of semi-implicit Euler on (e, e')."""
    u = dt * d / m
    w = dt * dt * k / m
    return (1.0 - w, dt * (1.0 - u), -dt * k / m, 1.0 - u)


def spectral_radius_2x2(a11: float, a12: float, a21: float, a22: float) -> float:
    tr = a11 + a22
    det = a11 * a22 - a12 * a21
    disc = tr * tr - 4.0 * det
    if disc >= 0.0:
        s = math.sqrt(disc)
        return max(abs((tr + s) / 2.0), abs((tr - s) / 2.0))
    return math.sqrt(det)  # complex pair: |lambda| = sqrt(det); det > 0 here


def stability_check(
    params: AdmittanceParams, dt: float, margin: float = DEFAULT_MARGIN
) -> StabilityReport:
    """Gate report: strict positivity plus per-axis radius < 1 - margin.

    Non-positive parameters are reported unstable, never raised.
    """
    if not (dt > 0):
        raise ValueError(f"dt must be > 0, got {dt}")
    radii = []
    for m, d, k in params.axes():
        if m <= 0:
            radii.append(math.inf)
            continue
        radii.append(spectral_radius_2x2(*semi_implicit_matrix(m, d, k, dt)))
    stable = params.positive() and all(r < 1.0 - margin for r in radii)
    return StabilityReport(
        spectral_radius=max(radii), stable=stable, per_axis_radii=tuple(radii)
    )


@lru_cache(maxsize=4096)
def _zoh_axis(m: float, d: float, k: float, dt: float) -> tuple[float, ...]:
    """Exact discrete update for one axis: (a11, a12, a21, a22, b1, b2).

    e' = a11*e + a12*v + b1*f ; v' = a21*e + a22*v + b2*f, where the force f
    is held constant over the step (zero-order hold).
    """
    aug = np.array(
        [[0.0, 1.0, 0.0], [-k / m, -d / m, 1.0 / m], [0.0, 0.0, 0.0]], dtype=float
    )
    phi = expm(aug * dt)
    return (
        float(phi[0, 0]),
        float(phi[0, 1]),
        float(phi[1, 0]),
        float(phi[1, 1]),
        float(phi[0, 2]),
        float(phi[1, 2]),
    )


def discretize(params: AdmittanceParams, dt: float) -> tuple[tuple[float, ...], ...]:
    """Per-axis ZOH coefficients for the deviation dynamics."""
    return tuple(_zoh_axis(m, d, k, dt) for m, d, k in params.axes())


def step(params: AdmittanceParams, state: ComplianceState, dt: float) -> ComplianceState:
    """Advance the compliant trajectory one step under the sensed force.

    The desired trajectory (x_d, v_d) is left untouched; callers move it via
    the planner before stepping. Rejects gate-unstable (params, dt) pairs.
    """
    report = stability_check(params, dt)
    if not report.stable:
        raise StabilityError(
            f"admittance config unstable at dt={dt}: spectral radius "
            f"{report.spectral_radius:.6f} (positivity={params.positive()})"
        )
    if params.dim != state.dim:
        raise ValueError(f"params dim {params.dim} != state dim {state.dim}")
    coeffs = discretize(params, dt)
    x_c, v_c = [], []
    for axis, (a11, a12, a21, a22, b1, b2) in enumerate(coeffs):
        e = state.x_c[axis] - state.x_d[axis]
        ve = state.v_c[axis] - state.v_d[axis]
        f = state.f_ext[axis]
        e_new = a11 * e + a12 * ve + b1 * f
        ve_new = a21 * e + a22 * ve + b2 * f
        x_c.append(state.x_d[axis] + e_new)
        v_c.append(state.v_d[axis] + ve_new)
    return replace(state, x_c=tuple(x_c), v_c=tuple(v_c))


def run_steps(
    params: AdmittanceParams, state: ComplianceState, dt: float, n: int
) -> ComplianceState:
    """Advance n steps with the desired point and external force held fixed.

    Identical arithmetic to n calls of step() (the kernels repeat the same
    operation sequence), but the loop runs in the compiled backend when one
    is available.
    """
    report = stability_check(params, dt)
    if not report.stable:
        raise StabilityError(
            f"admittance config unstable at dt={dt}: spectral radius "
            f"{report.spectral_radius:.6f} (positivity={params.positive()})"
        )
    if params.dim != state.dim:
        raise ValueError(f"params dim {params.dim} != state dim {state.dim}")
    if n < 0:
        raise ValueError(f"step count must be >= 0, got {n}")
    coeffs = discretize(params, dt)
    x_c, v_c = [], []
    for axis, axis_coeffs in enumerate(coeffs):
        e = state.x_c[axis] - state.x_d[axis]
        ve = state.v_c[axis] - state.v_d[axis]
        e, ve = _kernels.admittance_run(axis_coeffs, e, ve, state.f_ext[axis], n)
        x_c.append(state.x_d[axis] + e)
        v_c.append(state.v_d[axis] + ve)
    return replace(state, x_c=tuple(x_c), v_c=tuple(v_c))


def settle_steps(
    params: AdmittanceParams,
    state: ComplianceState,
    dt: float,
    threshold: float,
    max_steps: int,
) -> tuple[int, ...]:
    """Force-free per-axis step counts until |deviation| first drops below
    threshold; -1 where the budget runs out. Velocity deviations evolve but
    only the position deviation is thresholded."""
    report = stability_check(params, dt)
    if not report.stable:
        raise StabilityError(f"admittance config unstable at dt={dt}")
    coeffs = discretize(params, dt)
    counts = []
    for axis, axis_coeffs in enumerate(coeffs):
        e = state.x_c[axis] - state.x_d[axis]
        ve = state.v_c[axis] - state.v_d[axis]
        steps, _, _ = _kernels.admittance_settle(axis_coeffs, e, ve, threshold, max_steps)
        counts.append(steps)
    return tuple(counts)


def guidance_step(
    params: AdmittanceParams, velocity: Sequence[float], force: Sequence[float], dt: float
) -> tuple[Vector, Vector]:
    """Spring-free (K -> 0) exact update used for full manual guidance.

    Returns (displacement, new_velocity) per axis for the mass-damper system
    M*v' + D*v = f with f held constant over the step.
    """
    if not (dt > 0):
        raise ValueError(f"dt must be > 0, got {dt}")
    dx, v_new = [], []
    for axis, (m, d, _k) in enumerate(params.axes()):
        v0 = float(velocity[axis])
        f = float(force[axis])
        v_inf = f / d
        decay = math.exp(-(d / m) * dt)
        v1 = v_inf + (v0 - v_inf) * decay
        dx.append(v_inf * dt + (v0 - v_inf) * (m / d) * (1.0 - decay))
        v_new.append(v1)
    return tuple(dx), tuple(v_new)


def validate_bounds(bounds: ParamBounds, dt: float, margin: float = DEFAULT_MARGIN) -> None:
    """Every corner of the per-axis box must pass the stability gate."""
    for axis in range(bounds.dim):
        for m, d, k in bounds.axis_corners(axis):
            report = stability_check(
                AdmittanceParams(mass=(m,), damping=(d,), stiffness=(k,)), dt, margin
            )
            if not report.stable:
                raise StabilityError(
                    f"bounds corner (M={m}, D={d}, K={k}) on axis {axis} is "
                    f"unstable at dt={dt} (radius {report.spectral_radius:.6f})"
                )


def clamp_to_stable(
    params: AdmittanceParams, bounds: ParamBounds, dt: float
) -> AdmittanceParams:
    """Componentwise clamp into a corner-stable box; idempotent."""
    if params.dim != bounds.dim:
        raise ValueError(f"params dim {params.dim} != bounds dim {bounds.dim}")
    validate_bounds(bounds, dt)
    mass = tuple(
        min(max(v, lo), hi) for v, lo, hi in zip(params.mass, bounds.mass_min, bounds.mass_max)
    )
    damping = tuple(
        min(max(v, lo), hi)
        for v, lo, hi in zip(params.damping, bounds.damping_min, bounds.damping_max)
    )
    stiffness = tuple(
        min(max(v, lo), hi)
        for v, lo, hi in zip(params.stiffness, bounds.stiffness_min, bounds.stiffness_max)
    )
    return AdmittanceParams(mass=mass, damping=damping, stiffness=stiffness)


def static_offset(params: AdmittanceParams, force: Sequence[float]) -> Vector:
    """Steady-state deviation f / K per axis."""
    f = _vector(force, "force")
    if len(f) != params.dim:
        raise ValueError(f"force dim {len(f)} != params dim {params.dim}")
    if any(k <= 0 for k in params.stiffness):
        raise ValueError("static offset requires strictly positive stiffness")
    return tuple(fi / k for fi, k in zip(f, params.stiffness))


def slow_decay_rate(m: float, d: float, k: float) -> float:
    """|Re| of the slowest continuous-time mode of M*e''+D*e'+K*e = 0."""
    disc = d * d - 4.0 * m * k
    if disc <= 0:
        return d / (2.0 * m)
    return 2.0 * k / (d + math.sqrt(disc))
