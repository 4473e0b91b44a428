"""Admittance integrator, stability gate, clamping, and guidance stepping."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cobotsim.admittance import (
    AdmittanceParams,
    ComplianceState,
    ParamBounds,
    clamp_to_stable,
    discretize,
    guidance_step,
    semi_implicit_matrix,
    slow_decay_rate,
    spectral_radius_2x2,
    stability_check,
    static_offset,
    step,
    validate_bounds,
)
from cobotsim.errors import StabilityError

DT = 1e-3

# Box with all eight (M, D, K) corners gate-stable at both 1 kHz and 100 Hz.
BOUNDS = ParamBounds(
    mass_min=(0.5, 0.5),
    mass_max=(2.0, 2.0),
    damping_min=(5.0, 5.0),
    damping_max=(50.0, 50.0),
    stiffness_min=(50.0, 50.0),
    stiffness_max=(500.0, 500.0),
)

pos_mass = st.floats(0.05, 10.0, allow_nan=False)
pos_damp = st.floats(0.5, 200.0, allow_nan=False)
pos_stiff = st.floats(1.0, 5000.0, allow_nan=False)


def _rest_with_force(force):
    state = ComplianceState.at_rest((0.0, 0.0))
    return ComplianceState(
        x_c=state.x_c, v_c=state.v_c, x_d=state.x_d, v_d=state.v_d, f_ext=force
    )


def _run(params, state, dt, n):
    for _ in range(n):
        state = step(params, state, dt)
    return state


def test_step_force_response_critically_damped():
    # M=1, D=20, K=100 is critically damped (omega = 10/s); under F = 10 N
    # the deviation is e(t) = 0.1*(1 - (1 + 10t)e^(-10t)), so
    # e(0.1) = 0.1*(1 - 2/e) = 0.026424111765711536.
    params = AdmittanceParams()
    state = _run(params, _rest_with_force((10.0, 0.0)), DT, 100)
    assert state.x_c[0] == pytest.approx(0.026424111765711536, rel=1e-9)
    assert state.x_c[1] == 0.0


def test_step_force_response_underdamped():
    # M=1, D=4, K=100: zeta = 0.2, omega_n = 10, omega_d = 9.7979589711...;
    # e(t) = 0.1*(1 - e^(-2t)(cos(w_d t) + (2/w_d) sin(w_d t))), giving
    # e(0.05) = 0.011468118397747097.
    params = AdmittanceParams(damping=(4.0, 4.0))
    state = _run(params, _rest_with_force((10.0, 0.0)), DT, 50)
    assert state.x_c[0] == pytest.approx(0.011468118397747097, rel=1e-9)


def test_step_matches_fine_step_euler_route():
    # Independent numerical route: semi-implicit Euler at h = 1e-6 lands
    # within ~1.2e-5 of the exact response; the integrator must agree with
    # that loop at its own accuracy.
    h = 1e-6
    e, v = 0.0, 0.0
    for _ in range(100_000):
        v = v + h * (10.0 - 20.0 * v - 100.0 * e)
        e = e + h * v
    state = _run(AdmittanceParams(), _rest_with_force((10.0, 0.0)), DT, 100)
    assert state.x_c[0] == pytest.approx(e, rel=5e-5)


def test_integration_accuracy_vs_reference_tolerance():
    # 100 steps at 1 ms must track the closed form to 1e-4 relative error.
    state = _run(AdmittanceParams(), _rest_with_force((10.0, 0.0)), DT, 100)
    exact = 0.1 * (1.0 - 2.0 * math.exp(-1.0))
    assert abs(state.x_c[0] - exact) / abs(exact) < 1e-4


def test_static_offset_reaches_f_over_k():
    params = AdmittanceParams()
    assert static_offset(params, (10.0, 0.0)) == (0.1, 0.0)
    state = _run(params, _rest_with_force((10.0, 0.0)), DT, 5000)
    assert state.x_c[0] == pytest.approx(0.1, rel=1e-6)
    assert abs(state.v_c[0]) < 1e-9


def test_static_offset_is_fixed_point_of_step():
    params = AdmittanceParams()
    offset = static_offset(params, (10.0, -4.0))
    state = ComplianceState(
        x_c=offset, v_c=(0.0, 0.0), x_d=(0.0, 0.0), v_d=(0.0, 0.0), f_ext=(10.0, -4.0)
    )
    out = step(params, state, DT)
    assert out.x_c[0] == pytest.approx(offset[0], abs=1e-12)
    assert out.x_c[1] == pytest.approx(offset[1], abs=1e-12)


def test_desired_trajectory_is_never_mutated():
    params = AdmittanceParams()
    state = ComplianceState(
        x_c=(0.3, 0.1), v_c=(0.0, 0.0), x_d=(0.2, 0.2), v_d=(0.05, 0.0), f_ext=(1.0, 2.0)
    )
    out = step(params, state, DT)
    assert out.x_d == state.x_d
    assert out.v_d == state.v_d


@given(
    st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
    st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
)
def test_step_superposition_in_force(f1, f2):
    # the deviation dynamics are linear: response to f1+f2 equals the sum of
    # the individual responses minus the force-free one
    params = AdmittanceParams()
    base = ComplianceState.at_rest((0.0, 0.0))

    def end(force):
        st_ = ComplianceState(
            x_c=(0.01, -0.02), v_c=(0.1, 0.0), x_d=base.x_d, v_d=base.v_d, f_ext=force
        )
        return step(params, st_, DT)

    both = end(tuple(a + b for a, b in zip(f1, f2)))
    one = end(f1)
    two = end(f2)
    zero = end((0.0, 0.0))
    for axis in range(2):
        assert both.x_c[axis] == pytest.approx(
            one.x_c[axis] + two.x_c[axis] - zero.x_c[axis], abs=1e-12
        )


@given(pos_mass, pos_damp, pos_stiff, st.floats(1e-4, 0.05, allow_nan=False))
def test_spectral_radius_matches_eigvals(m, d, k, dt):
    a11, a12, a21, a22 = semi_implicit_matrix(m, d, k, dt)
    ours = spectral_radius_2x2(a11, a12, a21, a22)
    ref = max(abs(np.linalg.eigvals(np.array([[a11, a12], [a21, a22]]))))
    assert ours == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_stability_check_accepts_defaults():
    report = stability_check(AdmittanceParams(), DT)
    assert report.stable
    assert report.spectral_radius < 1.0


def test_stability_check_flags_coarse_step():
    # dt*D/M = 4 > 2 breaks the discrete-time damping condition
    report = stability_check(AdmittanceParams(), 0.2)
    assert not report.stable
    assert report.spectral_radius > 1.0


def test_stability_check_flags_non_positive_params():
    report = stability_check(AdmittanceParams(damping=(0.0, 20.0)), DT)
    assert not report.stable
    report = stability_check(AdmittanceParams(stiffness=(-100.0, 100.0)), DT)
    assert not report.stable


def test_step_rejects_unstable_configuration():
    with pytest.raises(StabilityError):
        step(AdmittanceParams(), _rest_with_force((0.0, 0.0)), 0.2)


def test_clamp_pulls_each_component_into_box():
    wild = AdmittanceParams(mass=(0.01, 10.0), damping=(1.0, 100.0), stiffness=(1e4, 10.0))
    out = clamp_to_stable(wild, BOUNDS, DT)
    assert out.mass == (0.5, 2.0)
    assert out.damping == (5.0, 50.0)
    assert out.stiffness == (500.0, 50.0)
    inside = AdmittanceParams()
    assert clamp_to_stable(inside, BOUNDS, DT) == inside


@given(
    st.tuples(st.floats(1e-3, 100.0), st.floats(1e-3, 100.0)),
    st.tuples(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3)),
    st.tuples(st.floats(1e-3, 1e5), st.floats(1e-3, 1e5)),
)
def test_clamp_result_is_always_stable_and_idempotent(mass, damping, stiffness):
    params = AdmittanceParams(mass=mass, damping=damping, stiffness=stiffness)
    out = clamp_to_stable(params, BOUNDS, DT)
    assert stability_check(out, DT).stable
    assert clamp_to_stable(out, BOUNDS, DT) == out


def test_bounds_box_with_unstable_corner_is_rejected():
    bad = ParamBounds(
        mass_min=(0.5,),
        mass_max=(2.0,),
        damping_min=(5.0,),
        damping_max=(50.0,),
        stiffness_min=(50.0,),
        stiffness_max=(4e6,),
    )
    with pytest.raises(StabilityError):
        validate_bounds(bad, DT)
    with pytest.raises(StabilityError):
        clamp_to_stable(AdmittanceParams(mass=(1.0,), damping=(20.0,), stiffness=(100.0,)), bad, DT)


def test_guidance_step_reference_values():
    # M=1, D=20, v0=0, f=10, dt=0.1: v_inf = 0.5, decay = e^(-2);
    # v1 = 0.5*(1 - e^(-2)) = 0.43233235838169365,
    # dx = 0.05 - 0.025*(1 - e^(-2)) = 0.028383382080915318.
    dx, v1 = guidance_step(AdmittanceParams(), (0.0, 0.0), (10.0, 0.0), 0.1)
    assert v1[0] == pytest.approx(0.43233235838169365, rel=1e-12)
    assert dx[0] == pytest.approx(0.028383382080915318, rel=1e-12)
    assert dx[1] == 0.0 and v1[1] == 0.0


@given(st.floats(-2.0, 2.0), st.floats(1e-4, 0.1))
def test_guidance_step_force_free_decay(v0, dt):
    # without force the velocity decays by exactly e^(-(D/M)dt) and the
    # displacement is the integral of that decay
    params = AdmittanceParams()
    dx, v1 = guidance_step(params, (v0, 0.0), (0.0, 0.0), dt)
    decay = math.exp(-20.0 * dt)
    assert v1[0] == pytest.approx(v0 * decay, rel=1e-12, abs=1e-15)
    assert dx[0] == pytest.approx(v0 * (1.0 / 20.0) * (1.0 - decay), rel=1e-12, abs=1e-15)


def test_guidance_step_approaches_terminal_velocity():
    params = AdmittanceParams()
    v = (0.0, 0.0)
    for _ in range(200):
        _dx, v = guidance_step(params, v, (10.0, 0.0), 0.01)
    assert v[0] == pytest.approx(0.5, rel=1e-6)  # f/D


def test_free_space_decay_within_slow_mode_window():
    # force-free deviation shrinks below 1e-6 of its start within 20/rho
    # seconds, where rho is the slowest continuous-time decay rate
    params = AdmittanceParams()
    rho = min(slow_decay_rate(m, d, k) for m, d, k in params.axes())
    budget = int(math.ceil((20.0 / rho) / DT))
    state = ComplianceState(
        x_c=(0.1, -0.05), v_c=(0.0, 0.0), x_d=(0.0, 0.0), v_d=(0.0, 0.0), f_ext=(0.0, 0.0)
    )
    start = max(abs(e) for e in state.deviation())
    for n in range(1, budget + 1):
        state = step(params, state, DT)
        if max(abs(e) for e in state.deviation()) < 1e-6 * start:
            break
    else:
        pytest.fail(f"no decay below 1e-6 within {budget} steps")
    assert n * DT <= 20.0 / rho


def test_slow_decay_rate_cases():
    assert slow_decay_rate(1.0, 20.0, 100.0) == pytest.approx(10.0)  # critical
    assert slow_decay_rate(1.0, 4.0, 100.0) == pytest.approx(2.0)  # underdamped: D/2M
    # overdamped M=1, D=25, K=100: roots -5 and -20, slow mode 5
    assert slow_decay_rate(1.0, 25.0, 100.0) == pytest.approx(5.0)


def test_discretize_is_cached_and_deterministic():
    params = AdmittanceParams()
    assert discretize(params, DT) == discretize(params, DT)
    a = discretize(params, DT)[0]
    b = discretize(AdmittanceParams(), DT)[0]
    assert a == b


def test_params_validation():
    with pytest.raises(ValueError):
        AdmittanceParams(mass=(1.0,), damping=(20.0, 20.0), stiffness=(100.0,))
    with pytest.raises(ValueError):
        AdmittanceParams(mass=(math.nan, 1.0))
    with pytest.raises(ValueError):
        ComplianceState(
            x_c=(0.0,), v_c=(0.0, 0.0), x_d=(0.0,), v_d=(0.0,), f_ext=(0.0,)
        )
    with pytest.raises(ValueError):
        ParamBounds(
            mass_min=(2.0,),
            mass_max=(0.5,),
            damping_min=(5.0,),
            damping_max=(50.0,),
            stiffness_min=(50.0,),
            stiffness_max=(500.0,),
        )


@settings(deadline=None)
@given(pos_mass, pos_damp, pos_stiff)
def test_stable_configs_never_blow_up(m, d, k):
    params = AdmittanceParams(mass=(m,), damping=(d,), stiffness=(k,))
    report = stability_check(params, DT)
    state = ComplianceState(x_c=(0.1,), v_c=(0.0,), x_d=(0.0,), v_d=(0.0,), f_ext=(0.0,))
    if not report.stable:
        with pytest.raises(StabilityError):
            step(params, state, DT)
        return
    for _ in range(500):
        state = step(params, state, DT)
    assert abs(state.x_c[0]) <= 0.1 + 1e-9
