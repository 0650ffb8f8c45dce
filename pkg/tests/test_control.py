import numpy as np
import pytest
from hypothesis import given, strategies as st

from distrej.control import ControlGains, Reference, control_no_comp, control_with_comp
from distrej.dynamics import JointState, inverse_dynamics
from distrej.errors import ConfigurationError, InvalidStateError

seeds = st.integers(0, 2**32 - 1)


@given(seed=seeds)
def test_on_reference_reduces_to_inverse_dynamics(planar2, seed):
    rng = np.random.default_rng(seed)
    q, qd, qdd = rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2)
    tau = control_no_comp(planar2, q, qd, Reference(q, qd, qdd), ControlGains.uniform(2))
    assert np.allclose(tau, inverse_dynamics(planar2, JointState(q, qd, qdd)), rtol=0, atol=1e-12)


@given(seed=seeds)
def test_feedback_terms_and_compensation(planar2, seed):
    rng = np.random.default_rng(seed)
    q, qd = rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2)
    ref = Reference(rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2))
    gains = ControlGains(rng.uniform(1, 500, 2), rng.uniform(1, 50, 2))
    d_hat = rng.standard_normal(2)
    base = inverse_dynamics(planar2, JointState(q, qd, ref.qdd_des))
    expected = base - gains.kd * (qd - ref.qd_des) - gains.kp * (q - ref.q_des)
    no = control_no_comp(planar2, q, qd, ref, gains)
    assert np.allclose(no, expected, atol=1e-12)
    assert np.array_equal(control_with_comp(planar2, q, qd, ref, gains, d_hat), no - d_hat)


def test_positive_error_lowers_torque(pendulum):
    ref = Reference([0.0], [0.0], [0.0])
    tau = control_no_comp(pendulum, [0.1], [0.0], ref, ControlGains.uniform(1))
    assert tau[0] < pendulum.chain.gravity_vector(np.array([0.1]))[0]


def test_zero_estimate_matches_uncompensated(planar2):
    ref = Reference([0.1, 0.2], [0.0, 0.0], [0.0, 0.0])
    g = ControlGains.uniform(2)
    assert np.array_equal(control_with_comp(planar2, [0.0, 0.0], [0.0, 0.0], ref, g, [0.0, 0.0]),
                          control_no_comp(planar2, [0.0, 0.0], [0.0, 0.0], ref, g))


@pytest.mark.parametrize("kp,kd", [([1.0, 0.0], [1.0, 1.0]), ([1.0, 1.0], [-1.0, 1.0]), ([1.0], [1.0, 1.0]),
                                   ([np.inf, 1.0], [1.0, 1.0])])
def test_gain_validation(kp, kd):
    with pytest.raises(ConfigurationError):
        ControlGains(kp, kd)


def test_gain_length_must_match_model(planar2):
    with pytest.raises(ConfigurationError):
        control_no_comp(planar2, [0.0, 0.0], [0.0, 0.0], Reference([0, 0], [0, 0], [0, 0]), ControlGains.uniform(3))


def test_non_finite_inputs_rejected(planar2):
    ref = Reference([0, 0], [0, 0], [0, 0])
    with pytest.raises(InvalidStateError):
        control_no_comp(planar2, [np.nan, 0.0], [0.0, 0.0], ref, ControlGains.uniform(2))
    with pytest.raises(InvalidStateError):
        control_with_comp(planar2, [0.0, 0.0], [0.0, 0.0], ref, ControlGains.uniform(2), [0.0, np.inf])


def test_uniform_defaults():
    g = ControlGains.uniform(3)
    assert np.array_equal(g.kp, [100.0] * 3) and np.array_equal(g.kd, [20.0] * 3)


def test_pendulum_example(pendulum):
    ref = Reference([0.0], [0.0], [0.0])
    tau = control_no_comp(pendulum, [0.1], [0.0], ref, ControlGains([100.0], [20.0]))
    assert tau[0] == pytest.approx(pendulum.chain.gravity_vector(np.array([0.1]))[0] - 10.0, abs=1e-12)


def test_gravity_hold_is_exact(hya, rng):
    q = rng.uniform(-1, 1, 6)
    tau = control_no_comp(hya, q, np.zeros(6), Reference(q, np.zeros(6), np.zeros(6)), ControlGains.uniform(6))
    assert np.array_equal(tau, hya.chain.gravity_vector(q))


def test_component_assembly_six_dof(hya, rng):
    from distrej.dynamics import coriolis_matrix, gravity_vector, mass_matrix

    for _ in range(20):
        q, qd = rng.uniform(-2, 2, 6), rng.uniform(-2, 2, 6)
        ref = Reference(rng.uniform(-2, 2, 6), rng.uniform(-2, 2, 6), rng.uniform(-2, 2, 6))
        g = ControlGains(rng.uniform(1, 100, 6), rng.uniform(1, 20, 6))
        expected = (mass_matrix(hya, q) @ ref.qdd_des + coriolis_matrix(hya, q, qd) @ qd + gravity_vector(hya, q)
                    - g.kd * (qd - ref.qd_des) - g.kp * (q - ref.q_des))
        assert np.max(np.abs(control_no_comp(hya, q, qd, ref, g) - expected)) < 1e-12 * max(1.0, np.max(np.abs(expected)))


def test_unit_estimate_lowers_first_joint_by_exactly_five(hya):
    q = np.full(6, 0.2)
    ref = Reference(q + 0.01, np.zeros(6), np.zeros(6))
    g = ControlGains.uniform(6)
    d_hat = np.zeros(6)
    d_hat[0] = 5.0
    diff = control_no_comp(hya, q, q * 0, ref, g) - control_with_comp(hya, q, q * 0, ref, g, d_hat)
    assert diff[0] == 5.0 and not diff[1:].any()


@pytest.mark.parametrize("compensate,expected", [(True, 0.0), (False, 3.0 / 100.0)])
def test_constant_disturbance_steady_state(compensate, expected):
    # 1-DOF arm, constant 3 N m pushing on the joint; with the exact estimate
    # supplied the error vanishes, without it the error settles at d / kp
    from distrej.dynamics import ArmModel, Link
    from distrej.plant import FrictionModel, InjectedDisturbance, init_plant_state, plant_step

    arm = ArmModel((Link(1.0, [0.0, 0.0, -0.5], 0.75 * np.eye(3), [0.0, 1.0, 0.0], np.zeros(3)),),
                   gravity=np.array([0.0, 0.0, -9.81]))
    d = InjectedDisturbance([3.0], [0.0], [0.0], [0.0])
    gains = ControlGains([100.0], [20.0])
    ref = Reference([0.4], [0.0], [0.0])
    state = init_plant_state([0.4])
    for _ in range(5000):
        q, qd = state.true_state.q, state.true_state.qd
        if compensate:
            tau = control_with_comp(arm, q, qd, ref, gains, [3.0])
        else:
            tau = control_no_comp(arm, q, qd, ref, gains)
        state = plant_step(arm, state, tau, FrictionModel.none(1), [], 1e-3, disturbance=d)
    assert abs(state.true_state.q[0] - 0.4 - expected) < 1e-6
