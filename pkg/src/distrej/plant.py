"""Ground-truth plant: true arm dynamics plus every disturbance channel.

The plant integrates::

    M_p(q) qdd + C_p(q, qd) qd + G_p(q) = tau + d_in + d_ext

where the ``_p`` terms come from the (possibly perturbed) plant arm with any
attached payloads, ``d_in`` is actuator friction plus an optional injected
per-joint sinusoid, and a dropped payload adds a one-step generalized impulse.

Each step records the ground-truth lumped disturbance relative to the nominal
controller model,
``d_true = M(q) qdd + C(q, qd) qd + G(q) - tau`` (nominal M, C, G at the true
state), which is what estimators are scored against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _backend
from .dynamics import ArmModel, JointState, point_jacobian
from .errors import ConfigurationError, InvalidStateError


@dataclass(frozen=True, eq=False)
class FrictionModel:
    """Coulomb + viscous joint friction, sign smoothed by tanh(qd / stiction_velocity).

    With ``position_dependent`` the Coulomb level is scaled by 1 + 0.5 sin(q).
    """

    coulomb: np.ndarray
    viscous: np.ndarray
    stiction_velocity: float = 0.01
    position_dependent: bool = False

    def __post_init__(self):
        c = np.array(self.coulomb, dtype=float).reshape(-1)
        v = np.array(self.viscous, dtype=float).reshape(-1)
        if c.shape != v.shape:
            raise ConfigurationError("coulomb and viscous must have the same length")
        if np.any(c < 0) or np.any(v < 0) or self.stiction_velocity < 0:
            raise ConfigurationError("friction parameters must be non-negative")
        object.__setattr__(self, "coulomb", c)
        object.__setattr__(self, "viscous", v)
        object.__setattr__(self, "stiction_velocity", float(self.stiction_velocity))

    @classmethod
    def none(cls, n: int) -> "FrictionModel":
        return cls(np.zeros(n), np.zeros(n))


@dataclass(frozen=True, eq=False)
class InjectedDisturbance:
    """Per-joint torque ``bias + amplitude * sin(2 pi frequency t + phase)`` added to the plant."""

    bias: np.ndarray
    amplitude: np.ndarray
    frequency: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        arrs = [np.array(getattr(self, k), dtype=float).reshape(-1)
                for k in ("bias", "amplitude", "frequency", "phase")]
        n = max(a.size for a in arrs)
        for key, arr in zip(("bias", "amplitude", "frequency", "phase"), arrs):
            if arr.size == 1:
                arr = np.full(n, arr[0])
            if arr.shape != (n,) or not np.all(np.isfinite(arr)):
                raise ConfigurationError(f"injected disturbance {key} must be a finite {n}-vector")
            object.__setattr__(self, key, arr)

    @classmethod
    def none(cls, n: int) -> "InjectedDisturbance":
        z = np.zeros(n)
        return cls(z, z, z, z)

    def at(self, t: float) -> np.ndarray:
        return self.bias + self.amplitude * np.sin(2.0 * math.pi * self.frequency * t + self.phase)


@dataclass(frozen=True, eq=False)
class PayloadEvent:
    """A point mass dropped onto ``attach_link`` at ``t_drop`` and lifted off at ``t_remove``.

    The drop transfers ``impulse`` (generalized, N m s). When ``impulse`` is not
    given and ``drop_speed`` is, the impulse is the payload momentum
    ``mass * drop_speed`` along gravity mapped through the attach-point Jacobian.
    """

    t_drop: float
    t_remove: float
    mass: float
    attach_link: int
    impulse: np.ndarray | None = None
    drop_speed: float = 0.0
    attach_point: np.ndarray | None = None

    def __post_init__(self):
        if not self.t_remove > self.t_drop:
            raise ConfigurationError("payload t_remove must be after t_drop")
        if self.mass < 0:
            raise ConfigurationError("payload mass must be >= 0")
        if self.impulse is not None:
            object.__setattr__(self, "impulse", np.array(self.impulse, dtype=float).reshape(-1))
        if self.attach_point is not None:
            object.__setattr__(self, "attach_point", np.array(self.attach_point, dtype=float).reshape(3))


@dataclass(frozen=True)
class SensorModel:
    sigma_q: float = 0.0
    sigma_qd: float = 0.0
    sigma_tau: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if min(self.sigma_q, self.sigma_qd, self.sigma_tau) < 0:
            raise ConfigurationError("sensor noise levels must be >= 0")


@dataclass(frozen=True, eq=False)
class Actuator:
    """Optional first-order torque lag (per-joint time constant, s) and symmetric torque limit."""

    time_constant: np.ndarray | None = None
    torque_limit: np.ndarray | None = None


@dataclass
class StepRecord:
    """Bookkeeping for the step just integrated (values at its start)."""

    qdd: np.ndarray
    tau_applied: np.ndarray
    d_true: np.ndarray
    impulse: np.ndarray


@dataclass
class PlantState:
    true_state: JointState
    attached_mass_active: tuple[bool, ...] = ()
    time: float = 0.0
    step: int = 0
    last: StepRecord | None = field(default=None, repr=False)


def init_plant_state(q0, qd0=None, n_events: int = 0) -> PlantState:
    q0 = np.array(q0, dtype=float)
    qd0 = np.zeros_like(q0) if qd0 is None else np.array(qd0, dtype=float)
    return PlantState(JointState(q0, qd0, np.zeros_like(q0)), (False,) * n_events, 0.0, 0)


def friction_torque(fm: FrictionModel, qd, q=None) -> np.ndarray:
    """Dissipative joint friction torque: -coulomb * tanh(qd / v_s) - viscous * qd."""
    qd = np.asarray(qd, dtype=float)
    q = np.zeros_like(qd) if q is None else np.asarray(q, dtype=float)
    return _backend.kernels.friction(fm.coulomb, fm.viscous, fm.stiction_velocity,
                                     fm.position_dependent, q, qd)


@lru_cache(maxsize=64)
def _with_payloads(model: ArmModel, payloads: tuple) -> ArmModel:
    for link, mass, point in payloads:
        model = model.with_point_mass(link, mass, None if point is None else np.array(point))
    return model


def plant_model(model: ArmModel, events, active) -> ArmModel:
    """Plant arm with every active payload attached."""
    key = tuple(
        (ev.attach_link, ev.mass, None if ev.attach_point is None else tuple(ev.attach_point))
        for ev, on in zip(events, active) if on and ev.mass > 0.0)
    return _with_payloads(model, key) if key else model


def _event_steps(ev: PayloadEvent, dt: float):
    return int(round(ev.t_drop / dt)), int(round(ev.t_remove / dt))


def payload_impulse(model: ArmModel, q, ev: PayloadEvent) -> np.ndarray:
    if ev.impulse is not None:
        if ev.impulse.shape != (model.n_dof,):
            raise ConfigurationError(f"payload impulse must have {model.n_dof} entries")
        return ev.impulse.copy()
    if ev.drop_speed == 0.0 or ev.mass == 0.0:
        return np.zeros(model.n_dof)
    point = model.link_end(ev.attach_link) if ev.attach_point is None else ev.attach_point
    g = model.gravity
    down = g / np.linalg.norm(g)
    return ev.mass * ev.drop_speed * (point_jacobian(model, q, ev.attach_link, point).T @ down)


def plant_step(model: ArmModel, state: PlantState, tau_cmd, fm: FrictionModel, events, dt: float, *,
               nominal: ArmModel | None = None, disturbance: InjectedDisturbance | None = None,
               substeps: int = 1) -> PlantState:
    """Integrate the plant one control period with RK4 (``substeps`` sub-intervals).

    ``model`` is the plant's own (possibly perturbed) arm; ``nominal`` is the
    controller's model used for the ground-truth disturbance record (defaults
    to ``model``). Payload events are snapped to step boundaries: on the drop
    step the payload attaches and the velocity jumps by M_p^-1 J; on the
    removal step it detaches.
    """
    n = model.n_dof
    if not dt > 0.0:
        raise ConfigurationError("dt must be > 0")
    if substeps < 1:
        raise ConfigurationError("substeps must be >= 1")
    tau = np.asarray(tau_cmd, dtype=float)
    if tau.shape != (n,) or not np.all(np.isfinite(tau)):
        raise InvalidStateError("tau_cmd must be a finite n-vector")
    events = tuple(events)
    nominal = model if nominal is None else nominal
    dist = InjectedDisturbance.none(n) if disturbance is None else disturbance

    q = state.true_state.q
    qd = state.true_state.qd.copy()
    active = list(state.attached_mass_active) or [False] * len(events)
    impulse = np.zeros(n)
    for i, ev in enumerate(events):
        drop_step, remove_step = _event_steps(ev, dt)
        if state.step == remove_step:
            active[i] = False
        elif state.step == drop_step:
            active[i] = True
            attached = plant_model(model, events, active)
            j = payload_impulse(attached, q, ev)
            qd = qd + np.linalg.solve(attached.chain.mass_matrix(q), j)
            impulse += j
    pm = plant_model(model, events, active)

    q_next, qd_next, qdd0 = pm.chain.plant_step(
        q, qd, tau, fm.coulomb, fm.viscous, fm.stiction_velocity, fm.position_dependent,
        dist.bias, dist.amplitude, dist.frequency, dist.phase, state.time, dt, substeps)
    d_true = nominal.chain.rnea(q, qd, qdd0) - tau + impulse / dt
    return PlantState(
        true_state=JointState(q_next, qd_next, qdd0),
        attached_mass_active=tuple(active),
        time=(state.step + 1) * dt,
        step=state.step + 1,
        last=StepRecord(qdd=qdd0, tau_applied=tau.copy(), d_true=d_true, impulse=impulse),
    )


def sense(state: PlantState, sm: SensorModel, tau_actual):
    """Noisy measurements of the current plant state and applied torque.

    Noise is drawn from a generator keyed on ``(seed, step)``, so the stream
    is a pure function of the step index. Standard normals are drawn for all
    three channels regardless of their sigmas, so changing one channel's sigma
    leaves the other channels' noise untouched.
    """
    tau_actual = np.asarray(tau_actual, dtype=float)
    q = state.true_state.q
    qd = state.true_state.qd
    if sm.sigma_q == 0.0 and sm.sigma_qd == 0.0 and sm.sigma_tau == 0.0:
        return q.copy(), qd.copy(), tau_actual.copy()
    noise = np.random.default_rng([sm.seed, state.step]).standard_normal((3, q.shape[0]))
    return (q + sm.sigma_q * noise[0], qd + sm.sigma_qd * noise[1],
            tau_actual + sm.sigma_tau * noise[2])


def actuate(act: Actuator, tau_prev, tau_cmd, dt: float) -> np.ndarray:
    """Torque actually delivered over the next step (saturation, then first-order lag)."""
    tau = np.asarray(tau_cmd, dtype=float)
    if act.torque_limit is not None:
        tau = np.clip(tau, -act.torque_limit, act.torque_limit)
    if act.time_constant is not None:
        tc = np.asarray(act.time_constant, dtype=float)
        alpha = np.where(tc > 0, np.exp(-dt / np.where(tc > 0, tc, 1.0)), 0.0)
        tau = tau + alpha * (np.asarray(tau_prev, dtype=float) - tau)
    return tau
