"""Velocity-based reference observer (generalized-momentum residual).

Stand-in for the classical velocity-consuming disturbance observers. It is
built on the momentum identity::

    d/dt (M qd) = tau + d + C(q, qd)^T qd - G(q)

and estimates::

    d_hat = L (M(q_m) qd_m - z),   z' = tau_m + C(q_m, qd_m)^T qd_m - G(q_m) + d_hat

so that, in continuous time, d_hat' = L (d - d_hat): first-order tracking with
bandwidth L per joint. Unlike the filter-based estimator it reads the velocity
measurement directly, which is what makes it noise sensitive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ArmModel
from .errors import ConfigurationError, MeasurementError

DEFAULT_GAIN = 40.0


@dataclass
class MomentumObserverState:
    z: np.ndarray
    gain: np.ndarray
    d_hat: np.ndarray


def init_observer(model: ArmModel, gain, q_m, qd_m) -> MomentumObserverState:
    """Observer at rest: z = M(q_m) qd_m, so d_hat starts at zero."""
    n = model.n_dof
    gain = np.broadcast_to(np.asarray(gain, dtype=float), (n,)).copy()
    if not (np.all(np.isfinite(gain)) and np.all(gain > 0)):
        raise ConfigurationError("observer gains must be > 0")
    q_m = _measurement(q_m, n, "q_m")
    qd_m = _measurement(qd_m, n, "qd_m")
    z = model.chain.mass_matrix(q_m) @ qd_m
    return MomentumObserverState(z=z, gain=gain, d_hat=np.zeros(n))


def _momentum_drift(model: ArmModel, q, qd) -> np.ndarray:
    # C^T qd - G: the non-input part of d/dt(M qd)
    return model.chain.coriolis_matrix(q, qd).T @ qd - model.chain.gravity_vector(q)


def observer_step(model: ArmModel, state: MomentumObserverState, q_m, qd_m, tau_m, dt: float):
    """One explicit-Euler observer update. Returns ``(new_state, d_hat)``."""
    n = model.n_dof
    q_m = _measurement(q_m, n, "q_m")
    qd_m = _measurement(qd_m, n, "qd_m")
    tau_m = _measurement(tau_m, n, "tau_m")
    if not dt > 0.0:
        raise ConfigurationError("dt must be > 0")
    momentum = model.chain.mass_matrix(q_m) @ qd_m
    d_hat = state.gain * (momentum - state.z)
    z = state.z + dt * (tau_m + _momentum_drift(model, q_m, qd_m) + d_hat)
    return MomentumObserverState(z=z, gain=state.gain, d_hat=d_hat), d_hat


def _measurement(v, n, name):
    arr = np.asarray(v, dtype=float)
    if arr.shape != (n,) or not np.all(np.isfinite(arr)):
        raise MeasurementError(f"{name} must be a finite vector of length {n}")
    return arr
