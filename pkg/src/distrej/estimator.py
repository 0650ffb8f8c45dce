"""Disturbance estimation from filtered joint angles and filtered joint torques.

The joint-angle measurements and the torque measurements go through two
identical third-order filters. The lumped disturbance is the inverse-dynamics
residual evaluated on the filtered quantities::

    d_hat = M(q_hat) qdd_hat + C(q_hat, qd_hat) qd_hat + G(q_hat) - tau_hat

Because both signals see the same filter, their phase lags cancel in the
residual. Velocity measurements are never used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ArmModel
from .errors import ConfigurationError, MeasurementError
from .filters import FilterBank, FilterParams, filter_step, init_filter_bank


@dataclass
class DisturbanceEstimate:
    d_hat: np.ndarray
    q_hat: np.ndarray
    qd_hat: np.ndarray
    qdd_hat: np.ndarray
    tau_hat: np.ndarray


def inverse_dynamics_residual(model: ArmModel, q, qd, qdd, tau) -> np.ndarray:
    """M(q) qdd + C(q, qd) qd + G(q) - tau."""
    return model.chain.rnea(q, qd, qdd) - tau


def estimator_step(model: ArmModel, signal_bank: FilterBank, torque_bank: FilterBank,
                   q_m, tau_m) -> DisturbanceEstimate:
    """Advance both banks with the same sample and return the new estimate."""
    if signal_bank.params != torque_bank.params or signal_bank.dt != torque_bank.dt:
        raise ConfigurationError("signal and torque banks must share filter parameters and dt")
    n = model.n_dof
    if signal_bank.n != n or torque_bank.n != n:
        raise ConfigurationError(f"filter banks must have {n} channels")
    q_m = _measurement(q_m, n, "q_m")
    tau_m = _measurement(tau_m, n, "tau_m")
    _, (q_hat, qd_hat, qdd_hat) = filter_step(signal_bank, q_m)
    _, (tau_hat, _, _) = filter_step(torque_bank, tau_m)
    d_hat = inverse_dynamics_residual(model, q_hat, qd_hat, qdd_hat, tau_hat)
    return DisturbanceEstimate(d_hat, q_hat.copy(), qd_hat.copy(), qdd_hat.copy(), tau_hat.copy())


class DisturbanceEstimator:
    """Owns a matched pair of filter banks for one control loop.

    >>> est = DisturbanceEstimator(model, FilterParams(0.8, 50, 50), q0, tau0, dt=1e-3)
    >>> d_hat = est.step(q_m, tau_m).d_hat
    """

    def __init__(self, model: ArmModel, params: FilterParams, q_init, tau_init, dt: float = 1e-3,
                 q_rates=(None, None), tau_rates=(None, None)):
        """``q_rates`` / ``tau_rates``: optional (first, second) derivatives to warm-start each bank."""
        self.model = model
        self.signal_bank = init_filter_bank(params, q_init, dt, *q_rates)
        self.torque_bank = init_filter_bank(params, tau_init, dt, *tau_rates)
        self.last = None

    @property
    def params(self) -> FilterParams:
        return self.signal_bank.params

    @property
    def dt(self) -> float:
        return self.signal_bank.dt

    def step(self, q_m, tau_m) -> DisturbanceEstimate:
        self.last = estimator_step(self.model, self.signal_bank, self.torque_bank, q_m, tau_m)
        return self.last


def _measurement(v, n, name):
    arr = np.asarray(v, dtype=float)
    if arr.shape != (n,):
        raise MeasurementError(f"{name} must have shape ({n},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise MeasurementError(f"{name} contains non-finite entries")
    return arr
