"""Computed-torque control, with and without disturbance compensation.

    tau = M(q) qdd_des + C(q, qd) qd + G(q) - Kd (qd - qd_des) - Kp (q - q_des) [- d_hat]

The model terms use the current (measured) joint state. The feedback terms are
added in torque space, not premultiplied by M. Gains are diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ArmModel, _state_vec
from .errors import ConfigurationError

DEFAULT_KP = 100.0
DEFAULT_KD = 20.0


@dataclass(frozen=True, eq=False)
class ControlGains:
    kp: np.ndarray
    kd: np.ndarray

    def __post_init__(self):
        kp = np.array(self.kp, dtype=float).reshape(-1)
        kd = np.array(self.kd, dtype=float).reshape(-1)
        if kp.shape != kd.shape:
            raise ConfigurationError("kp and kd must have the same length")
        if not (np.all(np.isfinite(kp)) and np.all(kp > 0) and np.all(np.isfinite(kd)) and np.all(kd > 0)):
            raise ConfigurationError("all gains must be finite and > 0")
        object.__setattr__(self, "kp", kp)
        object.__setattr__(self, "kd", kd)

    @classmethod
    def uniform(cls, n: int, kp: float = DEFAULT_KP, kd: float = DEFAULT_KD) -> "ControlGains":
        return cls(np.full(n, kp), np.full(n, kd))


@dataclass
class Reference:
    q_des: np.ndarray
    qd_des: np.ndarray
    qdd_des: np.ndarray

    def __post_init__(self):
        self.q_des = np.asarray(self.q_des, dtype=float)
        self.qd_des = np.asarray(self.qd_des, dtype=float)
        self.qdd_des = np.asarray(self.qdd_des, dtype=float)


def control_no_comp(model: ArmModel, q, qd, ref: Reference, gains: ControlGains) -> np.ndarray:
    n = model.n_dof
    q = _state_vec(q, n, "q")
    qd = _state_vec(qd, n, "qd")
    q_des = _state_vec(ref.q_des, n, "q_des")
    qd_des = _state_vec(ref.qd_des, n, "qd_des")
    qdd_des = _state_vec(ref.qdd_des, n, "qdd_des")
    if gains.kp.shape != (n,):
        raise ConfigurationError(f"gains must have {n} entries")
    feedforward = model.chain.rnea(q, qd, qdd_des)
    return feedforward - gains.kd * (qd - qd_des) - gains.kp * (q - q_des)


def control_with_comp(model: ArmModel, q, qd, ref: Reference, gains: ControlGains, d_hat) -> np.ndarray:
    d_hat = _state_vec(d_hat, model.n_dof, "d_hat")
    return control_no_comp(model, q, qd, ref, gains) - d_hat
