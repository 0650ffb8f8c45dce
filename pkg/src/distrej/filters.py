"""Third-order low-pass state filter.

Each channel runs::

    x1' = x2
    x2' = x3
    x3' = w1 w2^2 (u - x1) - (w2^2 + 2 zeta w2 w1) x2 - (2 zeta w2 + w1) x3

whose input-to-``x1`` transfer function is
``w1 w2^2 / ((s + w1)(s^2 + 2 zeta w2 s + w2^2))``. ``x2`` and ``x3`` are then the
smoothed first and second derivatives of the input, obtained without numerical
differentiation. The ODE is integrated with classical RK4 at a fixed step, the
input held constant over each step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import ConfigurationError, MeasurementError

STABILITY_MARGIN = 0.5


@dataclass(frozen=True)
class FilterParams:
    zeta: float = 0.8
    omega1: float = 50.0
    omega2: float = 50.0

    def __post_init__(self):
        for name in ("zeta", "omega1", "omega2"):
            value = float(getattr(self, name))
            if not (np.isfinite(value) and value > 0.0):
                raise ConfigurationError(f"filter {name} must be > 0, got {value}")
            object.__setattr__(self, name, value)


@dataclass(eq=False)
class FilterBank:
    """Per-channel filter states sharing one parameter set and step size."""

    params: FilterParams
    x1: np.ndarray
    x2: np.ndarray
    x3: np.ndarray
    dt: float

    @property
    def n(self) -> int:
        return self.x1.shape[0]

    def copy(self) -> "FilterBank":
        return FilterBank(self.params, self.x1.copy(), self.x2.copy(), self.x3.copy(), self.dt)


def init_filter_bank(params: FilterParams, initial_signal, dt: float, rate=None, accel=None) -> FilterBank:
    """Bank in steady state on ``initial_signal``.

    With ``rate`` and ``accel`` omitted the signal is at rest: x1 = signal,
    x2 = x3 = 0. Otherwise the bank starts in its steady state for a signal
    with those first and second derivatives (higher ones neglected), which
    avoids the start-up transient of a bank released from rest onto a moving
    signal. From H(s) = 1 - c1 s + (c1^2 - c2) s^2 + O(s^3), c1 = a1/a0,
    c2 = a2/a0::

        x1 = u - c1 u' + (c1^2 - c2) u'',  x2 = u' - c1 u'',  x3 = u''
    """
    if not isinstance(params, FilterParams):
        raise ConfigurationError("params must be a FilterParams")
    dt = float(dt)
    if not (np.isfinite(dt) and dt > 0.0):
        raise ConfigurationError(f"dt must be > 0, got {dt}")
    if dt * max(params.omega1, params.omega2) >= STABILITY_MARGIN:
        raise ConfigurationError(
            f"dt * max(omega1, omega2) = {dt * max(params.omega1, params.omega2):g} must be < {STABILITY_MARGIN}")
    signal = np.array(initial_signal, dtype=float).reshape(-1)
    if not np.all(np.isfinite(signal)):
        raise ConfigurationError("initial signal must be finite")
    rate = _initial_derivative(rate, signal, "rate")
    accel = _initial_derivative(accel, signal, "accel")
    if not (rate.any() or accel.any()):
        return FilterBank(params, signal, rate, accel, dt)
    a0, a1, a2 = _coefficients(params)
    c1, c2 = a1 / a0, a2 / a0
    x1 = signal - c1 * rate + (c1 * c1 - c2) * accel
    return FilterBank(params, x1, rate - c1 * accel, accel, dt)


def _coefficients(params: FilterParams):
    # characteristic polynomial s^3 + a2 s^2 + a1 s + a0
    w1, w2, zeta = params.omega1, params.omega2, params.zeta
    return w1 * w2 * w2, w2 * w2 + 2.0 * zeta * w2 * w1, 2.0 * zeta * w2 + w1


def _initial_derivative(value, signal, name):
    if value is None:
        return np.zeros_like(signal)
    arr = np.array(value, dtype=float).reshape(-1)
    if arr.shape != signal.shape or not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"initial {name} must be finite with the signal's shape")
    return arr


def filter_step(bank: FilterBank, measurement):
    """Advance ``bank`` one step with ``measurement`` held over the step.

    The bank is updated in place. Returns ``(bank, (x1, x2, x3))``; the tuple
    holds the bank's own state arrays.
    """
    u = np.asarray(measurement, dtype=float)
    if u.shape != bank.x1.shape:
        raise MeasurementError(f"measurement shape {u.shape} does not match bank {bank.x1.shape}")
    if not np.all(np.isfinite(u)):
        raise MeasurementError("measurement contains non-finite entries")
    p = bank.params
    _backend.kernels.filter_step(bank.x1, bank.x2, bank.x3, u, p.zeta, p.omega1, p.omega2, bank.dt)
    return bank, (bank.x1, bank.x2, bank.x3)


def frequency_response(params: FilterParams, omega: float) -> complex:
    """H(j omega) of the input-to-x1 transfer function."""
    omega = float(omega)
    if omega < 0.0:
        raise ConfigurationError("omega must be >= 0")
    s = 1j * omega
    w1, w2, zeta = params.omega1, params.omega2, params.zeta
    # numerator ordered like the s = 0 denominator so H(0) is exactly 1
    return complex(w1 * (w2 * w2) / ((s + w1) * (s * s + 2.0 * zeta * w2 * s + w2 * w2)))
