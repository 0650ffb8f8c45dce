"""Pure-NumPy reference kernels.

Mirrors the compiled ``_kernels`` module function for function. Used when the
extension is not built or when ``DISTREJ_PURE_PYTHON=1`` is set, and as the
cross-check for the compiled path in the test suite.

All vectors live in the world frame. Joint ``i`` sits at the origin of link
``i``; its axis is fixed in link ``i``'s frame and link ``i``'s frame is
reached from link ``i-1`` by translating ``offset[i]`` and rotating ``q[i]``
about ``axis[i]``.
"""

import math

import numpy as np

from .errors import SingularDynamicsError

BACKEND = "python"


def _skew(v):
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def _rot(axis, angle):
    k = _skew(axis)
    return np.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)


class Chain:
    """Serial revolute chain with precomputed per-link arrays."""

    def __init__(self, axes, offsets, masses, coms, inertias, gravity):
        self.axes = np.ascontiguousarray(axes, dtype=float)
        self.offsets = np.ascontiguousarray(offsets, dtype=float)
        self.masses = np.ascontiguousarray(masses, dtype=float)
        self.coms = np.ascontiguousarray(coms, dtype=float)
        self.inertias = np.ascontiguousarray(inertias, dtype=float)
        self.gravity = np.ascontiguousarray(gravity, dtype=float)
        self.n = self.masses.shape[0]

    # kinematics -----------------------------------------------------------

    def fk(self, q):
        """Return (z, p, c, Iw, R): joint axes, joint origins, COMs, world inertias, link rotations."""
        n = self.n
        z = np.empty((n, 3))
        p = np.empty((n, 3))
        c = np.empty((n, 3))
        iw = np.empty((n, 3, 3))
        rs = np.empty((n, 3, 3))
        rot = np.eye(3)
        origin = np.zeros(3)
        for i in range(n):
            origin = origin + rot @ self.offsets[i]
            rot = rot @ _rot(self.axes[i], q[i])
            z[i] = rot @ self.axes[i]
            p[i] = origin
            c[i] = origin + rot @ self.coms[i]
            iw[i] = rot @ self.inertias[i] @ rot.T
            rs[i] = rot
        return z, p, c, iw, rs

    # dynamics -------------------------------------------------------------

    def rnea(self, q, qd, qdd, gravity_scale=1.0):
        n = self.n
        z, p, c, iw, _ = self.fk(q)
        w = np.zeros(3)
        wd = np.zeros(3)
        acc = -gravity_scale * self.gravity
        prev = np.zeros(3)
        forces = np.empty((n, 3))
        moments = np.empty((n, 3))
        for i in range(n):
            r = p[i] - prev
            acc = acc + np.cross(wd, r) + np.cross(w, np.cross(w, r))
            wd = wd + z[i] * qdd[i] + np.cross(w, z[i] * qd[i])
            w = w + z[i] * qd[i]
            rc = c[i] - p[i]
            ac = acc + np.cross(wd, rc) + np.cross(w, np.cross(w, rc))
            forces[i] = self.masses[i] * ac
            moments[i] = iw[i] @ wd + np.cross(w, iw[i] @ w)
            prev = p[i]
        tau = np.empty(n)
        f = np.zeros(3)
        m = np.zeros(3)
        for i in range(n - 1, -1, -1):
            lever = p[i + 1] - p[i] if i + 1 < n else np.zeros(3)
            m = moments[i] + np.cross(c[i] - p[i], forces[i]) + m + np.cross(lever, f)
            f = forces[i] + f
            tau[i] = z[i] @ m
        return tau

    def gravity_vector(self, q):
        zero = np.zeros(self.n)
        return self.rnea(q, zero, zero, 1.0)

    def _jacobians(self, z, p, c):
        n = self.n
        jv = np.zeros((n, 3, n))
        for i in range(n):
            for j in range(i + 1):
                jv[i, :, j] = np.cross(z[j], c[i] - p[j])
        return jv

    def mass_matrix(self, q):
        n = self.n
        z, p, c, iw, _ = self.fk(q)
        jv = self._jacobians(z, p, c)
        mm = np.zeros((n, n))
        for i in range(n):
            jw = np.zeros((3, n))
            jw[:, : i + 1] = z[: i + 1].T
            mm += self.masses[i] * jv[i].T @ jv[i] + jw.T @ iw[i] @ jw
        return 0.5 * (mm + mm.T)

    def mass_matrix_derivative(self, q):
        """dM[l, j, k] = d M[j, k] / d q[l]."""
        n = self.n
        z, p, c, iw, _ = self.fk(q)
        jv = self._jacobians(z, p, c)
        dm = np.zeros((n, n, n))
        for i in range(n):
            m = self.masses[i]
            for l in range(i + 1):
                djv = np.zeros((3, n))
                for j in range(i + 1):
                    if l <= j:
                        djv[:, j] = np.cross(z[l], jv[i, :, j])
                    else:
                        djv[:, j] = np.cross(z[j], np.cross(z[l], c[i] - p[l]))
                dz = np.zeros((3, n))
                for j in range(l + 1, i + 1):
                    dz[:, j] = np.cross(z[l], z[j])
                jw = np.zeros((3, n))
                jw[:, : i + 1] = z[: i + 1].T
                sl = _skew(z[l])
                diw = sl @ iw[i] - iw[i] @ sl
                lin = m * djv.T @ jv[i]
                ang = dz.T @ iw[i] @ jw
                dm[l] += lin + lin.T + ang + ang.T + jw.T @ diw @ jw
        return dm

    def coriolis_matrix(self, q, qd):
        dm = self.mass_matrix_derivative(q)
        # Christoffel symbols of the first kind contracted with qd
        t1 = np.einsum("ljk,l->jk", dm, qd)
        t2 = np.einsum("kjl,l->jk", dm, qd)
        t3 = np.einsum("jkl,l->jk", dm, qd)
        return 0.5 * (t1 + t2 - t3)

    def forward_dynamics(self, q, qd, tau):
        mm = self.mass_matrix(q)
        bias = self.rnea(q, qd, np.zeros(self.n), 1.0)
        try:
            low = np.linalg.cholesky(mm)
        except np.linalg.LinAlgError as exc:
            raise SingularDynamicsError("mass matrix is not positive definite") from exc
        y = np.linalg.solve(low, tau - bias)
        return np.linalg.solve(low.T, y)

    # plant integration ----------------------------------------------------

    def plant_step(self, q, qd, tau, coulomb, viscous, stiction_velocity, position_dependent,
                   dist_bias, dist_amp, dist_freq, dist_phase, t, dt, substeps):
        """Advance (q, qd) by dt with RK4 on ``substeps`` equal sub-intervals.

        Returns (q_next, qd_next, qdd_start) where qdd_start is the plant
        acceleration at the start of the step.
        """
        q = np.array(q, dtype=float)
        qd = np.array(qd, dtype=float)
        tau = np.asarray(tau, dtype=float)
        omega = 2.0 * math.pi * np.asarray(dist_freq, dtype=float)

        def accel(tt, qq, vv):
            return self.forward_dynamics(qq, vv, tau + _friction(coulomb, viscous, stiction_velocity,
                                                                 position_dependent, qq, vv)
                                         + dist_bias + dist_amp * np.sin(omega * tt + dist_phase))

        h = dt / substeps
        qdd0 = None
        for s in range(substeps):
            ts = t + s * h
            a1 = accel(ts, q, qd)
            if qdd0 is None:
                qdd0 = a1
            q2 = q + 0.5 * h * qd
            v2 = qd + 0.5 * h * a1
            a2 = accel(ts + 0.5 * h, q2, v2)
            q3 = q + 0.5 * h * v2
            v3 = qd + 0.5 * h * a2
            a3 = accel(ts + 0.5 * h, q3, v3)
            q4 = q + h * v3
            v4 = qd + h * a3
            a4 = accel(ts + h, q4, v4)
            q = q + h / 6.0 * (qd + 2.0 * v2 + 2.0 * v3 + v4)
            qd = qd + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        return q, qd, qdd0


def _friction(coulomb, viscous, stiction_velocity, position_dependent, q, qd):
    if stiction_velocity > 0.0:
        sgn = np.tanh(qd / stiction_velocity)
    else:
        sgn = np.sign(qd)
    scale = 1.0 + 0.5 * np.sin(q) if position_dependent else 1.0
    return -coulomb * scale * sgn - viscous * qd


def friction(coulomb, viscous, stiction_velocity, position_dependent, q, qd):
    return _friction(np.asarray(coulomb, dtype=float), np.asarray(viscous, dtype=float),
                     float(stiction_velocity), bool(position_dependent),
                     np.asarray(q, dtype=float), np.asarray(qd, dtype=float))


def filter_step(x1, x2, x3, u, zeta, omega1, omega2, dt):
    """One RK4 step of the third-order filter, input held over the step. Updates in place."""
    k_in = omega1 * omega2 * omega2
    k_v = omega2 * omega2 + 2.0 * zeta * omega2 * omega1
    k_a = 2.0 * zeta * omega2 + omega1

    def rhs(a, b, cc):
        return b, cc, k_in * (u - a) - k_v * b - k_a * cc

    d1 = rhs(x1, x2, x3)
    d2 = rhs(x1 + 0.5 * dt * d1[0], x2 + 0.5 * dt * d1[1], x3 + 0.5 * dt * d1[2])
    d3 = rhs(x1 + 0.5 * dt * d2[0], x2 + 0.5 * dt * d2[1], x3 + 0.5 * dt * d2[2])
    d4 = rhs(x1 + dt * d3[0], x2 + dt * d3[1], x3 + dt * d3[2])
    inc = [dt / 6.0 * (d1[m] + 2.0 * d2[m] + 2.0 * d3[m] + d4[m]) for m in range(3)]
    x1 += inc[0]
    x2 += inc[1]
    x3 += inc[2]
