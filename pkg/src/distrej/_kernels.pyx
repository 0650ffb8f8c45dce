# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for serial-chain dynamics, plant integration and filtering.

Same surface and conventions as ``_pykernels``; see that module for the frame
conventions. Workspaces live on the ``Chain`` instance and the GIL is held
throughout, so a single instance is safe to share between threads.
"""

import numpy as np

from libc.math cimport sin, cos, tanh, sqrt, M_PI

from .errors import SingularDynamicsError

BACKEND = "cython"


cdef inline void cross3(const double* a, const double* b, double* out) noexcept nogil:
    cdef double x = a[1] * b[2] - a[2] * b[1]
    cdef double y = a[2] * b[0] - a[0] * b[2]
    cdef double z = a[0] * b[1] - a[1] * b[0]
    out[0] = x
    out[1] = y
    out[2] = z


cdef inline double dot3(const double* a, const double* b) noexcept nogil:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


cdef inline void matvec3(const double* m, const double* v, double* out) noexcept nogil:
    cdef double x = m[0] * v[0] + m[1] * v[1] + m[2] * v[2]
    cdef double y = m[3] * v[0] + m[4] * v[1] + m[5] * v[2]
    cdef double z = m[6] * v[0] + m[7] * v[1] + m[8] * v[2]
    out[0] = x
    out[1] = y
    out[2] = z


cdef inline void matmul3(const double* a, const double* b, double* out) noexcept nogil:
    cdef int r, c
    for r in range(3):
        for c in range(3):
            out[3 * r + c] = a[3 * r] * b[c] + a[3 * r + 1] * b[3 + c] + a[3 * r + 2] * b[6 + c]


cdef inline void rodrigues(const double* k, double angle, double* out) noexcept nogil:
    cdef double s = sin(angle)
    cdef double v = 1.0 - cos(angle)
    cdef double x = k[0], y = k[1], z = k[2]
    out[0] = 1.0 - v * (y * y + z * z)
    out[1] = -s * z + v * x * y
    out[2] = s * y + v * x * z
    out[3] = s * z + v * x * y
    out[4] = 1.0 - v * (x * x + z * z)
    out[5] = -s * x + v * y * z
    out[6] = -s * y + v * x * z
    out[7] = s * x + v * y * z
    out[8] = 1.0 - v * (x * x + y * y)


cdef class Chain:
    """Serial revolute chain with preallocated workspaces."""

    cdef readonly int n
    cdef readonly object axes, offsets, masses, coms, inertias, gravity
    cdef double[:, ::1] _axes, _offsets, _coms
    cdef double[::1] _masses, _gravity
    cdef double[:, :, ::1] _inertias
    # workspace
    cdef double[:, ::1] _z, _p, _c, _forces, _moments, _mm, _low, _jv_flat
    cdef double[:, :, ::1] _iw, _rs
    cdef double[::1] _bias, _tmp

    def __init__(self, axes, offsets, masses, coms, inertias, gravity):
        self.axes = np.ascontiguousarray(axes, dtype=float)
        self.offsets = np.ascontiguousarray(offsets, dtype=float)
        self.masses = np.ascontiguousarray(masses, dtype=float)
        self.coms = np.ascontiguousarray(coms, dtype=float)
        self.inertias = np.ascontiguousarray(inertias, dtype=float)
        self.gravity = np.ascontiguousarray(gravity, dtype=float)
        self._axes = self.axes
        self._offsets = self.offsets
        self._masses = self.masses
        self._coms = self.coms
        self._inertias = self.inertias
        self._gravity = self.gravity
        n = self.masses.shape[0]
        self.n = n
        self._z = np.zeros((n, 3))
        self._p = np.zeros((n, 3))
        self._c = np.zeros((n, 3))
        self._forces = np.zeros((n, 3))
        self._moments = np.zeros((n, 3))
        self._iw = np.zeros((n, 3, 3))
        self._rs = np.zeros((n, 3, 3))
        self._mm = np.zeros((n, n))
        self._low = np.zeros((n, n))
        # jv[i, :, j] stored as row (i*3 + axis), column j
        self._jv_flat = np.zeros((3 * n, n))
        self._bias = np.zeros(n)
        self._tmp = np.zeros(n)

    # ------------------------------------------------------------------ core

    cdef void _fk(self, const double* q) noexcept:
        cdef int i, a
        cdef double rot[9]
        cdef double step[9]
        cdef double nxt[9]
        cdef double origin[3]
        cdef double tmp[3]
        cdef double ri[9]
        rot[0] = 1.0; rot[1] = 0.0; rot[2] = 0.0
        rot[3] = 0.0; rot[4] = 1.0; rot[5] = 0.0
        rot[6] = 0.0; rot[7] = 0.0; rot[8] = 1.0
        origin[0] = 0.0; origin[1] = 0.0; origin[2] = 0.0
        for i in range(self.n):
            matvec3(rot, &self._offsets[i, 0], tmp)
            for a in range(3):
                origin[a] += tmp[a]
            rodrigues(&self._axes[i, 0], q[i], step)
            matmul3(rot, step, nxt)
            for a in range(9):
                rot[a] = nxt[a]
                self._rs[i, a // 3, a % 3] = rot[a]
            matvec3(rot, &self._axes[i, 0], &self._z[i, 0])
            matvec3(rot, &self._coms[i, 0], tmp)
            for a in range(3):
                self._p[i, a] = origin[a]
                self._c[i, a] = origin[a] + tmp[a]
            # Iw = R I R^T
            matmul3(rot, &self._inertias[i, 0, 0], nxt)
            for a in range(9):
                ri[a] = rot[3 * (a % 3) + a // 3]
            matmul3(nxt, ri, &self._iw[i, 0, 0])

    cdef void _rnea_after_fk(self, const double* qd, const double* qdd, double gscale,
                             double* tau) noexcept:
        cdef int i, a
        cdef int n = self.n
        cdef double w[3]
        cdef double wd[3]
        cdef double acc[3]
        cdef double prev[3]
        cdef double r[3]
        cdef double t1[3]
        cdef double t2[3]
        cdef double zq[3]
        cdef double ac[3]
        cdef double f[3]
        cdef double m[3]
        cdef double lever[3]
        for a in range(3):
            w[a] = 0.0
            wd[a] = 0.0
            acc[a] = -gscale * self._gravity[a]
            prev[a] = 0.0
        for i in range(n):
            for a in range(3):
                r[a] = self._p[i, a] - prev[a]
            cross3(wd, r, t1)
            cross3(w, r, t2)
            cross3(w, t2, r)
            for a in range(3):
                acc[a] += t1[a] + r[a]
            for a in range(3):
                zq[a] = self._z[i, a] * qd[i]
            cross3(w, zq, t1)
            for a in range(3):
                wd[a] += self._z[i, a] * qdd[i] + t1[a]
                w[a] += zq[a]
            for a in range(3):
                r[a] = self._c[i, a] - self._p[i, a]
            cross3(wd, r, t1)
            cross3(w, r, t2)
            cross3(w, t2, ac)
            for a in range(3):
                ac[a] += acc[a] + t1[a]
                self._forces[i, a] = self._masses[i] * ac[a]
            matvec3(&self._iw[i, 0, 0], wd, t1)
            matvec3(&self._iw[i, 0, 0], w, t2)
            cross3(w, t2, ac)
            for a in range(3):
                self._moments[i, a] = t1[a] + ac[a]
                prev[a] = self._p[i, a]
        for a in range(3):
            f[a] = 0.0
            m[a] = 0.0
        for i in range(n - 1, -1, -1):
            for a in range(3):
                r[a] = self._c[i, a] - self._p[i, a]
                if i + 1 < n:
                    lever[a] = self._p[i + 1, a] - self._p[i, a]
                else:
                    lever[a] = 0.0
            cross3(r, &self._forces[i, 0], t1)
            cross3(lever, f, t2)
            for a in range(3):
                m[a] = self._moments[i, a] + t1[a] + m[a] + t2[a]
                f[a] = self._forces[i, a] + f[a]
            tau[i] = dot3(&self._z[i, 0], m)

    cdef void _jacobians_after_fk(self) noexcept:
        cdef int i, j, a
        cdef double r[3]
        cdef double out[3]
        for i in range(self.n):
            for j in range(self.n):
                if j <= i:
                    for a in range(3):
                        r[a] = self._c[i, a] - self._p[j, a]
                    cross3(&self._z[j, 0], r, out)
                    for a in range(3):
                        self._jv_flat[3 * i + a, j] = out[a]
                else:
                    for a in range(3):
                        self._jv_flat[3 * i + a, j] = 0.0

    cdef void _mass_after_fk(self) noexcept:
        cdef int i, j, k, a
        cdef int n = self.n
        cdef double s, m
        cdef double iz[3]
        self._jacobians_after_fk()
        for j in range(n):
            for k in range(n):
                self._mm[j, k] = 0.0
        for i in range(n):
            m = self._masses[i]
            for k in range(i + 1):
                matvec3(&self._iw[i, 0, 0], &self._z[k, 0], iz)
                for j in range(k + 1):
                    s = 0.0
                    for a in range(3):
                        s += self._jv_flat[3 * i + a, j] * self._jv_flat[3 * i + a, k]
                    self._mm[j, k] += m * s + dot3(&self._z[j, 0], iz)
        for k in range(n):
            for j in range(k + 1, n):
                self._mm[j, k] = self._mm[k, j]

    cdef int _cholesky(self) noexcept:
        cdef int i, j, k
        cdef int n = self.n
        cdef double s
        for i in range(n):
            for j in range(i + 1):
                s = self._mm[i, j]
                for k in range(j):
                    s -= self._low[i, k] * self._low[j, k]
                if i == j:
                    if not s > 0.0:
                        return -1
                    self._low[i, i] = sqrt(s)
                else:
                    self._low[i, j] = s / self._low[j, j]
        return 0

    cdef void _chol_solve(self, double* rhs) noexcept:
        cdef int i, k
        cdef int n = self.n
        cdef double s
        for i in range(n):
            s = rhs[i]
            for k in range(i):
                s -= self._low[i, k] * rhs[k]
            rhs[i] = s / self._low[i, i]
        for i in range(n - 1, -1, -1):
            s = rhs[i]
            for k in range(i + 1, n):
                s -= self._low[k, i] * rhs[k]
            rhs[i] = s / self._low[i, i]

    cdef int _fd(self, const double* q, const double* qd, const double* tau, double* out) noexcept:
        cdef int i
        self._fk(q)
        for i in range(self.n):
            self._tmp[i] = 0.0
        self._rnea_after_fk(qd, &self._tmp[0], 1.0, &self._bias[0])
        self._mass_after_fk()
        if self._cholesky() != 0:
            return -1
        for i in range(self.n):
            out[i] = tau[i] - self._bias[i]
        self._chol_solve(out)
        return 0

    # ------------------------------------------------------------ python API

    def fk(self, q):
        cdef double[::1] qv = np.ascontiguousarray(q, dtype=float)
        self._fk(&qv[0])
        return (np.array(self._z), np.array(self._p), np.array(self._c),
                np.array(self._iw), np.array(self._rs))

    def rnea(self, q, qd, qdd, double gravity_scale=1.0):
        cdef double[::1] qv = np.ascontiguousarray(q, dtype=float)
        cdef double[::1] qdv = np.ascontiguousarray(qd, dtype=float)
        cdef double[::1] qddv = np.ascontiguousarray(qdd, dtype=float)
        out = np.empty(self.n)
        cdef double[::1] ov = out
        self._fk(&qv[0])
        self._rnea_after_fk(&qdv[0], &qddv[0], gravity_scale, &ov[0])
        return out

    def gravity_vector(self, q):
        zero = np.zeros(self.n)
        return self.rnea(q, zero, zero, 1.0)

    def mass_matrix(self, q):
        cdef double[::1] qv = np.ascontiguousarray(q, dtype=float)
        self._fk(&qv[0])
        self._mass_after_fk()
        return np.array(self._mm)

    def mass_matrix_derivative(self, q):
        cdef double[::1] qv = np.ascontiguousarray(q, dtype=float)
        cdef int n = self.n
        cdef int i, l, j, k, a, b
        cdef double m, s
        cdef double r[3]
        cdef double t[3]
        cdef double sl_iw[9]
        cdef double iw_sl[9]
        cdef double diw[9]
        cdef double sl[9]
        cdef double u[3]
        cdef double v[3]
        out = np.zeros((n, n, n))
        cdef double[:, :, ::1] dm = out
        djv_arr = np.zeros((3, n))
        dz_arr = np.zeros((3, n))
        cdef double[:, ::1] djv = djv_arr
        cdef double[:, ::1] dz = dz_arr
        self._fk(&qv[0])
        self._jacobians_after_fk()
        for i in range(n):
            m = self._masses[i]
            for l in range(i + 1):
                for j in range(n):
                    for a in range(3):
                        djv[a, j] = 0.0
                        dz[a, j] = 0.0
                for j in range(i + 1):
                    if l <= j:
                        for a in range(3):
                            r[a] = self._jv_flat[3 * i + a, j]
                        cross3(&self._z[l, 0], r, t)
                    else:
                        for a in range(3):
                            r[a] = self._c[i, a] - self._p[l, a]
                        cross3(&self._z[l, 0], r, u)
                        cross3(&self._z[j, 0], u, t)
                    for a in range(3):
                        djv[a, j] = t[a]
                for j in range(l + 1, i + 1):
                    cross3(&self._z[l, 0], &self._z[j, 0], t)
                    for a in range(3):
                        dz[a, j] = t[a]
                sl[0] = 0.0; sl[1] = -self._z[l, 2]; sl[2] = self._z[l, 1]
                sl[3] = self._z[l, 2]; sl[4] = 0.0; sl[5] = -self._z[l, 0]
                sl[6] = -self._z[l, 1]; sl[7] = self._z[l, 0]; sl[8] = 0.0
                matmul3(sl, &self._iw[i, 0, 0], sl_iw)
                matmul3(&self._iw[i, 0, 0], sl, iw_sl)
                for a in range(9):
                    diw[a] = sl_iw[a] - iw_sl[a]
                for j in range(i + 1):
                    for k in range(i + 1):
                        s = 0.0
                        for a in range(3):
                            s += m * (djv[a, j] * self._jv_flat[3 * i + a, k]
                                      + self._jv_flat[3 * i + a, j] * djv[a, k])
                        # angular part: dz_j^T Iw z_k + z_j^T Iw dz_k + z_j^T dIw z_k
                        matvec3(&self._iw[i, 0, 0], &self._z[k, 0], u)
                        for a in range(3):
                            v[a] = dz[a, j]
                        s += dot3(v, u)
                        for a in range(3):
                            v[a] = dz[a, k]
                        matvec3(&self._iw[i, 0, 0], v, u)
                        s += dot3(&self._z[j, 0], u)
                        matvec3(diw, &self._z[k, 0], u)
                        s += dot3(&self._z[j, 0], u)
                        dm[l, j, k] += s
        return out

    def coriolis_matrix(self, q, qd):
        cdef double[::1] qdv = np.ascontiguousarray(qd, dtype=float)
        dm_arr = self.mass_matrix_derivative(q)
        cdef double[:, :, ::1] dm = dm_arr
        cdef int n = self.n
        cdef int j, k, l
        cdef double s
        out = np.empty((n, n))
        cdef double[:, ::1] cm = out
        for j in range(n):
            for k in range(n):
                s = 0.0
                for l in range(n):
                    s += (dm[l, j, k] + dm[k, j, l] - dm[j, k, l]) * qdv[l]
                cm[j, k] = 0.5 * s
        return out

    def forward_dynamics(self, q, qd, tau):
        cdef double[::1] qv = np.ascontiguousarray(q, dtype=float)
        cdef double[::1] qdv = np.ascontiguousarray(qd, dtype=float)
        cdef double[::1] tv = np.ascontiguousarray(tau, dtype=float)
        out = np.empty(self.n)
        cdef double[::1] ov = out
        if self._fd(&qv[0], &qdv[0], &tv[0], &ov[0]) != 0:
            raise SingularDynamicsError("mass matrix is not positive definite")
        return out

    def plant_step(self, q, qd, tau, coulomb, viscous, double stiction_velocity,
                   bint position_dependent, dist_bias, dist_amp, dist_freq, dist_phase,
                   double t, double dt, int substeps):
        cdef int n = self.n
        cdef double[::1] tv = np.ascontiguousarray(tau, dtype=float)
        cdef double[::1] cv = np.ascontiguousarray(coulomb, dtype=float)
        cdef double[::1] vv = np.ascontiguousarray(viscous, dtype=float)
        cdef double[::1] db = np.ascontiguousarray(dist_bias, dtype=float)
        cdef double[::1] da = np.ascontiguousarray(dist_amp, dtype=float)
        cdef double[::1] df = np.ascontiguousarray(dist_freq, dtype=float)
        cdef double[::1] dp = np.ascontiguousarray(dist_phase, dtype=float)
        q_out = np.array(q, dtype=float)
        qd_out = np.array(qd, dtype=float)
        qdd0 = np.empty(n)
        work = np.empty((12, n))
        cdef double[::1] x = q_out
        cdef double[::1] v = qd_out
        cdef double[::1] a0 = qdd0
        cdef double[:, ::1] w = work
        cdef double h = dt / substeps
        cdef double ts
        cdef int s, i, stage
        cdef double* qs
        cdef double* vs
        cdef double* acc
        cdef double* torque = &w[11, 0]
        # rows: 0-3 stage accelerations, 4-7 stage velocities, 8-10 stage positions, 11 torque
        for s in range(substeps):
            ts = t + s * h
            for stage in range(4):
                if stage == 0:
                    qs = &x[0]
                    vs = &v[0]
                else:
                    for i in range(n):
                        if stage == 3:
                            w[8 + stage - 1, i] = x[i] + h * w[4 + stage - 1, i]
                            w[4 + stage, i] = v[i] + h * w[stage - 1, i]
                        else:
                            w[8 + stage - 1, i] = x[i] + 0.5 * h * w[4 + stage - 1, i]
                            w[4 + stage, i] = v[i] + 0.5 * h * w[stage - 1, i]
                    qs = &w[8 + stage - 1, 0]
                    vs = &w[4 + stage, 0]
                if stage == 0:
                    for i in range(n):
                        w[4, i] = v[i]
                _plant_torque(n, qs, vs, &tv[0], &cv[0], &vv[0], stiction_velocity,
                              position_dependent, &db[0], &da[0], &df[0], &dp[0],
                              ts + (0.0 if stage == 0 else (h if stage == 3 else 0.5 * h)),
                              torque)
                acc = &w[stage, 0]
                if self._fd(qs, vs, torque, acc) != 0:
                    raise SingularDynamicsError("mass matrix is not positive definite")
                if s == 0 and stage == 0:
                    for i in range(n):
                        a0[i] = acc[i]
            for i in range(n):
                x[i] += h / 6.0 * (w[4, i] + 2.0 * w[5, i] + 2.0 * w[6, i] + w[7, i])
                v[i] += h / 6.0 * (w[0, i] + 2.0 * w[1, i] + 2.0 * w[2, i] + w[3, i])
        return q_out, qd_out, qdd0


cdef inline double _sgn(double x) noexcept nogil:
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


cdef void _plant_torque(int n, const double* q, const double* qd, const double* tau,
                        const double* coulomb, const double* viscous, double vs, bint posdep,
                        const double* bias, const double* amp, const double* freq,
                        const double* phase, double t, double* out) noexcept nogil:
    cdef int i
    cdef double sg, scale
    for i in range(n):
        if vs > 0.0:
            sg = tanh(qd[i] / vs)
        else:
            sg = _sgn(qd[i])
        scale = 1.0 + 0.5 * sin(q[i]) if posdep else 1.0
        out[i] = (tau[i] - coulomb[i] * scale * sg - viscous[i] * qd[i]
                  + bias[i] + amp[i] * sin(2.0 * M_PI * freq[i] * t + phase[i]))


def friction(coulomb, viscous, double stiction_velocity, bint position_dependent, q, qd):
    cdef double[::1] cv = np.ascontiguousarray(coulomb, dtype=float)
    cdef double[::1] vv = np.ascontiguousarray(viscous, dtype=float)
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=float)
    cdef double[::1] qdv = np.ascontiguousarray(qd, dtype=float)
    cdef int n = qdv.shape[0]
    zero_arr = np.zeros(n)
    cdef double[::1] zero = zero_arr
    out = np.empty(n)
    cdef double[::1] ov = out
    _plant_torque(n, &qv[0], &qdv[0], &zero[0], &cv[0], &vv[0], stiction_velocity,
                  position_dependent, &zero[0], &zero[0], &zero[0], &zero[0], 0.0, &ov[0])
    return out


def filter_step(double[::1] x1, double[::1] x2, double[::1] x3, u, double zeta,
                double omega1, double omega2, double dt):
    """One RK4 step of the third-order filter, input held over the step. Updates in place."""
    cdef double[::1] uv = np.ascontiguousarray(u, dtype=float)
    cdef double k_in = omega1 * omega2 * omega2
    cdef double k_v = omega2 * omega2 + 2.0 * zeta * omega2 * omega1
    cdef double k_a = 2.0 * zeta * omega2 + omega1
    cdef int i
    cdef double a, b, c, ui
    cdef double d1a, d1b, d1c, d2a, d2b, d2c, d3a, d3b, d3c, d4a, d4b, d4c
    cdef double ta, tb, tc
    for i in range(x1.shape[0]):
        a = x1[i]
        b = x2[i]
        c = x3[i]
        ui = uv[i]
        d1a = b
        d1b = c
        d1c = k_in * (ui - a) - k_v * b - k_a * c
        ta = a + 0.5 * dt * d1a
        tb = b + 0.5 * dt * d1b
        tc = c + 0.5 * dt * d1c
        d2a = tb
        d2b = tc
        d2c = k_in * (ui - ta) - k_v * tb - k_a * tc
        ta = a + 0.5 * dt * d2a
        tb = b + 0.5 * dt * d2b
        tc = c + 0.5 * dt * d2c
        d3a = tb
        d3b = tc
        d3c = k_in * (ui - ta) - k_v * tb - k_a * tc
        ta = a + dt * d3a
        tb = b + dt * d3b
        tc = c + dt * d3c
        d4a = tb
        d4b = tc
        d4c = k_in * (ui - ta) - k_v * tb - k_a * tc
        x1[i] = a + dt / 6.0 * (d1a + 2.0 * d2a + 2.0 * d3a + d4a)
        x2[i] = b + dt / 6.0 * (d1b + 2.0 * d2b + 2.0 * d3b + d4b)
        x3[i] = c + dt / 6.0 * (d1c + 2.0 * d2c + 2.0 * d3c + d4c)
