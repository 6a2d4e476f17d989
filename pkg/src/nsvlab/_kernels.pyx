# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused hot kernels: Sabra advance loop and the 3D per-step elementwise ops.

Mirrors the signatures of ``_kernels_py``; one pass over memory per call.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport isfinite

cdef extern from "complex.h" nogil:
    double complex conj(double complex)
    double creal(double complex)
    double cimag(double complex)

cdef double complex I = 1j


def products6(double[:, :, ::1] ux, double[:, :, ::1] uy, double[:, :, ::1] uz,
              double[:, :, :, ::1] out):
    """out[0..5] = (ux*ux, ux*uy, ux*uz, uy*uy, uy*uz, uz*uz)."""
    cdef Py_ssize_t n0 = ux.shape[0], n1 = ux.shape[1], n2 = ux.shape[2]
    cdef Py_ssize_t i, j, l
    cdef double x, y, z
    with nogil:
        for i in range(n0):
            for j in range(n1):
                for l in range(n2):
                    x = ux[i, j, l]
                    y = uy[i, j, l]
                    z = uz[i, j, l]
                    out[0, i, j, l] = x * x
                    out[1, i, j, l] = x * y
                    out[2, i, j, l] = x * z
                    out[3, i, j, l] = y * y
                    out[4, i, j, l] = y * z
                    out[5, i, j, l] = z * z


def div_project_mask(double complex[:, :, ::1] pxx, double complex[:, :, ::1] pxy,
                     double complex[:, :, ::1] pxz, double complex[:, :, ::1] pyy,
                     double complex[:, :, ::1] pyz, double complex[:, :, ::1] pzz,
                     double complex[:, :, ::1] ox, double complex[:, :, ::1] oy,
                     double complex[:, :, ::1] oz,
                     double kunit, long ncut, double scale):
    """Divergence of a symmetric tensor, Leray-projected and dealiased."""
    cdef Py_ssize_t n = pxx.shape[0], h = pxx.shape[2]
    cdef Py_ssize_t i, j, l
    cdef long nx, ny, nz, half = n // 2
    cdef double fx, fy, fz, n2
    cdef double complex wx, wy, wz, d, fac = I * scale * kunit
    with nogil:
        for i in range(n):
            nx = i if i < half else i - n
            for j in range(n):
                ny = j if j < half else j - n
                for l in range(h):
                    nz = l
                    if (nx if nx >= 0 else -nx) > ncut or \
                       (ny if ny >= 0 else -ny) > ncut or nz > ncut:
                        ox[i, j, l] = 0
                        oy[i, j, l] = 0
                        oz[i, j, l] = 0
                        continue
                    fx = nx
                    fy = ny
                    fz = nz
                    wx = fac * (fx * pxx[i, j, l] + fy * pxy[i, j, l] + fz * pxz[i, j, l])
                    wy = fac * (fx * pxy[i, j, l] + fy * pyy[i, j, l] + fz * pyz[i, j, l])
                    wz = fac * (fx * pxz[i, j, l] + fy * pyz[i, j, l] + fz * pzz[i, j, l])
                    n2 = fx * fx + fy * fy + fz * fz
                    if n2 > 0.0:
                        d = (fx * wx + fy * wy + fz * wz) / n2
                        wx = wx - fx * d
                        wy = wy - fy * d
                        wz = wz - fz * d
                    else:
                        wx = 0
                        wy = 0
                        wz = 0
                    ox[i, j, l] = wx
                    oy[i, j, l] = wy
                    oz[i, j, l] = wz


def rhs_combine(double complex[::1] b, double complex[::1] f,
                double[::1] ivo, double complex[::1] out):
    """out = (f - b) * ivo, ivo broadcast over leading components."""
    cdef Py_ssize_t ne = ivo.shape[0], ntot = b.shape[0]
    cdef Py_ssize_t c, i, off
    with nogil:
        for c in range(ntot // ne):
            off = c * ne
            for i in range(ne):
                out[off + i] = (f[off + i] - b[off + i]) * ivo[i]


def lawson_stage_a(double complex[::1] v, double complex[::1] k,
                   double[::1] e, double h, double complex[::1] out):
    """out = e*(v + h*k)."""
    cdef Py_ssize_t ne = e.shape[0], ntot = v.shape[0]
    cdef Py_ssize_t c, i, off
    with nogil:
        for c in range(ntot // ne):
            off = c * ne
            for i in range(ne):
                out[off + i] = e[i] * (v[off + i] + h * k[off + i])


def lawson_stage_b(double complex[::1] v, double complex[::1] k,
                   double[::1] e, double h, double complex[::1] out):
    """out = e*v + h*k."""
    cdef Py_ssize_t ne = e.shape[0], ntot = v.shape[0]
    cdef Py_ssize_t c, i, off
    with nogil:
        for c in range(ntot // ne):
            off = c * ne
            for i in range(ne):
                out[off + i] = e[i] * v[off + i] + h * k[off + i]


def lawson_stage_c(double complex[::1] v, double complex[::1] k,
                   double[::1] e, double[::1] e2, double h,
                   double complex[::1] out):
    """out = e2*v + h*e*k."""
    cdef Py_ssize_t ne = e.shape[0], ntot = v.shape[0]
    cdef Py_ssize_t c, i, off
    with nogil:
        for c in range(ntot // ne):
            off = c * ne
            for i in range(ne):
                out[off + i] = e2[i] * v[off + i] + (h * e[i]) * k[off + i]


def lawson_final(double complex[::1] v, double complex[::1] k1,
                 double complex[::1] k2, double complex[::1] k3,
                 double complex[::1] k4, double[::1] e, double[::1] e2,
                 double h, double complex[::1] out):
    """out = e2*v + (h/6)*(e2*k1 + 2*e*(k2+k3) + k4)."""
    cdef Py_ssize_t ne = e.shape[0], ntot = v.shape[0]
    cdef Py_ssize_t c, i, off
    cdef double h6 = h / 6.0, h3 = h / 3.0
    with nogil:
        for c in range(ntot // ne):
            off = c * ne
            for i in range(ne):
                out[off + i] = e2[i] * (v[off + i] + h6 * k1[off + i]) \
                    + (h3 * e[i]) * (k2[off + i] + k3[off + i]) \
                    + h6 * k4[off + i]


cdef void _sabra_rhs(double complex[::1] up, double complex[::1] out,
                     double[::1] kp, double complex[::1] f, double[::1] ivo,
                     double a, double b, double c, Py_ssize_t m) nogil:
    cdef Py_ssize_t n
    cdef double complex nl
    for n in range(m):
        nl = I * (a * kp[n + 3] * up[n + 4] * conj(up[n + 3])
                  + b * kp[n + 2] * up[n + 3] * conj(up[n + 1])
                  - c * kp[n + 1] * up[n + 1] * up[n])
        out[n] = (nl + f[n]) * ivo[n]


def sabra_advance(double complex[::1] u, double[::1] kp,
                  double complex[::1] f, double[::1] efh, double[::1] eff,
                  double[::1] ivo, double a, double b, double c, double dt,
                  long nsteps, long stride,
                  double complex[:, ::1] samples):
    """Advance Sabra shell amplitudes in place by `nsteps` Lawson-RK4 steps.

    Returns -1 on success or the index of the first step producing a
    non-finite amplitude.  See the numpy fallback for the full contract.
    """
    cdef Py_ssize_t m = u.shape[0]
    scratch = np.zeros((6, m + 4), dtype=np.complex128)
    cdef double complex[:, ::1] w = scratch
    cdef double complex[::1] up = w[0]
    cdef double complex[::1] k1 = w[1, :m]
    cdef double complex[::1] k2 = w[2, :m]
    cdef double complex[::1] k3 = w[3, :m]
    cdef double complex[::1] k4 = w[4, :m]
    cdef double complex[::1] g = w[5, :m]
    cdef double h = dt, h2 = 0.5 * dt, h6 = dt / 6.0
    cdef long step, isamp = 0, result = -1
    cdef Py_ssize_t n
    cdef bint bad
    with nogil:
        for step in range(nsteps):
            for n in range(m):
                up[n + 2] = u[n]
            _sabra_rhs(up, k1, kp, f, ivo, a, b, c, m)
            for n in range(m):
                up[n + 2] = efh[n] * (u[n] + h2 * k1[n])
            _sabra_rhs(up, k2, kp, f, ivo, a, b, c, m)
            for n in range(m):
                up[n + 2] = efh[n] * u[n] + h2 * k2[n]
            _sabra_rhs(up, k3, kp, f, ivo, a, b, c, m)
            for n in range(m):
                up[n + 2] = eff[n] * u[n] + h * (efh[n] * k3[n])
            _sabra_rhs(up, k4, kp, f, ivo, a, b, c, m)
            bad = 0
            for n in range(m):
                u[n] = eff[n] * u[n] + h6 * (eff[n] * k1[n]
                                             + 2.0 * efh[n] * (k2[n] + k3[n])
                                             + k4[n])
                if not (isfinite(creal(u[n])) and isfinite(cimag(u[n]))):
                    bad = 1
            if bad:
                result = step
                break
            if stride > 0 and (step + 1) % stride == 0:
                for n in range(m):
                    samples[isamp, n] = u[n]
                isamp += 1
    return result
