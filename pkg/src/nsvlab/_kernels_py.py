"""Pure-numpy implementations of the hot kernels.

Selected at import time by :mod:`nsvlab.kernels` when the compiled extension
is unavailable (or when NSVLAB_KERNELS=python).  Signatures and arithmetic
mirror ``_kernels.pyx`` so the two are interchangeable; the benchmark suite
compares them.
"""

import numpy as np

_LATTICE_CACHE = {}


def _lattice(n):
    """Integer wavenumber arrays for an (n, n, n//2+1) half-spectrum grid."""
    got = _LATTICE_CACHE.get(n)
    if got is None:
        ix = np.fft.fftfreq(n, 1.0 / n).astype(np.int64)
        nx = ix[:, None, None]
        ny = ix[None, :, None]
        nz = np.arange(n // 2 + 1, dtype=np.int64)[None, None, :]
        n2 = (nx * nx + ny * ny + nz * nz).astype(float)
        inv_n2 = np.where(n2 == 0.0, 0.0, 1.0 / np.where(n2 == 0.0, 1.0, n2))
        got = (nx.astype(float), ny.astype(float), nz.astype(float),
               np.abs(nx), np.abs(ny), nz, inv_n2)
        _LATTICE_CACHE[n] = got
    return got


def products6(ux, uy, uz, out):
    """out[0..5] = (ux*ux, ux*uy, ux*uz, uy*uy, uy*uz, uz*uz)."""
    np.multiply(ux, ux, out=out[0])
    np.multiply(ux, uy, out=out[1])
    np.multiply(ux, uz, out=out[2])
    np.multiply(uy, uy, out=out[3])
    np.multiply(uy, uz, out=out[4])
    np.multiply(uz, uz, out=out[5])


def div_project_mask(p6, out3, kunit, ncut, scale):
    """Divergence of a symmetric tensor, Leray-projected and dealiased.

    out_i = mask * P_ij (1j*scale*k_l p_jl) on the half-spectrum grid.
    """
    n = p6.shape[1]
    fx, fy, fz, ax, ay, az, inv_n2 = _lattice(n)
    # kunit factors cancel between k*p and k(k.w)/k2; fold `scale` once
    wx = (1j * scale * kunit) * (fx * p6[0] + fy * p6[1] + fz * p6[2])
    wy = (1j * scale * kunit) * (fx * p6[1] + fy * p6[3] + fz * p6[4])
    wz = (1j * scale * kunit) * (fx * p6[2] + fy * p6[4] + fz * p6[5])
    d = (fx * wx + fy * wy + fz * wz) * inv_n2
    keep = (ax <= ncut) & (ay <= ncut) & (az <= ncut)
    np.multiply(wx - fx * d, keep, out=out3[0])
    np.multiply(wy - fy * d, keep, out=out3[1])
    np.multiply(wz - fz * d, keep, out=out3[2])


def rhs_combine(b, f, ivo, out):
    """out = (f - b) * ivo, with ivo broadcast over leading components."""
    ne = ivo.size
    bf = b.reshape(-1, ne)
    ff = f.reshape(-1, ne)
    of = out.reshape(-1, ne)
    np.multiply(ff - bf, ivo.reshape(1, ne), out=of)


def lawson_stage_a(v, k, e, h, out):
    """out = e*(v + h*k)."""
    ne = e.size
    np.multiply(v.reshape(-1, ne) + h * k.reshape(-1, ne), e.reshape(1, ne),
                out=out.reshape(-1, ne))


def lawson_stage_b(v, k, e, h, out):
    """out = e*v + h*k."""
    ne = e.size
    of = out.reshape(-1, ne)
    np.multiply(v.reshape(-1, ne), e.reshape(1, ne), out=of)
    of += h * k.reshape(-1, ne)


def lawson_stage_c(v, k, e, e2, h, out):
    """out = e2*v + h*e*k."""
    ne = e.size
    of = out.reshape(-1, ne)
    np.multiply(v.reshape(-1, ne), e2.reshape(1, ne), out=of)
    of += (h * e.reshape(1, ne)) * k.reshape(-1, ne)


def lawson_final(v, k1, k2, k3, k4, e, e2, h, out):
    """out = e2*v + (h/6)*(e2*k1 + 2*e*(k2+k3) + k4)."""
    ne = e.size
    ef = e.reshape(1, ne)
    e2f = e2.reshape(1, ne)
    of = out.reshape(-1, ne)
    np.multiply(v.reshape(-1, ne) + (h / 6.0) * k1.reshape(-1, ne), e2f, out=of)
    of += (h / 3.0) * ef * (k2.reshape(-1, ne) + k3.reshape(-1, ne))
    of += (h / 6.0) * k4.reshape(-1, ne)


def sabra_advance(u, kp, f, efh, eff, ivo, a, b, c, dt, nsteps, stride, samples):
    """Advance Sabra shell amplitudes in place by `nsteps` Lawson-RK4 steps.

    `u` is modified in place.  `kp` is the wavenumber array padded with two
    ghost entries on each side (kp[2+n] = k_n).  Every `stride` steps the
    state is copied into the next row of `samples`.  Returns -1 on success
    or the index of the first step producing a non-finite amplitude.
    """
    m = u.shape[0]
    up = np.zeros(m + 4, dtype=np.complex128)
    h = dt
    h2 = 0.5 * dt
    isamp = 0

    def rhs(ua, out):
        up[2:2 + m] = ua
        nl = 1j * (a * kp[3:3 + m] * up[4:4 + m] * np.conj(up[3:3 + m])
                   + b * kp[2:2 + m] * up[3:3 + m] * np.conj(up[1:1 + m])
                   - c * kp[1:1 + m] * up[1:1 + m] * up[0:m])
        np.multiply(nl + f, ivo, out=out)

    k1 = np.empty(m, dtype=np.complex128)
    k2 = np.empty_like(k1)
    k3 = np.empty_like(k1)
    k4 = np.empty_like(k1)
    for step in range(nsteps):
        rhs(u, k1)
        rhs(efh * (u + h2 * k1), k2)
        rhs(efh * u + h2 * k2, k3)
        rhs(eff * u + h * (efh * k3), k4)
        u *= eff
        u += (h / 6.0) * (eff * k1 + 2.0 * efh * (k2 + k3) + k4)
        if not np.all(np.isfinite(u.view(np.float64))):
            return step
        if stride > 0 and (step + 1) % stride == 0:
            samples[isamp, :] = u
            isamp += 1
    return -1
