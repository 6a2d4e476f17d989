"""Divergence-free periodic vector fields in truncated Fourier representation.

Coefficients are stored on the half-spectrum grid of shape (3, N, N, N//2+1)
(numpy rfftn layout) in the orthonormal-basis convention: the stored
amplitude of wavevector k is the inner product of the physical field with
the unit basis function exp(ik.x)/L^{3/2}, so the physical L2 norm equals
the plain l2 norm of the coefficients (Parseval, no volume factors).

Hermitian symmetry is implicit in the layout except on the kz=0 and
kz=N/2 planes, which are kept self-conjugate explicitly.  Sums over the
full wavevector lattice use the plane weights provided by WaveLattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _fft
from . import kernels


class LatticeMismatchError(ValueError):
    """Operands live on different wavevector lattices."""


class GevreyOverflowError(OverflowError):
    """A Gevrey-weighted sum exceeds the largest representable float."""


class WaveLattice:
    """Wavevector grid with Stokes eigenvalues and dealiasing mask.

    The zero wavevector is excluded (all fields are zero-mean); the
    smallest eigenvalue is lam1 = (2*pi/L)^2, equal to 1 for the default
    box size L = 2*pi.  The dealias cut keeps |k_i| <= N/3, tightened by
    one when 3 divides N so quadratic products stay alias-free.
    """

    def __init__(self, n: int, box_size: float = 2.0 * math.pi):
        if n < 4 or n % 2:
            raise ValueError(f"resolution must be even and >= 4, got {n}")
        if box_size <= 0:
            raise ValueError(f"box size must be positive, got {box_size}")
        self.n = n
        self.box_size = float(box_size)
        self.half = n // 2 + 1
        self.kunit = 2.0 * math.pi / self.box_size

        ix = np.fft.fftfreq(n, 1.0 / n).astype(np.int64)
        self.nx = ix[:, None, None]
        self.ny = ix[None, :, None]
        self.nz = np.arange(self.half, dtype=np.int64)[None, None, :]
        self.n2 = self.nx * self.nx + self.ny * self.ny + self.nz * self.nz

        self.kx = self.kunit * self.nx.astype(float)
        self.ky = self.kunit * self.ny.astype(float)
        self.kz = self.kunit * self.nz.astype(float)
        self.lam = self.kunit ** 2 * self.n2.astype(float)
        lam_safe = self.lam.copy()
        lam_safe[0, 0, 0] = 1.0
        self.lam_safe = lam_safe
        self.lam1 = self.kunit ** 2

        self.dealias_cut = (n - 1) // 3
        self.dealias = ((np.abs(self.nx) <= self.dealias_cut)
                        & (np.abs(self.ny) <= self.dealias_cut)
                        & (self.nz <= self.dealias_cut))
        self.lam_max = float(self.lam[self.dealias].max())
        self.kappa_max = math.sqrt(self.lam_max)

        # weight 2 for modes whose conjugate partner is not stored
        w = np.full((n, n, self.half), 2.0)
        w[:, :, 0] = 1.0
        w[:, :, self.half - 1] = 1.0
        self.weights = w

        self.shell_index = np.rint(np.sqrt(self.n2.astype(float))).astype(np.int64)
        self.n_shells = int(self.shell_index[self.dealias].max()) + 1

        self._phys_scale = n ** 3 / self.box_size ** 1.5
        self._spec_scale = 1.0 / self._phys_scale
        # index maps for conjugating the self-conjugate planes
        self._neg = (-np.arange(n)) % n

    def __eq__(self, other):
        return (isinstance(other, WaveLattice) and self.n == other.n
                and self.box_size == other.box_size)

    def __hash__(self):
        return hash((self.n, self.box_size))

    def __repr__(self):
        return f"WaveLattice(n={self.n}, box_size={self.box_size:g})"

    def require_same(self, other: "WaveLattice"):
        if self != other:
            raise LatticeMismatchError(f"{self!r} vs {other!r}")

    def symmetrize_planes(self, coef: np.ndarray) -> None:
        """Enforce exact conjugate symmetry on the kz=0 and kz=N/2 planes."""
        for jz in (0, self.half - 1):
            plane = coef[..., jz]
            flipped = np.conj(plane[..., self._neg, :][..., :, self._neg])
            plane += flipped
            plane *= 0.5

    def to_physical(self, coef: np.ndarray) -> np.ndarray:
        """Inverse transform one component to the (N, N, N) physical grid."""
        return _fft.irfftn(coef * self._phys_scale, (self.n,) * 3)

    def from_physical(self, field: np.ndarray) -> np.ndarray:
        """Forward transform one real component to half-spectrum coefficients."""
        coef = _fft.rfftn(field)
        coef *= self._spec_scale
        return coef


@dataclass(frozen=True)
class ShellBand:
    """Half-open spectral band: modes with lo <= sqrt(lam(k)) < hi."""

    lo: float
    hi: float = math.inf

    def __post_init__(self):
        if self.lo < 0:
            raise ValueError(f"band lower edge must be >= 0, got {self.lo}")
        if self.lo > self.hi:
            raise ValueError(f"band edges out of order: [{self.lo}, {self.hi})")

    def mask(self, lattice: WaveLattice) -> np.ndarray:
        kap = np.sqrt(lattice.lam)
        return (kap >= self.lo) & (kap < self.hi)


class SpectralField:
    """Immutable divergence-free velocity field on a WaveLattice."""

    __slots__ = ("lattice", "coef")

    def __init__(self, lattice: WaveLattice, coef: np.ndarray, copy: bool = True):
        if coef.shape != (3, lattice.n, lattice.n, lattice.half):
            raise ValueError(f"coefficient shape {coef.shape} does not match {lattice!r}")
        coef = np.array(coef, dtype=np.complex128, copy=copy, order="C")
        coef[:, 0, 0, 0] = 0.0  # zero-mean fields only
        coef.flags.writeable = False
        self.lattice = lattice
        self.coef = coef

    # -- constructors -------------------------------------------------

    @classmethod
    def zeros(cls, lattice: WaveLattice) -> "SpectralField":
        return cls(lattice, np.zeros((3, lattice.n, lattice.n, lattice.half),
                                     dtype=np.complex128), copy=False)

    @classmethod
    def from_physical(cls, lattice: WaveLattice, u: np.ndarray) -> "SpectralField":
        """Transform a real (3, N, N, N) velocity field to spectral space."""
        coef = np.stack([lattice.from_physical(np.ascontiguousarray(u[i]))
                         for i in range(3)])
        lattice.symmetrize_planes(coef)
        return cls(lattice, coef, copy=False)

    @classmethod
    def single_mode(cls, lattice: WaveLattice, kvec, amplitude) -> "SpectralField":
        """Field with amplitude on integer wavevector kvec (+ conjugate pair).

        The stored coefficient at kvec is exactly `amplitude`; the conjugate
        mode is implied by the layout (or written explicitly when kvec has a
        stored partner on a self-conjugate plane).
        """
        nx, ny, nz = (int(c) for c in kvec)
        n = lattice.n
        coef = np.zeros((3, n, n, lattice.half), dtype=np.complex128)
        amp = np.asarray(amplitude, dtype=np.complex128)
        if nz < 0:
            nx, ny, nz = -nx, -ny, -nz
            amp = np.conj(amp)
        coef[:, nx % n, ny % n, nz] = amp
        if nz == 0 or nz == n // 2:
            coef[:, (-nx) % n, (-ny) % n, nz] = np.conj(amp)
        return cls(lattice, coef, copy=False)

    # -- transforms and reductions ------------------------------------

    def to_physical(self) -> np.ndarray:
        return np.stack([self.lattice.to_physical(self.coef[i]) for i in range(3)])

    def inner(self, other: "SpectralField") -> float:
        """L2 inner product; real by Hermitian symmetry."""
        self.lattice.require_same(other.lattice)
        s = self.coef.reshape(3, -1)
        o = other.coef.reshape(3, -1)
        w = self.lattice.weights.reshape(-1)
        return float(np.einsum("ck,ck,k->", s.real, o.real, w)
                     + np.einsum("ck,ck,k->", s.imag, o.imag, w))

    def _weighted_mod2(self) -> np.ndarray:
        c = self.coef
        return self.lattice.weights * (c.real * c.real + c.imag * c.imag).sum(axis=0)

    def l2_norm_sq(self) -> float:
        return float(self._weighted_mod2().sum())

    def l2_norm(self) -> float:
        return math.sqrt(self.l2_norm_sq())

    def grad_norm_sq(self) -> float:
        """Squared H1 seminorm: sum of lam(k) |u(k)|^2."""
        return float((self.lattice.lam * self._weighted_mod2()).sum())

    def grad_norm(self) -> float:
        return math.sqrt(self.grad_norm_sq())

    def stokes_norm_sq(self) -> float:
        """Squared D(A) norm: sum of lam(k)^2 |u(k)|^2."""
        return float((self.lattice.lam ** 2 * self._weighted_mod2()).sum())

    # -- diagnostics ---------------------------------------------------

    def divergence_defect(self) -> float:
        """max over modes of |k.u| / (|k| |u|)."""
        lat = self.lattice
        dot = (lat.kx * self.coef[0] + lat.ky * self.coef[1]
               + lat.kz * self.coef[2])
        mod = np.sqrt((np.abs(self.coef) ** 2).sum(axis=0))
        denom = np.sqrt(lat.lam_safe) * np.where(mod > 0, mod, 1.0)
        rel = np.abs(dot) / denom
        rel[mod == 0] = 0.0
        return float(rel.max())

    def hermitian_defect(self) -> float:
        """Relative asymmetry of the self-conjugate planes (0 for valid fields)."""
        lat = self.lattice
        worst = 0.0
        scale = max(np.abs(self.coef).max(), 1e-300)
        for jz in (0, lat.half - 1):
            plane = self.coef[..., jz]
            flipped = np.conj(plane[..., lat._neg, :][..., :, lat._neg])
            worst = max(worst, float(np.abs(plane - flipped).max()) / scale)
        return worst

    def __repr__(self):
        return f"SpectralField(n={self.lattice.n}, |u|={self.l2_norm():.6g})"


# ---------------------------------------------------------------------------
# linear operators (diagonal multipliers)
# ---------------------------------------------------------------------------

def _mult(field: SpectralField, m: np.ndarray) -> SpectralField:
    return SpectralField(field.lattice, field.coef * m, copy=False)


def leray_project(field: SpectralField) -> SpectralField:
    """Orthogonal projection onto divergence-free fields.

    Per mode: u <- u - k (k.u)/|k|^2.  Idempotent; annihilates gradients.
    """
    return _project_raw(field.lattice, field.coef)


def stokes_apply(field: SpectralField, s: float) -> SpectralField:
    """Apply a real power of the Stokes operator: multiply by lam(k)^s."""
    if s == 0:
        return field
    return _mult(field, field.lattice.lam_safe ** s)


def helmholtz_inverse(field: SpectralField, alpha: float) -> SpectralField:
    """Apply (I + alpha^2 A)^{-1}; all multipliers lie in (0, 1]."""
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    if alpha == 0:
        return field
    return _mult(field, 1.0 / (1.0 + alpha ** 2 * field.lattice.lam))


def band_project(field: SpectralField, band: ShellBand) -> SpectralField:
    """Keep modes with band.lo <= sqrt(lam(k)) < band.hi, zero the rest."""
    return _mult(field, band.mask(field.lattice))


# ---------------------------------------------------------------------------
# advection (the quadratic term) and the associated trilinear pairing
# ---------------------------------------------------------------------------

def advect(u: SpectralField, v: SpectralField) -> SpectralField:
    """Pseudo-spectral advection term P((u.grad) v), dealiased.

    Inverse transforms u and the nine gradient components of v, forms
    (u.grad)v pointwise, transforms back, dealiases, projects.  For fields
    supported inside the dealias mask this equals the exact Galerkin-
    truncated convolution.
    """
    lat = u.lattice
    lat.require_same(v.lattice)
    up = [lat.to_physical(u.coef[i]) for i in range(3)]
    kk = (lat.kx, lat.ky, lat.kz)
    out = np.empty_like(u.coef)
    for i in range(3):
        w = np.zeros((lat.n,) * 3)
        for j in range(3):
            w += up[j] * lat.to_physical(1j * kk[j] * v.coef[i])
        out[i] = lat.from_physical(w)
    out *= lat.dealias
    lat.symmetrize_planes(out)
    return _project_raw(lat, out)


def advect_self(v: SpectralField, work: "AdvectionWorkspace | None" = None) -> SpectralField:
    """Fast path for P((v.grad) v) via the divergence form.

    For divergence-free v the Galerkin truncations of (v.grad)v and
    div(v x v) coincide mode-for-mode, so this returns the same field as
    ``advect(v, v)`` while needing 9 instead of 15 transforms.
    """
    if work is None:
        work = AdvectionWorkspace(v.lattice)
    out = np.empty_like(v.coef)
    work.eval(v.coef, out)
    lat = v.lattice
    lat.symmetrize_planes(out)
    return SpectralField(lat, out, copy=False)


class AdvectionWorkspace:
    """Reusable buffers for the divergence-form advection evaluation."""

    def __init__(self, lattice: WaveLattice):
        self.lattice = lattice
        n = lattice.n
        self._prod = np.empty((6, n, n, n))
        self._phat = np.empty((6, n, n, lattice.half), dtype=np.complex128)

    def eval(self, coef: np.ndarray, out: np.ndarray) -> None:
        """out <- dealiased P(div(u x u)) for the velocity coefficients."""
        lat = self.lattice
        ux = lat.to_physical(coef[0])
        uy = lat.to_physical(coef[1])
        uz = lat.to_physical(coef[2])
        kernels.products6(ux, uy, uz, self._prod)
        for i in range(6):
            self._phat[i] = _fft.rfftn(self._prod[i])
        kernels.div_project_mask(self._phat, out, lat.kunit,
                                 lat.dealias_cut, lat._spec_scale)


def advect_inner(u: SpectralField, v: SpectralField, w: SpectralField) -> float:
    """Trilinear pairing <P((u.grad)v), w>; real by Hermitian symmetry."""
    return advect(u, v).inner(w)


# ---------------------------------------------------------------------------
# spectra and Gevrey norms
# ---------------------------------------------------------------------------

def energy_spectrum(field: SpectralField) -> np.ndarray:
    """Shell-binned energy: E[s] = 1/2 sum_{round(|k|)=s} |u(k)|^2."""
    lat = field.lattice
    e = 0.5 * field._weighted_mod2()
    nbins = int(lat.shell_index.max()) + 1
    return np.bincount(lat.shell_index.reshape(-1), weights=e.reshape(-1),
                       minlength=nbins)


def gevrey_norm(field: SpectralField, r: float, tau: float) -> float:
    """Gevrey-weighted norm (sum |u(k)|^2 |k|^{2r} e^{2 tau |k|})^{1/2}.

    |k| is the integer lattice length (box units).  Raises
    GevreyOverflowError instead of silently returning inf.
    """
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    lat = field.lattice
    mod2 = field._weighted_mod2()
    occupied = mod2 > 0.0
    if not occupied.any():
        return 0.0
    klen = np.sqrt(lat.n2.astype(float))
    klen_safe = np.where(klen > 0, klen, 1.0)
    log_terms = (np.log(mod2, out=np.full(mod2.shape, -np.inf), where=occupied)
                 + 2.0 * r * np.log(klen_safe) + 2.0 * tau * klen)
    if log_terms[occupied].max() > math.log(np.finfo(float).max) - 10.0:
        raise GevreyOverflowError(
            f"Gevrey sum overflows double precision at r={r}, tau={tau}")
    total = float(np.exp(log_terms[occupied]).sum())
    return math.sqrt(total)


# ---------------------------------------------------------------------------
# helpers shared with other modules
# ---------------------------------------------------------------------------

def _project_raw(lattice: WaveLattice, coef: np.ndarray) -> SpectralField:
    """Leray-project raw coefficients (shared by leray_project and advect)."""
    kk = (lattice.kx, lattice.ky, lattice.kz)
    d = (kk[0] * coef[0] + kk[1] * coef[1] + kk[2] * coef[2]) / lattice.lam_safe
    out = np.stack([coef[i] - kk[i] * d for i in range(3)])
    return SpectralField(lattice, out, copy=False)


def random_divergence_free(lattice: WaveLattice, rng: np.random.Generator,
                           spectrum=None, energy: float = 0.5) -> SpectralField:
    """Random dealiased divergence-free field with a prescribed shell spectrum.

    `spectrum` maps a shell-index array to target (unnormalised) shell
    energies; default is the bump s^4 exp(-2 s^2 / 9).  The result is scaled
    so the kinetic energy |u|^2/2 equals `energy`.
    """
    n = lattice.n
    white = rng.standard_normal((3, n, n, n))
    f = SpectralField.from_physical(lattice, white)
    coef = f.coef * lattice.dealias
    field = _project_raw(lattice, coef)

    if spectrum is None:
        def spectrum(s):
            return s ** 4 * np.exp(-2.0 * s ** 2 / 9.0)

    shells = energy_spectrum(field)
    target = spectrum(np.arange(len(shells), dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = np.sqrt(np.where(shells > 0, target / np.where(shells > 0, shells, 1.0), 0.0))
    coef = field.coef * gain[lattice.shell_index]
    field = SpectralField(lattice, coef, copy=False)
    ke = 0.5 * field.l2_norm_sq()
    if ke > 0:
        field = SpectralField(lattice, field.coef * math.sqrt(energy / ke), copy=False)
    return field
