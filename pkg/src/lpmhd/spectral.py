"""Spectral representation of periodic fields on the 2*pi cube.

Fields are stored in Fourier space as full complex coefficient arrays in
FFT-standard index order.  Coefficients are Fourier-series amplitudes: a
coefficient A at integer wavevector k, together with its conjugate partner
at -k, is the real field 2*Re(A*exp(i k.x)).  The forward transform
therefore carries the 1/n^3 factor.  Projection, differentiation, shell
selection and dealiasing are all diagonal multipliers on the coefficient
grid.

Wavevector components run over {-n/2+1, ..., n/2}; the Nyquist index is
labelled +n/2.  Fields produced by the solver are dealiased and carry no
Nyquist content, which keeps derivative outputs representable as real
fields.
"""

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import fft as sp_fft

__all__ = [
    "Grid3",
    "SpectralScalarField",
    "SpectralVectorField",
    "SymmetryError",
    "fft_workers",
    "to_physical",
    "to_spectral",
    "vector_to_physical",
    "vector_from_physical",
    "leray_project",
    "curl",
    "gradient",
    "divergence",
    "dealias",
    "dealias_mask",
    "lebesgue_norm",
    "l2_norm",
    "inner_l2",
    "grad_l2_sq",
    "hermitian_defect",
    "solenoidal_defect",
    "random_scalar",
    "random_vector",
]

TWO_PI = 2.0 * np.pi

# Relative tolerance for the Hermitian-symmetry guard in to_physical.
_HERMITIAN_RTOL = 1e-8


class SymmetryError(ValueError):
    """Coefficients do not satisfy c(-k) == conj(c(k))."""


def fft_workers() -> int:
    """Worker count for FFT calls.

    Overridden with the LPMHD_THREADS environment variable.  Transform
    output is bit-identical for any worker count, so this only affects
    speed.
    """
    env = os.environ.get("LPMHD_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class Grid3:
    """Cubic collocation/wavenumber grid for the periodic box [0, 2*pi]^3.

    Parameters
    ----------
    n : int
        Points per axis.  Power of two, at least 8, so dyadic shell
        boundaries never straddle representable wavenumbers awkwardly.
    """

    n: int

    def __post_init__(self):
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"grid size must be a power of two >= 8, got {self.n}")

    @property
    def k_max(self) -> int:
        """Nyquist index n/2."""
        return self.n // 2

    @property
    def q_max(self) -> int:
        """Largest dyadic shell with support on this grid.

        Corner modes reach |k| = sqrt(3)*k_max, one shell above k_max.
        """
        return int(np.log2(self.k_max)) + 1

    @cached_property
    def k1(self) -> np.ndarray:
        """Integer wavevector component along one axis, Nyquist at +n/2."""
        k = np.fft.fftfreq(self.n, 1.0 / self.n).astype(np.int64)
        k[self.n // 2] = self.n // 2
        return k

    @cached_property
    def kx(self) -> np.ndarray:
        return self.k1[:, None, None].astype(np.float64)

    @cached_property
    def ky(self) -> np.ndarray:
        return self.k1[None, :, None].astype(np.float64)

    @cached_property
    def kz(self) -> np.ndarray:
        return self.k1[None, None, :].astype(np.float64)

    @cached_property
    def k_sq(self) -> np.ndarray:
        return self.kx**2 + self.ky**2 + self.kz**2

    @cached_property
    def k_abs(self) -> np.ndarray:
        return np.sqrt(self.k_sq)

    @cached_property
    def points(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Collocation coordinates (x, y, z), broadcastable to (n, n, n)."""
        x = np.arange(self.n) * (TWO_PI / self.n)
        return x[:, None, None], x[None, :, None], x[None, None, :]

    @property
    def cell_volume(self) -> float:
        return (TWO_PI / self.n) ** 3


@dataclass
class SpectralScalarField:
    """Scalar field as complex coefficients on the full FFT grid."""

    grid: Grid3
    coeffs: np.ndarray  # (n, n, n) complex128

    def __post_init__(self):
        n = self.grid.n
        if self.coeffs.shape != (n, n, n):
            raise ValueError("coefficient array does not match the grid")
        self.coeffs = np.ascontiguousarray(self.coeffs, dtype=np.complex128)

    def copy(self) -> "SpectralScalarField":
        return SpectralScalarField(self.grid, self.coeffs.copy())

    @classmethod
    def zeros(cls, grid: Grid3) -> "SpectralScalarField":
        return cls(grid, np.zeros((grid.n,) * 3, dtype=np.complex128))


@dataclass
class SpectralVectorField:
    """Three-component field as complex coefficients on the full FFT grid."""

    grid: Grid3
    coeffs: np.ndarray  # (3, n, n, n) complex128

    def __post_init__(self):
        n = self.grid.n
        if self.coeffs.shape != (3, n, n, n):
            raise ValueError("coefficient array does not match the grid")
        self.coeffs = np.ascontiguousarray(self.coeffs, dtype=np.complex128)

    def copy(self) -> "SpectralVectorField":
        return SpectralVectorField(self.grid, self.coeffs.copy())

    @classmethod
    def zeros(cls, grid: Grid3) -> "SpectralVectorField":
        return cls(grid, np.zeros((3,) + (grid.n,) * 3, dtype=np.complex128))


def _fftn(values: np.ndarray) -> np.ndarray:
    # norm="forward" puts the 1/n^3 factor on the forward transform, so
    # coefficients are Fourier-series amplitudes.
    return sp_fft.fftn(values, axes=(-3, -2, -1), norm="forward", workers=fft_workers())


def _ifftn(coeffs: np.ndarray) -> np.ndarray:
    return sp_fft.ifftn(coeffs, axes=(-3, -2, -1), norm="forward", workers=fft_workers())


def hermitian_defect(coeffs: np.ndarray) -> float:
    """Largest absolute deviation from c(-k) == conj(c(k))."""
    mirrored = np.roll(np.flip(coeffs, axis=(-3, -2, -1)), 1, axis=(-3, -2, -1))
    return float(np.max(np.abs(coeffs - np.conj(mirrored))))


def _check_hermitian(coeffs: np.ndarray) -> None:
    scale = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
    if scale == 0.0:
        return
    defect = hermitian_defect(coeffs)
    if defect > _HERMITIAN_RTOL * scale:
        raise SymmetryError(
            f"coefficients are not Hermitian-symmetric (defect {defect:.3e}, "
            f"scale {scale:.3e}); the field has no real-valued samples"
        )


def to_physical(f: SpectralScalarField) -> np.ndarray:
    """Evaluate a scalar field at the n^3 collocation points.

    Raises
    ------
    SymmetryError
        If the coefficients are not Hermitian-symmetric, i.e. the field
        is not real-valued.
    """
    _check_hermitian(f.coeffs)
    return _ifftn(f.coeffs).real


def to_spectral(values: np.ndarray, grid: Grid3) -> SpectralScalarField:
    """Coefficients of a real scalar field sampled on the grid."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (grid.n,) * 3:
        raise ValueError("sample array does not match the grid")
    return SpectralScalarField(grid, _fftn(values))


def vector_to_physical(v: SpectralVectorField) -> np.ndarray:
    """Evaluate all three components, shape (3, n, n, n)."""
    _check_hermitian(v.coeffs)
    return _ifftn(v.coeffs).real


def vector_from_physical(values: np.ndarray, grid: Grid3) -> SpectralVectorField:
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (3,) + (grid.n,) * 3:
        raise ValueError("sample array does not match the grid")
    return SpectralVectorField(grid, _fftn(values))


def leray_project(v: SpectralVectorField) -> SpectralVectorField:
    """Remove the gradient part: v_hat - k (k . v_hat) / |k|^2.

    The k = 0 mode is untouched.  Idempotent and self-adjoint; output is
    solenoidal mode by mode.
    """
    g = v.grid
    c = v.coeffs
    k_dot = g.kx * c[0] + g.ky * c[1] + g.kz * c[2]
    k_sq = g.k_sq.copy()
    k_sq[0, 0, 0] = 1.0  # avoid 0/0; the mean mode is restored below
    ratio = k_dot / k_sq
    out = np.empty_like(c)
    out[0] = c[0] - g.kx * ratio
    out[1] = c[1] - g.ky * ratio
    out[2] = c[2] - g.kz * ratio
    out[:, 0, 0, 0] = c[:, 0, 0, 0]
    return SpectralVectorField(g, out)


def curl(v: SpectralVectorField) -> SpectralVectorField:
    """Mode-by-mode i k x v_hat."""
    g = v.grid
    c = v.coeffs
    out = np.empty_like(c)
    out[0] = 1j * (g.ky * c[2] - g.kz * c[1])
    out[1] = 1j * (g.kz * c[0] - g.kx * c[2])
    out[2] = 1j * (g.kx * c[1] - g.ky * c[0])
    return SpectralVectorField(g, out)


def gradient(f: SpectralScalarField) -> SpectralVectorField:
    g = f.grid
    out = np.empty((3,) + f.coeffs.shape, dtype=np.complex128)
    out[0] = 1j * g.kx * f.coeffs
    out[1] = 1j * g.ky * f.coeffs
    out[2] = 1j * g.kz * f.coeffs
    return SpectralVectorField(g, out)


def divergence(v: SpectralVectorField) -> SpectralScalarField:
    g = v.grid
    c = v.coeffs
    return SpectralScalarField(g, 1j * (g.kx * c[0] + g.ky * c[1] + g.kz * c[2]))


def solenoidal_defect(v: SpectralVectorField) -> float:
    """max_k |k . v_hat(k)| normalized by max_k |k| ||v_hat(k)||.

    Zero field returns 0.  The normalization is global: a per-mode
    relative bound is meaningless at modes where projection cancelled the
    coefficient to round-off.
    """
    g = v.grid
    c = v.coeffs
    k_dot = np.abs(g.kx * c[0] + g.ky * c[1] + g.kz * c[2])
    scale = float(np.max(g.k_abs * np.sqrt(np.sum(np.abs(c) ** 2, axis=0))))
    if scale == 0.0:
        return 0.0
    return float(np.max(k_dot)) / scale


def dealias_mask(grid: Grid3) -> np.ndarray:
    """Boolean keep-mask of the 2/3 rule: zero every |k_i| > n/3."""
    cut = grid.n / 3.0
    k = np.abs(grid.k1)
    keep1 = k <= cut
    return keep1[:, None, None] & keep1[None, :, None] & keep1[None, None, :]


def dealias(v):
    """Apply the 2/3-rule truncation.  Accepts scalar or vector fields."""
    mask = dealias_mask(v.grid)
    out = v.coeffs * mask
    if isinstance(v, SpectralVectorField):
        return SpectralVectorField(v.grid, out)
    return SpectralScalarField(v.grid, out)


def lebesgue_norm(f, r: float) -> float:
    """L^r norm over the box via collocation quadrature.

    Vector fields use the pointwise Euclidean magnitude.  r = inf returns
    the max over collocation points.

    Raises
    ------
    ValueError
        If r < 1.
    """
    if r < 1:
        raise ValueError(f"L^r norm requires r >= 1, got {r}")
    if isinstance(f, SpectralVectorField):
        vals = vector_to_physical(f)
        mag = np.sqrt(np.sum(vals * vals, axis=0))
    else:
        mag = np.abs(to_physical(f))
    if np.isinf(r):
        return float(np.max(mag))
    dv = f.grid.cell_volume
    return float((dv * np.sum(mag**r)) ** (1.0 / r))


def l2_norm(f) -> float:
    """L^2 norm from the coefficients (Parseval)."""
    return float(np.sqrt(TWO_PI**3 * np.sum(np.abs(f.coeffs) ** 2)))


def inner_l2(u: SpectralVectorField, v: SpectralVectorField) -> float:
    """Integral of u . v over the box, from the coefficients."""
    return float(TWO_PI**3 * np.real(np.sum(u.coeffs * np.conj(v.coeffs))))


def grad_l2_sq(v) -> float:
    """||grad v||_2^2 from the coefficients."""
    return float(TWO_PI**3 * np.sum(v.grid.k_sq * np.abs(v.coeffs) ** 2))


def random_scalar(grid: Grid3, rng: np.random.Generator) -> SpectralScalarField:
    """White-noise real scalar field; Hermitian by construction."""
    return to_spectral(rng.standard_normal((grid.n,) * 3), grid)


def random_vector(grid: Grid3, rng: np.random.Generator) -> SpectralVectorField:
    return vector_from_physical(rng.standard_normal((3,) + (grid.n,) * 3), grid)
