"""Dyadic (Littlewood-Paley) shell decomposition and paraproduct tools.

A radial cutoff chi equals 1 inside |xi| <= 3/4 and 0 outside |xi| >= 1,
with a smooth monotone transition between.  The shell multipliers

    phi_{-1}(xi) = chi(|xi|),    phi_q(xi) = chi(|xi|/2^(q+1)) - chi(|xi|/2^q)

form an exact partition of unity on every grid wavevector once q runs up
to Grid3.q_max (telescoping sum, so cancellation is exact in floating
point).  Shell q >= 0 is supported on (3/4 * 2^q, 2^(q+1)); shells two or
more apart have disjoint supports.

Quadratic expressions (paraproduct splits, commutators) are evaluated on
a 3/2 zero-padded grid so the algebraic identities hold to round-off
instead of to aliasing error.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import fft as sp_fft

from .spectral import (
    Grid3,
    SpectralScalarField,
    SpectralVectorField,
    fft_workers,
    lebesgue_norm,
)

__all__ = [
    "CutoffProfile",
    "ProfileError",
    "UndefinedRatioError",
    "smooth_bump_profile",
    "DyadicPartition",
    "build_partition",
    "lam",
    "project_shell",
    "shell_decompose",
    "ShellDecomposition",
    "low_pass",
    "band_pass",
    "besov_norm",
    "sobolev_norm",
    "bernstein_ratio",
    "advect_padded",
    "bony_decompose",
    "bony_all_shells",
    "commutator",
]


class ProfileError(ValueError):
    """Cutoff transition violates its endpoint or monotonicity contract."""


class UndefinedRatioError(ValueError):
    """Bernstein ratio requested for a field with zero denominator norm."""


def lam(q: int | np.ndarray) -> float | np.ndarray:
    """Shell wavenumber 2^q; the convention applies at q = -1 too."""
    return 2.0 ** np.asarray(q, dtype=np.float64) if np.ndim(q) else 2.0**q


def _bump(t: np.ndarray) -> np.ndarray:
    # exp(-1/t) extended by 0 for t <= 0; smooth on the whole line.
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_bump_transition(rho: np.ndarray) -> np.ndarray:
    """C-infinity monotone ramp from 1 at rho = 3/4 down to 0 at rho = 1.

    Built from the standard bump quotient psi(t) = f(t) / (f(t) + f(1-t))
    with f(t) = exp(-1/t), evaluated at t = 4*(1 - rho).
    """
    t = 4.0 * (1.0 - np.asarray(rho, dtype=np.float64))
    a = _bump(t)
    b = _bump(1.0 - t)
    denom = a + b
    # denom vanishes only for t outside (0, 1) union {endpoints}, where a
    # already decides the value
    out = np.where(denom > 0, a / np.where(denom > 0, denom, 1.0), (t >= 1.0) * 1.0)
    return out


@dataclass(frozen=True)
class CutoffProfile:
    """Radial cutoff: 1 on [0, 3/4], 0 on [1, inf), smooth in between.

    ``transition`` is evaluated only on [3/4, 1] and must be monotone
    nonincreasing with transition(3/4) = 1 and transition(1) = 0.
    """

    transition: Callable[[np.ndarray], np.ndarray] = smooth_bump_transition
    name: str = "smooth-bump"

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=np.float64)
        out = np.ones_like(rho)
        out[rho >= 1.0] = 0.0
        mid = (rho > 0.75) & (rho < 1.0)
        if np.any(mid):
            out[mid] = self.transition(rho[mid])
        return out

    def validate(self, samples: int = 4001) -> None:
        ends = self.transition(np.array([0.75, 1.0]))
        if abs(ends[0] - 1.0) > 1e-12 or abs(ends[1]) > 1e-12:
            raise ProfileError(
                f"transition endpoints are ({ends[0]!r}, {ends[1]!r}), need (1, 0)"
            )
        rho = np.linspace(0.75, 1.0, samples)
        vals = self.transition(rho)
        if np.any(vals < -1e-12) or np.any(vals > 1.0 + 1e-12):
            raise ProfileError("transition leaves [0, 1]")
        if np.any(np.diff(vals) > 1e-12):
            raise ProfileError("transition is not monotone nonincreasing")


def smooth_bump_profile() -> CutoffProfile:
    return CutoffProfile()


@dataclass
class DyadicPartition:
    """Tabulated shell multipliers phi_q(|k|) for one grid.

    Shells are indexed q = -1, 0, ..., grid.q_max; list position 0 holds
    q = -1.  ``lowpass(Q)`` is the multiplier of the partial sum through
    shell Q, evaluated directly as chi(|k| / 2^(Q+1)) so it is exact.
    """

    grid: Grid3
    profile: CutoffProfile
    multipliers: list[np.ndarray] = field(repr=False)

    @property
    def q_max(self) -> int:
        return self.grid.q_max

    @property
    def shell_range(self) -> range:
        return range(-1, self.q_max + 1)

    def shell(self, q: int) -> np.ndarray:
        if not -1 <= q <= self.q_max:
            raise IndexError(f"shell index {q} outside [-1, {self.q_max}]")
        return self.multipliers[q + 1]

    def lowpass(self, q: int) -> np.ndarray:
        if q < -1:
            return np.zeros((self.grid.n,) * 3)
        q = min(q, self.q_max)
        return self.profile(self.grid.k_abs / 2.0 ** (q + 1))


def build_partition(grid: Grid3, profile: CutoffProfile | None = None) -> DyadicPartition:
    """Tabulate the shell multipliers and check the partition of unity.

    Raises
    ------
    ProfileError
        If the profile violates its endpoint/monotonicity contract or the
        multipliers fail to sum to 1 on some grid wavevector.
    """
    if profile is None:
        profile = smooth_bump_profile()
    profile.validate()
    rho = grid.k_abs
    chi_prev = profile(rho)  # chi(|k| / 2^0), the q = -1 block
    mults = [chi_prev]
    for q in range(0, grid.q_max + 1):
        chi_next = profile(rho / 2.0 ** (q + 1))
        mults.append(chi_next - chi_prev)
        chi_prev = chi_next
    total = sum(mults)
    defect = float(np.max(np.abs(total - 1.0)))
    if defect > 1e-12:
        raise ProfileError(f"partition of unity fails by {defect:.3e}")
    return DyadicPartition(grid=grid, profile=profile, multipliers=mults)


def _apply_multiplier(u, mult: np.ndarray):
    out = u.coeffs * mult
    if isinstance(u, SpectralVectorField):
        return SpectralVectorField(u.grid, out)
    return SpectralScalarField(u.grid, out)


def project_shell(u, q: int, part: DyadicPartition):
    """Shell projection Delta_q u.  Shells |q - p| >= 2 are disjoint."""
    return _apply_multiplier(u, part.shell(q))


def low_pass(u, q: int, part: DyadicPartition):
    """Partial sum u_{<=q} of shells -1 .. q."""
    return _apply_multiplier(u, part.lowpass(q))


def band_pass(u, p: int, q: int, part: DyadicPartition):
    """Partial sum u_{(p, q]} of shells p+1 .. q."""
    return _apply_multiplier(u, part.lowpass(q) - part.lowpass(p))


@dataclass
class ShellDecomposition:
    """All shell projections of one field, in shell order q = -1 .. q_max."""

    part: DyadicPartition
    pieces: list

    def __getitem__(self, q: int):
        if not -1 <= q <= self.part.q_max:
            raise IndexError(f"shell index {q} outside [-1, {self.part.q_max}]")
        return self.pieces[q + 1]

    def reconstruct(self):
        total = sum(p.coeffs for p in self.pieces)
        first = self.pieces[0]
        if isinstance(first, SpectralVectorField):
            return SpectralVectorField(first.grid, total)
        return SpectralScalarField(first.grid, total)


def shell_decompose(u, part: DyadicPartition) -> ShellDecomposition:
    pieces = [project_shell(u, q, part) for q in part.shell_range]
    return ShellDecomposition(part=part, pieces=pieces)


def besov_norm(u, s: float, p_exp: float, part: DyadicPartition) -> float:
    """sup_q 2^(qs) ||Delta_q u||_p over the resolved shells."""
    return max(
        lam(q) ** s * lebesgue_norm(project_shell(u, q, part), p_exp)
        for q in part.shell_range
    )


def sobolev_norm(u, s: float, part: DyadicPartition) -> float:
    """Dyadic H^s norm: (sum_q 2^(2qs) ||Delta_q u||_2^2)^(1/2).

    This is the shell-sum definition.  It is equivalent to the plain
    L^2-of-derivatives norm within fixed two-sided constants, not equal
    to it: adjacent shell multipliers overlap, so at s = 0 the value sits
    between ||u||_2 / sqrt(2) and ||u||_2.
    """
    total = 0.0
    for q in part.shell_range:
        total += lam(q) ** (2.0 * s) * lebesgue_norm(project_shell(u, q, part), 2) ** 2
    return float(np.sqrt(total))


def bernstein_ratio(u_q, q: int, r: float, s_exp: float) -> float:
    """||u_q||_r / (2^(3q(1/s - 1/r)) ||u_q||_s) for a single-shell field.

    The denominator exponent is the sharp scaling of the L^s -> L^r shell
    bound; the ratio is scale-free in the field amplitude and roughly
    shell-independent.

    Raises
    ------
    UndefinedRatioError
        If the denominator norm vanishes.
    """
    if s_exp > r:
        raise ValueError("Bernstein ratio needs s <= r")
    denom = lebesgue_norm(u_q, s_exp)
    if denom == 0.0:
        raise UndefinedRatioError("zero field has no Bernstein ratio")
    scale = lam(q) ** (3.0 * (1.0 / s_exp - 1.0 / r))
    return lebesgue_norm(u_q, r) / (scale * denom)


# ---------------------------------------------------------------------------
# Zero-padded quadratic expressions


def _pad_size(n: int) -> int:
    return (3 * n) // 2


def _pad_coeffs(c: np.ndarray, n: int, m: int) -> np.ndarray:
    """Embed FFT-ordered coefficients of an n-grid into an m-grid."""
    shape = c.shape[:-3] + (m, m, m)
    out = np.zeros(shape, dtype=np.complex128)
    h = n // 2
    pos = slice(0, h + 1)
    neg_src = slice(h + 1, n)
    neg_dst = slice(m - (n - h - 1), m)
    src_slices = (pos, neg_src)
    dst_slices = (pos, neg_dst)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                out[..., dst_slices[i], dst_slices[j], dst_slices[k]] = c[
                    ..., src_slices[i], src_slices[j], src_slices[k]
                ]
    return out


def _truncate_coeffs(c: np.ndarray, m: int, n: int) -> np.ndarray:
    """Restrict m-grid coefficients back to the n-grid.

    The Nyquist planes of the result are zeroed: content there has an
    ambiguous sign on the smaller grid, and dropping it identically on
    both sides of an identity keeps comparisons exact.
    """
    shape = c.shape[:-3] + (n, n, n)
    out = np.zeros(shape, dtype=np.complex128)
    h = n // 2
    pos = slice(0, h)  # excludes the Nyquist index h
    neg_src = slice(m - (n - h - 1), m)
    neg_dst = slice(h + 1, n)
    src_slices = (pos, neg_src)
    dst_slices = (pos, neg_dst)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                out[..., dst_slices[i], dst_slices[j], dst_slices[k]] = c[
                    ..., src_slices[i], src_slices[j], src_slices[k]
                ]
    return out


class _PaddedWorkspace:
    """Physical-space evaluations of fields and gradients on the 3/2 grid.

    Caches padded inverse transforms keyed by the id of the coefficient
    array, so repeated paraproduct terms reuse them.
    """

    def __init__(self, grid: Grid3):
        self.n = grid.n
        self.m = _pad_size(grid.n)
        k = np.fft.fftfreq(self.n, 1.0 / self.n).astype(np.float64)
        k[self.n // 2] = self.n // 2
        self.kx = k[:, None, None]
        self.ky = k[None, :, None]
        self.kz = k[None, None, :]
        self._vals: dict[int, np.ndarray] = {}
        self._grads: dict[int, np.ndarray] = {}
        self._keep: list[np.ndarray] = []  # prevent id reuse of cached keys

    def _ifft(self, c: np.ndarray) -> np.ndarray:
        padded = _pad_coeffs(c, self.n, self.m)
        return sp_fft.ifftn(
            padded, axes=(-3, -2, -1), norm="forward", workers=fft_workers()
        ).real

    def values(self, v: SpectralVectorField) -> np.ndarray:
        key = id(v.coeffs)
        if key not in self._vals:
            self._vals[key] = self._ifft(v.coeffs)
            self._keep.append(v.coeffs)
        return self._vals[key]

    def gradients(self, v: SpectralVectorField) -> np.ndarray:
        """d_i v_j on the padded grid, shape (3, 3, m, m, m)."""
        key = id(v.coeffs)
        if key not in self._grads:
            c = v.coeffs
            d = np.empty((3, 3) + c.shape[-3:], dtype=np.complex128)
            for j in range(3):
                d[0, j] = 1j * self.kx * c[j]
                d[1, j] = 1j * self.ky * c[j]
                d[2, j] = 1j * self.kz * c[j]
            self._grads[key] = self._ifft(d.reshape((9,) + c.shape[-3:])).reshape(
                (3, 3, self.m, self.m, self.m)
            )
            self._keep.append(v.coeffs)
        return self._grads[key]

    def advect(self, a: SpectralVectorField, b: SpectralVectorField) -> SpectralVectorField:
        """(a . grad) b with alias-free products, back on the n-grid."""
        av = self.values(a)
        bg = self.gradients(b)
        prod = np.einsum("i...,ij...->j...", av, bg)
        coeffs = sp_fft.fftn(
            prod, axes=(-3, -2, -1), norm="forward", workers=fft_workers()
        )
        return SpectralVectorField(a.grid, _truncate_coeffs(coeffs, self.m, self.n))


def advect_padded(a: SpectralVectorField, b: SpectralVectorField) -> SpectralVectorField:
    """(a . grad) b evaluated with 3/2 zero-padded transforms."""
    return _PaddedWorkspace(a.grid).advect(a, b)


def _bony_assemble(
    u: SpectralVectorField,
    v: SpectralVectorField,
    q: int,
    part: DyadicPartition,
    ws: _PaddedWorkspace,
    u_shells: ShellDecomposition,
    v_shells: ShellDecomposition,
    u_low: dict[int, SpectralVectorField],
    v_low: dict[int, SpectralVectorField],
):
    g = u.grid
    mult = part.shell(q)
    zero = np.zeros((3,) + (g.n,) * 3, dtype=np.complex128)
    qm = part.q_max

    low_high = zero.copy()
    high_low = zero.copy()
    high_high = zero.copy()
    for p in range(max(q - 2, -1), min(q + 2, qm) + 1):
        if p - 2 >= -1:
            low_high += ws.advect(u_low[p - 2], v_shells[p]).coeffs * mult
            high_low += ws.advect(u_shells[p], v_low[p - 2]).coeffs * mult
    for p in range(max(q - 2, -1), qm + 1):
        lo, hi = max(p - 1, -1), min(p + 1, qm)
        tilde = SpectralVectorField(
            g, sum(v_shells[j].coeffs for j in range(lo, hi + 1))
        )
        high_high += ws.advect(u_shells[p], tilde).coeffs * mult
    return (
        SpectralVectorField(g, low_high),
        SpectralVectorField(g, high_low),
        SpectralVectorField(g, high_high),
    )


def _bony_context(u, v, part):
    ws = _PaddedWorkspace(u.grid)
    u_shells = shell_decompose(u, part)
    v_shells = shell_decompose(v, part)
    u_low = {p: low_pass(u, p, part) for p in range(-3, part.q_max + 1)}
    v_low = {p: low_pass(v, p, part) for p in range(-3, part.q_max + 1)}
    return ws, u_shells, v_shells, u_low, v_low


def bony_decompose(
    u: SpectralVectorField, v: SpectralVectorField, q: int, part: DyadicPartition
):
    """Paraproduct split of Delta_q((u . grad) v).

    Returns the (low-high, high-low, high-high) parts:

        sum_{|q-p|<=2} Delta_q(u_{<=p-2} . grad v_p)
      + sum_{|q-p|<=2} Delta_q(u_p . grad v_{<=p-2})
      + sum_{p>=q-2}   Delta_q(u_p . grad vt_p),   vt_p = v_{p-1}+v_p+v_{p+1}

    With alias-free products the three parts sum to Delta_q((u . grad) v)
    exactly; the p-ranges drop only terms whose spectral supports cannot
    meet shell q.
    """
    ws, u_shells, v_shells, u_low, v_low = _bony_context(u, v, part)
    return _bony_assemble(u, v, q, part, ws, u_shells, v_shells, u_low, v_low)


def bony_all_shells(u, v, part: DyadicPartition):
    """Paraproduct split for every shell, sharing the padded transforms."""
    ctx = _bony_context(u, v, part)
    return {q: _bony_assemble(u, v, q, part, *ctx) for q in part.shell_range}


def commutator(
    u_low: SpectralVectorField, v: SpectralVectorField, q: int, part: DyadicPartition
) -> SpectralVectorField:
    """[Delta_q, u_low . grad] v with alias-free products.

    Vanishes identically when u_low is constant, since a constant-
    coefficient derivative commutes with any Fourier multiplier.
    """
    ws = _PaddedWorkspace(u_low.grid)
    direct = project_shell(ws.advect(u_low, v), q, part)
    swapped = ws.advect(u_low, project_shell(v, q, part))
    return SpectralVectorField(u_low.grid, direct.coeffs - swapped.coeffs)
