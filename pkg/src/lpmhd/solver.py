"""Incompressible MHD time integration on the periodic cube.

The system for velocity u and magnetic field b, both divergence-free:

    du/dt + (u . grad) u - (b . grad) b + grad p = nu  Lap u
    db/dt + (u . grad) b - (b . grad) u           = mu  Lap b

Pressure is eliminated by Leray projection.  Nonlinear terms are
evaluated pseudo-spectrally (transform, pointwise product, transform)
and truncated with the 2/3 rule; with the state kept inside the
truncation band the retained products are alias-free, so the spectral
Galerkin energy identity holds to round-off.  The viscous and resistive
factors exp(-nu |k|^2 dt), exp(-mu |k|^2 dt) are applied exactly via an
integrating factor; schemes differ only in how the nonlinearity is
advanced (classical fourth-order Runge-Kutta or forward Euler).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sp_fft

from .spectral import (
    TWO_PI,
    Grid3,
    SpectralVectorField,
    dealias,
    dealias_mask,
    fft_workers,
    grad_l2_sq,
    inner_l2,
    l2_norm,
    leray_project,
    vector_from_physical,
)

__all__ = [
    "SolverConfig",
    "SolverState",
    "EnergyLedger",
    "RunResult",
    "StepRejectedError",
    "SCHEMES",
    "INITIAL_DATA_KINDS",
    "nonlinear_terms",
    "step",
    "run",
    "initial_data",
]

SCHEMES = ("if-rk4", "if-euler")
INITIAL_DATA_KINDS = ("taylor-green", "random-spectrum", "orszag-tang")


class StepRejectedError(RuntimeError):
    """Advective CFL guard tripped; carries the measured Courant number."""

    def __init__(self, courant: float, limit: float, t: float):
        super().__init__(
            f"step rejected at t={t:.6g}: Courant number {courant:.4g} "
            f"exceeds limit {limit:.4g}"
        )
        self.courant = courant
        self.limit = limit
        self.t = t


@dataclass
class SolverConfig:
    """Time-integration parameters.

    snapshot_interval must be a positive integer multiple of dt (so must
    t_end); dt is the fixed step.  ``nonlinear=False`` integrates the pure
    Stokes/diffusion system, useful for exactness checks.
    """

    nu: float
    mu: float
    dt: float
    t_end: float
    scheme: str = "if-rk4"
    dealias_rule: str = "two-thirds"
    snapshot_interval: float | None = None
    nonlinear: bool = True
    cfl_limit: float = 0.5

    def __post_init__(self):
        if self.snapshot_interval is None:
            self.snapshot_interval = self.dt

    def validate(self) -> None:
        if self.nu <= 0 or self.mu <= 0:
            raise ValueError("nu and mu must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.dealias_rule != "two-thirds":
            raise ValueError("only the two-thirds dealias rule is implemented")
        for name, span in (("t_end", self.t_end), ("snapshot_interval", self.snapshot_interval)):
            ratio = span / self.dt
            if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
                raise ValueError(f"{name} must be an integer multiple of dt")
        if self.snapshot_interval < self.dt:
            raise ValueError("snapshot_interval must be at least dt")
        if not 0 < self.cfl_limit:
            raise ValueError("cfl_limit must be positive")


@dataclass
class SolverState:
    u: SpectralVectorField
    b: SpectralVectorField
    t: float

    def copy(self) -> "SolverState":
        return SolverState(self.u.copy(), self.b.copy(), self.t)


@dataclass
class EnergyLedger:
    """Per-step scalar series: energies, dissipation rates, cross-helicity.

    The budget residual dE/dt + diss_u + diss_b uses centered differences,
    so it is defined only at interior rows; the two end rows carry nan.
    """

    t: list[float] = field(default_factory=list)
    e_kin: list[float] = field(default_factory=list)
    e_mag: list[float] = field(default_factory=list)
    diss_u: list[float] = field(default_factory=list)
    diss_b: list[float] = field(default_factory=list)
    cross_helicity: list[float] = field(default_factory=list)

    def record(self, state: SolverState, nu: float, mu: float) -> None:
        self.t.append(state.t)
        self.e_kin.append(0.5 * l2_norm(state.u) ** 2)
        self.e_mag.append(0.5 * l2_norm(state.b) ** 2)
        self.diss_u.append(nu * grad_l2_sq(state.u))
        self.diss_b.append(mu * grad_l2_sq(state.b))
        self.cross_helicity.append(inner_l2(state.u, state.b))

    def residuals(self) -> np.ndarray:
        """|dE/dt + diss_u + diss_b| per row; nan at the two ends."""
        t = np.asarray(self.t)
        e = np.asarray(self.e_kin) + np.asarray(self.e_mag)
        d = np.asarray(self.diss_u) + np.asarray(self.diss_b)
        out = np.full(t.shape, np.nan)
        if len(t) >= 3:
            dedt = (e[2:] - e[:-2]) / (t[2:] - t[:-2])
            out[1:-1] = np.abs(dedt + d[1:-1])
        return out

    def total_energy(self) -> np.ndarray:
        return np.asarray(self.e_kin) + np.asarray(self.e_mag)


@dataclass
class RunResult:
    snapshots: list[SolverState]
    ledger: EnergyLedger
    complete: bool
    abort_reason: str | None = None


def _rhs(grid: Grid3, uc: np.ndarray, bc: np.ndarray, mask: np.ndarray, with_b: bool):
    """Nonlinear tendencies for coefficient arrays (division-free form).

    Momentum: -Leray[ d_i (u_i u_j - b_i b_j) ]; induction: i k x (u x b).
    Products are formed pointwise on the collocation grid; retained modes
    are alias-free because the inputs live inside the 2/3 band.
    """
    workers = fft_workers()
    vals_u = sp_fft.ifftn(uc, axes=(-3, -2, -1), norm="forward", workers=workers).real
    if with_b:
        vals_b = sp_fft.ifftn(bc, axes=(-3, -2, -1), norm="forward", workers=workers).real

    # symmetric tensor u_i u_j - b_i b_j, packed as the 6 independent entries
    pairs = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
    prods = np.empty((9 if with_b else 6,) + uc.shape[-3:], dtype=np.float64)
    for m, (i, j) in enumerate(pairs):
        prods[m] = vals_u[i] * vals_u[j]
        if with_b:
            prods[m] -= vals_b[i] * vals_b[j]
    if with_b:
        prods[6] = vals_u[1] * vals_b[2] - vals_u[2] * vals_b[1]
        prods[7] = vals_u[2] * vals_b[0] - vals_u[0] * vals_b[2]
        prods[8] = vals_u[0] * vals_b[1] - vals_u[1] * vals_b[0]

    phat = sp_fft.fftn(prods, axes=(-3, -2, -1), norm="forward", workers=workers)
    phat *= mask

    kx, ky, kz = grid.kx, grid.ky, grid.kz
    txx, tyy, tzz, txy, txz, tyz = phat[0], phat[1], phat[2], phat[3], phat[4], phat[5]
    du = np.empty_like(uc)
    du[0] = -1j * (kx * txx + ky * txy + kz * txz)
    du[1] = -1j * (kx * txy + ky * tyy + kz * tyz)
    du[2] = -1j * (kx * txz + ky * tyz + kz * tzz)
    du_field = leray_project(SpectralVectorField(grid, du))

    if with_b:
        ex, ey, ez = phat[6], phat[7], phat[8]
        db = np.empty_like(bc)
        db[0] = 1j * (ky * ez - kz * ey)
        db[1] = 1j * (kz * ex - kx * ez)
        db[2] = 1j * (kx * ey - ky * ex)
        # curl output is already solenoidal; project anyway to pin round-off
        db_field = leray_project(SpectralVectorField(grid, db))
    else:
        db_field = SpectralVectorField.zeros(grid)
    return du_field, db_field


def nonlinear_terms(state: SolverState) -> tuple[SpectralVectorField, SpectralVectorField]:
    """Dealiased, projected nonlinear tendencies (du, db) of the state."""
    grid = state.u.grid
    mask = dealias_mask(grid)
    with_b = bool(np.any(state.b.coeffs))
    return _rhs(grid, state.u.coeffs, state.b.coeffs, mask, with_b)


class _Stepper:
    """Holds the per-run constants: masks, integrating factors, scheme."""

    def __init__(self, grid: Grid3, cfg: SolverConfig, with_b: bool):
        self.grid = grid
        self.cfg = cfg
        self.with_b = with_b
        self.mask = dealias_mask(grid)
        k_sq = grid.k_sq
        dt = cfg.dt
        self.eu_half = np.exp(-cfg.nu * k_sq * (dt / 2.0))
        self.eb_half = np.exp(-cfg.mu * k_sq * (dt / 2.0))
        self.eu_full = self.eu_half**2
        self.eb_full = self.eb_half**2

    def rhs(self, uc, bc):
        if not self.cfg.nonlinear:
            z = np.zeros_like(uc)
            return z, z
        du, db = _rhs(self.grid, uc, bc, self.mask, self.with_b)
        return du.coeffs, db.coeffs

    def courant(self, uc) -> float:
        vals = sp_fft.ifftn(
            uc, axes=(-3, -2, -1), norm="forward", workers=fft_workers()
        ).real
        umax = float(np.sqrt(np.max(np.sum(vals * vals, axis=0))))
        return self.cfg.dt * umax * self.grid.n / TWO_PI

    def advance(self, state: SolverState) -> SolverState:
        cour = self.courant(state.u.coeffs)
        if cour > self.cfg.cfl_limit:
            raise StepRejectedError(cour, self.cfg.cfl_limit, state.t)
        dt = self.cfg.dt
        u0, b0 = state.u.coeffs, state.b.coeffs
        if self.cfg.scheme == "if-euler":
            du, db = self.rhs(u0, b0)
            u1 = self.eu_full * (u0 + dt * du)
            b1 = self.eb_full * (b0 + dt * db)
        else:  # if-rk4
            eu, eb = self.eu_half, self.eb_half
            eu2, eb2 = self.eu_full, self.eb_full
            ku1, kb1 = self.rhs(u0, b0)
            ku2, kb2 = self.rhs(eu * (u0 + (dt / 2) * ku1), eb * (b0 + (dt / 2) * kb1))
            ku3, kb3 = self.rhs(eu * u0 + (dt / 2) * ku2, eb * b0 + (dt / 2) * kb2)
            ku4, kb4 = self.rhs(eu2 * u0 + dt * eu * ku3, eb2 * b0 + dt * eb * kb3)
            u1 = eu2 * u0 + (dt / 6) * (eu2 * ku1 + 2 * eu * (ku2 + ku3) + ku4)
            b1 = eb2 * b0 + (dt / 6) * (eb2 * kb1 + 2 * eb * (kb2 + kb3) + kb4)
        grid = self.grid
        return SolverState(
            SpectralVectorField(grid, u1), SpectralVectorField(grid, b1), state.t + dt
        )


def step(state: SolverState, cfg: SolverConfig) -> SolverState:
    """Advance one step of the configured scheme.

    Raises
    ------
    StepRejectedError
        If dt * max|u| * n / (2 pi) exceeds cfg.cfl_limit.
    """
    cfg.validate()
    with_b = bool(np.any(state.b.coeffs))
    return _Stepper(state.u.grid, cfg, with_b).advance(state)


def run(
    u0: SpectralVectorField,
    b0: SpectralVectorField,
    cfg: SolverConfig,
    on_snapshot=None,
) -> RunResult:
    """Integrate from t = 0 to cfg.t_end, collecting snapshots and a ledger.

    Initial data is dealiased and projected, so the state stays inside
    the truncation band for the whole run.  Snapshots are taken at t = 0,
    every snapshot_interval, and at t_end.  If ``on_snapshot`` is given it
    is called with each snapshot state instead of retaining it in memory.

    A CFL rejection stops the run early; the result is flagged incomplete
    and keeps everything produced so far.
    """
    cfg.validate()
    grid = u0.grid
    if b0.grid.n != grid.n:
        raise ValueError("u0 and b0 live on different grids")
    state = SolverState(
        dealias(leray_project(u0)), dealias(leray_project(b0)), 0.0
    )
    with_b = bool(np.any(state.b.coeffs))
    stepper = _Stepper(grid, cfg, with_b)

    ledger = EnergyLedger()
    snapshots: list[SolverState] = []

    def emit(s: SolverState):
        if on_snapshot is not None:
            on_snapshot(s.copy())
        else:
            snapshots.append(s.copy())

    ledger.record(state, cfg.nu, cfg.mu)
    emit(state)
    n_steps = int(round(cfg.t_end / cfg.dt))
    snap_every = max(1, int(round(cfg.snapshot_interval / cfg.dt)))
    for i in range(1, n_steps + 1):
        try:
            state = stepper.advance(state)
        except StepRejectedError as err:
            return RunResult(snapshots, ledger, complete=False, abort_reason=str(err))
        state.t = i * cfg.dt  # avoid accumulated addition error
        ledger.record(state, cfg.nu, cfg.mu)
        if i % snap_every == 0 or i == n_steps:
            emit(state)
    return RunResult(snapshots, ledger, complete=True)


# ---------------------------------------------------------------------------
# Initial data


def _taylor_green(grid: Grid3) -> tuple[SpectralVectorField, SpectralVectorField]:
    """u = (sin x cos y, -cos x sin y, 0), b = 0.

    The advective term is a pure gradient, so the exact solution decays
    as exp(-2 nu t) without exciting any other mode.
    """
    x, y, _ = grid.points
    n = grid.n
    vals = np.zeros((3, n, n, n))
    vals[0] = np.sin(x) * np.cos(y) * np.ones((1, 1, n))
    vals[1] = -np.cos(x) * np.sin(y) * np.ones((1, 1, n))
    return vector_from_physical(vals, grid), SpectralVectorField.zeros(grid)


def _orszag_tang(grid: Grid3, amplitude: float):
    """z-independent vortex pair with a sheared magnetic field.

    u = (-sin y, sin x, 0), b = amplitude * (-sin y, sin 2x, 0).  Both
    fields are solenoidal; the interaction feeds a genuine cascade, which
    makes this the standard workout for the coupled terms.
    """
    x, y, _ = grid.points
    n = grid.n
    one_z = np.ones((1, 1, n))
    uv = np.zeros((3, n, n, n))
    uv[0] = -np.sin(y) * one_z
    uv[1] = np.sin(x) * one_z
    bv = np.zeros((3, n, n, n))
    bv[0] = -amplitude * np.sin(y) * one_z
    bv[1] = amplitude * np.sin(2.0 * x) * one_z
    return vector_from_physical(uv, grid), vector_from_physical(bv, grid)


def _random_spectrum(grid: Grid3, params: dict):
    """Solenoidal Gaussian field with an isotropic spectral envelope.

    Per-mode amplitudes follow (|k|/k_p)^(slope/2) * exp(-|k|^2/(2 k_p^2))
    with k_p = 2^peak_shell, then the field is projected, dealiased and
    rescaled so the kinetic energy matches ``energy`` exactly.  A second
    independent draw with ``magnetic_energy`` > 0 fills b the same way.
    """
    slope = float(params.get("slope", 2.0))
    energy = float(params.get("energy", 1.0))
    b_energy = float(params.get("magnetic_energy", 0.0))
    peak = int(params.get("peak_shell", 2))
    seed = int(params.get("seed", 0))
    rng = np.random.default_rng(seed)
    k_p = 2.0**peak

    def draw(target: float) -> SpectralVectorField:
        f = vector_from_physical(rng.standard_normal((3,) + (grid.n,) * 3), grid)
        k = grid.k_abs
        with np.errstate(divide="ignore"):
            envelope = np.where(
                k > 0, (k / k_p) ** (slope / 2.0) * np.exp(-0.5 * (k / k_p) ** 2), 0.0
            )
        shaped = dealias(leray_project(SpectralVectorField(grid, f.coeffs * envelope)))
        if target == 0.0:
            return SpectralVectorField.zeros(grid)
        current = 0.5 * l2_norm(shaped) ** 2
        if current == 0.0:
            raise ValueError("spectral envelope left no energy to rescale")
        shaped.coeffs *= math.sqrt(target / current)
        return shaped

    return draw(energy), draw(b_energy)


def initial_data(kind: str, params: dict | None, grid: Grid3):
    """Named initial conditions; returns (u0, b0), both solenoidal.

    Kinds: ``taylor-green`` (exact decaying vortex, b = 0),
    ``random-spectrum`` (seeded Gaussian field with prescribed envelope
    and exact energy), ``orszag-tang`` (2.5-D vortex + sheared field).
    """
    params = dict(params or {})
    if kind == "taylor-green":
        return _taylor_green(grid)
    if kind == "orszag-tang":
        return _orszag_tang(grid, float(params.get("amplitude", 1.0)))
    if kind == "random-spectrum":
        return _random_spectrum(grid, params)
    raise ValueError(f"unknown initial data kind {kind!r}; choose from {INITIAL_DATA_KINDS}")
