"""Time-stepper tests.

The oracle at the top rebuilds the nonlinear tendencies in advective
form with plain numpy FFTs on band-limited data (where collocation
products are alias-free); signs and projections must match the packed
divergence-form production path.
"""

import numpy as np
import pytest

from conftest import make_solenoidal
from lpmhd.solver import (
    EnergyLedger,
    SolverConfig,
    SolverState,
    StepRejectedError,
    initial_data,
    nonlinear_terms,
    run,
    step,
)
from lpmhd.spectral import (
    Grid3,
    SpectralVectorField,
    l2_norm,
    leray_project,
    random_vector,
    solenoidal_defect,
)

BOX = (2.0 * np.pi) ** 3


def band_limited_solenoidal(grid, seed, kcap=2):
    rng = np.random.default_rng(seed)
    field = random_vector(grid, rng)
    keep = (
        (np.abs(grid.kx) <= kcap)
        & (np.abs(grid.ky) <= kcap)
        & (np.abs(grid.kz) <= kcap)
    )
    return leray_project(SpectralVectorField(grid, field.coeffs * keep))


def oracle_rhs(u, b):
    """Advective-form tendencies via plain numpy FFTs.

    du = -P[(u . grad) u - (b . grad) b]
    db = (b . grad) u - (u . grad) b
    """
    grid = u.grid
    k = np.stack(np.broadcast_arrays(grid.kx, grid.ky, grid.kz)).astype(float)
    ksq = np.sum(k * k, axis=0)
    ksq_safe = np.where(ksq == 0.0, 1.0, ksq)

    def values(c):
        return np.fft.ifftn(c, axes=(1, 2, 3), norm="forward").real

    def advect(ac, bc):
        avals = values(ac)
        out = np.zeros_like(avals)
        for j in range(3):
            out += avals[j] * values(1j * k[j] * bc)
        return np.fft.fftn(out, axes=(1, 2, 3), norm="forward")

    def project(c):
        kdotc = np.sum(k * c, axis=0)
        return c - k * (kdotc / ksq_safe)

    du = -project(advect(u.coeffs, u.coeffs) - advect(b.coeffs, b.coeffs))
    db = advect(b.coeffs, u.coeffs) - advect(u.coeffs, b.coeffs)
    return du, db


def test_oracle_nonlinear_terms_match_advective_form(grid16):
    u = band_limited_solenoidal(grid16, 70)
    b = band_limited_solenoidal(grid16, 71)
    du_o, db_o = oracle_rhs(u, b)
    du, db = nonlinear_terms(SolverState(u, b, 0.0))
    scale = max(np.max(np.abs(du_o)), np.max(np.abs(db_o)))
    assert np.max(np.abs(du.coeffs - du_o)) < 1e-12 * scale
    assert np.max(np.abs(db.coeffs - db_o)) < 1e-12 * scale


def test_oracle_hydro_only(grid16):
    u = band_limited_solenoidal(grid16, 72)
    b = SpectralVectorField.zeros(grid16)
    du_o, _ = oracle_rhs(u, b)
    du, db = nonlinear_terms(SolverState(u, b, 0.0))
    scale = np.max(np.abs(du_o))
    assert np.max(np.abs(du.coeffs - du_o)) < 1e-12 * scale
    assert np.max(np.abs(db.coeffs)) == 0.0


def test_taylor_green_nonlinearity_is_pure_gradient(grid16):
    u0, b0 = initial_data("taylor-green", None, grid16)
    du, db = nonlinear_terms(SolverState(u0, b0, 0.0))
    scale = l2_norm(u0)
    assert l2_norm(du) < 1e-12 * scale
    assert l2_norm(db) == 0.0


def test_initial_data_properties(grid16):
    u0, b0 = initial_data("taylor-green", None, grid16)
    assert solenoidal_defect(u0) < 1e-13
    assert abs(0.5 * l2_norm(u0) ** 2 - BOX / 4.0) < 1e-9
    assert l2_norm(b0) == 0.0

    u0, b0 = initial_data("orszag-tang", None, grid16)
    assert solenoidal_defect(u0) < 1e-13
    assert solenoidal_defect(b0) < 1e-13
    assert abs(0.5 * l2_norm(u0) ** 2 - BOX / 2.0) < 1e-9

    params = dict(seed=9, energy=2.5, magnetic_energy=1.25, peak_shell=2, slope=2.0)
    u0, b0 = initial_data("random-spectrum", params, grid16)
    assert abs(0.5 * l2_norm(u0) ** 2 - 2.5) < 1e-12
    assert abs(0.5 * l2_norm(b0) ** 2 - 1.25) < 1e-12
    assert solenoidal_defect(u0) < 1e-12
    u1, _ = initial_data("random-spectrum", params, grid16)
    assert np.array_equal(u0.coeffs, u1.coeffs)

    with pytest.raises(ValueError):
        initial_data("abc-vortex", None, grid16)


@pytest.mark.parametrize("scheme", ["if-rk4", "if-euler"])
def test_stokes_decay_is_exact(grid16, scheme):
    # With the nonlinearity switched off the integrating factor is the
    # whole solution, so each mode decays by exp(-nu k^2 t) exactly.
    u0 = make_solenoidal(grid16, 80)
    nu = 0.35
    cfg = SolverConfig(nu=nu, mu=nu, dt=1e-2, t_end=0.1, scheme=scheme, nonlinear=False)
    res = run(u0, SpectralVectorField.zeros(grid16), cfg)
    final = res.snapshots[-1]
    expected = u0.coeffs * np.exp(-nu * grid16.k_sq * final.t)
    scale = np.max(np.abs(u0.coeffs))
    assert np.max(np.abs(final.u.coeffs - expected)) < 1e-13 * scale


def test_single_mode_decay_with_nonlinearity_active(grid16):
    # u = (0, cos 2x, 0): the self-advection vanishes pointwise, so the
    # nonlinear run still follows the exact diffusive decay.
    coeffs = np.zeros((3, 16, 16, 16), dtype=complex)
    coeffs[1, 2, 0, 0] = 0.5
    coeffs[1, -2, 0, 0] = 0.5
    u0 = SpectralVectorField(grid16, coeffs)
    nu = 0.2
    cfg = SolverConfig(nu=nu, mu=nu, dt=1e-3, t_end=0.05)
    res = run(u0, SpectralVectorField.zeros(grid16), cfg)
    final = res.snapshots[-1]
    expected = coeffs * np.exp(-4.0 * nu * final.t)
    assert np.max(np.abs(final.u.coeffs - expected)) < 1e-13


def test_taylor_green_short_run_exact(grid16):
    u0, b0 = initial_data("taylor-green", None, grid16)
    nu = 0.3
    cfg = SolverConfig(nu=nu, mu=nu, dt=1e-3, t_end=0.05)
    res = run(u0, b0, cfg)
    final = res.snapshots[-1]
    expected = u0.coeffs * np.exp(-2.0 * nu * final.t)
    scale = np.max(np.abs(u0.coeffs))
    assert np.max(np.abs(final.u.coeffs - expected)) < 1e-12 * scale


def test_energy_budget_closes(grid16):
    u0, b0 = initial_data("orszag-tang", None, grid16)
    cfg = SolverConfig(nu=0.05, mu=0.05, dt=1e-3, t_end=0.1)
    res = run(u0, b0, cfg)
    assert res.complete
    e = res.ledger.total_energy()
    assert np.all(np.diff(e) < 0)  # strictly dissipative
    resid = res.ledger.residuals()
    assert np.isnan(resid[0]) and np.isnan(resid[-1])
    interior = resid[1:-1]
    assert np.all(interior < 1e-6 * e[1:-1])


def test_cfl_rejection():
    grid = Grid3(16)
    params = dict(seed=1, energy=1e8, magnetic_energy=0.0, peak_shell=1, slope=2.0)
    u0, b0 = initial_data("random-spectrum", params, grid)
    cfg = SolverConfig(nu=0.01, mu=0.01, dt=0.1, t_end=0.5)
    with pytest.raises(StepRejectedError):
        step(SolverState(u0, b0, 0.0), cfg)
    res = run(u0, b0, cfg)
    assert not res.complete
    assert res.abort_reason
    assert len(res.snapshots) >= 1  # the t = 0 snapshot survives


def test_run_is_deterministic(grid16):
    params = dict(seed=4, energy=1.0, magnetic_energy=0.5, peak_shell=1, slope=2.0)
    u0, b0 = initial_data("random-spectrum", params, grid16)
    cfg = SolverConfig(nu=0.02, mu=0.02, dt=5e-3, t_end=0.05)
    r1 = run(u0, b0, cfg)
    r2 = run(u0, b0, cfg)
    assert np.array_equal(r1.snapshots[-1].u.coeffs, r2.snapshots[-1].u.coeffs)
    assert np.array_equal(r1.snapshots[-1].b.coeffs, r2.snapshots[-1].b.coeffs)


def test_snapshot_cadence(grid16):
    u0, b0 = initial_data("taylor-green", None, grid16)
    cfg = SolverConfig(nu=0.1, mu=0.1, dt=0.01, t_end=0.05, snapshot_interval=0.02)
    res = run(u0, b0, cfg)
    times = [s.t for s in res.snapshots]
    assert times == pytest.approx([0.0, 0.02, 0.04, 0.05])

    cfg0 = SolverConfig(nu=0.1, mu=0.1, dt=0.01, t_end=0.0)
    res0 = run(u0, b0, cfg0)
    assert [s.t for s in res0.snapshots] == [0.0]
    assert res0.complete


def test_on_snapshot_streaming(grid16):
    u0, b0 = initial_data("taylor-green", None, grid16)
    cfg = SolverConfig(nu=0.1, mu=0.1, dt=0.01, t_end=0.03)
    seen = []
    res = run(u0, b0, cfg, on_snapshot=seen.append)
    assert res.snapshots == []
    assert [s.t for s in seen] == pytest.approx([0.0, 0.01, 0.02, 0.03])


def test_config_validation():
    good = dict(nu=0.1, mu=0.1, dt=0.01, t_end=0.1)
    SolverConfig(**good).validate()
    with pytest.raises(ValueError):
        SolverConfig(**{**good, "nu": -1.0}).validate()
    with pytest.raises(ValueError):
        SolverConfig(**{**good, "scheme": "ab2"}).validate()
    with pytest.raises(ValueError):
        SolverConfig(**{**good, "t_end": 0.015}).validate()
    with pytest.raises(ValueError):
        SolverConfig(**{**good, "snapshot_interval": 0.005}).validate()
    with pytest.raises(ValueError):
        SolverConfig(**{**good, "dealias_rule": "three-halves"}).validate()


def test_ledger_shapes(grid16):
    ledger = EnergyLedger()
    assert len(ledger.residuals()) == 0
    u0, b0 = initial_data("orszag-tang", None, grid16)
    cfg = SolverConfig(nu=0.05, mu=0.05, dt=0.01, t_end=0.02)
    res = run(u0, b0, cfg)
    led = res.ledger
    assert len(led.t) == 3
    # int u . b at t = 0 for the vortex pair: the sin y overlap gives
    # (2 pi)^3 / 2, the sheared component integrates to zero.
    assert led.cross_helicity[0] == pytest.approx(BOX / 2.0, abs=1e-9)
    assert np.isfinite(led.cross_helicity).all()