"""Per-snapshot diagnostics: dissipation wavenumber, low-mode sums,
threshold times, and the gated time integrals."""

import math

import numpy as np
import pytest

from conftest import make_solenoidal
from lpmhd.diagnostics import (
    CriterionConfig,
    DiagnosticRecord,
    WindowError,
    build_record,
    build_records,
    criterion_integral,
    dissipation_wavenumber,
    dissipation_wavenumber_from_norms,
    f_from_norms,
    f_of_t,
    gated_trapezoid,
    shell_norms,
    threshold_times,
    window_slice,
)
from lpmhd.dyadic import band_pass, lam, project_shell, sobolev_norm
from lpmhd.spectral import SpectralVectorField, l2_norm, lebesgue_norm
from lpmhd.solver import SolverConfig, initial_data, run


def test_config_validation():
    CriterionConfig().validate()
    with pytest.raises(ValueError):
        CriterionConfig(s=1.2).validate()
    with pytest.raises(ValueError):
        CriterionConfig(r=1.5).validate()
    with pytest.raises(ValueError):
        CriterionConfig(r=5.5, s=0.6).validate(magnetic=True)  # needs r < 3/s
    CriterionConfig(r=4.5, s=0.6).validate(magnetic=True)
    CriterionConfig(r=5.5, s=0.6).validate(magnetic=False)
    with pytest.raises(ValueError):
        CriterionConfig(l=0.5).validate()
    with pytest.raises(ValueError):
        CriterionConfig(c_r=-1.0).validate()


def test_zero_field_trivial_values(grid16, part16):
    cfg = CriterionConfig()
    zero = SpectralVectorField.zeros(grid16)
    lam_r, q = dissipation_wavenumber(zero, cfg, part16, nu=0.1, mu=0.1)
    assert (lam_r, q) == (1.0, 0)
    assert f_of_t(zero, q, part16) == 0.0


def test_single_shell_dissipation_wavenumber(grid64, part64):
    # One populated shell at q = 5; its weighted norm is pinned at twice
    # the threshold, so the scan returns exactly (32, 5).  Scaling the
    # field by 0.4 drops it below threshold everywhere, giving (1, 0).
    cfg = CriterionConfig(r=4.0, c_r=0.01)
    nu = mu = 0.1
    threshold = cfg.c_r * min(nu, mu)
    u5 = project_shell(make_solenoidal(grid64, 90), 5, part64)
    weighted = lam(5) ** (-1.0 + 3.0 / cfg.r) * lebesgue_norm(u5, cfg.r)
    u5 = SpectralVectorField(grid64, u5.coeffs * (2.0 * threshold / weighted))
    lam_r, q = dissipation_wavenumber(u5, cfg, part64, nu, mu)
    assert (lam_r, q) == (32.0, 5)
    down = SpectralVectorField(grid64, 0.4 * u5.coeffs)
    lam_r, q = dissipation_wavenumber(down, cfg, part64, nu, mu)
    assert (lam_r, q) == (1.0, 0)


def test_dissipation_wavenumber_monotone_in_amplitude(grid32, part32):
    cfg = CriterionConfig(r=4.0, c_r=0.01)
    base = band_pass(make_solenoidal(grid32, 91), 1, 4, part32)
    qs = []
    for alpha in np.logspace(-8, 2, 20):
        scaled = SpectralVectorField(grid32, alpha * base.coeffs)
        _, q = dissipation_wavenumber(scaled, cfg, part32, nu=0.05, mu=0.05)
        qs.append(q)
    assert all(b >= a for a, b in zip(qs, qs[1:]))
    assert qs[0] == 0
    assert qs[-1] >= 1


def test_shell_norms_consistency(grid16, part16):
    u = make_solenoidal(grid16, 92)
    inf_norms, r_norms = shell_norms(u, part16, 2.0)
    for q in part16.shell_range:
        piece = project_shell(u, q, part16)
        assert r_norms[q + 1] == pytest.approx(l2_norm(piece), rel=1e-10)
        assert inf_norms[q + 1] == pytest.approx(
            lebesgue_norm(piece, np.inf), rel=1e-12
        )


def test_f_from_norms_frozen():
    # inf norms indexed from q = -1; weights are 2^q with 1/2 at q = -1.
    inf_norms = np.array([1.0, 2.0, 3.0, 4.0])
    assert f_from_norms(inf_norms, 1) == pytest.approx(0.5 + 2.0 + 6.0)
    assert f_from_norms(inf_norms, 0) == pytest.approx(0.5 + 2.0)
    assert f_from_norms(np.zeros(4), 2) == 0.0


def test_single_mode_f(grid16, part16):
    coeffs = np.zeros((3, 16, 16, 16), dtype=complex)
    coeffs[1, 1, 0, 0] = 0.35  # (0, 0.7 cos x, 0)
    coeffs[1, -1, 0, 0] = 0.35
    u = SpectralVectorField(grid16, coeffs)
    assert f_of_t(u, 0, part16) == pytest.approx(0.7, abs=1e-12)


def test_window_slice():
    times = np.linspace(0.0, 1.0, 11)
    idx = window_slice(times, 0.5)
    assert list(idx) == [5, 6, 7, 8, 9, 10]
    with pytest.raises(WindowError):
        window_slice(np.array([0.0, 1.0]), 0.5)


def test_threshold_times_constant_series():
    times = np.linspace(0.5, 1.0, 5)
    q_series = np.full(5, 3)
    table = threshold_times(times, q_series, range(0, 6))
    for q in (0, 1, 2, 3):
        assert table[q] == 0.5
    assert table[4] == 1.0
    assert table[5] == 1.0


def test_threshold_times_piecewise():
    times = np.array([0.5, 0.625, 0.75, 0.875, 1.0])
    q_series = np.array([0, 0, 1, 2, 2])
    table = threshold_times(times, q_series, range(0, 4))
    assert table[0] == 0.5
    assert table[1] == 0.75
    assert table[2] == 0.875
    assert table[3] == 1.0
    vals = [table[q] for q in sorted(table)]
    assert vals == sorted(vals)  # nondecreasing in q


def test_gated_trapezoid():
    times = np.array([0.0, 1.0, 2.0, 3.0])
    values = np.ones(4)
    assert gated_trapezoid(times, values, np.array([1, 1, 1, 1], bool)) == 3.0
    assert gated_trapezoid(times, values, np.array([1, 1, 0, 1], bool)) == 1.0
    assert gated_trapezoid(times, values, np.zeros(4, bool)) == 0.0
    assert gated_trapezoid(times[:1], values[:1], np.ones(1, bool)) == 0.0


def _stub_record(t, q_index, shell_inf_u):
    pad = np.zeros_like(shell_inf_u)
    return DiagnosticRecord(
        t=t,
        shell_inf_u=shell_inf_u,
        shell_r_u=pad,
        shell_r_b=pad,
        shell_inf_curl=pad,
        lam_r=float(lam(q_index)),
        q_index=q_index,
        f_value=0.0,
        hs_energy=0.0,
        lowpass_besov=0.0,
        besov_dist_final=math.nan,
    )


def test_criterion_integral_frozen():
    # Constant Q = 2 and constant shell-1 amplitude c = 0.7 over a unit
    # trajectory: the gated integral over [1/2, 1] is 2 * 0.7 * 0.5 = 0.7.
    inf_norms = np.array([0.0, 0.0, 0.7, 0.0, 0.0])
    records = [_stub_record(t, 2, inf_norms) for t in np.linspace(0.0, 1.0, 5)]
    assert criterion_integral(records, 1, 0.5) == pytest.approx(0.7, abs=1e-14)
    # Gate never opens for q above the sampled Q.
    assert criterion_integral(records, 3, 0.5) == 0.0


def test_criterion_integral_partial_gate():
    inf_norms = np.array([0.0, 0.0, 0.0, 1.0, 0.0])  # shell q = 2 only
    qs = [0, 0, 1, 2, 2]
    records = [
        _stub_record(t, q, inf_norms)
        for t, q in zip(np.array([0.0, 0.25, 0.5, 0.75, 1.0]), qs)
    ]
    # Window samples: t = 0.5, 0.75, 1.0 with Q = 1, 2, 2; for q = 2 only
    # the (0.75, 1.0) interval passes both-endpoint gating, contributing
    # lambda_2 * 1 * 0.25.
    assert criterion_integral(records, 2, 0.5) == pytest.approx(4.0 * 0.25)


def test_build_record_fields(grid16, part16):
    cfg = CriterionConfig(r=4.0, l=2.0, s=0.6, c_r=0.01)
    u = make_solenoidal(grid16, 93)
    b = make_solenoidal(grid16, 94)
    rec = build_record(u, b, 0.3, part16, cfg, nu=0.05, mu=0.05, final_u=u)
    assert rec.t == 0.3
    assert rec.lam_r == lam(rec.q_index)
    assert rec.f_value == pytest.approx(
        f_from_norms(rec.shell_inf_u, rec.q_index)
    )
    hs_expected = (
        sobolev_norm(u, cfg.s, part16) ** 2 + sobolev_norm(b, cfg.s, part16) ** 2
    )
    assert rec.hs_energy == pytest.approx(hs_expected, rel=1e-10)
    assert rec.lowpass_besov > 0.0
    assert rec.besov_dist_final == 0.0  # distance to itself
    assert len(rec.shell_inf_u) == part16.q_max + 2
    assert np.all(rec.shell_inf_curl >= 0.0)


def test_build_records_distance_flag(grid16, part16):
    cfg = CriterionConfig()
    u0, b0 = initial_data(
        "random-spectrum",
        dict(seed=12, energy=1.0, magnetic_energy=0.5, peak_shell=1, slope=2.0),
        grid16,
    )
    res = run(u0, b0, SolverConfig(nu=0.05, mu=0.05, dt=0.01, t_end=0.04))
    records = build_records(res.snapshots, part16, cfg, nu=0.05, mu=0.05)
    assert len(records) == len(res.snapshots)
    assert records[-1].besov_dist_final == 0.0
    assert records[0].besov_dist_final > 0.0
    bare = build_records(
        res.snapshots, part16, cfg, nu=0.05, mu=0.05, with_final_distance=False
    )
    assert all(math.isnan(r.besov_dist_final) for r in bare)
