"""Trajectory diagnostics built on the dyadic shell decomposition.

For each snapshot we record shell norms of the velocity, magnetic field
and vorticity, and derive from them:

* the dissipation wavenumber Lambda_r(t) = 2^Q(t), where Q(t) is the
  smallest q >= 0 such that every resolved shell above q sits below the
  threshold c_r * min(nu, mu) in the scale-weighted r-norm
  2^(-q(1 - 3/r)) ||u_q||_r.  If no shell violates the threshold, Q = 0
  and Lambda = 1; the q = -1 block is always permitted below Q.

* the low-mode sum f(t) = sum_{q <= Q(t)} 2^q ||u_q||_inf, with the
  2^q convention applied at q = -1 as well.

* threshold times T_q: the last time within the observation window
  (T/2, T] before which Q stayed below q, evaluated at snapshot
  resolution.  T_q = T/2 if the first sample already has Q >= q, and
  T_q = T if q exceeds every sampled Q.

Indicator-gated time integrals treat the indicator as constant per
snapshot interval (on only when both endpoint samples are on) and apply
the trapezoid rule to the continuous factor.
"""

import math
from dataclasses import dataclass

import numpy as np

from .dyadic import DyadicPartition, lam, project_shell, shell_decompose
from .spectral import SpectralVectorField, curl, l2_norm, lebesgue_norm, vector_to_physical

__all__ = [
    "CriterionConfig",
    "DiagnosticRecord",
    "WindowError",
    "dissipation_wavenumber",
    "dissipation_wavenumber_from_norms",
    "f_of_t",
    "f_from_norms",
    "shell_norms",
    "build_record",
    "build_records",
    "threshold_times",
    "window_slice",
    "gated_trapezoid",
    "criterion_integral",
]


class WindowError(ValueError):
    """Snapshot sampling does not cover the required time window."""


@dataclass
class CriterionConfig:
    """Parameters of the regularity diagnostics.

    r, l are the Lebesgue/time exponents, s the Sobolev smoothness used
    by the shell-energy monitor, c_r the dimensionless threshold in the
    dissipation-wavenumber definition.  eps_ladder_depth bounds the
    number of shrinking-window rungs; c_cap is the acceptance cap on
    measured inequality constants.
    """

    r: float = 4.0
    l: float = 2.0
    s: float = 0.6
    c_r: float = 0.01
    eps_ladder_depth: int = 8
    c_cap: float = 10.0

    def validate(self, magnetic: bool = True) -> None:
        if not 0.5 < self.s < 1.0:
            raise ValueError("s must lie in (1/2, 1)")
        if self.r < 2:
            raise ValueError("r must be at least 2")
        if magnetic and not self.r < 3.0 / self.s:
            raise ValueError("with a magnetic field r must satisfy r < 3/s")
        if self.l < 1:
            raise ValueError("l must be at least 1")
        if self.c_r <= 0:
            raise ValueError("c_r must be positive")
        if self.eps_ladder_depth < 1:
            raise ValueError("eps_ladder_depth must be at least 1")
        if self.c_cap <= 0:
            raise ValueError("c_cap must be positive")

    def echo(self) -> dict:
        return {
            "r": self.r,
            "l": self.l,
            "s": self.s,
            "c_r": self.c_r,
            "eps_ladder_depth": self.eps_ladder_depth,
            "c_cap": self.c_cap,
        }


@dataclass
class DiagnosticRecord:
    """Scalar diagnostics of one snapshot; shell arrays start at q = -1."""

    t: float
    shell_inf_u: np.ndarray
    shell_r_u: np.ndarray
    shell_r_b: np.ndarray
    shell_inf_curl: np.ndarray
    lam_r: float
    q_index: int
    f_value: float
    hs_energy: float
    lowpass_besov: float
    besov_dist_final: float


def shell_norms(field: SpectralVectorField, part: DyadicPartition, r: float):
    """(||Delta_q field||_inf, ||Delta_q field||_r) over the shell range.

    One inverse transform per shell; both norms come from the same
    pointwise magnitudes.
    """
    dv = field.grid.cell_volume
    inf_norms, r_norms = [], []
    for piece in shell_decompose(field, part).pieces:
        vals = vector_to_physical(piece)
        mag = np.sqrt(np.sum(vals * vals, axis=0))
        inf_norms.append(float(np.max(mag)))
        if np.isinf(r):
            r_norms.append(inf_norms[-1])
        else:
            r_norms.append(float((dv * np.sum(mag**r)) ** (1.0 / r)))
    return np.asarray(inf_norms), np.asarray(r_norms)


def dissipation_wavenumber_from_norms(
    shell_r_u: np.ndarray, cfg: CriterionConfig, nu: float, mu: float
) -> tuple[float, int]:
    """(Lambda_r, Q) from precomputed shell r-norms (index 0 is q = -1)."""
    threshold = cfg.c_r * min(nu, mu)
    q_top = len(shell_r_u) - 2
    q_index = 0
    for q in range(q_top, 0, -1):
        if lam(q) ** (-1.0 + 3.0 / cfg.r) * shell_r_u[q + 1] >= threshold:
            q_index = q
            break
    return float(lam(q_index)), q_index


def dissipation_wavenumber(
    u: SpectralVectorField,
    cfg: CriterionConfig,
    part: DyadicPartition,
    nu: float,
    mu: float,
) -> tuple[float, int]:
    """Dissipation wavenumber (Lambda_r, Q = log2 Lambda_r) of one field."""
    _, r_norms = shell_norms(u, part, cfg.r)
    return dissipation_wavenumber_from_norms(r_norms, cfg, nu, mu)


def f_from_norms(shell_inf_u: np.ndarray, q_index: int) -> float:
    return float(
        sum(lam(q) * shell_inf_u[q + 1] for q in range(-1, q_index + 1))
    )


def f_of_t(u: SpectralVectorField, q_index: int, part: DyadicPartition) -> float:
    """Low-mode sum sum_{q<=Q} 2^q ||u_q||_inf (2^q = 1/2 at q = -1)."""
    inf_norms, _ = shell_norms(u, part, 2)
    return f_from_norms(inf_norms, q_index)


def _lowpass_besov(
    u: SpectralVectorField, q_index: int, part: DyadicPartition, sigma: float, r: float
) -> float:
    low = SpectralVectorField(
        u.grid, u.coeffs * part.lowpass(q_index)
    )
    return max(
        lam(q) ** sigma * lebesgue_norm(project_shell(low, q, part), r)
        for q in part.shell_range
    )


def build_record(
    state_u: SpectralVectorField,
    state_b: SpectralVectorField,
    t: float,
    part: DyadicPartition,
    cfg: CriterionConfig,
    nu: float,
    mu: float,
    final_u: SpectralVectorField | None = None,
) -> DiagnosticRecord:
    inf_u, r_u = shell_norms(state_u, part, cfg.r)
    _, r_b = shell_norms(state_b, part, cfg.r)
    inf_curl = np.asarray(
        [
            lebesgue_norm(piece, np.inf)
            for piece in shell_decompose(curl(state_u), part).pieces
        ]
    )
    lam_r, q_index = dissipation_wavenumber_from_norms(r_u, cfg, nu, mu)
    f_value = f_from_norms(inf_u, q_index)

    hs = 0.0
    for q in part.shell_range:  # shell L2 norms straight from the coefficients
        w = lam(q) ** (2.0 * cfg.s)
        hs += w * l2_norm(project_shell(state_u, q, part)) ** 2
        hs += w * l2_norm(project_shell(state_b, q, part)) ** 2

    sigma_l = -1.0 + 2.0 / cfg.l + 3.0 / cfg.r
    lp_besov = _lowpass_besov(state_u, q_index, part, sigma_l, cfg.r)

    dist = math.nan
    if final_u is not None:
        diff = SpectralVectorField(state_u.grid, state_u.coeffs - final_u.coeffs)
        sigma_d = -1.0 + 3.0 / cfg.r
        dist = max(
            lam(q) ** sigma_d * lebesgue_norm(project_shell(diff, q, part), cfg.r)
            for q in part.shell_range
        )
    return DiagnosticRecord(
        t=t,
        shell_inf_u=inf_u,
        shell_r_u=r_u,
        shell_r_b=r_b,
        shell_inf_curl=inf_curl,
        lam_r=lam_r,
        q_index=q_index,
        f_value=f_value,
        hs_energy=hs,
        lowpass_besov=lp_besov,
        besov_dist_final=dist,
    )


def build_records(snapshots, part, cfg, nu, mu, with_final_distance=True):
    """Diagnostic records for a snapshot sequence (list of SolverState)."""
    final_u = snapshots[-1].u if with_final_distance else None
    return [
        build_record(s.u, s.b, s.t, part, cfg, nu, mu, final_u=final_u)
        for s in snapshots
    ]


# ---------------------------------------------------------------------------
# Time-window machinery


def window_slice(times: np.ndarray, t_half: float) -> np.ndarray:
    """Indices of samples in the observation window [T/2, T].

    Raises
    ------
    WindowError
        If fewer than two samples land in the window.
    """
    times = np.asarray(times)
    idx = np.nonzero(times >= t_half - 1e-9 * max(1.0, abs(t_half)))[0]
    if len(idx) < 2:
        raise WindowError(
            f"criteria need at least two snapshots in [{t_half:.6g}, "
            f"{times[-1] if len(times) else 'nan'}]; got {len(idx)}"
        )
    return idx


def threshold_times(times: np.ndarray, q_series: np.ndarray, q_range) -> dict[int, float]:
    """T_q per q: time of the first window sample with Q >= q, else T.

    ``times``/``q_series`` are the window samples only (first entry at
    T/2).  The table is nondecreasing in q and hits T for q above every
    sampled Q.
    """
    times = np.asarray(times, dtype=np.float64)
    q_series = np.asarray(q_series)
    t_end = times[-1]
    table = {}
    for q in q_range:
        hits = np.nonzero(q_series >= q)[0]
        table[q] = float(times[hits[0]]) if len(hits) else float(t_end)
    return table


def gated_trapezoid(times, values, gate) -> float:
    """Trapezoid of ``values`` over intervals whose both endpoints pass ``gate``."""
    times = np.asarray(times, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    gate = np.asarray(gate, dtype=bool)
    if len(times) < 2:
        return 0.0
    both = gate[:-1] & gate[1:]
    seg = 0.5 * (values[:-1] + values[1:]) * np.diff(times)
    return float(np.sum(seg[both]))


def criterion_integral(records, q: int, t_half: float) -> float:
    """Indicator-gated criterion integral for shell q over [T/2, T]:

        integral 1_{q <= Q(tau)} 2^q ||u_q(tau)||_inf dtau
    """
    times = np.asarray([rec.t for rec in records])
    idx = window_slice(times, t_half)
    gate = np.asarray([records[i].q_index >= q for i in idx])
    vals = np.asarray([lam(q) * records[i].shell_inf_u[q + 1] for i in idx])
    return gated_trapezoid(times[idx], vals, gate)
