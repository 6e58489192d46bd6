"""Regularity-criterion evaluation on sampled trajectories.

Everything here is a pure function of the diagnostic records (plus the
criterion configuration), so recomputing from serialized snapshots
reproduces a report bit for bit.

The central object is the indicator-gated shell integral over the
observation window [T/2, T]

    I_q = integral 1_{q <= Q(tau)} 2^q ||u_q||_inf dtau,

whose smallness against c_r is the main criterion.  Eight alternative
conditions replace the indicator by threshold times T_q, by shrinking
windows [T - eps, T], by scale-weighted r-norm integrals, by a Besov
integral of the low-pass part, or by a Besov distance to the final
snapshot.  Limsup-in-q statements are reported through a finite-
resolution surrogate: the value at the top resolved shell plus the max
and slope over the top four shells, labelled as such.

The chain check measures every inequality step used to pass from the
criterion integral to the r-norm integrals: a Bernstein step, the
wavenumber sorting step (2^q <= Lambda on the gated set), a Hoelder step
in time, and the threshold step that invokes the lower bound
||u_Q||_r >= c_r min(nu, mu) Lambda^(1 - 3/r).  Ratios are reported per
shell; on healthy decaying data they stay well under the cap.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import (
    CriterionConfig,
    DiagnosticRecord,
    WindowError,
    gated_trapezoid,
    threshold_times,
    window_slice,
)
from .dyadic import lam

__all__ = [
    "InconsistencyError",
    "LimsupSurrogate",
    "ConditionResult",
    "ChainStep",
    "GronwallSeries",
    "OrderingRow",
    "CriterionReport",
    "eps_ladder",
    "limsup_surrogate",
    "evaluate_conditions",
    "inequality_chain_check",
    "gronwall_monitor",
    "ordering_chain",
    "evaluate_report",
]


class InconsistencyError(ArithmeticError):
    """An inequality check hit a zero right side with a nonzero left side."""


@dataclass
class LimsupSurrogate:
    """Finite-resolution stand-in for a limsup over shells."""

    top_q: int
    top_value: float
    max_top4: float
    slope_top4: float


@dataclass
class ConditionResult:
    cid: int
    description: str
    value: float
    threshold: float
    satisfied: bool
    available: bool = True
    per_q: dict[int, float] | None = None
    ladder: list[tuple[float, dict[int, float]]] | None = None
    surrogate: LimsupSurrogate | None = None
    note: str = ""


@dataclass
class ChainStep:
    q: int
    name: str
    lhs: float
    rhs: float
    ratio: float


@dataclass
class GronwallSeries:
    t: np.ndarray
    dedt: np.ndarray
    f_value: np.ndarray
    hs_energy: np.ndarray
    c_emp: np.ndarray
    violations: list[float]

    def max_constant(self) -> float:
        return float(np.max(self.c_emp)) if len(self.c_emp) else 0.0


@dataclass
class OrderingRow:
    q: int
    gated_integral: float      # indicator-gated, over [T/2, T]
    tq_integral: float         # ungated, over [T_q, T]
    eps: float                 # smallest ladder rung with T - eps <= T_q
    eps_integral: float        # ungated, over [T - eps, T]


@dataclass
class CriterionReport:
    nu: float
    mu: float
    t_end: float
    t_half: float
    q_range: list[int]
    cfg: CriterionConfig
    criterion_per_q: dict[int, float]
    criterion_surrogate: LimsupSurrogate
    tq_table: dict[int, float]
    ordering: list[OrderingRow]
    conditions: list[ConditionResult]
    chain: list[ChainStep]
    chain_max_ratio: float
    gronwall: GronwallSeries
    qbar: float
    config_echo: dict = field(default_factory=dict)


def eps_ladder(t_half: float, t_end: float, snapshot_dt: float, depth: int) -> list[float]:
    """Shrinking-window widths (T/2) * 2^-j, stopping at 4 snapshot intervals."""
    window = t_end - t_half
    out = []
    for j in range(depth):
        eps = window * 2.0**-j
        if eps < 4.0 * snapshot_dt - 1e-12 * max(1.0, window):
            break
        out.append(eps)
    if not out:
        out.append(window)
    return out


def limsup_surrogate(per_q: dict[int, float]) -> LimsupSurrogate:
    qs = sorted(per_q)
    top = qs[-1]
    top4 = qs[-4:] if len(qs) >= 4 else qs
    vals = [per_q[q] for q in top4]
    slope = float(np.polyfit(top4, vals, 1)[0]) if len(top4) >= 2 else 0.0
    return LimsupSurrogate(
        top_q=top,
        top_value=per_q[top],
        max_top4=float(max(vals)),
        slope_top4=slope,
    )


def _subwindow_trapz(times, values, t_start) -> float:
    """Plain trapezoid over the samples with t >= t_start."""
    times = np.asarray(times, dtype=np.float64)
    keep = times >= t_start - 1e-9 * max(1.0, abs(t_start))
    if np.count_nonzero(keep) < 2:
        return 0.0
    return float(np.trapezoid(np.asarray(values, dtype=np.float64)[keep], times[keep]))


class _Series:
    """Record columns pulled into arrays once, window bookkeeping attached."""

    def __init__(self, records: list[DiagnosticRecord], cfg: CriterionConfig):
        if len(records) < 3:
            raise WindowError("criteria need at least three snapshots")
        self.cfg = cfg
        self.t = np.asarray([r.t for r in records])
        if np.any(np.diff(self.t) <= 0):
            raise WindowError("snapshot times must be strictly increasing")
        self.t_end = float(self.t[-1])
        self.t_half = 0.5 * self.t_end
        self.widx = window_slice(self.t, self.t_half)
        self.wt = self.t[self.widx]
        self.q_index = np.asarray([r.q_index for r in records])
        self.lam_r = np.asarray([r.lam_r for r in records])
        self.f_value = np.asarray([r.f_value for r in records])
        self.hs = np.asarray([r.hs_energy for r in records])
        self.lowpass_besov = np.asarray([r.lowpass_besov for r in records])
        self.dist_final = np.asarray([r.besov_dist_final for r in records])
        self.shell_inf_u = np.stack([r.shell_inf_u for r in records])
        self.shell_r_u = np.stack([r.shell_r_u for r in records])
        self.shell_inf_curl = np.stack([r.shell_inf_curl for r in records])
        self.q_max = self.shell_inf_u.shape[1] - 2
        self.q_range = list(range(-1, self.q_max + 1))
        self.snapshot_dt = float(np.min(np.diff(self.wt)))
        wq = self.q_index[self.widx]
        self.tq = threshold_times(self.wt, wq, range(0, self.q_max + 2))

    def gate(self, q: int) -> np.ndarray:
        return self.q_index >= q

    def col(self, stacked: np.ndarray, q: int) -> np.ndarray:
        return stacked[:, q + 1]


def _criterion_per_q(s: _Series) -> dict[int, float]:
    out = {}
    for q in s.q_range:
        vals = lam(q) * s.col(s.shell_inf_u, q)
        out[q] = gated_trapezoid(s.wt, vals[s.widx], s.gate(q)[s.widx])
    return out


def ordering_chain(s: _Series, criterion_per_q: dict[int, float], ladder: list[float]):
    """Windowed-integral comparison rows for the common integrand 2^q ||u_q||_inf.

    For each shell: the indicator-gated integral over [T/2, T], the plain
    integral over [T_q, T], and the plain integral over [T - eps, T] for
    the smallest ladder rung whose window contains [T_q, T].  With the
    interval-exact indicator the three are ordered by construction; the
    rows let the acceptance suite assert that on real data.
    """
    rows = []
    for q in s.q_range:
        vals = (lam(q) * s.col(s.shell_inf_u, q))[s.widx]
        tq = s.tq[max(q, 0)]
        tq_int = _subwindow_trapz(s.wt, vals, tq)
        need = s.t_end - tq
        eps = next((e for e in sorted(ladder) if e >= need - 1e-12), max(ladder))
        eps_int = _subwindow_trapz(s.wt, vals, s.t_end - eps)
        rows.append(
            OrderingRow(
                q=q,
                gated_integral=criterion_per_q[q],
                tq_integral=tq_int,
                eps=eps,
                eps_integral=eps_int,
            )
        )
    return rows


def evaluate_conditions(
    s_or_records,
    cfg: CriterionConfig | None = None,
    nu: float | None = None,
    mu: float | None = None,
    final_available: bool = True,
) -> list[ConditionResult]:
    """Evaluate the eight alternative smallness conditions.

    Accepts either a prepared _Series or a list of DiagnosticRecord.
    Conditions (3) and (7) assert finiteness of their integrals; the
    others compare against thresholds built from c_r and min(nu, mu).
    """
    s = s_or_records if isinstance(s_or_records, _Series) else _Series(s_or_records, cfg)
    cfg = s.cfg
    c_r = cfg.c_r
    l_exp = cfg.l
    min_visc = min(nu, mu)
    sigma = -1.0 + 2.0 / l_exp + 3.0 / cfg.r
    thr_l = c_r**l_exp * min_visc ** (l_exp - 1.0)
    ladder = eps_ladder(s.t_half, s.t_end, s.snapshot_dt, cfg.eps_ladder_depth)
    results = []

    def curl_col(q):
        return s.col(s.shell_inf_curl, q)[s.widx]

    def wave_col(q):
        return ((lam(q) ** sigma) * s.col(s.shell_r_u, q)) ** l_exp

    # (1) vorticity shells integrated from the threshold time
    per_q = {
        q: _subwindow_trapz(s.wt, curl_col(q), s.tq[max(q, 0)]) for q in s.q_range
    }
    sur = limsup_surrogate(per_q)
    results.append(
        ConditionResult(
            1,
            "curl shell integral over [T_q, T]",
            sur.max_top4,
            c_r,
            sur.max_top4 <= c_r,
            per_q=per_q,
            surrogate=sur,
        )
    )

    # (2) same integrand on the shrinking-window ladder
    rungs = []
    for eps in ladder:
        rung = {q: _subwindow_trapz(s.wt, curl_col(q), s.t_end - eps) for q in s.q_range}
        rungs.append((eps, rung))
    sur = limsup_surrogate(rungs[-1][1])
    results.append(
        ConditionResult(
            2,
            "curl shell integral over [T - eps, T], smallest rung",
            sur.max_top4,
            c_r,
            sur.max_top4 <= c_r,
            ladder=rungs,
            surrogate=sur,
            note=f"eps={rungs[-1][0]:.6g}",
        )
    )

    # (3) sup over active shells of the curl norms, full trajectory
    active_sup = np.array(
        [
            max(s.shell_inf_curl[i, : s.q_index[i] + 2])
            for i in range(len(s.t))
        ]
    )
    val = float(np.trapezoid(active_sup, s.t))
    results.append(
        ConditionResult(
            3,
            "integral of sup_{q<=Q} curl shell norm over [0, T]",
            val,
            math.inf,
            bool(np.isfinite(val)),
        )
    )

    # (4) gated scale-weighted r-norm integrals, full trajectory
    per_q = {
        q: gated_trapezoid(s.t, wave_col(q), s.gate(q)) for q in s.q_range
    }
    sur = limsup_surrogate(per_q)
    results.append(
        ConditionResult(
            4,
            "gated (2^q(-1+2/l+3/r) ||u_q||_r)^l integral over [0, T]",
            sur.max_top4,
            thr_l,
            sur.max_top4 <= thr_l,
            per_q=per_q,
            surrogate=sur,
        )
    )

    # (5) same integrand from the threshold time
    per_q = {
        q: _subwindow_trapz(s.wt, wave_col(q)[s.widx], s.tq[max(q, 0)])
        for q in s.q_range
    }
    sur = limsup_surrogate(per_q)
    results.append(
        ConditionResult(
            5,
            "scale-weighted r-norm integral over [T_q, T]",
            sur.max_top4,
            thr_l,
            sur.max_top4 <= thr_l,
            per_q=per_q,
            surrogate=sur,
        )
    )

    # (6) same integrand on the ladder
    rungs = []
    for eps in ladder:
        rung = {
            q: _subwindow_trapz(s.wt, wave_col(q)[s.widx], s.t_end - eps)
            for q in s.q_range
        }
        rungs.append((eps, rung))
    sur = limsup_surrogate(rungs[-1][1])
    results.append(
        ConditionResult(
            6,
            "scale-weighted r-norm integral over [T - eps, T], smallest rung",
            sur.max_top4,
            thr_l,
            sur.max_top4 <= thr_l,
            ladder=rungs,
            surrogate=sur,
            note=f"eps={rungs[-1][0]:.6g}",
        )
    )

    # (7) Besov integral of the low-pass part, full trajectory
    val = float(np.trapezoid(s.lowpass_besov**l_exp, s.t))
    results.append(
        ConditionResult(
            7,
            "integral of ||u_{<=Q}||_Besov^l over [0, T]",
            val,
            math.inf,
            bool(np.isfinite(val)),
        )
    )

    # (8) Besov distance to the final snapshot over late times
    if final_available and not np.any(np.isnan(s.dist_final)):
        eps_min = ladder[-1]
        late = (s.t >= s.t_end - eps_min - 1e-12) & (s.t < s.t_end)
        if not np.any(late):
            late = s.t < s.t_end
        val = float(np.max(s.dist_final[late]))
        results.append(
            ConditionResult(
                8,
                "sup of Besov distance to u(T) over late times",
                val,
                0.5 * c_r,
                val <= 0.5 * c_r,
            )
        )
    else:
        results.append(
            ConditionResult(
                8,
                "sup of Besov distance to u(T) over late times",
                math.nan,
                0.5 * c_r,
                False,
                available=False,
                note="final snapshot unavailable",
            )
        )
    return results


def inequality_chain_check(
    s_or_records,
    cfg: CriterionConfig | None = None,
    nu: float = None,
    mu: float = None,
    noise_floor: float = 1e-12,
) -> list[ChainStep]:
    """Measure each inequality step of the criterion chain per shell.

    Steps, all on the gated window integrals: bernstein (inf-norm vs
    scaled r-norm), wavenumber (2^q vs Lambda on the gated set), hoelder
    (time exponents l and l/(l-1)), threshold (dissipation-wavenumber
    lower bound).  For l = 1 the chain is the Bernstein step alone.
    Ratios are 0 when both sides vanish.

    Shells whose gated r-norm integral is positive but smaller than
    noise_floor times the largest shell's are skipped: their content is
    arithmetic round-off (a shell the data never touched), and a ratio
    of two round-off numbers measures nothing.

    Raises
    ------
    InconsistencyError
        If a step has a zero right side but a nonzero left side.
    """
    s = s_or_records if isinstance(s_or_records, _Series) else _Series(s_or_records, cfg)
    cfg = s.cfg
    l_exp = cfg.l
    sigma = -1.0 + 2.0 / l_exp + 3.0 / cfg.r
    min_visc = min(nu, mu)
    steps: list[ChainStep] = []

    def ratio(lhs: float, rhs: float) -> float:
        if rhs == 0.0:
            if lhs == 0.0:
                return 0.0
            raise InconsistencyError(
                f"chain step has zero right side with left side {lhs:.3e}"
            )
        return lhs / rhs

    b_vals = {
        q: gated_trapezoid(
            s.wt,
            lam(q) ** (1.0 + 3.0 / cfg.r) * s.col(s.shell_r_u, q)[s.widx],
            s.gate(q)[s.widx],
        )
        for q in s.q_range
    }
    b_scale = max(b_vals.values())

    for q in s.q_range:
        b = b_vals[q]
        if 0.0 < b < noise_floor * b_scale:
            continue
        gate = s.gate(q)[s.widx]
        inf_u = s.col(s.shell_inf_u, q)[s.widx]
        r_u = s.col(s.shell_r_u, q)[s.widx]
        lam_t = s.lam_r[s.widx]

        a = gated_trapezoid(s.wt, lam(q) * inf_u, gate)
        steps.append(ChainStep(q, "bernstein", a, b, ratio(a, b)))
        if l_exp == 1.0:
            continue

        wave = lam(q) ** sigma * r_u
        c = gated_trapezoid(s.wt, lam_t ** (2.0 - 2.0 / l_exp) * wave, gate)
        steps.append(ChainStep(q, "wavenumber", b, c, ratio(b, c)))

        h1 = gated_trapezoid(s.wt, lam_t**2, gate) ** ((l_exp - 1.0) / l_exp)
        h2 = gated_trapezoid(s.wt, wave**l_exp, gate) ** (1.0 / l_exp)
        d = h1 * h2
        steps.append(ChainStep(q, "hoelder", c, d, ratio(c, d)))

        f_rhs = (cfg.c_r * min_visc) ** (1.0 - l_exp) * gated_trapezoid(
            s.wt, wave**l_exp, gate
        )
        steps.append(ChainStep(q, "threshold", d, f_rhs, ratio(d, f_rhs)))
    return steps


def gronwall_monitor(s_or_records, cfg: CriterionConfig | None = None) -> GronwallSeries:
    """Empirical constant in dE_s/dt <= C f(t) E_s along the trajectory.

    E_s is the shell-weighted energy of (u, b); dE_s/dt uses centered
    differences at interior snapshots.  C_emp = max(dE_s/dt, 0)/(f E_s),
    with 0/0 read as 0.  Decaying data gives C_emp identically zero;
    growth with f E_s = 0 is recorded as a violation.
    """
    s = s_or_records if isinstance(s_or_records, _Series) else _Series(s_or_records, cfg)
    t, es, f_val = s.t, s.hs, s.f_value
    dedt = (es[2:] - es[:-2]) / (t[2:] - t[:-2])
    ti = t[1:-1]
    fi = f_val[1:-1]
    ei = es[1:-1]
    growth = np.maximum(dedt, 0.0)
    denom = fi * ei
    c_emp = np.zeros_like(growth)
    violations = []
    for i in range(len(growth)):
        if denom[i] > 0.0:
            c_emp[i] = growth[i] / denom[i]
        elif growth[i] > 0.0:
            violations.append(float(ti[i]))
            c_emp[i] = math.inf
    return GronwallSeries(
        t=ti, dedt=dedt, f_value=fi, hs_energy=ei, c_emp=c_emp, violations=violations
    )


def evaluate_report(
    records: list[DiagnosticRecord],
    cfg: CriterionConfig,
    nu: float,
    mu: float,
    final_available: bool = True,
    config_echo: dict | None = None,
    magnetic: bool = True,
) -> CriterionReport:
    """Assemble the full criterion report from diagnostic records."""
    cfg.validate(magnetic=magnetic)
    s = _Series(records, cfg)
    ladder = eps_ladder(s.t_half, s.t_end, s.snapshot_dt, cfg.eps_ladder_depth)
    crit = _criterion_per_q(s)
    report = CriterionReport(
        nu=nu,
        mu=mu,
        t_end=s.t_end,
        t_half=s.t_half,
        q_range=s.q_range,
        cfg=cfg,
        criterion_per_q=crit,
        criterion_surrogate=limsup_surrogate(crit),
        tq_table=dict(s.tq),
        ordering=ordering_chain(s, crit, ladder),
        conditions=evaluate_conditions(s, nu=nu, mu=mu, final_available=final_available),
        chain=inequality_chain_check(s, nu=nu, mu=mu),
        chain_max_ratio=0.0,
        gronwall=gronwall_monitor(s),
        qbar=float(np.max(s.q_index)),
        config_echo=dict(config_echo or {}),
    )
    finite = [st.ratio for st in report.chain if np.isfinite(st.ratio)]
    report.chain_max_ratio = float(max(finite)) if finite else 0.0
    return report
