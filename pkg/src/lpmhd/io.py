"""Serialization: snapshot files, run manifests, configs, CSV tables.

Snapshot format (LPMHD1)
------------------------
Little-endian, fixed layout, no alignment padding:

    offset  size  field
    0       6     magic b"LPMHD1"
    6       4     format version, u32 (currently 1)
    10      4     grid size n, u32
    14      8     nu, f64
    22      8     mu, f64
    30      8     snapshot time t, f64
    38      1     field count, u8 (2: velocity then magnetic)
    39      -     payload

The payload is field_count vector fields, each 3 components of n^3
complex128 coefficients in C order, exactly as stored in memory.  A
write followed by a read reproduces the coefficient arrays bit for bit.
Writes go to a temporary file in the same directory and are renamed into
place, so a crash never leaves a half-written snapshot under the final
name.

All CSV output uses the %.17g float format, which round-trips binary64
exactly, and begins with "#"-prefixed lines echoing the full effective
configuration.
"""

import configparser
import csv
import hashlib
import json
import math
import os
import struct
from dataclasses import dataclass, field, fields

import numpy as np

from .criteria import CriterionReport
from .diagnostics import CriterionConfig, DiagnosticRecord
from .solver import INITIAL_DATA_KINDS, SCHEMES, EnergyLedger, SolverConfig, SolverState
from .spectral import Grid3, SpectralVectorField

__all__ = [
    "SnapshotFormatError",
    "ConfigError",
    "MAGIC",
    "VERSION",
    "snapshot_filename",
    "write_snapshot",
    "read_snapshot",
    "sha256_file",
    "write_manifest",
    "read_manifest",
    "RunConfig",
    "load_criteria_ini",
    "criteria_from_echo",
    "write_ledger_csv",
    "write_diagnostics_csv",
    "read_diagnostics_csv",
    "write_report",
]

MAGIC = b"LPMHD1"
VERSION = 1
_HEADER = struct.Struct("<6sIIdddB")
_FLOAT_FMT = "%.17g"


class SnapshotFormatError(ValueError):
    """Raised when a snapshot file fails structural validation."""


class ConfigError(ValueError):
    """Raised for unknown keys, bad values, or missing sections in a config."""


def snapshot_filename(index: int) -> str:
    return f"snapshot_{index:06d}.lpmhd"


def _atomic_write(path: str, data: bytes) -> None:
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def write_snapshot(path: str, state: SolverState, nu: float, mu: float) -> None:
    grid = state.u.grid
    header = _HEADER.pack(MAGIC, VERSION, grid.n, nu, mu, state.t, 2)
    u = np.ascontiguousarray(state.u.coeffs, dtype=np.complex128)
    b = np.ascontiguousarray(state.b.coeffs, dtype=np.complex128)
    payload = u.astype("<c16", copy=False).tobytes() + b.astype("<c16", copy=False).tobytes()
    _atomic_write(path, header + payload)


def read_snapshot(path: str) -> tuple[SolverState, float, float]:
    """Read a snapshot; returns (state, nu, mu).

    A field count of 1 means a velocity-only file; the magnetic field
    comes back as zeros.  Raises SnapshotFormatError on a bad magic,
    unsupported version, or a payload whose size disagrees with the
    header.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise SnapshotFormatError(f"{path}: truncated header")
    magic, version, n, nu, mu, t, nfields = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotFormatError(f"{path}: unsupported version {version}")
    if nfields not in (1, 2):
        raise SnapshotFormatError(f"{path}: expected 1 or 2 fields, found {nfields}")
    expected = _HEADER.size + nfields * 3 * n**3 * 16
    if len(raw) != expected:
        raise SnapshotFormatError(
            f"{path}: size {len(raw)} does not match header (expected {expected})"
        )
    grid = Grid3(n)
    count = 3 * n**3
    flat = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size)
    shape = (3, n, n, n)
    u = SpectralVectorField(grid, flat[:count].reshape(shape).astype(np.complex128))
    if nfields == 2:
        b = SpectralVectorField(grid, flat[count:].reshape(shape).astype(np.complex128))
    else:
        b = SpectralVectorField.zeros(grid)
    return SolverState(u=u, b=b, t=t), nu, mu


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(directory: str, manifest: dict) -> str:
    path = os.path.join(directory, "manifest.json")
    _atomic_write(path, json.dumps(manifest, sort_keys=True, indent=2).encode() + b"\n")
    return path


def read_manifest(directory: str) -> dict:
    with open(os.path.join(directory, "manifest.json"), "rb") as fh:
        return json.load(fh)


_SOLVER_KEYS = {
    "n": int,
    "nu": float,
    "mu": float,
    "dt": float,
    "t_end": float,
    "scheme": str,
    "snapshot_interval": float,
    "ic_kind": str,
    "ic_seed": int,
    "ic_energy": float,
    "ic_magnetic_energy": float,
    "ic_peak_shell": int,
    "ic_slope": float,
    "ic_amplitude": float,
}
_CRITERIA_KEYS = {
    "r": float,
    "l": float,
    "s": float,
    "c_r": float,
    "eps_ladder_depth": int,
    "c_cap": float,
}


@dataclass
class RunConfig:
    """Full run description: grid, solver, initial data, criterion knobs.

    Parsed from an INI file with [solver] and optional [criteria]
    sections.  Unknown sections or keys are rejected rather than
    ignored, so a typo cannot silently fall back to a default.
    """

    n: int = 32
    nu: float = 0.02
    mu: float = 0.02
    dt: float = 2.0e-3
    t_end: float = 1.0
    scheme: str = "if-rk4"
    snapshot_interval: float | None = None
    ic_kind: str = "taylor-green"
    ic_params: dict = field(default_factory=dict)
    criteria: CriterionConfig = field(default_factory=CriterionConfig)

    @classmethod
    def from_ini(cls, path: str) -> "RunConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        read = parser.read(path)
        if not read:
            raise ConfigError(f"cannot read config file {path}")
        sections = set(parser.sections())
        unknown = sections - {"solver", "criteria"}
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        if "solver" not in sections:
            raise ConfigError("config is missing the [solver] section")

        cfg = cls()
        for key, raw in parser.items("solver"):
            if key not in _SOLVER_KEYS:
                raise ConfigError(f"unknown key [solver] {key}")
            try:
                value = _SOLVER_KEYS[key](raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for [solver] {key}: {raw!r}") from exc
            if key.startswith("ic_") and key != "ic_kind":
                cfg.ic_params[key[3:]] = value
            else:
                setattr(cfg, key, value)
        if "criteria" in sections:
            for key, raw in parser.items("criteria"):
                if key not in _CRITERIA_KEYS:
                    raise ConfigError(f"unknown key [criteria] {key}")
                try:
                    value = _CRITERIA_KEYS[key](raw)
                except ValueError as exc:
                    raise ConfigError(f"bad value for [criteria] {key}: {raw!r}") from exc
                setattr(cfg.criteria, key, value)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.ic_kind not in INITIAL_DATA_KINDS:
            raise ConfigError(
                f"ic_kind must be one of {INITIAL_DATA_KINDS}, got {self.ic_kind!r}"
            )
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        try:
            Grid3(self.n)
            self.to_solver_config().validate()
            self.criteria.validate(magnetic=True)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def to_solver_config(self) -> SolverConfig:
        return SolverConfig(
            nu=self.nu,
            mu=self.mu,
            dt=self.dt,
            t_end=self.t_end,
            scheme=self.scheme,
            snapshot_interval=self.snapshot_interval,
        )

    def echo(self) -> dict:
        """Flat key -> value map of every effective setting, defaults included."""
        out = {
            "solver.n": self.n,
            "solver.nu": self.nu,
            "solver.mu": self.mu,
            "solver.dt": self.dt,
            "solver.t_end": self.t_end,
            "solver.scheme": self.scheme,
            "solver.snapshot_interval": (
                self.snapshot_interval if self.snapshot_interval is not None else self.dt
            ),
            "solver.ic_kind": self.ic_kind,
        }
        for key, value in sorted(self.ic_params.items()):
            out[f"solver.ic_{key}"] = value
        for cfg_field in fields(CriterionConfig):
            out[f"criteria.{cfg_field.name}"] = getattr(self.criteria, cfg_field.name)
        return out


def load_criteria_ini(path: str) -> CriterionConfig:
    """Criterion parameters from an INI file's [criteria] section.

    The file may be a full run config; only the [criteria] section is
    used here, but unknown keys anywhere are still rejected.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if not parser.read(path):
        raise ConfigError(f"cannot read config file {path}")
    unknown = set(parser.sections()) - {"solver", "criteria"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    cfg = CriterionConfig()
    if "criteria" in parser.sections():
        for key, raw in parser.items("criteria"):
            if key not in _CRITERIA_KEYS:
                raise ConfigError(f"unknown key [criteria] {key}")
            try:
                setattr(cfg, key, _CRITERIA_KEYS[key](raw))
            except ValueError as exc:
                raise ConfigError(f"bad value for [criteria] {key}: {raw!r}") from exc
    if "solver" in parser.sections():
        for key in parser.options("solver"):
            if key not in _SOLVER_KEYS:
                raise ConfigError(f"unknown key [solver] {key}")
    try:
        cfg.validate(magnetic=True)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def criteria_from_echo(echo: dict) -> CriterionConfig:
    """Rebuild a CriterionConfig from a manifest's config echo."""
    cfg = CriterionConfig()
    for key, caster in _CRITERIA_KEYS.items():
        full = f"criteria.{key}"
        if full in echo:
            setattr(cfg, key, caster(echo[full]))
    return cfg


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return _FLOAT_FMT % value
    return str(value)


def _echo_lines(echo: dict) -> list[str]:
    return [f"# {key} = {_fmt(value)}" for key, value in echo.items()]


def _write_csv(path: str, echo: dict, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        for line in _echo_lines(echo):
            fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_ledger_csv(path: str, ledger: EnergyLedger, echo: dict) -> None:
    residuals = ledger.residuals()
    rows = [
        [
            ledger.t[i],
            ledger.e_kin[i],
            ledger.e_mag[i],
            ledger.diss_u[i],
            ledger.diss_b[i],
            ledger.cross_helicity[i],
            residuals[i],
        ]
        for i in range(len(ledger.t))
    ]
    _write_csv(
        path,
        echo,
        ["t", "e_kin", "e_mag", "diss_u", "diss_b", "cross_helicity", "residual"],
        rows,
    )


def _shell_headers(q_max: int, stem: str) -> list[str]:
    return [f"{stem}_q{q}" for q in range(-1, q_max + 1)]


def write_diagnostics_csv(path: str, records: list[DiagnosticRecord], echo: dict) -> None:
    """Per-snapshot series: scalars first, then one column per shell."""
    q_max = len(records[0].shell_inf_u) - 2
    header = [
        "t",
        "q_index",
        "lam_r",
        "f_value",
        "hs_energy",
        "lowpass_besov",
        "besov_dist_final",
    ]
    header += _shell_headers(q_max, "inf_u")
    header += _shell_headers(q_max, "r_u")
    header += _shell_headers(q_max, "r_b")
    header += _shell_headers(q_max, "inf_curl")
    rows = []
    for rec in records:
        row = [
            rec.t,
            rec.q_index,
            rec.lam_r,
            rec.f_value,
            rec.hs_energy,
            rec.lowpass_besov,
            rec.besov_dist_final,
        ]
        row += list(rec.shell_inf_u)
        row += list(rec.shell_r_u)
        row += list(rec.shell_r_b)
        row += list(rec.shell_inf_curl)
        rows.append(row)
    _write_csv(path, echo, header, rows)


def read_diagnostics_csv(path: str) -> tuple[list[DiagnosticRecord], dict]:
    """Inverse of write_diagnostics_csv; returns (records, echo)."""
    echo = {}
    with open(path, newline="") as fh:
        data_lines = []
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                echo[key.strip()] = value.strip()
            else:
                data_lines.append(line)
    reader = csv.reader(data_lines)
    header = next(reader)
    n_shells = sum(1 for h in header if h.startswith("inf_u_q"))
    records = []
    for row in reader:
        vals = [float(v) for v in row]
        base = 7
        records.append(
            DiagnosticRecord(
                t=vals[0],
                q_index=int(vals[1]),
                lam_r=vals[2],
                f_value=vals[3],
                hs_energy=vals[4],
                lowpass_besov=vals[5],
                besov_dist_final=vals[6],
                shell_inf_u=np.array(vals[base : base + n_shells]),
                shell_r_u=np.array(vals[base + n_shells : base + 2 * n_shells]),
                shell_r_b=np.array(vals[base + 2 * n_shells : base + 3 * n_shells]),
                shell_inf_curl=np.array(vals[base + 3 * n_shells : base + 4 * n_shells]),
            )
        )
    return records, echo


def write_report(base_path: str, report: CriterionReport, echo: dict) -> list[str]:
    """Write the report summary plus CSV companions.

    base_path is used as-is for the text summary; companions get the
    suffixes _criterion_q.csv, _tq.csv, _conditions.csv, _chain.csv,
    _gronwall.csv next to it.  Returns the list of paths written.
    """
    stem, _ = os.path.splitext(base_path)
    written = []

    lines = list(_echo_lines(echo))
    lines.append(f"# nu = {_fmt(report.nu)}")
    lines.append(f"# mu = {_fmt(report.mu)}")
    lines.append(f"# t_end = {_fmt(report.t_end)}")
    lines.append(f"# t_half = {_fmt(report.t_half)}")
    lines.append(f"# qbar_max = {_fmt(report.qbar)}")
    sur = report.criterion_surrogate
    lines.append(
        "criterion_surrogate "
        f"top_q={sur.top_q} top_value={_fmt(sur.top_value)} "
        f"max_top4={_fmt(sur.max_top4)} slope_top4={_fmt(sur.slope_top4)}"
    )
    lines.append(f"chain_max_ratio value={_fmt(report.chain_max_ratio)} cap={_fmt(report.cfg.c_cap)}")
    lines.append(
        f"gronwall max_constant={_fmt(report.gronwall.max_constant())} "
        f"violations={len(report.gronwall.violations)}"
    )
    for cond in report.conditions:
        status = "ok" if cond.satisfied else ("unavailable" if not cond.available else "FAIL")
        lines.append(
            f"condition {cond.cid} {status} value={_fmt(cond.value)} "
            f"threshold={_fmt(cond.threshold)}"
            + (f" note={cond.note}" if cond.note else "")
        )
    _atomic_write(base_path, ("\n".join(lines) + "\n").encode())
    written.append(base_path)

    path = stem + "_criterion_q.csv"
    rows = [
        [row.q, row.gated_integral, row.tq_integral, row.eps, row.eps_integral]
        for row in report.ordering
    ]
    _write_csv(path, echo, ["q", "gated_integral", "tq_integral", "eps", "eps_integral"], rows)
    written.append(path)

    path = stem + "_tq.csv"
    rows = [[q, t] for q, t in sorted(report.tq_table.items())]
    _write_csv(path, echo, ["q", "t_q"], rows)
    written.append(path)

    path = stem + "_conditions.csv"
    rows = [
        [c.cid, c.value, c.threshold, int(c.satisfied), int(c.available), c.note]
        for c in report.conditions
    ]
    _write_csv(path, echo, ["cid", "value", "threshold", "satisfied", "available", "note"], rows)
    written.append(path)

    path = stem + "_chain.csv"
    rows = [[s.q, s.name, s.lhs, s.rhs, s.ratio] for s in report.chain]
    _write_csv(path, echo, ["q", "step", "lhs", "rhs", "ratio"], rows)
    written.append(path)

    path = stem + "_gronwall.csv"
    g = report.gronwall
    rows = [
        [g.t[i], g.dedt[i], g.f_value[i], g.hs_energy[i], g.c_emp[i]]
        for i in range(len(g.t))
    ]
    _write_csv(path, echo, ["t", "dedt", "f_value", "hs_energy", "c_emp"], rows)
    written.append(path)
    return written
