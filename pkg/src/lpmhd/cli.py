"""Command-line entry points.

Subcommands: ``simulate`` (run a configured integration, writing
snapshots, an energy ledger, and a checksummed manifest), ``analyze``
(per-snapshot diagnostics CSV), ``criteria`` (full criterion report with
CSV companions), ``verify`` (built-in check suites).

Exit codes: 0 success, 1 usage or configuration error, 2 numerical
failure (CFL abort, failed checks, unusable time window), 3 I/O or file
format error.
"""

import argparse
import json
import os
import sys

from .criteria import evaluate_report
from .diagnostics import WindowError, build_record
from .dyadic import ProfileError, build_partition
from .io import (
    ConfigError,
    RunConfig,
    SnapshotFormatError,
    criteria_from_echo,
    load_criteria_ini,
    read_manifest,
    read_snapshot,
    sha256_file,
    snapshot_filename,
    write_diagnostics_csv,
    write_ledger_csv,
    write_manifest,
    write_report,
    write_snapshot,
)
from .solver import initial_data, run
from .spectral import Grid3
from .verify import SUITES, UnknownSuiteError, run_suite

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(self.prog + ": error: " + message) from None


def _build_parser() -> _Parser:
    parser = _Parser(prog="lpmhd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run a configured integration")
    p.add_argument("--config", required=True, help="run config INI file")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("analyze", help="per-snapshot diagnostics CSV")
    p.add_argument("--in", dest="indir", required=True, help="snapshot directory")
    p.add_argument("--criteria", help="criteria config INI (default: run settings)")
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("criteria", help="criterion report with CSV companions")
    p.add_argument("--in", dest="indir", required=True, help="snapshot directory")
    p.add_argument("--criteria", help="criteria config INI (default: run settings)")
    p.add_argument("--out", required=True, help="report output path")

    p = sub.add_parser("verify", help="built-in verification suites")
    p.add_argument(
        "--suite", required=True, help=f"one of: {', '.join([*SUITES, 'all'])}"
    )
    return parser


def cmd_simulate(config_path: str, out_dir: str) -> int:
    cfg = RunConfig.from_ini(config_path)
    grid = Grid3(cfg.n)
    u0, b0 = initial_data(cfg.ic_kind, cfg.ic_params, grid)
    os.makedirs(out_dir, exist_ok=True)
    echo = cfg.echo()

    entries = []
    counter = [0]

    def on_snapshot(state):
        name = snapshot_filename(counter[0])
        counter[0] += 1
        path = os.path.join(out_dir, name)
        write_snapshot(path, state, cfg.nu, cfg.mu)
        entries.append({"file": name, "t": state.t, "sha256": sha256_file(path)})

    result = run(u0, b0, cfg.to_solver_config(), on_snapshot=on_snapshot)
    ledger_path = os.path.join(out_dir, "ledger.csv")
    write_ledger_csv(ledger_path, result.ledger, echo)
    manifest = {
        "format": "LPMHD1",
        "version": 1,
        "complete": result.complete,
        "abort_reason": result.abort_reason,
        "config": echo,
        "snapshots": entries,
        "ledger": "ledger.csv",
        "ledger_sha256": sha256_file(ledger_path),
    }
    write_manifest(out_dir, manifest)
    if not result.complete:
        print(f"run aborted: {result.abort_reason}", file=sys.stderr)
        print(f"partial output in {out_dir} (manifest flags incomplete)", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"wrote {len(entries)} snapshots to {out_dir}")
    return EXIT_OK


def _load_trajectory(indir: str, criteria_path: str | None):
    """Manifest, criterion config, and snapshot paths in time order."""
    manifest = read_manifest(indir)
    echo = dict(manifest.get("config", {}))
    if criteria_path:
        crit = load_criteria_ini(criteria_path)
        for key, value in crit.echo().items():
            echo[f"criteria.{key}"] = value
    else:
        crit = criteria_from_echo(echo)
    entries = sorted(manifest.get("snapshots", []), key=lambda e: e["t"])
    if not entries:
        raise SnapshotFormatError(f"{indir}: manifest lists no snapshots")
    paths = [os.path.join(indir, e["file"]) for e in entries]
    return manifest, crit, echo, paths


def _read_states(paths, expect_n: int | None = None):
    """Yield (state, nu, mu) per snapshot, enforcing a single grid size.

    ``expect_n`` pins the size up front (e.g. from the final snapshot),
    so a mismatch is reported as a format error before any record math.
    """
    n_seen = expect_n
    for path in paths:
        state, nu, mu = read_snapshot(path)
        if n_seen is None:
            n_seen = state.u.grid.n
        elif state.u.grid.n != n_seen:
            raise SnapshotFormatError(
                f"{path}: grid size {state.u.grid.n} differs from {n_seen}"
            )
        yield state, nu, mu


def cmd_analyze(indir: str, criteria_path: str | None, out_csv: str) -> int:
    manifest, crit, echo, paths = _load_trajectory(indir, criteria_path)
    final_state, _, _ = read_snapshot(paths[-1])
    part = build_partition(final_state.u.grid)
    records = []
    nu = mu = None
    for state, nu, mu in _read_states(paths, expect_n=final_state.u.grid.n):
        records.append(
            build_record(
                state.u, state.b, state.t, part, crit, nu, mu, final_u=final_state.u
            )
        )
    write_diagnostics_csv(out_csv, records, echo)
    print(f"wrote {len(records)} rows to {out_csv}")
    return EXIT_OK


def cmd_criteria(indir: str, criteria_path: str | None, out_path: str) -> int:
    manifest, crit, echo, paths = _load_trajectory(indir, criteria_path)
    complete = bool(manifest.get("complete", True))
    final_u = read_snapshot(paths[-1])[0].u if complete else None
    part = None
    records = []
    nu = mu = None
    expect_n = final_u.grid.n if final_u is not None else None
    for state, nu, mu in _read_states(paths, expect_n=expect_n):
        if part is None:
            part = build_partition(state.u.grid)
        records.append(
            build_record(state.u, state.b, state.t, part, crit, nu, mu, final_u=final_u)
        )
    report = evaluate_report(
        records, crit, nu, mu, final_available=complete, config_echo=echo
    )
    written = write_report(out_path, report, echo)
    print("wrote " + ", ".join(written))
    return EXIT_OK


def cmd_verify(suite: str) -> int:
    rows = run_suite(suite)
    width = max(len(r.name) for r in rows)
    failures = 0
    for r in rows:
        status = "PASS" if r.ok else "FAIL"
        print(f"{r.name:<{width}}  measured {r.measured:.6e}  tol {r.tol:.6e}  {status}")
        failures += not r.ok
    print(f"{len(rows) - failures}/{len(rows)} checks passed")
    return EXIT_OK if failures == 0 else EXIT_NUMERICAL


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return EXIT_USAGE
        return EXIT_USAGE if exc.code else EXIT_OK

    try:
        if args.command == "simulate":
            return cmd_simulate(args.config, args.out)
        if args.command == "analyze":
            return cmd_analyze(args.indir, args.criteria, args.out)
        if args.command == "criteria":
            return cmd_criteria(args.indir, args.criteria, args.out)
        return cmd_verify(args.suite)
    except (WindowError, ProfileError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (SnapshotFormatError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, UnknownSuiteError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
