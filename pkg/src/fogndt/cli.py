"""Command-line front end: bound evaluation, sweeps, simulation, gap scans.

Output is deterministic: CSV uses '.' decimals, ',' separators, and LF line
endings; floats print with repr (shortest round-trip form).  Exit codes:
0 ok, 2 configuration error, 3 decode failure, 4 gap violation.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import bounds as bounds_mod
from .model import ConfigError, DemandVector, NetworkConfig, config_from_dict, validate_config
from .oracle import DecodeFailure, execute_schedule, verify_decodability
from .placement import sample_placement
from .scheduler import build_schedule

_DEFAULT_GAP_MU = (0.1, 0.3, 0.5, 0.7, 0.9)
_DEFAULT_GAP_R = (0.1, 1.0, 10.0)


def _add_config_flags(parser):
    parser.add_argument("--config", type=Path, help="JSON file with configuration values")
    parser.add_argument("--nt", type=int, help="number of edge nodes")
    parser.add_argument("--nr", type=int, help="number of users")
    parser.add_argument("--nfiles", type=int, help="library size (default: number of users)")
    parser.add_argument("--mut", type=float, help="edge-node cache fraction")
    parser.add_argument("--mur", type=float, help="user cache fraction")
    parser.add_argument("--r", type=float, help="fronthaul power scaling")


def _config_from_args(args) -> NetworkConfig:
    values = {}
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            values.update(json.load(fh))
    overrides = {
        "num_ens": args.nt,
        "num_ues": args.nr,
        "num_files": args.nfiles,
        "mu_t": args.mut,
        "mu_r": args.mur,
        "fronthaul_r": args.r,
    }
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    if values.get("num_files") is None and values.get("num_ues") is not None:
        values["num_files"] = values["num_ues"]
    missing = [k for k in ("num_ens", "num_ues", "mu_t", "mu_r", "fronthaul_r") if values.get(k) is None]
    if missing:
        raise ConfigError(missing[0], f"missing configuration values: {', '.join(missing)}")
    return validate_config(config_from_dict(values))


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _parse_values(spec: str) -> list[float]:
    """Explicit 'a,b,c' list or 'lin:start:stop:count' / 'geom:start:stop:count' grid."""
    if spec.startswith(("lin:", "geom:")):
        kind, start, stop, count = spec.split(":")
        start, stop, count = float(start), float(stop), int(count)
        if count < 1:
            raise ValueError("grid count must be at least 1")
        if count == 1:
            return [start]
        if kind == "lin":
            step = (stop - start) / (count - 1)
            return [start + k * step for k in range(count)]
        if start <= 0 or stop <= 0:
            raise ValueError("geometric grids need positive endpoints")
        ratio = (stop / start) ** (1.0 / (count - 1))
        return [start * ratio ** k for k in range(count)]
    return [float(tok) for tok in spec.split(",") if tok]


def _cmd_bounds(args) -> int:
    cfg = _config_from_args(args)
    report = bounds_mod.bounds_report(cfg)
    if args.format == "csv":
        _emit(bounds_mod.CSV_HEADER + "\n" + report.to_csv_row() + "\n", args.out)
    else:
        _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.out)
    return 0


_AXIS_FIELD = {"r": "fronthaul_r", "mu_t": "mu_t", "mu_r": "mu_r"}


def _cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    values = _parse_values(args.values)
    if not values:
        raise ConfigError("values", "sweep needs at least one value")
    lines = [bounds_mod.CSV_HEADER]
    for value in values:
        point = validate_config(replace(cfg, **{_AXIS_FIELD[args.axis]: value}))
        lines.append(bounds_mod.bounds_report(point).to_csv_row())
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    if args.demand is not None:
        demand = DemandVector(tuple(int(tok) for tok in args.demand.split(",") if tok))
        demand.validated(cfg)
    else:
        demand = DemandVector.distinct(cfg)
    placement = sample_placement(cfg, args.file_bits, args.seed)
    schedule = build_schedule(cfg, demand)
    try:
        report = execute_schedule(placement, demand, schedule)
    except DecodeFailure as exc:
        _emit(json.dumps({"error": str(exc)}, indent=2) + "\n", args.out)
        return 3
    failures = verify_decodability(report)
    doc = {
        "report": report.to_dict(),
        "analytic": {
            "tau_f": schedule.breakdown.total_f,
            "tau_a": schedule.breakdown.total_a,
            "tau": schedule.breakdown.total,
        },
        "delta": {
            "tau_f": report.empirical_tau_f - schedule.breakdown.total_f,
            "tau_a": report.empirical_tau_a - schedule.breakdown.total_a,
            "tau": (report.empirical_tau_f + report.empirical_tau_a) - schedule.breakdown.total,
        },
        "failed_ues": failures,
    }
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return 3 if failures else 0


def _cmd_schedule_export(args) -> int:
    cfg = _config_from_args(args)
    if args.demand is not None:
        demand = DemandVector(tuple(int(tok) for tok in args.demand.split(",") if tok))
        demand.validated(cfg)
    else:
        demand = DemandVector.distinct(cfg)
    schedule = build_schedule(cfg, demand)
    _emit(json.dumps(schedule.to_json(), indent=2) + "\n", args.out)
    return 0


def _parse_range(spec: str) -> range:
    lo, _, hi = spec.partition(":")
    return range(int(lo), int(hi or lo) + 1)


def _cmd_gap_scan(args) -> int:
    mu_values = [float(t) for t in args.mu_values.split(",") if t] if args.mu_values else list(_DEFAULT_GAP_MU)
    r_values = [float(t) for t in args.r_values.split(",") if t] if args.r_values else list(_DEFAULT_GAP_R)
    rows = []
    worst = (-math.inf, None)
    violated = False
    for nt in _parse_range(args.nt_range):
        for nr in _parse_range(args.nr_range):
            for mu_t in mu_values:
                for mu_r in mu_values:
                    for r in r_values:
                        cfg = validate_config(NetworkConfig(nt, nr, nr, mu_t, mu_r, r))
                        report = bounds_mod.bounds_report(cfg)
                        degenerate = report.tau_lower == 0.0
                        if not degenerate:
                            if report.gap > worst[0]:
                                worst = (report.gap, cfg)
                            if report.gap > 12.0:
                                violated = True
                        rows.append((report, degenerate))
    rows.sort(key=lambda item: (-item[0].gap, item[0].to_csv_row()))
    lines = [bounds_mod.CSV_HEADER + ",degenerate"]
    for report, degenerate in rows:
        lines.append(report.to_csv_row() + "," + ("1" if degenerate else "0"))
    _emit("\n".join(lines) + "\n", args.out)
    if worst[1] is not None:
        c = worst[1]
        print(
            f"max gap {worst[0]!r} at n_t={c.num_ens} n_r={c.num_ues} "
            f"mu_t={c.mu_t!r} mu_r={c.mu_r!r} r={c.fronthaul_r!r}",
            file=sys.stderr,
        )
    return 4 if violated else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fogndt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_bounds = sub.add_parser("bounds", help="evaluate both delivery-time bounds")
    _add_config_flags(p_bounds)
    p_bounds.add_argument("--format", choices=("json", "csv"), default="json")
    p_bounds.add_argument("--out", type=Path)

    p_sweep = sub.add_parser("sweep", help="bounds along one parameter axis, CSV per point")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--axis", choices=tuple(_AXIS_FIELD), required=True)
    p_sweep.add_argument(
        "--values",
        required=True,
        help="comma list, or lin:start:stop:count / geom:start:stop:count",
    )
    p_sweep.add_argument("--out", type=Path)

    p_sim = sub.add_parser("simulate", help="finite-file delivery with decode verification")
    _add_config_flags(p_sim)
    p_sim.add_argument("--file-bits", type=int, required=True)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--demand", help="comma list of file ids, one per user")
    p_sim.add_argument("--out", type=Path)

    p_exp = sub.add_parser("schedule-export", help="emit the full delivery schedule as JSON")
    _add_config_flags(p_exp)
    p_exp.add_argument("--demand", help="comma list of file ids, one per user")
    p_exp.add_argument("--out", type=Path)

    p_gap = sub.add_parser("gap-scan", help="scan a config grid for the worst bound gap")
    p_gap.add_argument("--nt-range", default="2:6", help="lo:hi inclusive")
    p_gap.add_argument("--nr-range", default="2:6", help="lo:hi inclusive")
    p_gap.add_argument("--mu-values", help="comma list for both cache fractions")
    p_gap.add_argument("--r-values", help="comma list of fronthaul scalings")
    p_gap.add_argument("--out", type=Path)
    return parser


_HANDLERS = {
    "bounds": _cmd_bounds,
    "sweep": _cmd_sweep,
    "simulate": _cmd_simulate,
    "schedule-export": _cmd_schedule_export,
    "gap-scan": _cmd_gap_scan,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return _HANDLERS[args.command](args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    raise SystemExit(main())
