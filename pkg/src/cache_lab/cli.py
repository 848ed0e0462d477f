"""Command-line front end: verify, simulate, sweep, bounds."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import rates
from .core import ConfigError, SystemConfig, pattern_library, random_library
from .decode import decode_all, verify_all_demands
from .delivery import DemandVector, deliver, expected_rate
from .placement import place_caches
from .transcript_io import write_transcript

SWEEP_COLUMNS = ["R_c", "R_b", "R_mn", "R_lb_cutset", "R_lb_sengupta", "gap_ratio"]
M_TOKENS = ("1/K", "(N-1)/K", "t*N/K")


def worker_count() -> int:
    env = os.environ.get("CACHE_LAB_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _library(config: SystemConfig, seed: int | None):
    return pattern_library(config) if seed is None else random_library(config, seed)


def _dump_json(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    print(text)


def cmd_verify(args) -> int:
    config = SystemConfig.minimal(args.files, args.users, args.f_multiplier)
    summary = verify_all_demands(
        config,
        _library(config, args.seed),
        budget=args.budget,
        pi_order=args.pi_order,
        workers=worker_count(),
        seed=args.seed or 0,
    )
    _dump_json(summary.to_dict(), args.out)
    if not summary.all_ok:
        first = summary.failures[0]
        print(f"FAIL: demands {','.join(map(str, first.demands))}", file=sys.stderr)
        return 1
    return 0


def parse_demands(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"demands must be comma-separated integers: {text!r}")


def uncoded_comparison(n: int, k: int) -> dict | None:
    """For N >= K, report the uncoded-placement rate at M=(N-1)/K against K/2.

    Reported only; nothing is asserted about which is smaller.
    """
    if n < k:
        return None
    mn = rates.rate_mn(n, k, Fraction(n - 1, k))
    half = Fraction(k, 2)
    return {"rate_mn": str(mn), "half_k": str(half), "mn_lower": mn < half}


def cmd_simulate(args) -> int:
    config = SystemConfig.minimal(args.files, args.users, args.f_multiplier)
    d = DemandVector(args.demands)
    d.check(config)
    library = _library(config, args.seed)
    caches = place_caches(library, config)
    t = deliver(library, caches, d, args.pi_order)
    report = decode_all(library, caches, t)
    if args.out:
        with open(args.out, "w") as fh:
            write_transcript(t, fh)
    if args.report:
        Path(args.report).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    r1, r2, r3 = t.part_rates
    expected = expected_rate(t.profile.n_prime, config.n_users)
    baseline = uncoded_comparison(config.n_files, config.n_users)
    if args.format == "json":
        print(json.dumps(
            {
                "uncoded_comparison": baseline,
                "demands": list(t.demands),
                "n_prime": t.profile.n_prime,
                "fallback": t.fallback,
                "file_bits": config.file_bits,
                "part_bits": list(t.part_bits),
                "part_rates": [str(r1), str(r2), str(r3)],
                "total_rate": str(t.rate),
                "decode": report.to_dict(),
            },
            indent=2, sort_keys=True,
        ))
    else:
        print(f"N'={t.profile.n_prime}{' (single-demand fallback)' if t.fallback else ''} F={config.file_bits}")
        print(f"part1 {r1}\npart2 {r2}\npart3 {r3}\ntotal {t.rate}")
        print(f"decoded {'all' if report.all_ok else 'NOT all'} users")
        if baseline is not None:
            print(f"note: uncoded placement at same M gives {baseline['rate_mn']}"
                  f" ({'lower' if baseline['mn_lower'] else 'not lower'} than K/2)")
    return 0 if report.all_ok and t.rate == expected else 1


def parse_range(text: str) -> list[int]:
    """'5', '3,4,7' or '101:1000' (inclusive)."""
    out: list[int] = []
    for chunk in text.split(","):
        if ":" in chunk:
            a, b = chunk.split(":")
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(chunk))
    if not out:
        raise argparse.ArgumentTypeError("empty range")
    return out


def parse_m_grid(text: str) -> list[str]:
    """'auto', 'auto:<fill>' or comma list of rationals and 1/K, (N-1)/K, t*N/K."""
    items = [s.strip() for s in text.split(",") if s.strip()]
    for item in items:
        if item.startswith("auto") or item in M_TOKENS:
            continue
        try:
            Fraction(item)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad M value {item!r}")
    return items


def _expand_grid(n: int, k: int, items: Sequence[str]) -> list[Fraction]:
    pts: set[Fraction] = set()
    for item in items:
        if item.startswith("auto"):
            fill = int(item.split(":")[1]) if ":" in item else 20
            pts.update(rates.m_grid(n, k, fill, upper="tradeoff"))
        elif item == "1/K":
            pts.add(Fraction(1, k))
        elif item == "(N-1)/K":
            pts.add(Fraction(n - 1, k))
        elif item == "t*N/K":
            pts.add(Fraction(rates.t_star(n, k) * n, k))
        else:
            pts.add(Fraction(item))
    return sorted(pts)


def sweep_row(n: int, k: int, m: Fraction) -> dict[str, Fraction | None] | None:
    """One grid point, or None when (N, K, M) is outside the trade-off range."""
    if k <= n or not Fraction(1, k) <= m <= Fraction(rates.t_star(n, k) * n, k):
        return None
    row: dict[str, Fraction | None] = {
        "R_c": rates.rate_tradeoff(n, k, m),
        "R_b": rates.rate_mnc(n, k, m),
        "R_mn": rates.rate_mn(n, k, m),
        "R_lb_cutset": rates.lower_bound_cutset(n, k, m),
        "R_lb_sengupta": rates.lower_bound_sengupta(n, k, m),
        "gap_ratio": None,
    }
    lb = max(row["R_lb_cutset"], row["R_lb_sengupta"])
    if n >= 3 and m <= Fraction(n - 1, k):
        row["gap_ratio"] = row["R_c"] / lb
    if not lb <= row["R_c"] <= row["R_b"]:
        raise AssertionError(f"sandwich violated at N={n}, K={k}, M={m}: {row}")
    return row


def _rows_for(task):
    n, k, items = task
    out = []
    for m in _expand_grid(n, k, items):
        out.append((n, k, m, sweep_row(n, k, m)))
    return out


def run_sweep(files: Sequence[int], users: Sequence[int], grid: Sequence[str], workers: int = 1):
    tasks = sorted({(n, k) for n in files for k in users})
    jobs = [(n, k, tuple(grid)) for n, k in tasks]
    if workers > 1 and len(jobs) > 8:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_rows_for, jobs, chunksize=max(1, len(jobs) // (workers * 4))))
    else:
        chunks = [_rows_for(j) for j in jobs]
    rows, skipped = [], []
    for chunk in chunks:
        for n, k, m, row in chunk:
            (skipped if row is None else rows).append((n, k, m, row))
    return rows, skipped


def format_sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "K", "M"] + SWEEP_COLUMNS + ["M_exact"] + [c + "_exact" for c in SWEEP_COLUMNS])
    for n, k, m, row in rows:
        vals = [row[c] for c in SWEEP_COLUMNS]
        w.writerow(
            [n, k, rates.render(m)]
            + ["" if v is None else rates.render(v) for v in vals]
            + [str(m)]
            + ["" if v is None else str(v) for v in vals]
        )
    return buf.getvalue()


def format_sweep_json(rows) -> str:
    out = []
    for n, k, m, row in rows:
        rec = {"N": n, "K": k, "M": str(m)}
        rec.update({c: None if v is None else str(v) for c, v in row.items()})
        out.append(rec)
    return json.dumps(out, indent=2, sort_keys=True) + "\n"


def cmd_sweep(args) -> int:
    try:
        rows, skipped = run_sweep(args.files, args.users, args.m_grid, worker_count())
    except AssertionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for n, k, m, _ in skipped:
        print(f"warning: skipping N={n} K={k} M={m} (outside 1/K <= M <= t*N/K with K > N)", file=sys.stderr)
    text = format_sweep_csv(rows) if args.format == "csv" else format_sweep_json(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def bounds_report(n: int, k: int) -> dict:
    alpha_ok, bad_t = rates.check_alpha_lower(n, k)
    gap = rates.check_gap_functions(n, k)
    grid = rates.m_grid(n, k, 100, upper="gap")
    worst = rates.max_gap(n, k, grid)
    return {
        "n_files": n,
        "n_users": k,
        "alpha_lower_ok": alpha_ok,
        "alpha_violation_t": bad_t,
        "h_ok": gap.h_ok,
        "f_monotone_ok": gap.f_monotone_ok,
        "p_ok": gap.p_ok,
        "p_value": None if gap.p_value is None else str(gap.p_value),
        "endpoint_ratio_bound": str(gap.endpoint_bound),
        "max_gap_ratio": str(worst),
        "max_gap_ratio_decimal": rates.render(worst),
        "grid_points": len(grid),
    }


def cmd_bounds(args) -> int:
    rep = bounds_report(args.files, args.users)
    _dump_json(rep, args.out)
    ok = all(rep[key] for key in ("alpha_lower_ok", "h_ok", "f_monotone_ok", "p_ok"))
    return 0 if ok and Fraction(rep["max_gap_ratio"]) <= 2 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cache-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, ranges=False):
        kind = parse_range if ranges else int
        p.add_argument("--files", type=kind, required=True, help="N")
        p.add_argument("--users", type=kind, required=True, help="K")
        p.add_argument("--out", default=None)

    def sim_flags(p):
        p.add_argument("--f-multiplier", type=int, default=1, help="F = multiplier x minimal F")
        p.add_argument("--seed", type=int, default=None, help="random library (default: marker pattern)")
        p.add_argument("--pi-order", choices=["ascending", "descending"], default="ascending")

    p = sub.add_parser("verify", help="place/deliver/decode every demand vector")
    common(p)
    sim_flags(p)
    p.add_argument("--budget", type=int, default=60_000)
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="run one demand vector")
    common(p)
    sim_flags(p)
    p.add_argument("--demands", type=parse_demands, required=True)
    p.add_argument("--report", default=None, help="write the per-user decode report (JSON)")
    p.add_argument("--format", choices=["csv", "json"], default="csv",
                   help="stdout style: csv prints plain lines, json a single object")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="tabulate rates and bounds over a grid")
    common(p, ranges=True)
    p.add_argument("--m-grid", type=parse_m_grid, default=["auto"])
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bounds", help="inequality and gap checks for one (N, K)")
    common(p)
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "bounds" and not args.users > args.files >= 3:
        parser.error("bounds needs --users > --files >= 3")
    if args.command in ("verify", "simulate") and args.f_multiplier < 1:
        parser.error("--f-multiplier must be positive")
    try:
        return args.func(args)
    except ConfigError as exc:
        parser.error(str(exc))
    return 2


if __name__ == "__main__":
    sys.exit(main())
