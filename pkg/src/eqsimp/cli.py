"""Command-line interface: simplify, bench, saturate, gen."""
from __future__ import annotations

import argparse
import csv
import sys
import time
from dataclasses import replace
from pathlib import Path
from statistics import mean
from typing import Dict, List, Optional, Sequence

from .axioms import load
from .oracle import alphabet, saturate
from .simplifier import PRESETS, SimplifyResult, UnknownPreset, axioms_for, preset, simplify
from .term import ParseError, parse, polish_size, random_expr, to_string

BENCH_HEADER = ["expr_id", "letters", "preset", "input_size", "final_size", "time_ms", "iterations"]
TABLE1_HEADER = ["letters", "row", "size", "count", "percent", "time_ms"]

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_USAGE = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad flags; keep that but make it explicit."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _int_list(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}")


def _str_list(text: str) -> List[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def corpus(seed: int, letters: int, size: int, count: int):
    """The seeded corpus: expression ``k`` is generated from seed ``seed + k``."""
    return [random_expr(seed + k, letters, size) for k in range(count)]


# ------------------------------------------------------------------ simplify


def cmd_simplify(args: argparse.Namespace) -> int:
    if (args.expr is None) == (args.file is None):
        print("error: give exactly one of --expr and --file", file=sys.stderr)
        return EXIT_USAGE
    text = args.expr if args.expr is not None else Path(args.file).read_text()
    try:
        expr = parse(text)
    except ParseError as e:
        print(f"parse error at {e.position}: {e.message}", file=sys.stderr)
        return EXIT_PARSE
    try:
        cfg = preset(args.preset)
    except UnknownPreset:
        print(f"error: unknown preset {args.preset!r}; known: {', '.join(PRESETS)}", file=sys.stderr)
        return EXIT_USAGE
    overrides = {}
    if args.expected_size is not None:
        overrides["expected_size"] = args.expected_size
    if args.max_count is not None:
        overrides["max_count"] = args.max_count
    if args.capacity is not None:
        overrides["capacity"] = args.capacity
    if args.timeout is not None:
        overrides["iteration_timeout"] = args.timeout or None
    if args.seed is not None:
        overrides["seed"] = args.seed
    try:
        cfg = replace(cfg, **overrides)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    axioms = load(args.axioms) if args.axioms else axioms_for(cfg)
    result = simplify(expr, cfg, axioms)
    print(to_string(result.simplified))
    print(f"size={result.final_size}")
    if args.stats:
        Path(args.stats).write_text(result.stats_csv())
    return EXIT_OK


# ------------------------------------------------------------------ bench


def table1_rows(letters: int, runs: Sequence[Dict]) -> List[List]:
    """Cumulative distribution of final sizes, then an average row.

    A ``cumulative`` row at size ``s`` counts the runs whose final size is at
    most ``s`` and reports the largest time among them.
    """
    rows: List[List] = []
    if not runs:
        return rows
    n = len(runs)
    for s in sorted({r["final_size"] for r in runs}):
        within = [r for r in runs if r["final_size"] <= s]
        pct = round(100 * len(within) / n, 2)
        rows.append([letters, "cumulative", s, len(within), pct, max(r["time_ms"] for r in within)])
    avg_size = round(mean(r["final_size"] for r in runs), 2)
    avg_time = round(mean(r["time_ms"] for r in runs))
    rows.append([letters, "average", avg_size, n, 100.0, avg_time])
    return rows


def cmd_bench(args: argparse.Namespace) -> int:
    presets = args.presets
    for name in presets:
        if name.replace("/", "") not in PRESETS:
            print(f"error: unknown preset {name!r}", file=sys.stderr)
            return EXIT_USAGE
    if args.count < 0 or args.size < 1 or any(not 1 <= n <= 16 for n in args.letters):
        print("error: need --count >= 0, --size >= 1 and letters in 1..16", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out)
    stats_dir = out / "stats"
    stats_dir.mkdir(parents=True, exist_ok=True)
    runs: List[Dict] = []
    for letters in args.letters:
        for k, expr in enumerate(corpus(args.seed, letters, args.size, args.count)):
            for name in presets:
                cfg = preset(name)
                if args.timeout is not None:
                    cfg = replace(cfg, iteration_timeout=args.timeout or None)
                started = time.perf_counter()
                result: SimplifyResult = simplify(expr, cfg)
                elapsed = int((time.perf_counter() - started) * 1000)
                runs.append(
                    dict(
                        expr_id=k, letters=letters, preset=name,
                        input_size=polish_size(expr), final_size=result.final_size,
                        time_ms=elapsed, iterations=len(result.iterations),
                    )
                )
                (stats_dir / f"{name.replace('/', '')}_L{letters}_{k}.csv").write_text(result.stats_csv())
                if args.verbose:
                    print(f"L{letters} #{k} {name}: {result.final_size} in {elapsed} ms", file=sys.stderr)
    with open(out / "bench.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(BENCH_HEADER)
        for r in runs:
            w.writerow([r[c] for c in BENCH_HEADER])
    with open(out / "table1.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(TABLE1_HEADER)
        for letters in args.letters:
            cohort = [r for r in runs if r["letters"] == letters and r["preset"] == presets[0]]
            w.writerows(table1_rows(letters, cohort))
    with open(out / "table3.csv", "w", newline="") as f:
        w = csv.writer(f)
        header = ["preset"]
        for letters in args.letters:
            header += [f"size_L{letters}", f"time_ms_L{letters}"]
        w.writerow(header)
        for name in presets:
            row: List = [name]
            for letters in args.letters:
                cell = [r for r in runs if r["letters"] == letters and r["preset"] == name]
                if cell:
                    row += [round(mean(r["final_size"] for r in cell), 2),
                            round(mean(r["time_ms"] for r in cell))]
                else:
                    row += ["", ""]
            w.writerow(row)
    if runs:
        first = [r for r in runs if r["preset"] == presets[0]]
        print(f"runs={len(runs)} average_final_size={mean(r['final_size'] for r in first):.2f}")
    else:
        print("runs=0")
    return EXIT_OK


# ------------------------------------------------------------------ saturate / gen


def cmd_saturate(args: argparse.Namespace) -> int:
    if not 0 <= args.letters <= 2:
        print("error: --letters must be 0, 1 or 2", file=sys.stderr)
        return EXIT_USAGE
    axioms = load(args.axioms) if args.axioms else axioms_for(preset("default"))
    report = saturate(alphabet(args.letters), axioms, args.limit)
    flag = "true" if report.reached_fixpoint else "false"
    print(f"classes={report.classes} fixpoint={flag}")
    print(f"structures={report.structures} rounds={report.rounds}")
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    if not 1 <= args.letters <= 16:
        print("error: --letters must be in 1..16", file=sys.stderr)
        return EXIT_USAGE
    if args.size < 1 or args.count < 0:
        print("error: need --size >= 1 and --count >= 0", file=sys.stderr)
        return EXIT_USAGE
    lines = [to_string(e) for e in corpus(args.seed, args.letters, args.size, args.count)]
    text = "".join(line + "\n" for line in lines)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ------------------------------------------------------------------ entry


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="eqsimp", description="Simplify boolean expressions modulo axioms.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simplify", help="simplify one expression")
    s.add_argument("--expr")
    s.add_argument("--file")
    s.add_argument("--preset", default="default")
    s.add_argument("--axioms", help="theory file overriding the preset's axiom set")
    s.add_argument("--expected-size", type=int)
    s.add_argument("--max-count", type=int)
    s.add_argument("--capacity", type=int)
    s.add_argument("--timeout", type=float, help="seconds per iteration; 0 disables")
    s.add_argument("--seed", type=int)
    s.add_argument("--stats", help="write per-iteration CSV here")
    s.set_defaults(func=cmd_simplify)

    b = sub.add_parser("bench", help="run presets over a seeded random corpus")
    b.add_argument("--letters", type=_int_list, default=[3])
    b.add_argument("--count", type=int, default=20)
    b.add_argument("--size", type=int, default=800)
    b.add_argument("--presets", type=_str_list, default=["default"])
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", default="bench_out")
    b.add_argument("--timeout", type=float, help="seconds per iteration; 0 disables")
    b.add_argument("-v", "--verbose", action="store_true")
    b.set_defaults(func=cmd_bench)

    t = sub.add_parser("saturate", help="bottom-up saturation over 0, 1 and a few letters")
    t.add_argument("--letters", type=int, default=1)
    t.add_argument("--limit", type=int, default=200_000)
    t.add_argument("--axioms")
    t.set_defaults(func=cmd_saturate)

    g = sub.add_parser("gen", help="print seeded random expressions")
    g.add_argument("--letters", type=int, default=3)
    g.add_argument("--size", type=int, default=800)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 100_000))
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
