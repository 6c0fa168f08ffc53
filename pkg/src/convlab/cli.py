"""Command-line front end: ``verify``, ``sweep``, ``search`` and ``bench``.

Exit codes: 0 when no check fails, 2 when any check fails, 1 for usage or
config errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from . import corpus as cp
from .convolution import ConvolutionError, convolve, fft_supported
from .extremal import CSV_COLUMNS, SContext, check_S_properties, envelope, rows_to_csv
from .groups import GroupModelError, make_cyclic, make_product, make_real_grid, model_from_spec, named_group
from .inequalities import FAIL, CheckError
from .stepfn import StepFn, StepFnError
from .suites import SUITES, Config, ConfigError, RunOptions, load_config, load_doc, run_suite, substitute, summarize

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
ROW_COLUMNS = ["suite", "statement", "case", "instance_seed", "lhs", "rhs", "margin", "tol", "hypothesis", "verdict"]
BENCH_MODELS = ("cyclic", "circle", "line", "circle-s3", "s3")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    vals = [v for v in text.replace(",", " ").split() if v]
    try:
        return [float(v) for v in vals]
    except ValueError as exc:
        raise UsageError(f"not a list of numbers: {text!r}") from exc


def _ints(text: str) -> list[int]:
    return [int(v) for v in _floats(text)]


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_rows(path: str, reports) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ROW_COLUMNS)
        for r in reports:
            d = r.to_json()
            w.writerow([r.diagnostics.get("suite", ""), r.statement, r.diagnostics.get("case", ""), d["instance_seed"],
                        repr(d["lhs"]), repr(d["rhs"]), repr(d["margin"]), repr(d["tol"]), r.hypothesis, r.verdict])


def _options(args) -> RunOptions:
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    if not args.tolerance_scale > 0:
        raise UsageError("--tolerance-scale must be positive")
    return RunOptions(seed=args.seed, threads=args.threads, scale=args.tolerance_scale, exact=args.exact)


def _report_doc(command: str, args, reports, extra=None) -> dict:
    doc = {
        "command": command,
        "config": args.config or "<bundled default>",
        "seed": args.seed,
        "tolerance_scale": args.tolerance_scale,
        "exact": bool(args.exact),
        "summary": summarize(reports),
        "reports": [r.to_json() for r in reports],
    }
    if extra:
        doc.update(extra)
    return doc


# ---------------------------------------------------------------- verify


def cmd_verify(args) -> int:
    if args.suite != "all" and args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES + ('all',))}")
    cfg = load_config(args.config)
    reports = run_suite(cfg, args.suite, _options(args))
    os.makedirs(args.out, exist_ok=True)
    _write_json(os.path.join(args.out, "report.json"), _report_doc("verify", args, reports, {"suite": args.suite}))
    _write_rows(os.path.join(args.out, "rows.csv"), reports)
    counts = summarize(reports)
    print(f"verify {args.suite}: {counts['PASS']} PASS, {counts['FAIL']} FAIL, {counts['SKIPPED']} SKIPPED -> {args.out}")
    return EXIT_FAIL if counts[FAIL] else EXIT_OK


# ---------------------------------------------------------------- sweep


def cmd_sweep(args) -> int:
    values = _floats(args.values) if args.values else []
    if not values:
        raise UsageError("--values needs at least one value")
    if args.param not in ("h", "n", "I"):
        raise UsageError("--param must be h, n or I")
    if args.suite == "all" or args.suite not in SUITES:
        raise UsageError("sweep needs a single named suite")
    base = load_doc(args.config)
    opts = _options(args)
    rows, all_reports = [], []
    for v in values:
        val = int(v) if args.param == "n" else v
        cfg = Config.from_doc(substitute(base, args.param, val))
        reps = [r for r in run_suite(cfg, args.suite, opts) if r.verdict != "SKIPPED"]
        all_reports.extend(reps)
        counts = summarize(reps)
        gaps = [r.diagnostics["max_gap"] for r in reps if "max_gap" in r.diagnostics]
        rows.append({
            "value": val,
            "worst_margin": min((float(r.margin) for r in reps), default=float("nan")),
            "max_abs_margin": max((abs(float(r.margin)) for r in reps), default=float("nan")),
            "max_gap": max(gaps) if gaps else "",
            "pass": counts["PASS"],
            "fail": counts["FAIL"],
        })
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"sweep_{args.suite}_{args.param}.csv")
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    _write_json(os.path.join(args.out, "report.json"),
                _report_doc("sweep", args, all_reports, {"suite": args.suite, "param": args.param, "values": values, "rows": rows}))
    for row in rows:
        print(f"{args.param}={row['value']}: worst margin {row['worst_margin']:.6g}, max |margin| {row['max_abs_margin']:.6g}")
    return EXIT_FAIL if any(r["fail"] for r in rows) else EXIT_OK


# ---------------------------------------------------------------- search


def cmd_search(args) -> int:
    cfg = load_config(args.config)
    sec = cfg.doc.get("search")
    if sec is None:
        raise ConfigError("config has no 'search' section")
    model = model_from_spec(sec["model"])
    phi1 = cp.stepfn_from_spec(model, sec["phi1"])
    I_grid = _floats(args.I_grid) if args.I_grid else [float(x) for x in sec["I_grid"]]
    budget = args.budget if args.budget is not None else int(sec.get("budget", 2000))
    if budget < 0:
        raise UsageError("--budget must be nonnegative")
    ts = _floats(args.t) if args.t else [float(x) for x in sec.get("t", [0.0])]
    opts = _options(args)
    os.makedirs(args.out, exist_ok=True)
    reports = []
    for t in ts:
        ctx = SContext(phi1, t)
        results = []
        reps = check_S_properties(ctx, I_grid, budget, args.seed, scale=opts.scale, threads=opts.threads, results=results)
        reports.extend(reps)
        rows = [{"I": r.I, "S_hat": r.value, "bound": envelope(t, r.I), "gap": envelope(t, r.I) - r.value,
                 "budget": budget, "seed": args.seed, "flag": "low-budget" if r.low_budget else ""} for r in results]
        with open(os.path.join(args.out, f"gap_curve_t{t:g}.csv"), "w") as fh:
            fh.write(rows_to_csv(rows, CSV_COLUMNS + ["flag"]))
        if budget == 0:
            print(f"t={t:g}: budget 0, estimates come from the starting candidates only")
    _write_json(os.path.join(args.out, "report.json"), _report_doc("search", args, reports, {"budget": budget, "I_grid": I_grid, "t": ts}))
    counts = summarize(reports)
    print(f"search: {counts['PASS']} PASS, {counts['FAIL']} FAIL, {counts['SKIPPED']} SKIPPED -> {args.out}")
    return EXIT_FAIL if counts[FAIL] else EXIT_OK


# ---------------------------------------------------------------- bench


def bench_model(name: str, size: int):
    """Benchmark model of roughly ``size`` cells."""
    if name == "cyclic":
        return make_cyclic(size, float(size), as_circle=False)
    if name == "circle":
        return make_cyclic(size, 1.0)
    if name == "line":
        return make_real_grid(1.0 / size, (size // 2) / size)
    if name == "circle-s3":
        return make_product(make_cyclic(max(1, size // 6), 1.0), named_group("S3"))
    if name == "s3":
        return named_group("S3")
    raise UsageError(f"unknown bench model {name!r}; choose from {', '.join(BENCH_MODELS)}")


def _bench_pair(model, seed: int):
    rng = np.random.default_rng(seed)
    a = (rng.random(model.size) < 0.5).astype(float)
    b = (rng.random(model.size) < 0.5).astype(float)
    if model.kind == "RealLineGrid":
        mask = np.abs(np.arange(model.size) - model.N) <= model.N // 2
        a, b = a * mask, b * mask
    return StepFn(model, a), StepFn(model, b)


def _timed(fn, repeats: int = 3):
    best, out = float("inf"), None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cmd_bench(args) -> int:
    names = [s for s in args.models.replace(",", " ").split() if s]
    sizes = _ints(args.sizes)
    if not names or not sizes:
        raise UsageError("--models and --sizes must be nonempty")
    for n in names:
        if n not in BENCH_MODELS:
            raise UsageError(f"unknown bench model {n!r}; choose from {', '.join(BENCH_MODELS)}")
    rows = []
    for name in names:
        for size in ([6] if name == "s3" else sizes):
            model = bench_model(name, size)
            a, b = _bench_pair(model, args.seed)
            kernels = ["direct"] + (["fft"] if fft_supported(model) else [])
            for k in kernels:
                sec, out = _timed(lambda k=k: convolve(a, b, k))
                rows.append({"model": name, "n": model.size, "kernel": k, "seconds": f"{sec:.6f}", "checksum": format(float(out.values.sum()), ".10g")})
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "bench.csv")
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["model", "n", "kernel", "seconds", "checksum"], lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    for r in rows:
        print(f"{r['model']:>10} n={r['n']:>6} {r['kernel']:>6} {r['seconds']} s  checksum {r['checksum']}")
    return EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="config JSON (default: bundled corpus)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default="out")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--tolerance-scale", type=float, default=1.0)
    common.add_argument("--exact", action="store_true", help="exact rational arithmetic on discrete models")

    p = _Parser(prog="convlab", description="Numerical checks of convolution-convexity inequalities.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("config_pos", nargs="?", metavar="CONFIG")
    v.add_argument("--suite", default="all")

    s = sub.add_parser("sweep", parents=[common], help="re-run a suite across a parameter")
    s.add_argument("config_pos", nargs="?", metavar="CONFIG")
    s.add_argument("--suite", default="main")
    s.add_argument("--param", required=True)
    s.add_argument("--values", default="")

    r = sub.add_parser("search", parents=[common], help="extremal search and envelope check")
    r.add_argument("config_pos", nargs="?", metavar="CONFIG")
    r.add_argument("--I-grid", dest="I_grid", default=None)
    r.add_argument("--t", default=None, help="thresholds (default: config)")
    r.add_argument("--budget", type=int, default=None)

    b = sub.add_parser("bench", parents=[common], help="direct vs FFT kernel timings")
    b.add_argument("--models", default="cyclic")
    b.add_argument("--sizes", default="256 512 1024 2048 4096 8192 16384")
    return p


COMMANDS = {"verify": cmd_verify, "sweep": cmd_sweep, "search": cmd_search, "bench": cmd_bench}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "config_pos", None):
        args.config = args.config_pos
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError, GroupModelError, StepFnError, CheckError, ConvolutionError, OSError) as exc:
        print(f"convlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
