"""Suite runners shared by the CLI and the experiment scripts.

A suite turns one section of a config document into a list of
:class:`~convlab.inequalities.CheckReport`. Instances are independent thunks,
so they can be evaluated on a thread pool without changing the output order.
"""

from __future__ import annotations

import copy
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import convex as cx
from . import corpus as cp
from .convolution import coset_decompose_convolution, convolve
from .groups import coset_structure, make_real_grid, model_from_spec
from .inequalities import (
    FAIL, PASS, SKIPPED, VACUOUS, CheckReport, _report, build_split, check_fubini, check_ft_bound, check_kemperman,
    check_main, check_rearrangement_domination, check_split_superadditivity, grid_set, probe_connected_violation,
)

SUITES = ("fubini", "ft", "main", "kemperman", "probe", "split", "rearrange", "approx", "decomp")


class ConfigError(ValueError):
    pass


@dataclass
class RunOptions:
    seed: int = 0
    threads: int = 1
    scale: float = 1.0
    exact: bool = False
    C: float = 4.0


@dataclass
class Config:
    """Parsed config document: named models, named functions and suite sections."""

    doc: dict
    models: dict = field(default_factory=dict)
    functions: dict = field(default_factory=dict)

    @classmethod
    def from_doc(cls, doc: dict) -> "Config":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        for key in ("models", "suites"):
            if key not in doc:
                raise ConfigError(f"config is missing '{key}'")
        try:
            models = {k: model_from_spec(v) for k, v in doc["models"].items()}
            functions = {k: cx.from_spec(v) for k, v in doc.get("functions", {}).items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return cls(doc, models, functions)

    @property
    def suites(self) -> dict:
        return self.doc["suites"]

    def model(self, name):
        if isinstance(name, dict):
            return model_from_spec(name)
        if name not in self.models:
            raise ConfigError(f"unknown model {name!r}")
        return self.models[name]

    def function(self, name) -> cx.ConvexFn:
        if isinstance(name, dict):
            return cx.from_spec(name)
        if name in self.functions:
            return self.functions[name]
        if name in cx.BUILTINS:
            return cx.BUILTINS[name]()
        raise ConfigError(f"unknown function {name!r}")


def load_doc(path=None) -> dict:
    """Raw config document (placeholders unresolved); the bundled default when ``path`` is None."""
    if path is None:
        text = resources.files("convlab").joinpath("data/default.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return doc


def load_config(path=None) -> Config:
    return Config.from_doc(load_doc(path))


def substitute(doc, param: str, value):
    """Replace ``"$param"`` placeholders; without any, override ``h`` on lines or ``n`` on circles and approx grids."""
    token = "$" + param
    found = False

    def walk(x):
        nonlocal found
        if isinstance(x, dict):
            return {k: walk(v) for k, v in x.items()}
        if isinstance(x, list):
            return [walk(v) for v in x]
        if x == token:
            found = True
            return value
        return x

    out = walk(copy.deepcopy(doc))
    if found:
        return out
    if param == "h":
        for m in out["models"].values():
            if str(m.get("kind", "")).lower() in ("line", "reallinegrid", "real"):
                m["h"] = float(value)
                found = True
    elif param == "n":
        for m in out["models"].values():
            if str(m.get("kind", "")).lower() in ("circle", "circlegrid"):
                m["n"] = int(value)
                found = True
        for s in out["suites"].values():
            if "n" in s:
                s["n"] = [int(value)] if isinstance(s["n"], list) else int(value)
                found = True
            if isinstance(s.get("corpus"), dict) and "n" in s["corpus"]:
                s["corpus"]["n"] = int(value)
                found = True
    if not found:
        raise ConfigError(f"config has no '{token}' placeholder and no default target for {param!r}")
    return out


# ---------------------------------------------------------------- helpers


def _maybe_exact(phi, opts: RunOptions):
    return phi.to_exact() if opts.exact and phi.model.is_discrete else phi


def _run(thunks, opts: RunOptions) -> list[CheckReport]:
    if opts.threads > 1 and len(thunks) > 1:
        with ThreadPoolExecutor(opts.threads) as pool:
            parts = list(pool.map(lambda f: f(), thunks))
    else:
        parts = [f() for f in thunks]
    out = []
    for p in parts:
        out.extend(p if isinstance(p, list) else [p])
    return out


def _pair(cfg: Config, case: dict):
    model = cfg.model(case["model"])
    return model, cp.stepfn_from_spec(model, case["phi1"]), cp.stepfn_from_spec(model, case["phi2"])


def _tag(rep: CheckReport, label):
    if label:
        rep.diagnostics["case"] = label
    return rep


# ---------------------------------------------------------------- suites


def suite_fubini(cfg: Config, sec: dict, opts: RunOptions):
    thunks = []
    for i, case in enumerate(sec.get("cases", [])):
        def job(case=case, i=i):
            _, a, b = _pair(cfg, case)
            return _tag(check_fubini(_maybe_exact(a, opts), _maybe_exact(b, opts), seed=opts.seed), case.get("label", f"case{i}"))
        thunks.append(job)
    rnd = sec.get("random")
    if rnd:
        names = rnd["models"]
        for j in range(int(rnd.get("count", 0))):
            def job(j=j):
                s = opts.seed * 100003 + j
                rng = np.random.default_rng(s)
                model = cfg.model(names[j % len(names)])
                if model.is_discrete and (opts.exact or rnd.get("exact", False)):
                    a, b = cp.random_rational(rng, model), cp.random_rational(rng, model)
                else:
                    a, b = cp.random_float(rng, model), cp.random_float(rng, model)
                return check_fubini(a, b, seed=s)
            thunks.append(job)
    return _run(thunks, opts)


def suite_ft(cfg: Config, sec: dict, opts: RunOptions):
    thunks = []
    for i, case in enumerate(sec.get("cases", [])):
        def job(case=case, i=i):
            _, a, b = _pair(cfg, case)
            return _tag(check_ft_bound(_maybe_exact(a, opts), _maybe_exact(b, opts), case["t"], C=opts.C, scale=opts.scale, seed=opts.seed),
                        case.get("label", f"case{i}"))
        thunks.append(job)
    rnd = sec.get("random_line")
    if rnd:
        L = make_real_grid(float(rnd.get("h", 0.02)), float(rnd.get("half_width", 4.0)))
        for j in range(int(rnd.get("count", 0))):
            def job(j=j):
                s = opts.seed * 100003 + j
                a, b, t = cp.line_instance(s, model=L)
                return check_ft_bound(a, b, t, C=opts.C, scale=opts.scale, seed=s)
            thunks.append(job)
    return _run(thunks, opts)


def suite_main(cfg: Config, sec: dict, opts: RunOptions):
    thunks = []
    for i, case in enumerate(sec.get("cases", [])):
        for fname in case.get("functions", [case.get("function")]):
            def job(case=case, fname=fname, i=i):
                _, a, b = _pair(cfg, case)
                f = cfg.function(fname)
                return _tag(check_main(_maybe_exact(a, opts), _maybe_exact(b, opts), f, C=opts.C, scale=opts.scale, seed=opts.seed),
                            case.get("label", f"case{i}"))
            thunks.append(job)
    rnd = sec.get("random_line")
    if rnd:
        L = make_real_grid(float(rnd.get("h", 0.02)), float(rnd.get("half_width", 4.0)))
        fnames = rnd.get("functions", ["square"])
        for j in range(int(rnd.get("count", 0))):
            def job(j=j):
                s = opts.seed * 100003 + j
                a, b, _ = cp.line_instance(s, model=L)
                f = cfg.function(fnames[j % len(fnames)])
                return check_main(a, b, f, C=opts.C, scale=opts.scale, seed=s)
            thunks.append(job)
    return _run(thunks, opts)


def _kemperman_set(model, spec):
    if isinstance(spec, dict):
        return np.asarray(spec["cells"], dtype=np.int64)
    return grid_set(model, [tuple(map(float, iv)) for iv in spec])


def suite_kemperman(cfg: Config, sec: dict, opts: RunOptions):
    thunks = []
    for i, case in enumerate(sec.get("cases", [])):
        def job(case=case, i=i):
            model = cfg.model(case["model"])
            return _tag(check_kemperman(model, _kemperman_set(model, case["B1"]), _kemperman_set(model, case["B2"]), seed=opts.seed),
                        case.get("label", f"case{i}"))
        thunks.append(job)
    corp = sec.get("corpus")
    if corp:
        for j, kc in enumerate(cp.kemperman_corpus(opts.seed, int(corp.get("count", 50)))):
            thunks.append(lambda kc=kc, j=j: _tag(check_kemperman(kc.model, kc.B1, kc.B2, seed=opts.seed), f"{kc.label} #{j}"))
    return _run(thunks, opts)


def suite_probe(cfg: Config, sec: dict, opts: RunOptions):
    thunks = []
    for i, case in enumerate(sec.get("cases", [])):
        def job(case=case, i=i):
            _, a, b = _pair(cfg, case)
            return _tag(probe_connected_violation(a, b, case["t"], C=opts.C, scale=opts.scale, seed=opts.seed), case.get("label", f"case{i}"))
        thunks.append(job)
    return _run(thunks, opts)


def suite_split(cfg: Config, sec: dict, opts: RunOptions):
    corp = sec.get("corpus", {})
    thunks = []
    for j, (phi, phi1, t, I1p) in enumerate(cp.split_corpus(opts.seed, int(corp.get("count", 200)))):
        def job(phi=phi, phi1=phi1, t=t, I1p=I1p, j=j):
            cert = build_split(phi, phi1, t, I1p)
            return check_split_superadditivity(cert, phi1, t, seed=opts.seed * 100003 + j)
        thunks.append(job)
    return _run(thunks, opts)


def suite_rearrange(cfg: Config, sec: dict, opts: RunOptions):
    corp = sec.get("corpus", {})
    n = int(corp.get("n", 32))
    deep = bool(sec.get("deep", False))
    fins = tuple(corp.get("finite", ["Z/2", "S3"]))
    thunks = []
    for j, case in enumerate(cp.rearrangement_corpus(opts.seed, int(corp.get("count", 12)), fins)):
        def job(case=case, j=j):
            P, a, b = case.build(n)
            reps = check_rearrangement_domination(a, b, case.t, coset_structure(P), C=opts.C, scale=opts.scale, deep=deep, seed=opts.seed * 100003 + j)
            for r in reps:
                r.diagnostics["case"] = f"circle({n}) x {case.fin} #{j}"
            return reps
        thunks.append(job)
    return _run(thunks, opts)


def approx_reports(f: cx.ConvexFn, n: int, points: int = 1025, label: str = "") -> list[CheckReport]:
    """The piecewise-linear approximation statements for one ``(f, n)`` on a uniform grid of ``[0, 1]``."""
    y = np.linspace(0.0, 1.0, points)
    fy = np.asarray(f(y), dtype=float)
    fs = cx.pl_approx(f, n, y, "sum")
    fc = cx.pl_approx(f, n, y, "chord")
    nodes = np.arange(n + 1) / n
    inner = (y > 0) & (y < 1)
    close = cx.pl_close_bound(f, n, y[inner])
    f1 = float(f(1.0))
    gapmax = float(np.max(fs - fy))
    diag = {"f": label or f.label(), "n": n, "max_gap": gapmax}
    tol = 1e-12
    out = [
        _report("approx-forms", float(np.max(np.abs(fs - fc))), 0.0, tol, "float", VACUOUS, two_sided=True, diagnostics=dict(diag)),
        _report("approx-above", float(np.max(fy - fs)), 0.0, tol, "float", VACUOUS, diagnostics=dict(diag)),
        _report("approx-nodes", float(np.max(np.abs(cx.pl_approx(f, n, nodes) - np.asarray(f(nodes), dtype=float)))), 0.0, tol, "float",
                VACUOUS, two_sided=True, diagnostics=dict(diag)),
        _report("approx-close", float(np.max(fs[inner] - close)), 0.0, tol, "float", VACUOUS, diagnostics=dict(diag)),
        _report("approx-linear", float(np.max(fs - f1 * y)), 0.0, tol, "float", VACUOUS, diagnostics=dict(diag)),
    ]
    if n % 2 == 0:
        # refining the knots can only lower the approximation
        coarse = cx.pl_approx(f, n // 2, y, "sum")
        out.append(_report("approx-refine", float(np.max(fs - coarse)), 0.0, tol, "float", VACUOUS, diagnostics=dict(diag)))
    return out


def suite_approx(cfg: Config, sec: dict, opts: RunOptions):
    ns = sec.get("n", [2, 4, 8, 16, 32, 64])
    ns = ns if isinstance(ns, list) else [ns]
    thunks = []
    for name in sec.get("functions", ["square", "entropy", "negsqrt"]):
        for n in ns:
            thunks.append(lambda name=name, n=n: approx_reports(cfg.function(name), int(n), int(sec.get("points", 1025)), name))
    return _run(thunks, opts)


def suite_decomp(cfg: Config, sec: dict, opts: RunOptions):
    corp = sec.get("corpus", {})
    thunks = []
    for j, (P, cs, a, b, g) in enumerate(cp.decomposition_corpus(opts.seed, int(corp.get("count", 100)))):
        def job(P=P, cs=cs, a=a, b=b, g=g, j=j):
            terms = coset_decompose_convolution(a, b, cs, g, "direct")
            full = convolve(a, b, "direct").values
            scale = max(float(full.max()), 1e-300)
            return _report("decomposition", float(sum(terms)), float(full[g]), 1e-10 * scale, "float", VACUOUS, two_sided=True,
                           instance_seed=opts.seed * 100003 + j, diagnostics={"terms": len(terms), "cell": g})
        thunks.append(job)
    return _run(thunks, opts)


RUNNERS = {
    "fubini": suite_fubini, "ft": suite_ft, "main": suite_main, "kemperman": suite_kemperman, "probe": suite_probe,
    "split": suite_split, "rearrange": suite_rearrange, "approx": suite_approx, "decomp": suite_decomp,
}


def run_suite(cfg: Config, name: str, opts: RunOptions) -> list[CheckReport]:
    names = [s for s in SUITES if s in cfg.suites] if name == "all" else [name]
    out = []
    for s in names:
        if s not in RUNNERS:
            raise ConfigError(f"unknown suite {s!r}")
        sec = cfg.suites.get(s)
        if sec is None:
            raise ConfigError(f"config has no section for suite {s!r}")
        for r in RUNNERS[s](cfg, sec, opts):
            r.diagnostics.setdefault("suite", s)
            out.append(r)
    return out


def summarize(reports) -> dict:
    counts = {PASS: 0, FAIL: 0, SKIPPED: 0}
    for r in reports:
        counts[r.verdict] += 1
    return counts


__all__ = ["Config", "ConfigError", "RunOptions", "SUITES", "approx_reports", "load_config", "load_doc", "run_suite", "substitute", "summarize"]
