"""Command-line driver: YAML run configs, verification suites and CSV/JSON reports."""
from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import math
import os
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
import yaml

from . import bounds, measure1d, metrics, oracle, semigroup
from .errors import ConfigError, LogConcaveError
from .measure1d import DEFAULT_N, DEFAULT_TAIL, GridMeasure

SUITES = ("constants", "profiles", "distances", "bounds", "transference", "mollification",
          "metric_chain", "semigroup")
FORMATS = ("csv", "json")
DEFAULT_SLACK = 0.02

_FAMILIES: dict[str, Callable[..., measure1d.MeasureSpec]] = {
    "gaussian": measure1d.gaussian,
    "exponential_symmetric": measure1d.exponential_symmetric,
    "exponential": measure1d.exponential_symmetric,
    "uniform": measure1d.uniform,
    "potential": measure1d.potential,
    "gaussian_mixture": measure1d.gaussian_mixture,
    "radial": measure1d.radial,
}
_TRANSFORMS = {
    "affine": lambda m, scale, shift=0.0: measure1d.apply_affine(m, float(scale), float(shift)),
    "truncate": lambda m, a, b: measure1d.truncate(m, float(a), float(b)),
    "convolve_gaussian": lambda m, beta: measure1d.convolve_gaussian(m, float(beta)),
    "convolve_uniform": lambda m, width: measure1d.convolve_uniform(m, float(width)),
    "scale_mix": lambda m, lam: measure1d.scale_mix(m, float(lam)),
    "ou": lambda m, T: semigroup.ou_evolve(m, float(T)),
}


# ---------------------------------------------------------------------------
# measure expressions
# ---------------------------------------------------------------------------

_PROBE_N = 64  # tiny grid used to catch bad family parameters at validation time


def _literal(node: ast.AST):
    try:
        return ast.literal_eval(node)
    except ValueError:
        raise ConfigError(f"argument {ast.unparse(node)!r} is not a literal") from None


def parse_measure(text: str) -> Callable[[int, float], GridMeasure]:
    """Compile an expression like ``truncate(gaussian(0, 1), -1, 2)`` into a builder(n, tail)."""
    try:
        tree = ast.parse(text.strip(), mode="eval").body
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse measure {text!r}: {exc.msg}") from None

    leaves: list[Callable[[int, float], GridMeasure]] = []

    def build(node: ast.AST) -> Callable[[int, float], GridMeasure]:
        if not (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)):
            raise ConfigError(f"{ast.unparse(node)!r} is not a family or transform call")
        name = node.func.id
        kwargs = {k.arg: _literal(k.value) for k in node.keywords}
        if name in _FAMILIES:
            args = [_literal(a) for a in node.args]
            factory = _FAMILIES[name]

            def fam(n: int, tail: float) -> GridMeasure:
                try:
                    spec = factory(*args, **kwargs)
                    return measure1d.realize(spec.with_grid(n, tail))
                except (TypeError, LogConcaveError) as exc:
                    raise ConfigError(f"{name}: {exc}") from None
            leaves.append(fam)
            return fam
        if name in _TRANSFORMS:
            if not node.args:
                raise ConfigError(f"{name} needs a measure as first argument")
            inner = build(node.args[0])
            args = [_literal(a) for a in node.args[1:]]
            fn = _TRANSFORMS[name]

            def tr(n: int, tail: float) -> GridMeasure:
                m = inner(n, tail)
                try:
                    return fn(m, *args, **kwargs)
                except (TypeError, LogConcaveError) as exc:
                    raise ConfigError(f"{name}: {exc}") from None
            return tr
        raise ConfigError(f"unknown family or transform {name!r}")

    builder = build(tree)
    label = ast.unparse(tree).replace(" ", "")

    def labelled(n: int = DEFAULT_N, tail: float = DEFAULT_TAIL) -> GridMeasure:
        return builder(n, tail).with_label(label)

    def probe() -> None:
        """Realize only the family leaves on a small grid to surface bad parameters."""
        for leaf in leaves:
            leaf(_PROBE_N, DEFAULT_TAIL)
    labelled.probe = probe
    return labelled


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    measures: dict[str, str]
    grid_n: int = 2048
    tail_mass: float = DEFAULT_TAIL
    suites: tuple[str, ...] = ()
    references: tuple[tuple[str, str], ...] = ()
    out_dir: str = "report"
    formats: tuple[str, ...] = FORMATS
    seed: int = 0
    slack: float = DEFAULT_SLACK
    pairs: int = 20
    semigroup_times: tuple[float, ...] = (0.25, 1.0, 4.0)
    builders: dict[str, Callable] = field(default_factory=dict, repr=False)


def _line_of(text: str, key: str) -> str:
    for i, line in enumerate(text.splitlines(), 1):
        if line.lstrip().startswith(f"{key}:") or line.lstrip().startswith(f"- {key}"):
            return f"line {i}: "
    return ""


def config_from_dict(raw: Any, source: str = "") -> RunConfig:
    """Cross-checked RunConfig; every problem found is reported in one ConfigError."""
    errs: list[str] = []
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping at top level")
    known = {"measures", "grid", "suites", "references", "output", "seed", "slack", "pairs", "semigroup_times"}
    for k in raw:
        if k not in known:
            errs.append(f"{_line_of(source, k)}unknown field {k!r}")

    measures = raw.get("measures") or {}
    builders = {}
    if not isinstance(measures, dict):
        errs.append("measures: expected a mapping name -> expression")
        measures = {}
    for name, expr in measures.items():
        try:
            builders[str(name)] = parse_measure(str(expr))
            builders[str(name)].probe()
        except ConfigError as exc:
            errs.append(f"{_line_of(source, str(name))}measures.{name}: {exc}")

    grid = raw.get("grid") or {}
    n, tail = 2048, DEFAULT_TAIL
    if not isinstance(grid, dict):
        errs.append("grid: expected a mapping with n and tail_mass")
    else:
        try:
            n = int(grid.get("n", n))
            if n < 64:
                errs.append(f"{_line_of(source, 'n')}grid.n: N must be >= 64, got {n}")
        except (TypeError, ValueError):
            errs.append("grid.n: not an integer")
        try:
            tail = float(grid.get("tail_mass", tail))
            if not 0 < tail < 0.01:
                errs.append("grid.tail_mass: must lie in (0, 0.01)")
        except (TypeError, ValueError):
            errs.append("grid.tail_mass: not a number")

    suites = raw.get("suites") or []
    if isinstance(suites, str):
        suites = [suites]
    for s in suites:
        if s not in SUITES:
            errs.append(f"{_line_of(source, 'suites')}suites: unknown suite {s!r} (choose from {', '.join(SUITES)})")

    refs = []
    for k, pair in enumerate(raw.get("references") or []):
        if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
            errs.append(f"references[{k}]: expected a pair [nu, mu]")
            continue
        for name in pair:
            if str(name) not in measures:
                errs.append(f"{_line_of(source, 'references')}references[{k}]: undefined measure {name!r}")
        refs.append((str(pair[0]), str(pair[1])))

    output = raw.get("output") or {}
    out_dir = str(output.get("dir", "report")) if isinstance(output, dict) else "report"
    formats = tuple(output.get("formats", FORMATS)) if isinstance(output, dict) else FORMATS
    for f in formats:
        if f not in FORMATS:
            errs.append(f"output.formats: unknown format {f!r}")

    def num(key, cast, default, ok):
        try:
            v = cast(raw.get(key, default))
        except (TypeError, ValueError):
            errs.append(f"{key}: not a number")
            return default
        if not ok(v):
            errs.append(f"{_line_of(source, key)}{key}: value {v!r} out of range")
        return v

    seed = num("seed", int, 0, lambda v: v >= 0)
    slack = num("slack", float, DEFAULT_SLACK, lambda v: 0 <= v < 1)
    pairs = num("pairs", int, 20, lambda v: v >= 0)
    times = raw.get("semigroup_times", (0.25, 1.0, 4.0))
    try:
        times = tuple(float(t) for t in times)
        if any(t <= 0 for t in times):
            errs.append("semigroup_times: times must be positive")
    except (TypeError, ValueError):
        errs.append("semigroup_times: expected a list of numbers")
        times = (0.25, 1.0, 4.0)

    if errs:
        raise ConfigError("invalid config:\n  " + "\n  ".join(errs))
    return RunConfig({str(k): str(v) for k, v in measures.items()}, n, tail, tuple(suites), tuple(refs),
                     out_dir, formats, seed, slack, pairs, times, builders)


def validate_config(path: str | os.PathLike) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML error: {exc}") from None
    return config_from_dict(raw, text)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class Table:
    name: str
    header: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def n_fail(self) -> int:
        return len(self.failures)


@dataclass
class Report:
    tables: list[Table]
    metadata: dict[str, Any]

    @property
    def failures(self) -> int:
        return sum(t.n_fail for t in self.tables)


def fmt(v: Any) -> str:
    if isinstance(v, bool) or isinstance(v, np.bool_):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return "%.12g" % v
    if v is None:
        return ""
    return str(v)


def table_csv(t: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(t.header)
    for r in t.rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else fmt(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def emit(report: Report, out_dir: str | os.PathLike, formats: Sequence[str] = FORMATS) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        for t in report.tables:
            p = out / f"{t.name}.csv"
            with open(p, "w", encoding="utf-8", newline="") as fh:
                fh.write(table_csv(t))
            written.append(p)
    if "json" in formats:
        summary = {
            "metadata": report.metadata,
            "failures": report.failures,
            "tables": {t.name: {"header": list(t.header), "rows": [list(r) for r in t.rows],
                                "failures": t.failures, "errors": t.errors} for t in report.tables},
        }
        p = out / "summary.json"
        with open(p, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(p)
    return written


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def _pmap(fn, items):
    """Ordered parallel map; results come back in input order."""
    with ThreadPoolExecutor(max_workers=max(1, min(len(items), os.cpu_count() or 1))) as ex:
        return list(ex.map(fn, items))


def suite_constants(ms: dict[str, GridMeasure], cfg: RunConfig) -> list[Table]:
    t = Table("constants", ("measure", "oracle_c_p", "oracle_cheeger", "sigma2", "median"))

    def one(name):
        m = ms[name]
        cheeger = oracle.cheeger_constant(m) if m.is_log_concave else math.nan
        return (name, oracle.spectral_poincare(m).c_p, cheeger, m.variance(), m.median())
    for row in _pmap(_guard(one, t), list(ms)):
        if row is not None:
            t.rows.append(row)
    return [t]


def _guard(fn, table: Table):
    def wrapped(arg):
        try:
            return fn(arg)
        except LogConcaveError as exc:
            table.errors.append(f"{arg}: {type(exc).__name__}: {exc}")
            return None
    return wrapped


FRADELIZI_T = (1.0, 1.5, 2.0, 3.0)


def suite_profiles(ms: dict[str, GridMeasure], cfg: RunConfig) -> list[Table]:
    t = Table("profiles", ("measure", "check", "value", "tolerance", "pass"))

    def one(name):
        m = ms[name]
        if not m.is_log_concave:
            return []
        rows = []
        prof = oracle.isoperimetric_profile(m)
        defect = oracle.profile_concavity_defect(prof)
        tol = 1e-6 * float(np.max(prof.values))
        rows.append((name, "isoperimetric_concavity_defect", defect, tol, defect <= tol))
        small = cfg.builders[name](128, cfg.tail_mass)
        u = np.linspace(0.02, 0.5, 25)
        bf, hl = oracle.brute_force_isoperimetric(small, u)
        err = float(np.max(np.abs(hl - bf) / np.maximum(bf, 1e-300)))
        rows.append((name, "isoperimetric_halfline_vs_bruteforce_N128", err, 0.02, err <= 0.02))
        sd = math.sqrt(small.variance())
        radii = np.linspace(0.05, 2.0, 20) * sd
        bf, hl = oracle.brute_force_concentration(small, radii)
        keep = bf > 1e-12
        err = float(np.max(np.abs(hl[keep] - bf[keep]) / bf[keep])) if keep.any() else 0.0
        rows.append((name, "concentration_halfline_vs_bruteforce_N128", err, 0.02, err <= 0.02))
        sd = math.sqrt(m.variance())
        worst = max(lhs - rhs for _, _, lhs, rhs in oracle.fradelizi_rows(m, (0.5 * sd, sd, 2 * sd), FRADELIZI_T))
        rows.append((name, "fradelizi_tail_max_excess", worst, 1e-6, worst <= 1e-6))
        return rows
    for rows in _pmap(_guard(one, t), list(ms)):
        for r in rows or []:
            t.rows.append(r)
            if not r[-1]:
                t.failures.append({"measure": r[0], "check": r[1], "value": r[2], "tolerance": r[3]})
    return [t]


def suite_distances(ms: dict[str, GridMeasure], cfg: RunConfig) -> list[Table]:
    names = list(ms)
    tables = []
    for metric in metrics.METRICS:
        t = Table(f"distances_{metric}", ("measure", *names))
        pairs = [(i, j) for i in range(len(names)) for j in range(i + 1, len(names))]

        def one(ij, metric=metric):
            i, j = ij
            try:
                return metrics.distance(ms[names[i]], ms[names[j]], metric)
            except LogConcaveError as exc:
                t.errors.append(f"{names[i]},{names[j]}: {exc}")
                return math.nan
        vals = _pmap(one, pairs)
        mat = np.zeros((len(names), len(names)))
        for (i, j), v in zip(pairs, vals):
            mat[i, j] = mat[j, i] = v
        for i, n in enumerate(names):
            t.rows.append((n, *mat[i]))
        tables.append(t)
    return tables


_BOUND_HEADER = ("measure", "formula_id", "value", "oracle", "tightness", "preconditions", "pass")


def _sweep_table(name: str, jobs: list[tuple[str, GridMeasure, bounds.BoundContext]], slack: float) -> Table:
    t = Table(name, _BOUND_HEADER)

    def one(job):
        label, m, ctx = job
        try:
            return label, bounds.validity_sweep(m, ctx, slack)
        except LogConcaveError as exc:
            t.errors.append(f"{label}: {type(exc).__name__}: {exc}")
            return label, []
    for label, rows in _pmap(one, jobs):
        for r in rows:
            subj = r.cert.subject
            subject = label + subj[len(r.measure):] if subj.startswith(r.measure) else label
            t.rows.append((subject, r.cert.formula_id, r.cert.value, r.oracle, r.tightness,
                           r.cert.preconditions_met, r.passed))
            if not r.passed:
                t.failures.append({"measure": subject, "slack": slack, "oracle": r.oracle,
                                   "certificate": r.cert.to_dict()})
    return t


def suite_bounds(ms, cfg):
    ctx = bounds.BoundContext(own_profiles=True, own_oracles=True, restrictions=True)
    return [_sweep_table("bounds", [(n, m, ctx) for n, m in ms.items() if m.is_log_concave], cfg.slack)]


def suite_mollification(ms, cfg):
    ctx = bounds.BoundContext(mollify=True, moments=False)
    return [_sweep_table("mollification", [(n, m, ctx) for n, m in ms.items() if m.is_log_concave], cfg.slack)]


def suite_transference(ms, cfg):
    jobs = []
    for nu, mu in cfg.references:
        ctx = bounds.BoundContext(references=(ms[mu],), moments=False)
        jobs.append((f"{nu}|{mu}", ms[nu], ctx))
    return [_sweep_table("transference", jobs, cfg.slack)]


def suite_metric_chain(ms, cfg):
    t = Table("metric_chain", ("pair", "measure_a", "measure_b", "relation", "lhs", "rhs", "tolerance", "pass"))
    pairs = metrics.random_pairs(cfg.seed, cfg.pairs, cfg.grid_n)

    def one(k):
        a, b = pairs[k]
        return k, a.label, b.label, metrics.metric_chain(a, b)
    for k, la, lb, rows in _pmap(one, list(range(len(pairs)))):
        for r in rows:
            t.rows.append((k, la, lb, r.relation, r.lhs, r.rhs, r.tolerance, r.holds))
            if not r.holds:
                t.failures.append({"pair": k, "measures": [la, lb], "relation": r.relation,
                                   "lhs": r.lhs, "rhs": r.rhs, "slack": r.tolerance})
    return [t]


SEMIGROUP_SHIFT = 0.5


def suite_semigroup(ms, cfg):
    t = Table("semigroup", ("measure", "check", "T", "lhs", "rhs", "pass"))

    def one(name):
        m = ms[name]
        moved = measure1d.apply_affine(m, 1.0, SEMIGROUP_SHIFT)
        rows = []
        for T in cfg.semigroup_times:
            lhs, rhs = semigroup.check_w1_contraction(m, moved, T)
            rows.append((name, "w1_contraction_translate", T, lhs, rhs, abs(lhs - rhs) <= 1e-3))
            lhs, rhs = semigroup.check_tv_w1_contraction(m, moved, T)
            rows.append((name, "tv_w1_reflection", T, lhs, rhs, lhs <= rhs * (1 + 1e-3)))
        return rows
    results = _pmap(_guard(one, t), list(ms))
    for rows in results:
        for r in rows or []:
            t.rows.append(r)
    try:
        lam, val = semigroup.non_contraction_witness(1.0, n=cfg.grid_n)
        t.rows.append((f"gaussian(0,{lam:g})", "non_contraction_witness", 1.0, val,
                       semigroup.WITNESS_THRESHOLD, val >= semigroup.WITNESS_THRESHOLD))
    except LogConcaveError as exc:
        t.rows.append(("gaussian-scan", "non_contraction_witness", 1.0, math.nan, semigroup.WITNESS_THRESHOLD, False))
        t.errors.append(str(exc))
    for r in t.rows:
        if not r[-1]:
            t.failures.append({"measure": r[0], "check": r[1], "T": r[2], "lhs": r[3], "rhs": r[4],
                               "slack": 1e-3})
    return [t]


_SUITE_FNS = {
    "constants": suite_constants, "profiles": suite_profiles, "distances": suite_distances,
    "bounds": suite_bounds, "transference": suite_transference, "mollification": suite_mollification,
    "metric_chain": suite_metric_chain, "semigroup": suite_semigroup,
}


def run(cfg: RunConfig) -> Report:
    t0 = time.perf_counter()
    names = list(cfg.measures)
    realized = _pmap(lambda n: cfg.builders[n](cfg.grid_n, cfg.tail_mass), names) if names else []
    ms = dict(zip(names, realized))
    tables: list[Table] = []
    for s in SUITES:
        if s in cfg.suites:
            tables += _SUITE_FNS[s](ms, cfg)
    meta = {
        "grid": {"n": cfg.grid_n, "tail_mass": cfg.tail_mass},
        "slack": cfg.slack,
        "seed": cfg.seed,
        "suites": [s for s in SUITES if s in cfg.suites],
        "measures": cfg.measures,
        "references": [list(p) for p in cfg.references],
        "tolerances": {"metric_chain": "2x metric tolerance", "semigroup": 1e-3, "profiles": "per row"},
        "versions": {"python": platform.python_version(), "numpy": np.__version__,
                     "backend": _backend()},
        "wall_time_s": round(time.perf_counter() - t0, 3),
    }
    return Report(tables, meta)


def _backend() -> str:
    from . import kernels
    return kernels.BACKEND_NAME


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _print_table(t: Table, fmt_name: str, stream=None):
    stream = stream or sys.stdout
    if fmt_name == "json":
        json.dump(_jsonable({"header": list(t.header), "rows": [list(r) for r in t.rows]}), stream, indent=2)
        stream.write("\n")
    else:
        stream.write(table_csv(t))


def _cmd_run(a) -> int:
    cfg = validate_config(a.config)
    if a.grid_n:
        cfg.grid_n = a.grid_n
    if a.seed is not None:
        cfg.seed = a.seed
    if a.slack is not None:
        cfg.slack = a.slack
    formats = (a.format,) if a.format else cfg.formats
    report = run(cfg)
    out = a.out or cfg.out_dir
    for p in emit(report, out, formats):
        print(p)
    if report.failures:
        print(f"{report.failures} validity failure(s)", file=sys.stderr)
    return 1 if report.failures else 0


def _cmd_validate(a) -> int:
    cfg = validate_config(a.config)
    print(f"ok: {len(cfg.measures)} measures, suites: {', '.join(cfg.suites) or '(none)'}")
    return 0


def _cmd_constants(a) -> int:
    m = parse_measure(a.spec)(a.grid_n or DEFAULT_N, DEFAULT_TAIL)
    cfg = RunConfig({a.spec: a.spec})
    t = suite_constants({m.label: m}, cfg)[0]
    _print_table(t, a.format or "csv")
    return 0


def _cmd_distance(a) -> int:
    n = a.grid_n or DEFAULT_N
    ma = parse_measure(a.spec_a)(n, DEFAULT_TAIL)
    mb = parse_measure(a.spec_b)(n, DEFAULT_TAIL)
    chosen = metrics.METRICS if a.metric == "all" else (a.metric,)
    t = Table("distance", ("measure_a", "measure_b", "metric", "value", "tolerance"))
    for k in chosen:
        t.rows.append((ma.label, mb.label, k, metrics.distance(ma, mb, k), metrics.metric_tolerance(k, ma, mb)))
    _print_table(t, a.format or "csv")
    return 0


def _cmd_bounds(a) -> int:
    n = a.grid_n or 2048
    m = parse_measure(a.spec)(n, DEFAULT_TAIL)
    refs = tuple(parse_measure(r)(n, DEFAULT_TAIL) for r in a.reference or ())
    ctx = bounds.BoundContext.full(refs) if m.is_log_concave else bounds.BoundContext(refs)
    slack = DEFAULT_SLACK if a.slack is None else a.slack
    t = _sweep_table("bounds", [(m.label, m, ctx)], slack)
    best = Table("best", ("measure", "target", "formula_id", "value", "chain"))
    for target in ("C_P", "C'_C"):
        try:
            c = bounds.best_bound(target, m, ctx)
            best.rows.append((m.label, target, c.formula_id, c.value, " <- ".join(x.formula_id for x in c.chain)))
        except LogConcaveError as exc:
            best.rows.append((m.label, target, type(exc).__name__, math.inf, ""))
    _print_table(best, a.format or "csv")
    _print_table(t, a.format or "csv")
    return 1 if t.n_fail else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="logconcave", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid-n", type=int, default=None, help="grid size N (>= 64)")
    common.add_argument("--format", choices=FORMATS, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--slack", type=float, default=None)
    common.add_argument("--out", default=None, help="output directory (run only)")
    sub = p.add_subparsers(dest="verb", required=True)
    r = sub.add_parser("run", parents=[common], help="execute a YAML run config")
    r.add_argument("config")
    r.set_defaults(fn=_cmd_run)
    v = sub.add_parser("validate", parents=[common], help="check a config and report every error")
    v.add_argument("config")
    v.set_defaults(fn=_cmd_validate)
    c = sub.add_parser("constants", parents=[common], help="oracle constants of one measure")
    c.add_argument("spec")
    c.set_defaults(fn=_cmd_constants)
    d = sub.add_parser("distance", parents=[common], help="distance between two measures")
    d.add_argument("spec_a")
    d.add_argument("spec_b")
    d.add_argument("--metric", choices=(*metrics.METRICS, "all"), default="all")
    d.set_defaults(fn=_cmd_distance)
    b = sub.add_parser("bounds", parents=[common], help="catalog certificates for one measure")
    b.add_argument("spec")
    b.add_argument("--reference", action="append", help="reference measure (repeatable)")
    b.set_defaults(fn=_cmd_bounds)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.grid_n is not None and args.grid_n < 64:
        print("error: --grid-n must be >= 64", file=sys.stderr)
        return 2
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LogConcaveError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
