"""``soblab`` command line: run catalog cases, suites and the experiment drivers.

Exit codes: 0 success, 2 an asserted invariant failed (or the golden diff is
nonempty), 3 configuration error (bad schema, missing file, unwritable path).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SoblabError
from .lab.cases import CaseTag, InequalityCase, default_params
from .lab.corpus import EXTENT, Corpus, CorpusMeasure, standard_corpus
from .lab.evaluate import run_suite
from .lab.experiments import counterexample_growth, sharpness_scan
from .lab.report import read_csv_rows, reports_to_csv, write_reports
from .measures import GridField, PointMeasure, measure_from_json

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG = 0, 2, 3
COMMANDS = ("run", "suite", "growth", "sharpness")

_TOP_KEYS = {"dimension", "grid", "measure", "weights", "functions", "cases", "params",
             "seed", "seeds", "refine", "output", "golden", "growth", "sharpness"}
_GRID_KEYS = {"h", "extent"}
_PARAM_KEYS = {"p", "q", "alpha", "epsilon", "s", "lambda"}
_CASE_KEYS = {"tag", "params", "measure", "functions", "regions"}
_OUTPUT_KEYS = {"dir", "stem", "format"}
_GROWTH_KEYS = {"R", "alpha", "h"}
_SHARP_KEYS = {"p", "q", "alpha", "x", "epsilon", "epsilon_cmp"}


class ConfigError(Exception):
    """Schema violation; the message starts with the offending field path."""


@dataclass
class RunConfig:
    dimension: int = 2
    h: float = 1 / 16
    extent: float = EXTENT
    cases: list = field(default_factory=list)
    measure: object = None          # corpus name, PointMeasure or GridField
    measure_name: str | None = None
    weights: list | None = None
    functions: tuple | None = None
    seeds: tuple = (0,)
    refine: bool = True
    out_dir: str = "soblab-out"
    stem: str = "report"
    fmt: str = "csv"
    golden: Path | None = None
    growth: dict = field(default_factory=dict)
    sharpness: dict = field(default_factory=dict)


def _check_keys(obj, allowed, path):
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object")
    for k in obj:
        if k not in allowed:
            where = f"{path}.{k}" if path else k
            raise ConfigError(f"{where}: unknown key")


def _number(obj, key, path, positive=False):
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{path}.{key}: expected a finite number")
    if positive and v <= 0:
        raise ConfigError(f"{path}.{key}: must be > 0")
    return float(v)


def _params(obj, path) -> dict:
    _check_keys(obj, _PARAM_KEYS, path)
    out = {}
    for k in obj:
        out["lam" if k == "lambda" else k] = _number(obj, k, path)
    return out


def _param_path(msg: str, path: str) -> str:
    # validation messages name "params.<field>"; prefix the case location
    return msg.replace("params.", f"{path}.") if "params." in msg else f"{path}: {msg}"


def _case(obj, shared: dict, n: int, path: str) -> InequalityCase:
    if isinstance(obj, str):
        obj = {"tag": obj}
    _check_keys(obj, _CASE_KEYS, path)
    if "tag" not in obj:
        raise ConfigError(f"{path}.tag: missing")
    try:
        tag = CaseTag.parse(obj["tag"])
    except SoblabError as exc:
        raise ConfigError(f"{path}.tag: {exc}") from None
    own = _params(obj.get("params", {}), f"{path}.params")
    merged = {**shared, **own}
    # the params location reported in errors is the one the user wrote
    ppath = f"{path}.params" if own else "params"
    try:
        params = default_params(tag, n, **merged)
        names = {}
        for key in ("functions", "regions"):
            if key in obj:
                if not isinstance(obj[key], list) or not all(isinstance(x, str) for x in obj[key]):
                    raise ConfigError(f"{path}.{key}: expected a list of names")
                names[key] = tuple(obj[key])
        measure = obj.get("measure")
        if measure is not None and not isinstance(measure, str):
            raise ConfigError(f"{path}.measure: expected a corpus measure name")
        return InequalityCase(tag, params, measure=measure, **names)
    except ConfigError:
        raise
    except (SoblabError, TypeError) as exc:
        raise ConfigError(_param_path(str(exc), ppath)) from None


def _measure(obj, base: Path, n: int, path: str):
    if isinstance(obj, str):
        return obj
    if not isinstance(obj, dict) or obj.get("kind") not in ("atoms", "grid"):
        raise ConfigError(f"{path}: expected a corpus name or an atoms/grid descriptor")
    allowed = {"kind", "dim", "atoms"} if obj["kind"] == "atoms" else \
        {"kind", "origin", "h", "shape", "values_file", "role"}
    _check_keys(obj, allowed, path)
    if obj["kind"] == "grid" and not (base / str(obj.get("values_file", ""))).is_file():
        raise ConfigError(f"{path}.values_file: file not found")
    if obj["kind"] == "atoms":
        obj = {**obj, "dim": obj.get("dim", n)}
        if obj["dim"] != n:
            raise ConfigError(f"{path}.dim: must equal dimension = {n}")
    try:
        mu = measure_from_json(obj, base)
    except (SoblabError, KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if mu.dim != n:
        raise ConfigError(f"{path}: dimension {mu.dim} does not match dimension {n}")
    return mu


def parse_config(path) -> RunConfig:
    """Load and fully validate a JSON run configuration."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config: file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from None
    return config_from_dict(raw, path.parent)


def config_from_dict(raw, base=Path(".")) -> RunConfig:
    base = Path(base)
    _check_keys(raw, _TOP_KEYS, "")
    cfg = RunConfig()
    if "dimension" in raw:
        n = raw["dimension"]
        if isinstance(n, bool) or n not in (1, 2):
            raise ConfigError("dimension: must be 1 or 2")
        cfg.dimension = int(n)
    n = cfg.dimension
    if "grid" in raw:
        _check_keys(raw["grid"], _GRID_KEYS, "grid")
        if "h" in raw["grid"]:
            cfg.h = _number(raw["grid"], "h", "grid", positive=True)
        if "extent" in raw["grid"]:
            cfg.extent = _number(raw["grid"], "extent", "grid", positive=True)
    shared = _params(raw.get("params", {}), "params")
    cases = raw.get("cases", [])
    if not isinstance(cases, list):
        raise ConfigError("cases: expected a list")
    cfg.cases = [_case(c, shared, n, f"cases[{i}]") for i, c in enumerate(cases)]
    if "measure" in raw:
        cfg.measure = _measure(raw["measure"], base, n, "measure")
        cfg.measure_name = raw["measure"] if isinstance(raw["measure"], str) else "config"
    if "weights" in raw:
        w = raw["weights"]
        if not isinstance(w, list) or not all(isinstance(x, str) for x in w):
            raise ConfigError("weights: expected a list of corpus weight names")
        cfg.weights = w
    if "functions" in raw:
        f = raw["functions"]
        if not isinstance(f, list) or not all(isinstance(x, str) for x in f):
            raise ConfigError("functions: expected a list of corpus function names")
        cfg.functions = tuple(f)
    if "seed" in raw and "seeds" in raw:
        raise ConfigError("seeds: give either seed or seeds")
    if "seed" in raw:
        s = raw["seed"]
        if isinstance(s, bool) or not isinstance(s, int) or s < 0:
            raise ConfigError("seed: expected a nonnegative integer")
        cfg.seeds = (s,)
    if "seeds" in raw:
        s = raw["seeds"]
        if not isinstance(s, list) or not s or not all(
                isinstance(x, int) and not isinstance(x, bool) and x >= 0 for x in s):
            raise ConfigError("seeds: expected a nonempty list of nonnegative integers")
        cfg.seeds = tuple(s)
    if "refine" in raw:
        if not isinstance(raw["refine"], bool):
            raise ConfigError("refine: expected true or false")
        cfg.refine = raw["refine"]
    if "output" in raw:
        o = raw["output"]
        _check_keys(o, _OUTPUT_KEYS, "output")
        for k in ("dir", "stem"):
            if k in o and not isinstance(o[k], str):
                raise ConfigError(f"output.{k}: expected a string")
        cfg.out_dir = str(base / o["dir"]) if "dir" in o else cfg.out_dir
        cfg.stem = o.get("stem", cfg.stem)
        if "format" in o:
            if o["format"] not in ("csv", "json"):
                raise ConfigError("output.format: must be csv or json")
            cfg.fmt = o["format"]
    if "golden" in raw:
        if not isinstance(raw["golden"], str):
            raise ConfigError("golden: expected a path")
        cfg.golden = base / raw["golden"]
        if not cfg.golden.is_file():
            raise ConfigError(f"golden: file not found: {cfg.golden}")
    if "growth" in raw:
        g = raw["growth"]
        _check_keys(g, _GROWTH_KEYS, "growth")
        out = {}
        if "R" in g:
            R = g["R"]
            if not isinstance(R, list) or len(R) < 2 or not all(
                    isinstance(r, (int, float)) and not isinstance(r, bool) and r >= 1 for r in R):
                raise ConfigError("growth.R: expected at least two radii >= 1")
            out["R_list"] = tuple(float(r) for r in R)
        if "alpha" in g:
            a = _number(g, "alpha", "growth")
            if not 0 < a < 2:
                raise ConfigError("growth.alpha: must lie in (0, n) with n = 2")
            out["alpha"] = a
        if "h" in g:
            out["h"] = _number(g, "h", "growth", positive=True)
        cfg.growth = out
    if "sharpness" in raw:
        s = raw["sharpness"]
        _check_keys(s, _SHARP_KEYS, "sharpness")
        out = {}
        for k in ("p", "q", "alpha", "epsilon", "epsilon_cmp"):
            if k in s:
                out[k] = _number(s, k, "sharpness")
        if "p" in out and not out["p"] > 1:
            raise ConfigError("sharpness.p: must be > 1")
        if "q" in out and not out["q"] >= out.get("p", 2.0):
            raise ConfigError("sharpness.q: must be >= sharpness.p")
        if "alpha" in out and not 0 <= out["alpha"] < 2:
            raise ConfigError("sharpness.alpha: must lie in [0, n) with n = 2")
        if "x" in s:
            xs = s["x"]
            if not isinstance(xs, list) or not xs or not all(
                    isinstance(x, (int, float)) and not isinstance(x, bool) and 8 <= x <= 512
                    for x in xs):
                raise ConfigError("sharpness.x: expected radii in [8, 512]")
            out["xs"] = [float(x) for x in xs]
        cfg.sharpness = out
    return cfg


# Commands -----------------------------------------------------------------


def _corpus(cfg: RunConfig) -> Corpus:
    corpus = standard_corpus(cfg.dimension)
    corpus.extent = cfg.extent
    if cfg.functions is not None:
        for name in cfg.functions:
            corpus.function(name)
        corpus.functions = [f for f in corpus.functions if f.name in cfg.functions]
    if cfg.weights is not None:
        for name in cfg.weights:
            if name not in {w.name for w in corpus.weights}:
                raise ConfigError(f"weights: unknown weight {name!r}")
        corpus.weights = [w for w in corpus.weights if w.name in cfg.weights]
    mu = cfg.measure
    if isinstance(mu, str):
        try:
            corpus.measure(mu)
        except SoblabError as exc:
            raise ConfigError(f"measure: {exc}") from None
    elif isinstance(mu, PointMeasure):
        corpus.measures = [CorpusMeasure("config", "atoms", atoms=mu)]
    elif isinstance(mu, GridField):
        def density(X, field=mu):
            return field.value_at(X.reshape(-1, X.shape[-1])).reshape(X.shape[:-1])
        corpus.measures = [CorpusMeasure("config", "density", density=density)]
    return corpus


def _selected_cases(cfg: RunConfig) -> list:
    if not cfg.cases:
        raise ConfigError("cases: at least one case is required")
    if not isinstance(cfg.measure, str):
        return cfg.cases
    # a named corpus measure applies to every case that does not name its own
    out = []
    for c in cfg.cases:
        if c.measure is None and c.input_kind not in ("none", "region", "positive"):
            c = InequalityCase(c.tag, c.params, cfg.measure, c.functions, c.regions)
        out.append(c)
    return out


def _write(reports, cfg: RunConfig, out_dir, fmt):
    try:
        return write_reports(reports, out_dir or cfg.out_dir, cfg.stem, fmt or cfg.fmt)
    except OSError as exc:
        raise ConfigError(f"output.dir: cannot write ({exc})") from None


def _golden_matches(reports, golden: Path) -> bool:
    expected = read_csv_rows(golden.read_text())
    actual = read_csv_rows(reports_to_csv(reports))
    return expected == actual


def _write_json(obj, cfg, out_dir, name):
    out = Path(out_dir or cfg.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        p = out / f"{cfg.stem}_{name}.json"
        p.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")
    except OSError as exc:
        raise ConfigError(f"output.dir: cannot write ({exc})") from None
    return p


def run_command(cfg: RunConfig, command: str, out_dir=None, fmt=None, threads: int = 1,
                stream=sys.stdout) -> int:
    """Execute ``command`` for a parsed config; returns the exit code."""
    if command in ("run", "suite"):
        cases = _selected_cases(cfg)
        corpus = _corpus(cfg)
        refine = cfg.refine if command == "suite" else False
        try:
            res = run_suite(cases, corpus, seeds=cfg.seeds, h=cfg.h, refine=refine,
                            threads=threads)
        except SoblabError as exc:
            raise ConfigError(str(exc)) from None
        paths = _write(res.reports, cfg, out_dir, fmt)
        print(f"{len(res.reports)} reports -> {paths[0]}", file=stream)
        ok = all(r.ok for r in res.reports)
        for s in res.summary.values():
            drift = "" if s.drift is None else f" drift={s.drift:.3f}"
            print(f"{s.case:22s} n={s.count:4d} max_ratio={s.max_ratio:.6g}{drift}"
                  f" {'stable' if s.stable else 'UNSTABLE'}", file=stream)
        if command == "suite":
            ok = ok and res.ok
        if cfg.golden is not None and not _golden_matches(res.reports, cfg.golden):
            print(f"golden mismatch against {cfg.golden}", file=stream)
            ok = False
        return EXIT_OK if ok else EXIT_INVARIANT
    if command == "growth":
        table = counterexample_growth(**cfg.growth)
        p = _write_json(table.to_json(), cfg, out_dir, "growth")
        for r in table.rows:
            inc = "" if r.increment is None else f" increment={r.increment:.6g}"
            print(f"R={r.R:g} lhs={r.lhs:.6g} rhs={r.rhs:.6g}{inc}", file=stream)
        print(f"expected increment {table.expected_increment:.6g} -> {p}", file=stream)
        return EXIT_OK if table.ok else EXIT_INVARIANT
    if command == "sharpness":
        table = sharpness_scan(**cfg.sharpness)
        p = _write_json(table.to_json(), cfg, out_dir, "sharpness")
        for r in table.rows:
            print(f"|x|={r.x:g} normalized={r.normalized:.6g} divergence={r.divergence:.6g}"
                  f" divergence_cmp={r.divergence_cmp:.6g}", file=stream)
        print(f"spread {table.spread:.4g} -> {p}", file=stream)
        return EXIT_OK if table.ok else EXIT_INVARIANT
    raise ConfigError(f"command: unknown command {command!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="soblab", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--out", help="output directory (overrides output.dir)")
    ap.add_argument("--format", choices=("csv", "json"), help="primary report format")
    ap.add_argument("--threads", type=int, default=1, help="worker threads")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        if args.threads < 1:
            raise ConfigError("--threads: must be >= 1")
        if args.config is None:
            if args.command in ("run", "suite"):
                raise ConfigError("--config: required for run and suite")
            cfg = RunConfig()
        else:
            cfg = parse_config(args.config)
        return run_command(cfg, args.command, args.out, args.format, args.threads)
    except ConfigError as exc:
        print(f"soblab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
