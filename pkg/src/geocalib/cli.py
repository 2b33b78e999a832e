"""Command line runner for the verification suites.

Usage::

    geocalib check-psi --n 2 --seed 7
    geocalib ter --field horospherical --n 2
    geocalib maximize --n 2 --eps 0,0.05,0.1 --out results
    geocalib all --config run.ini

Configuration files are INI text.  The ``[run]`` section may set n, seed,
grid, eps, field and out; ``[tolerances]`` overrides entries of
``DEFAULT_TOLERANCES``; a section named after a suite overrides run keys
for that suite only (plus ``count``, ``line_count`` and ``samples`` where
the suite takes them).  Command line flags win over the file.

A field file holds ``key = value`` lines with keys family, center (comma
separated ball coordinates), amplitude and support-radius.

Exit status is 0 when every check passes, 64 for configuration errors and
65 + i when suite ``SUITES[i]`` is the first one to fail.
"""

import argparse
import configparser
import csv
import datetime
import json
import math
import os
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path

from .exterior_core import GeometryInputError
from .psi_calibration import GL_POINTS, QuadratureGrid
from .suites import (DEFAULT_TOLERANCES, SUITES, check_isometry, check_maximize,
                     check_phic, check_psi, check_ter)

EXIT_CONFIG = 64
EXIT_FAIL_BASE = 65
DEFAULT_EPS = (0.0, 0.02, 0.05, 0.1)
FIELD_FAMILIES = ("orthogeodesic", "horospherical", "tilted")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    n: int = 2
    seed: int = 0
    grid: str = ""
    eps: tuple = DEFAULT_EPS
    field: str = "orthogeodesic"
    output_path: str = "geocalib-out"
    tolerances: dict = dc_field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    overrides: dict = dc_field(default_factory=dict)
    suite_options: dict = dc_field(default_factory=dict)


# -- parsing -----------------------------------------------------------------

def parse_grid(text, n, seed):
    """``gl:K`` (composite Gauss-Legendre, K points per piece) or ``mc:N``."""
    if not text:
        return QuadratureGrid("gauss_legendre_tensor", GL_POINTS.get(n, 7), seed)
    kind, _, num = text.partition(":")
    try:
        k = int(num)
    except ValueError:
        raise ConfigError(f"bad grid {text!r}; expected gl:K or mc:N") from None
    schemes = {"gl": "gauss_legendre_tensor", "mc": "monte_carlo"}
    if kind not in schemes:
        raise ConfigError(f"unknown grid scheme {kind!r}")
    try:
        return QuadratureGrid(schemes[kind], k, seed)
    except GeometryInputError as e:
        raise ConfigError(str(e)) from None


def parse_eps(text):
    try:
        vals = tuple(float(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise ConfigError(f"bad eps list {text!r}") from None
    if not vals or any(not math.isfinite(v) or v < 0 for v in vals):
        raise ConfigError("eps list must hold finite nonnegative numbers")
    return vals


def parse_field(text, n):
    """Field family name, or path of a field definition file."""
    if text in FIELD_FAMILIES:
        return {"family": text}
    path = Path(text)
    if not path.is_file():
        raise ConfigError(f"unknown field {text!r} (not a family, not a file)")
    cp = configparser.ConfigParser()
    try:
        cp.read_string("[field]\n" + path.read_text(encoding="utf-8"))
    except configparser.Error as e:
        raise ConfigError(f"field file: {e}") from None
    sec = cp["field"]
    unknown = set(sec) - {"family", "center", "amplitude", "support-radius"}
    if unknown:
        raise ConfigError(f"field file: unknown keys {sorted(unknown)}")
    family = sec.get("family", "").strip()
    if family not in FIELD_FAMILIES:
        raise ConfigError(f"field file: unknown family {family!r}")
    spec = {"family": family}
    try:
        if "center" in sec:
            spec["center"] = [float(s) for s in sec["center"].split(",")]
            if len(spec["center"]) != n + 1:
                raise ConfigError(f"field file: center needs {n + 1} coordinates")
        if "amplitude" in sec:
            spec["amplitude"] = float(sec["amplitude"])
        if "support-radius" in sec:
            spec["support_radius"] = float(sec["support-radius"])
    except ValueError as e:
        raise ConfigError(f"field file: {e}") from None
    return spec


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--n", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--grid", help="gl:K or mc:N")
    common.add_argument("--eps", help="comma separated amplitudes")
    common.add_argument("--field", help="field family or field file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--config", help="INI configuration file")
    parser = _Parser(prog="geocalib", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in SUITES + ("all",):
        sub.add_parser(name, parents=[common])
    return parser


_SUITE_INT_KEYS = {"count", "line_count", "samples"}


def load_config(argv):
    args = build_parser().parse_args(argv)
    cfg = RunConfig(args.command)
    run = {}
    if args.config:
        cp = configparser.ConfigParser()
        try:
            if not cp.read(args.config, encoding="utf-8"):
                raise ConfigError(f"cannot read config {args.config!r}")
        except configparser.Error as e:
            raise ConfigError(f"config: {e}") from None
        for sec in cp.sections():
            if sec == "run":
                run.update(cp[sec])
            elif sec == "tolerances":
                for k, v in cp[sec].items():
                    if k not in DEFAULT_TOLERANCES:
                        raise ConfigError(f"unknown tolerance {k!r}")
                    try:
                        cfg.overrides[k] = float(v)
                    except ValueError:
                        raise ConfigError(f"tolerance {k!r} is not a number") from None
            elif sec in SUITES:
                cfg.suite_options[sec] = dict(cp[sec])
            else:
                raise ConfigError(f"unknown config section [{sec}]")
    for key in ("n", "seed", "grid", "eps", "field", "out"):
        val = getattr(args, key)
        if val is not None:
            run[key] = str(val)
    try:
        cfg.n = int(run.get("n", cfg.n))
        cfg.seed = int(run.get("seed", cfg.seed))
    except ValueError:
        raise ConfigError("n and seed must be integers") from None
    if not 1 <= cfg.n <= 4:
        raise ConfigError("n must lie in 1..4")
    cfg.grid = run.get("grid", cfg.grid)
    cfg.eps = parse_eps(run["eps"]) if "eps" in run else cfg.eps
    cfg.field = run.get("field", cfg.field)
    cfg.output_path = run.get("out", cfg.output_path)
    cfg.tolerances.update(cfg.overrides)
    # validate everything up front so that bad input never reaches a suite
    parse_grid(cfg.grid, cfg.n, cfg.seed)
    parse_field(cfg.field, cfg.n)
    for sec, opts in cfg.suite_options.items():
        _suite_settings(cfg, sec)
    return cfg


def _suite_settings(cfg, suite):
    opts = dict(cfg.suite_options.get(suite, {}))
    out = {"n": cfg.n, "seed": cfg.seed, "grid": cfg.grid, "eps": cfg.eps,
           "field": cfg.field}
    try:
        if "n" in opts:
            out["n"] = int(opts.pop("n"))
        if "seed" in opts:
            out["seed"] = int(opts.pop("seed"))
        for k in list(opts):
            if k in _SUITE_INT_KEYS:
                out[k] = int(opts.pop(k))
    except ValueError:
        raise ConfigError(f"[{suite}]: integer expected") from None
    if not 1 <= out["n"] <= 4:
        raise ConfigError(f"[{suite}]: n must lie in 1..4")
    if "grid" in opts:
        out["grid"] = opts.pop("grid")
    if "eps" in opts:
        out["eps"] = parse_eps(opts.pop("eps"))
    if "field" in opts:
        out["field"] = opts.pop("field")
    if opts:
        raise ConfigError(f"[{suite}]: unknown keys {sorted(opts)}")
    return out


# -- running -----------------------------------------------------------------

def run_suite(cfg, suite):
    st = _suite_settings(cfg, suite)
    n, seed, tol = st["n"], st["seed"], cfg.tolerances
    extra = {k: st[k] for k in _SUITE_INT_KEYS if k in st}
    if suite == "check-phic":
        return check_phic(n, seed, tol, **extra)
    if suite == "check-isometry":
        return check_isometry(n, seed, tol, **extra)
    if suite == "check-psi":
        grid = parse_grid(st["grid"], n, seed) if st["grid"] else None
        return check_psi(n, seed, tol, grid=grid, **extra)
    if suite == "ter":
        return check_ter(n, seed, tol, parse_field(st["field"], n), **extra)
    if suite == "maximize":
        return check_maximize(n, seed, tol, st["eps"], parse_grid(st["grid"], n, seed))
    raise ConfigError(f"unknown suite {suite!r}")


def _num(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g") if math.isfinite(v) else "null"
    return None


def dumps(obj):
    """JSON with floats at 17 significant digits."""
    s = _num(obj)
    if s is not None:
        return s
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k), ensure_ascii=False)}: {dumps(v)}"
                               for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if obj is None:
        return "null"
    return json.dumps(str(obj), ensure_ascii=False)


def _cell(v):
    s = _num(v)
    return str(v) if s is None else s


def write_reports(cfg, results, out):
    out.mkdir(parents=True, exist_ok=True)
    header = {
        "header": True,
        "command": cfg.command,
        "config": {"n": cfg.n, "seed": cfg.seed, "grid": cfg.grid or "default",
                   "eps": list(cfg.eps), "field": cfg.field,
                   "suite_options": cfg.suite_options},
        "tolerance_overrides": cfg.overrides,
        "threads": os.environ.get("GEOCALIB_THREADS", "1"),
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    with open(out / "report.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(header) + "\n")
        for r in results:
            for c in r.checks:
                fh.write(dumps(c.record()) + "\n")
    with open(out / "summary.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["suite", "name", "value", "bound", "pass"])
        for r in results:
            for c in r.checks:
                w.writerow([c.suite, c.name, _cell(c.value), _cell(c.bound),
                            _cell(c.passed)])
    with open(out / "report.txt", "w", encoding="utf-8", newline="\n") as fh:
        for r in results:
            for c in r.checks:
                fh.write(f"{c.name}: {'pass' if c.passed else 'FAIL'}\n")
    for r in results:
        for name, (cols, rows) in r.tables.items():
            with open(out / f"{name}.csv", "w", encoding="utf-8", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(cols)
                for row in rows:
                    w.writerow([_cell(v) for v in row])
            if name == "maximize_volumes":
                # two-column plot data
                with open(out / "plot_eps_volume.csv", "w", encoding="utf-8",
                          newline="") as fh:
                    w = csv.writer(fh, lineterminator="\n")
                    w.writerow(["epsilon", "volume"])
                    for row in rows:
                        w.writerow([_cell(row[0]), _cell(row[1])])


def run(cfg, stream=None):
    """Run the configured command, write reports, return the exit code."""
    stream = stream or sys.stdout
    suites = SUITES if cfg.command == "all" else (cfg.command,)
    results = []
    for s in suites:
        try:
            res = run_suite(cfg, s)
        except GeometryInputError as e:
            raise ConfigError(f"{s}: {e}") from None
        results.append(res)
        for c in res.checks:
            print(f"[{s}] {c.name}: {'pass' if c.passed else 'FAIL'} "
                  f"(value {_cell(c.value)}, bound {_cell(c.bound)})", file=stream)
    write_reports(cfg, results, Path(cfg.output_path))
    for r in results:
        if not r.passed:
            return EXIT_FAIL_BASE + SUITES.index(r.suite)
    return 0


def main(argv=None):
    try:
        cfg = load_config(sys.argv[1:] if argv is None else argv)
        return run(cfg)
    except ConfigError as e:
        print(f"geocalib: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
