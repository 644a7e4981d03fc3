"""``slt`` command line: load a problem config, run one computation, emit a table.

Exit codes: 0 success, 1 numerical failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np
import yaml
from scipy.interpolate import PchipInterpolator

from . import __version__
from .errors import NumericalError, SLTError, UsageError, ValidationError
from .expansion import evaluate_series, fourier_coefficients, parseval_check
from .green import apply_resolvent, carleman_report, green_evaluator
from .grid import GridFunction, StandardGrid
from .problem import SIDE_EXTENT, parse_config, validate_settings
from .spectral import characteristic, find_eigenvalues

log = logging.getLogger("slt")

COMMANDS = ("eigen", "char", "eigenfunctions", "green", "expand", "parseval", "carleman", "resolvent")

# flag name -> key under the optional ``run`` section of the config
RUN_KEYS = {"lam": "lambda", "t": "t", "terms": "terms", "samples": "samples",
            "x": "x", "s": "s", "f": "f", "f_file": "f_file"}
# flag name -> solver setting it overrides
SOLVER_FLAGS = {"count": "max_eigenvalues", "lambda_min": "lambda_min", "lambda_max": "lambda_max"}

DEFAULTS = {"lam": 0.0, "t": -1.0, "terms": 50, "samples": 16, "f": "one"}


@dataclass
class OutputTable:
    columns: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"columns have unequal lengths {sorted(lengths)}")

    def to_csv(self) -> str:
        lines = [f"# {k}: {v}" for k, v in self.metadata.items()]
        names = list(self.columns)
        lines.append(",".join(names))
        cols = [np.asarray(self.columns[n]) for n in names]
        nrows = len(cols[0]) if cols else 0
        for i in range(nrows):
            lines.append(",".join(_fmt(c[i]) for c in cols))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {"metadata": self.metadata,
               "columns": {k: np.asarray(v).tolist() for k, v in self.columns.items()}}
        return json.dumps(doc, indent=1) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


BUILTIN_F = {
    "one": lambda x: np.ones_like(x),
    "sin_shift": lambda x: np.sin(x + math.pi),
    "parabola": lambda x: math.pi ** 2 - x ** 2,
}


def resolve_function(name: str | None, path: str | None, grid: StandardGrid) -> GridFunction:
    """Built-in name (``one``, ``sin_shift``, ``parabola``, ``poly:c0,c1,...``) or a CSV file."""
    if path:
        return _function_from_file(path, grid)
    if name in BUILTIN_F:
        return grid.sample(BUILTIN_F[name])
    if name and name.startswith("poly:"):
        try:
            coeffs = [float(c) for c in name[5:].split(",") if c.strip()]
        except ValueError:
            raise UsageError(f"bad polynomial coefficients in {name!r}") from None
        if not coeffs:
            raise UsageError("poly: needs at least one coefficient")
        return grid.sample(lambda x: np.polynomial.polynomial.polyval(x, coeffs))
    raise UsageError(f"unknown function {name!r}; use one, sin_shift, parabola or poly:<coeffs>")


def _function_from_file(path: str, grid: StandardGrid) -> GridFunction:
    """Two-column CSV (x, f); '#' lines and a header row are skipped.

    Samples at exactly the grid nodes are used as given; anything else is
    interpolated per side by a monotone cubic, extended to the side's ends.
    """
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except (ValueError, IndexError):
                if rows:
                    raise UsageError(f"{path}: malformed row {line!r}") from None
    if not rows:
        raise UsageError(f"{path}: no data rows")
    data = np.array(sorted(rows))
    x, f = data[:, 0], data[:, 1]
    if x.shape == grid.x.shape and np.array_equal(x, grid.x):
        half = grid.size // 2
        return GridFunction(grid, f[:half], f[half:])
    out = {}
    for side, mask in (("left", x < 0), ("right", x > 0)):
        xs = x[mask]
        lo, hi = SIDE_EXTENT[side]
        # the end gaps (towards 0 and +-pi) may be bridged, but no wider than the data spacing
        if len(xs) < 2 or max(xs[0] - lo, hi - xs[-1]) > np.max(np.diff(xs)) + 1e-12:
            raise UsageError(f"{path}: samples do not cover the {side} side [{lo:g}, {hi:g}]")
        out[side] = PchipInterpolator(xs, f[mask])(grid.sides[side].nodes)
    return GridFunction(grid, out["left"], out["right"])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH")
    common.add_argument("--lambda", dest="lam", type=float, metavar="X")
    common.add_argument("--t", type=float, metavar="X")
    common.add_argument("--count", type=int, metavar="N")
    common.add_argument("--terms", type=int, metavar="N")
    common.add_argument("--samples", type=int, metavar="N")
    common.add_argument("--x", type=float, metavar="X")
    common.add_argument("--s", type=float, metavar="S")
    fgroup = common.add_mutually_exclusive_group()
    fgroup.add_argument("--f", metavar="NAME")
    fgroup.add_argument("--f-file", dest="f_file", metavar="PATH")
    common.add_argument("--lambda-min", dest="lambda_min", type=float, metavar="X")
    common.add_argument("--lambda-max", dest="lambda_max", type=float, metavar="X")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", metavar="PATH")
    common.add_argument("--fixed-step", dest="fixed_step", action="store_true", default=None)
    common.add_argument("--diagonal", action="store_true",
                        help="green: tabulate G(x, x) on the grid")
    common.add_argument("--coefficients", action="store_true",
                        help="expand: emit the coefficient table instead of the reconstruction")
    common.add_argument("--counting", action="store_true",
                        help="carleman: emit the counting function N(lambda)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="slt", description="Sturm-Liouville problems with transmission conditions at x = 0.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


@dataclass
class Context:
    spec: object
    settings: object
    args: argparse.Namespace
    opts: dict

    @property
    def grid(self) -> StandardGrid:
        return StandardGrid.from_settings(self.settings)

    def function(self) -> GridFunction:
        return resolve_function(self.opts.get("f"), self.opts.get("f_file"), self.grid)


def load_context(args: argparse.Namespace) -> Context:
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {args.config!r}: {exc.strerror}") from None
    spec, settings = parse_config(text)
    run = (yaml.safe_load(text) or {}).get("run") or {}
    if not isinstance(run, dict):
        raise ValidationError("run must be a mapping")
    unknown = set(run) - set(RUN_KEYS.values())
    if unknown:
        raise ValidationError(f"unknown key(s) under run: {sorted(unknown)}")
    opts = dict(DEFAULTS)
    for flag, key in RUN_KEYS.items():
        if key in run:
            opts[flag] = run[key]
        if getattr(args, flag) is not None:
            opts[flag] = getattr(args, flag)
    if args.f is not None:
        opts.pop("f_file", None)
    changes = {setting: getattr(args, flag) for flag, setting in SOLVER_FLAGS.items()
               if getattr(args, flag) is not None}
    if args.fixed_step:
        changes["fixed_step"] = True
    if changes:
        settings = validate_settings(type(settings)(**{**settings.to_config(), **changes}))
    return Context(spec, settings, args, opts)


def metadata(ctx: Context, extra: dict | None = None) -> dict:
    echoed = {k: v for k, v in vars(ctx.args).items()
              if k not in ("command", "config", "output", "format", "verbose")
              and v not in (None, False)}
    if "lam" in echoed:
        echoed["lambda"] = echoed.pop("lam")
    meta = {
        "command": ctx.args.command + (" " + json.dumps(echoed, sort_keys=True) if echoed else ""),
        "spec_hash": ctx.spec.digest(),
        "settings": json.dumps(ctx.settings.to_config(), sort_keys=True),
    }
    stamp = _timestamp(ctx.settings.fixed_step)
    if stamp:
        meta["timestamp"] = stamp
    meta.update(extra or {})
    return meta


def _timestamp(fixed_step: bool) -> str | None:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        when = _dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc)
    elif fixed_step:
        return None  # reproducible output
    else:
        when = _dt.datetime.now(_dt.timezone.utc)
    return when.replace(microsecond=0).isoformat()


def _spectrum(ctx: Context, count: int | None = None, eigenfunctions: bool = True):
    spectrum = find_eigenvalues(ctx.spec, ctx.settings, eigenfunctions=eigenfunctions, count=count)
    for msg in spectrum.warnings:
        print(f"warning: {msg}", file=sys.stderr)
    if spectrum.shift_eta:
        print(f"note: 0 is an eigenvalue; search used the shift eta={spectrum.shift_eta:.17g}",
              file=sys.stderr)
    return spectrum


def _require_terms(spectrum, n):
    if len(spectrum) < n:
        lo, hi = spectrum.search_window
        raise UsageError(f"{n} eigenpairs needed but only {len(spectrum)} lie in "
                         f"[{lo:g}, {hi:g}]; raise solver.lambda_max")


def cmd_eigen(ctx: Context) -> OutputTable:
    sp = _spectrum(ctx)
    return OutputTable(
        {"index": np.arange(len(sp)), "lambda_n": sp.eigenvalues,
         "norm_constant": np.array([p.norm_constant for p in sp.pairs])},
        metadata(ctx, {"shift_eta": "%.17g" % sp.shift_eta}))


def cmd_char(ctx: Context) -> OutputTable:
    n = ctx.args.samples or 200
    if n < 1:
        raise UsageError("--samples must be positive")
    lams = np.linspace(ctx.settings.lambda_min, ctx.settings.lambda_max, n)
    rows = [characteristic(ctx.spec, lam, ctx.settings) for lam in lams]
    return OutputTable({"lambda": lams, "w": [r.w for r in rows], "w1": [r.w1 for r in rows],
                        "w2": [r.w2 for r in rows]}, metadata(ctx))


def cmd_eigenfunctions(ctx: Context) -> OutputTable:
    sp = _spectrum(ctx)
    cols = {"x": sp.grid.x if sp.grid else np.zeros(0)}
    for p in sp.pairs:
        cols[f"phi_{p.index}"] = p.values.values
    return OutputTable(cols, metadata(ctx))


def _midpoints(n: int) -> np.ndarray:
    cells = (np.arange(n) + 0.5) / n * math.pi
    return np.concatenate([-cells[::-1], cells])


def cmd_green(ctx: Context) -> OutputTable:
    lam = float(ctx.opts["lam"])
    g = green_evaluator(ctx.spec, lam, ctx.settings, ctx.grid)
    extra = {"lambda": "%.17g" % lam, "w": "%.17g" % g.w}
    if ctx.opts.get("x") is not None or ctx.opts.get("s") is not None:
        if ctx.opts.get("x") is None or ctx.opts.get("s") is None:
            raise UsageError("--x and --s must be given together")
        x, s = float(ctx.opts["x"]), float(ctx.opts["s"])
        return OutputTable({"x": [x], "s": [s], "G": [g(x, s)]}, metadata(ctx, extra))
    if ctx.args.diagonal:
        d = g.diagonal()
        return OutputTable({"x": ctx.grid.x, "G": d.values}, metadata(ctx, extra))
    n = int(ctx.opts["samples"])
    if n < 1:
        raise UsageError("--samples must be positive")
    pts = _midpoints(n)
    X, S = np.meshgrid(pts, pts, indexing="ij")
    return OutputTable({"x": X.ravel(), "s": S.ravel(), "G": np.asarray(g(X, S)).ravel()},
                       metadata(ctx, extra))


def _terms(ctx: Context) -> int:
    n = int(ctx.opts["terms"])
    if n < 0:
        raise UsageError("--terms must be non-negative")
    return n


def cmd_expand(ctx: Context) -> OutputTable:
    n = _terms(ctx)
    sp = _spectrum(ctx, count=n)
    _require_terms(sp, n)
    f = ctx.function()
    c = fourier_coefficients(f, sp, ctx.spec, ctx.settings, n)
    if ctx.args.coefficients:
        return OutputTable({"n": np.arange(n), "lambda_n": sp.eigenvalues[:n], "c_n": c},
                           metadata(ctx, {"n_terms": n}))
    series = evaluate_series(c, sp)
    err = f - series
    return OutputTable({"x": f.grid.x, "f": f.values, "series": series.values, "error": err.values},
                       metadata(ctx, {"n_terms": n, "sup_error": "%.17g" % err.max_abs()}))


def cmd_parseval(ctx: Context) -> OutputTable:
    n = _terms(ctx)
    sp = _spectrum(ctx, count=n)
    _require_terms(sp, n)
    res = parseval_check(ctx.function(), sp, ctx.spec, ctx.settings, n)
    energy = np.cumsum(res.coefficients ** 2)
    return OutputTable(
        {"n_terms": np.arange(1, n + 1), "coefficient_energy": energy,
         "norm_sq": np.full(n, res.norm_sq), "gap": res.norm_sq - energy},
        metadata(ctx, {"sup_error": "%.17g" % res.sup_error}))


def cmd_carleman(ctx: Context) -> OutputTable:
    n = _terms(ctx)
    t = float(ctx.opts["t"])
    sp = _spectrum(ctx, count=n, eigenfunctions=False)
    _require_terms(sp, n)
    rep = carleman_report(ctx.spec, sp, t, ctx.settings, n, ctx.grid)
    extra = {"t": "%.17g" % t, "lhs": "%.17g" % rep.lhs}
    if ctx.args.counting:
        lam, count = zip(*rep.counting_function) if rep.counting_function else ((), ())
        return OutputTable({"lambda": np.array(lam, float), "N": np.array(count, int)},
                           metadata(ctx, extra))
    ladder = sorted({k for k in (0, 1, 2, 5, 10, 20, 50, 100, 200, 400, 800) if k < n} | {n})
    partial = np.array([rep.partial_sum(k) for k in ladder])
    return OutputTable(
        {"n_terms": np.array(ladder), "rhs_partial": partial, "lhs": np.full(len(ladder), rep.lhs),
         "relative_gap": np.abs(partial - rep.lhs) / abs(rep.lhs)},
        metadata(ctx, extra))


def cmd_resolvent(ctx: Context) -> OutputTable:
    lam = float(ctx.opts["lam"])
    res = apply_resolvent(ctx.spec, lam, ctx.function(), ctx.settings, ctx.grid)
    extra = {"lambda": "%.17g" % lam, "residual_norm": "%.17g" % res.residual_norm,
             "condition_residuals": ", ".join("%.17g" % v for v in res.condition_residuals)}
    return OutputTable({"x": res.output_y.grid.x, "f": res.input_f.values,
                        "y": res.output_y.values, "dy": res.output_dy.values},
                       metadata(ctx, extra))


HANDLERS = {
    "eigen": cmd_eigen, "char": cmd_char, "eigenfunctions": cmd_eigenfunctions,
    "green": cmd_green, "expand": cmd_expand, "parseval": cmd_parseval,
    "carleman": cmd_carleman, "resolvent": cmd_resolvent,
}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        ctx = load_context(args)
        table = HANDLERS[args.command](ctx)
    except (ValidationError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    except SLTError as exc:  # pragma: no cover - every subclass is handled above
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = table.to_json() if args.format == "json" else table.to_csv()
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:  # reader closed early, e.g. `| head`
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
