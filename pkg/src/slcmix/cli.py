"""Command-line interface.

Commands
--------
fit        fit the symmetric log-concave mixture to a data column
test       test for a single symmetric component (lr, nsbs, nsbskde, lrskde)
cluster    two-group clustering (g, hg, slc, kde)
density    evaluate a saved fit on a grid
simulate   power or clustering Monte Carlo study

Exit codes are 0 on success, 2 for bad flags, 3 for an unreadable or
malformed input file and 4 for a numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .cluster import METHODS as CLUSTER_METHODS
from .cluster import classify, misclassification_count
from .em import em_fit
from .hypotest import TESTS
from .lcd import ConvergenceError, PiecewiseLogDensity
from .mixture import MixtureParams, SymmetricDensity, ZeroDensityError, mixture_density
from .params import DegenerateFitError, estimate_params
from .simulate import COMPONENTS, cluster_study, power_study

EXIT_OK, EXIT_FLAGS, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3, 4

PARAM_METHODS = ("gaussian_em", "symmetry_md")


class InputError(Exception):
    """Missing or malformed input file."""


class FlagError(Exception):
    """Invalid combination of flags."""


# ---------------------------------------------------------------------------
# io


def read_column(path: str, integer: bool = False) -> np.ndarray:
    """One numeric column with an optional one-token header line."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    values = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            if values or lineno > 1 or "," in line:
                raise InputError(f"{path}:{lineno}: expected one number, got {line!r}") from None
            continue  # header
    if not values:
        raise InputError(f"{path}: no data")
    arr = np.asarray(values)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{path}: non-finite value")
    if integer:
        if not np.all(np.isin(arr, (1.0, 2.0))):
            raise InputError(f"{path}: labels must be 1 or 2")
        return arr.astype(int)
    return arr


def _clean(obj):
    """Lists of plain floats, with non-finite values spelled as strings."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def to_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2) + "\n"


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _emit(text: str, output: str | None):
    if output:
        try:
            Path(output).write_text(text)
        except OSError as exc:
            raise InputError(f"cannot write {output}: {exc.strerror or exc}") from exc
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def _given_params(args) -> MixtureParams | None:
    """Parameters from --pi/--u1/--u2, or None when none of them is given."""
    supplied = [v is not None for v in (args.pi, args.u1, args.u2)]
    if not any(supplied):
        return None
    if not all(supplied):
        raise FlagError("--pi, --u1 and --u2 must be given together")
    if not 0.0 < args.pi < 1.0:
        raise FlagError("--pi must lie in (0, 1)")
    if args.u1 > args.u2:
        raise FlagError("--u1 must not exceed --u2")
    return MixtureParams(args.pi, args.u1, args.u2)


def _estimated(args, x) -> MixtureParams:
    if x.size < 10:
        raise InputError("parameter estimation needs at least 10 observations")
    return estimate_params(x, args.param_method)


def _eval_grid(params: MixtureParams, half: PiecewiseLogDensity, points: int) -> np.ndarray:
    zm = half.support_end
    return np.linspace(min(params.u1, 0.0) - zm, max(params.u2, 0.0) + zm, points)


def cmd_fit(args) -> str:
    params = _given_params(args)
    x = read_column(args.input)
    if x.size < 2:
        raise InputError("need at least two observations")
    if params is None:
        params = _estimated(args, x)
    fit = em_fit(x, params)
    half = fit.component.half
    grid = _eval_grid(params, half, args.grid_points)
    g = fit.density(grid)
    f = fit.component.pdf(grid)
    if args.format == "csv":
        return to_csv(("x", "g", "f"), zip(grid, g, f))
    return to_json({
        "params": {"pi": params.pi, "u1": params.u1, "u2": params.u2},
        "knots": half.knots,
        "log_density_at_knots": half.logvals,
        "grid": grid,
        "density": {"g": g, "f": f},
        "loglik": fit.loglik,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "posteriors": fit.posteriors,
    })


def _load_fit(path: str):
    try:
        doc = json.loads(Path(path).read_text())
        p = doc["params"]
        params = MixtureParams(float(p["pi"]), float(p["u1"]), float(p["u2"]))
        half = PiecewiseLogDensity(np.asarray(doc["knots"], dtype=float),
                                   np.asarray(doc["log_density_at_knots"], dtype=float))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: not a saved fit ({exc})") from exc
    return params, SymmetricDensity(half)


def cmd_density(args) -> str:
    params, f = _load_fit(args.input)
    if args.at is not None:
        grid = read_column(args.at)
    else:
        default = _eval_grid(params, f.half, args.points)
        lo = default[0] if args.lo is None else args.lo
        hi = default[-1] if args.hi is None else args.hi
        if not hi > lo:
            raise FlagError("--hi must exceed --lo")
        grid = np.linspace(lo, hi, args.points)
    g = mixture_density(params, f, grid)
    fx = f.pdf(grid)
    if args.format == "json":
        return to_json({"grid": grid, "g": g, "f": fx})
    return to_csv(("x", "g", "f"), zip(grid, g, fx))


def cmd_test(args) -> str:
    _check_b_alpha(args)
    x = read_column(args.input)
    if x.size < 10:
        raise InputError("the tests need at least 10 observations")
    report = TESTS[args.method](x, B=args.bootstrap, alpha=args.alpha, seed=args.seed)
    d = report.to_dict()
    if args.format == "csv":
        keys = ("method", "statistic", "critical_value", "p_value", "reject", "seed")
        return to_csv(keys + ("bootstrap",), [[d[k] for k in keys] + [args.bootstrap]])
    return to_json(d)


def cmd_cluster(args) -> str:
    params = _given_params(args)
    if params is not None and args.method == "g":
        raise FlagError("--pi/--u1/--u2 do not apply to method g")
    x = read_column(args.input)
    truth = read_column(args.labels, integer=True) if args.labels else None
    if truth is not None and truth.size != x.size:
        raise InputError("labels and data have different lengths")
    if x.size < 10:
        raise InputError("clustering needs at least 10 observations")
    res = classify(x, args.method, seed=args.seed, param_method=args.param_method, params=params)
    miss = None if truth is None else misclassification_count(res.labels, truth)
    if args.format == "csv":
        return to_csv(("method", "n", "misclassifications"),
                      [[args.method, x.size, "" if miss is None else miss]])
    return to_json({
        "method": args.method,
        "params": {"pi": res.params.pi, "u1": res.params.u1, "u2": res.params.u2},
        "misclassifications": miss,
        "labels": res.labels,
        "posteriors": res.posteriors,
    })


def _methods(text: str, allowed) -> tuple[str, ...]:
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [m for m in names if m not in allowed]
    if bad or not names:
        raise FlagError(f"--methods must be a comma list drawn from {','.join(allowed)}")
    return names


def _check_b_alpha(args):
    if args.bootstrap < 1:
        raise FlagError("--bootstrap must be at least 1")
    if not 0.0 < args.alpha < 1.0:
        raise FlagError("--alpha must lie in (0, 1)")


def _check_scenario(args):
    if not 0.0 <= args.pi <= 1.0:
        raise FlagError("--pi must lie in [0, 1]")
    if args.n < 10 or args.reps < 1 or args.workers < 1:
        raise FlagError("--n must be at least 10, --reps and --workers at least 1")


def cmd_simulate(args) -> str:
    _check_scenario(args)
    if args.study == "power":
        _check_b_alpha(args)
        methods = _methods(args.methods or ",".join(TESTS), tuple(TESTS))
        summary = power_study(args.component, args.pi, args.delta, args.n, args.reps,
                              B=args.bootstrap, alpha=args.alpha, seed=args.seed,
                              methods=methods, workers=args.workers)
    else:
        methods = _methods(args.methods or ",".join(CLUSTER_METHODS), CLUSTER_METHODS)
        summary = cluster_study(args.component, args.pi, args.delta, args.n, args.reps,
                                seed=args.seed, methods=methods, param_method=args.param_method,
                                workers=args.workers)
    if args.format == "json":
        return to_json(summary)
    return to_csv(tuple(summary), [list(summary.values())])


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, fmt: str, needs_input: bool = True):
    if needs_input:
        p.add_argument("--input", required=True, help="input file")
    p.add_argument("--output", help="write here instead of stdout")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--format", choices=("csv", "json"), default=fmt)


def _param_flags(p):
    p.add_argument("--pi", type=float)
    p.add_argument("--u1", type=float)
    p.add_argument("--u2", type=float)
    p.add_argument("--param-method", choices=PARAM_METHODS, default="gaussian_em")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slcmix", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit the symmetric log-concave mixture")
    _common(p, "json")
    _param_flags(p)
    p.add_argument("--grid-points", type=int, default=512)
    p.set_defaults(run=cmd_fit)

    p = sub.add_parser("test", help="bootstrap test of a single symmetric component")
    _common(p, "json")
    p.add_argument("--method", choices=tuple(TESTS), default="lr")
    p.add_argument("--bootstrap", type=int, default=49)
    p.add_argument("--alpha", type=float, default=0.1)
    p.set_defaults(run=cmd_test)

    p = sub.add_parser("cluster", help="posterior clustering into two groups")
    _common(p, "json")
    _param_flags(p)
    p.add_argument("--method", choices=CLUSTER_METHODS, default="slc")
    p.add_argument("--labels", help="true labels (1 or 2) for scoring")
    p.set_defaults(run=cmd_cluster)

    p = sub.add_parser("density", help="evaluate a saved fit")
    _common(p, "csv")
    p.add_argument("--at", help="file of evaluation points (overrides the grid flags)")
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--points", type=int, default=512)
    p.set_defaults(run=cmd_density)

    p = sub.add_parser("simulate", help="Monte Carlo studies")
    p.add_argument("study", choices=("power", "cluster"))
    _common(p, "csv", needs_input=False)
    p.add_argument("--component", choices=COMPONENTS, default="normal")
    p.add_argument("--pi", type=float, default=0.2)
    p.add_argument("--delta", type=float, default=3.0)
    p.add_argument("--n", type=int, default=250)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--bootstrap", type=int, default=49)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--methods", help="comma-separated subset of the methods")
    p.add_argument("--param-method", choices=PARAM_METHODS, default="gaussian_em")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(run=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad flags
    try:
        if getattr(args, "grid_points", 2) < 2 or getattr(args, "points", 2) < 2:
            raise FlagError("grids need at least two points")
        text = args.run(args)
        _emit(text, args.output)
    except FlagError as exc:
        parser.error(str(exc))
    except InputError as exc:
        print(f"slcmix: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConvergenceError, DegenerateFitError, ZeroDensityError, FloatingPointError,
            np.linalg.LinAlgError, ValueError) as exc:
        print(f"slcmix: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
