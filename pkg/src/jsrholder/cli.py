"""``jsr`` command-line front end.

Every command reads matrix sets in the JSON schema of :mod:`jsrholder.core`
and writes a deterministic JSON (or CSV) document that embeds the tool
version, the configuration, the seed and the provenance of any constants.

Exit codes: 0 success, 1 a check reported a failure, 2 invalid input,
3 enumeration budget exceeded, 4 inconclusive numerics.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import __version__
from .bounds import bracket
from .certify import (HolderCertificate, build_certificate, dim2_growth_check,
                      verify_certificate)
from .core import MatrixSet, balanced_hull, loads, matrixset_to_dict
from .ct import lift_continuous, max_lyapunov_estimate
from .errors import BudgetExceededError, InconclusiveError, InvalidInputError, PreconditionError
from .inflation import (InflationCurve, check_inflation_inequality, default_grid,
                        fit_holder_at_zero, inflation_curve, parse_grid)
from .bounds import BoundsBracket
from .norms import refined_bracket
from .perturbation import elsner_gap, resolvent_cert
from .reducibility import maximal_flag

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BUDGET, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _read_set(path: str) -> MatrixSet:
    try:
        with open(path, encoding="utf-8") as fh:
            return loads(fh.read())
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror}") from None


def _config(args) -> dict:
    skip = {"func", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _envelope(args, result, provenance=None) -> dict:
    return {"tool": "jsrholder", "version": __version__, "command": args.command,
            "config": _config(args), "seed": args.seed,
            "provenance": provenance or {}, "result": result}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, result, provenance=None) -> None:
    doc = _jsonable(_envelope(args, result, provenance))
    _emit(args, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _csv_header(args, provenance=None) -> str:
    cfg = json.dumps(_jsonable(_config(args)), sort_keys=True)
    prov = json.dumps(provenance or {}, sort_keys=True)
    return (f"# tool=jsrholder version={__version__} command={args.command} seed={args.seed}\n"
            f"# config={cfg}\n# provenance={prov}\n")


def _bracket_dict(b: BoundsBracket) -> dict:
    return {"lower": b.lower, "upper": b.upper, "depth_n": b.depth_n,
            "witness": list(b.witness), "norm_tag": b.norm_tag,
            "relative_width": b.relative_width}


# ---------------------------------------------------------------------------
# SVG plot
# ---------------------------------------------------------------------------

def curve_svg(curve: InflationCurve, width: int = 640, height: int = 420) -> str:
    """Log-log plot of ``r(eps)`` with the bracket drawn as a band."""
    pts = [(e, b.lower, b.upper) for e, b in zip(curve.grid, curve.values) if e > 0 and b.lower > 0]
    if len(pts) < 2:
        raise InvalidInputError("need at least two positive grid points to plot")
    xs = [math.log10(p[0]) for p in pts]
    ys = [math.log10(v) for p in pts for v in p[1:]]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 0.5, y1 + 0.5
    m = 50

    def X(v):
        return m + (v - x0) / (x1 - x0) * (width - 2 * m)

    def Y(v):
        return height - m - (v - y0) / (y1 - y0) * (height - 2 * m)

    upper = [(X(math.log10(e)), Y(math.log10(u))) for e, _, u in pts]
    lower = [(X(math.log10(e)), Y(math.log10(lo))) for e, lo, _ in pts]
    mid = [(X(math.log10(e)), Y(math.log10(0.5 * (lo + u)))) for e, lo, u in pts]
    band = " ".join(f"{x:.2f},{y:.2f}" for x, y in upper + lower[::-1])
    line = " ".join(f"{x:.2f},{y:.2f}" for x, y in mid)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'<rect width="100%" height="100%" fill="white"/>\n'
        f'<polygon points="{band}" fill="#9ecae1" fill-opacity="0.6" stroke="none"/>\n'
        f'<polyline points="{line}" fill="none" stroke="#08519c" stroke-width="1.5"/>\n'
        f'<line x1="{m}" y1="{height - m}" x2="{width - m}" y2="{height - m}" stroke="black"/>\n'
        f'<line x1="{m}" y1="{m}" x2="{m}" y2="{height - m}" stroke="black"/>\n'
        f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" font-size="13">'
        f'log10 eps [{x0:.2f}, {x1:.2f}]</text>\n'
        f'<text x="14" y="{height / 2}" font-size="13" transform="rotate(-90 14 {height / 2})" '
        f'text-anchor="middle">log10 r(eps) [{y0:.3f}, {y1:.3f}]</text>\n'
        "</svg>\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_bounds(args) -> int:
    M = _read_set(args.input)
    b = refined_bracket(M, args.n, budget=args.budget) if args.refine else \
        bracket(M, args.n, budget=args.budget)
    if args.format == "csv":
        _emit(args, _csv_header(args) + "lower,upper,depth_n,witness,norm_tag\n"
              f"{b.lower!r},{b.upper!r},{b.depth_n},{' '.join(map(str, b.witness))},{b.norm_tag}\n")
    else:
        _emit_json(args, _bracket_dict(b))
    return EXIT_OK


def _curve(args, M):
    grid = parse_grid(args.grid) if args.grid else default_grid()
    grid = np.concatenate([[0.0], grid])
    if args.balanced:
        M = balanced_hull(M)
    return inflation_curve(M, grid=grid, n=args.n, seed=args.seed, budget=args.budget)


def cmd_inflate(args) -> int:
    M = _read_set(args.input)
    curve = _curve(args, M)
    fit = None
    prov = {"upper": "perturbed-product recursion (certified)",
            "lower": "finite elements of the inflated set (certified)"}
    if args.fit:
        fit = fit_holder_at_zero(curve)
        prov["fit"] = "empirical log-log regression"
    if args.plot:
        with open(args.plot, "w", encoding="utf-8") as fh:
            fh.write(curve_svg(curve))
    if args.format == "csv":
        text = _csv_header(args, prov)
        if fit is not None:
            text += (f"# fit alpha_hat={fit.alpha_hat!r} C_hat={fit.C_hat!r} "
                     f"window={list(fit.fit_window)} residual={fit.residual!r}\n")
        _emit(args, text + curve.to_csv())
    else:
        res = {"curve": [{"epsilon": e, "lower": b.lower, "upper": b.upper}
                         for e, b in zip(curve.grid, curve.values)], "depth_n": curve.depth_n}
        if fit is not None:
            res["fit"] = {"alpha_hat": fit.alpha_hat, "C_hat": fit.C_hat,
                          "fit_window": list(fit.fit_window), "residual": fit.residual,
                          "points": fit.points}
        if args.eta is not None:
            rep = check_inflation_inequality(curve, args.eta)
            res["inequality"] = {"pairs_checked": rep.pairs_checked,
                                 "violations": list(rep.violations)}
        _emit_json(args, res, prov)
    return EXIT_OK


def _read_curve_csv(path: str) -> InflationCurve:
    try:
        with open(path, encoding="utf-8") as fh:
            rows = [r for r in csv.DictReader(line for line in fh if not line.startswith("#"))]
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = sorted((float(r["epsilon"]), float(r["lower"]), float(r["upper"]),
                       int(r["depth_n"])) for r in rows)
    except (KeyError, ValueError, TypeError):
        raise InvalidInputError("curve CSV needs columns epsilon,lower,upper,depth_n") from None
    if not data or data[0][0] != 0.0:
        raise InvalidInputError("curve CSV needs an epsilon = 0 row")
    vals = tuple(BoundsBracket(lo, up, n, (), "csv") for _, lo, up, n in data)
    dummy = MatrixSet([np.zeros((1, 1))])
    from .core import Ball
    return InflationCurve(dummy, Ball(1), tuple(e for e, *_ in data), vals, data[0][3], vals[0])


def cmd_fit(args) -> int:
    if args.curve:
        curve = _read_curve_csv(args.curve)
    elif args.input:
        curve = _curve(args, _read_set(args.input))
    else:
        raise InvalidInputError("fit needs --curve or --input")
    fit = fit_holder_at_zero(curve)
    _emit_json(args, {"alpha_hat": fit.alpha_hat, "C_hat": fit.C_hat,
                      "fit_window": list(fit.fit_window), "residual": fit.residual,
                      "points": fit.points}, {"fit": "empirical log-log regression"})
    return EXIT_OK


def cmd_flag(args) -> int:
    M = _read_set(args.input)
    f = maximal_flag(M, tol=args.tol, seed=args.seed)
    _emit_json(args, {"detected_index": f.index_m, "dims": list(f.dims), "tol": f.tol,
                      "residual": f.residual,
                      "basis": [[[z.real, z.imag] for z in row] for row in
                                np.asarray(f.basis, dtype=complex)]},
               {"index": "detected (numerical lower bound for the true index)"})
    return EXIT_OK


def cmd_cert(args) -> int:
    M = _read_set(args.input)
    cert = build_certificate(M, lam=args.lam, r=args.r, kmax=args.kmax, horizon=args.horizon,
                             theta=args.theta, n=args.n, budget=args.budget)
    res = cert.to_dict()
    res["radius_exponent"] = cert.radius_exponent
    _emit_json(args, res, cert.provenance)
    return EXIT_OK


def cmd_verify(args) -> int:
    M = _read_set(args.input)
    try:
        with open(args.cert, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read certificate {args.cert}: {exc}") from None
    obj = obj.get("result", obj)
    obj = {k: v for k, v in obj.items() if k in HolderCertificate.__dataclass_fields__}
    try:
        cert = HolderCertificate.from_dict(obj)
    except TypeError as exc:
        raise InvalidInputError(f"malformed certificate: {exc}") from None
    rep = verify_certificate(M, cert, trials=args.trials, n_probe=args.n_probe,
                             depth=args.n, seed=args.seed)
    if args.format == "csv":
        _emit(args, _csv_header(args, cert.provenance) + rep.to_csv())
    else:
        _emit_json(args, rep.to_dict(), cert.provenance)
    return EXIT_FAIL if rep.failures else EXIT_OK


def cmd_elsner(args) -> int:
    M = _read_set(args.input)
    if len(M) != 2:
        raise InvalidInputError("elsner needs a file with exactly two matrices")
    g = elsner_gap(M.members[0], M.members[1])
    _emit_json(args, {"lhs": g.lhs, "rhs": g.rhs, "violated": g.violated})
    return EXIT_FAIL if g.violated else EXIT_OK


def cmd_resolvent(args) -> int:
    M = _read_set(args.input)
    if len(M) != 1:
        raise InvalidInputError("resolvent needs a file with exactly one matrix")
    c = resolvent_cert(M.members[0], args.delta, args.samples)
    _emit_json(args, c.to_dict(), {"delta": c.delta_source,
                                   "r0": "sampled minimum minus Lipschitz correction"})
    return EXIT_OK


def cmd_dim2(args) -> int:
    M = _read_set(args.input)
    rep = dim2_growth_check(M, kmax=args.kmax, budget=args.budget)
    _emit_json(args, {"verdict": "PASS" if rep.ok else "FAIL", "L": rep.L,
                      "normalizer": rep.normalizer, "ratios": list(rep.ratios),
                      "violations": list(rep.violations)},
               {"normalizer": "bracket upper bound"})
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_lift(args) -> int:
    M = _read_set(args.input)
    L = lift_continuous(M, steps=args.steps, samples=args.samples, seed=args.seed,
                        budget=args.budget)
    est = max_lyapunov_estimate(L, args.n, budget=args.budget)
    res = {"lower": est.lower, "heuristic_upper": est.heuristic_upper, "depth": est.depth,
           "members": len(L.lifted), "note": est.note}
    if args.export:
        with open(args.export, "w", encoding="utf-8") as fh:
            json.dump(matrixset_to_dict(L.lifted), fh, sort_keys=True)
    _emit_json(args, res, {"lower": "certified for the sampled lift",
                           "upper": "heuristic"})
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jsr", description="Joint spectral radius toolkit.")
    p.add_argument("--version", action="version", version=f"jsr {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_, input_required=True, n_default=6):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--input", required=input_required, help="matrix-set JSON file")
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--budget", type=int, default=None,
                        help="product budget (default: $JSR_BUDGET or 10^7)")
        sp.add_argument("--n", type=int, default=n_default, help="enumeration depth")
        sp.set_defaults(func=func)
        return sp

    sp = add("bounds", cmd_bounds, "bracket the JSR")
    sp.add_argument("--refine", action="store_true", help="add an orbit-adapted quadratic norm")

    for name, func, help_ in (("inflate", cmd_inflate, "bracket r(eps) on a grid"),
                              ("fit", cmd_fit, "fit the Hoelder exponent at eps = 0")):
        sp = add(name, func, help_, input_required=(name == "inflate"))
        sp.add_argument("--grid", help="geo:<min>:<max>:<count> (default 1e-4..1e-1, 36 points)")
        sp.add_argument("--balanced", action="store_true", help="use the balanced hull M u -M")
        if name == "inflate":
            sp.add_argument("--fit", action="store_true")
            sp.add_argument("--plot", help="write an SVG plot of the curve")
            sp.add_argument("--eta", type=float, help="also check the increment inequality up to eta")
        else:
            sp.add_argument("--curve", help="curve CSV written by 'jsr inflate --format csv'")

    sp = add("flag", cmd_flag, "detect a maximal invariant flag")
    sp.add_argument("--tol", type=float, default=1e-8)

    sp = add("cert", cmd_cert, "build a Hoelder lower-bound certificate", n_default=8)
    sp.add_argument("--lambda", dest="lam", type=float, default=None,
                    help="rapid-approximation constant (default: empirical)")
    sp.add_argument("--theta", type=float, default=None, help="proven growth constant")
    sp.add_argument("--r", type=int, default=1)
    sp.add_argument("--kmax", type=int, default=12)
    sp.add_argument("--horizon", type=int, default=1000)

    sp = add("verify", cmd_verify, "probe a certificate with random perturbations", n_default=8)
    sp.add_argument("--cert", required=True, help="certificate JSON from 'jsr cert'")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--n-probe", type=int, default=None)

    add("elsner", cmd_elsner, "check the order-1/d spectral radius bound for two matrices")

    sp = add("resolvent", cmd_resolvent, "resolvent lower-bound certificate for one matrix")
    sp.add_argument("--delta", type=float, default=None)
    sp.add_argument("--samples", type=int, default=720)

    sp = add("dim2", cmd_dim2, "check the 6Lk growth bound for 2x2 sets", n_default=10)
    sp.add_argument("--kmax", type=int, default=20)

    sp = add("lift", cmd_lift, "continuous-time lift and Lyapunov lower bound", n_default=4)
    sp.add_argument("--steps", type=int, default=8)
    sp.add_argument("--samples", type=int, default=16)
    sp.add_argument("--export", help="write the lifted set as matrix-set JSON")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.budget is not None and args.budget < 1:
        parser.error("--budget must be positive")
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"jsr: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InconclusiveError as exc:
        print(f"jsr: inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except (InvalidInputError, PreconditionError) as exc:
        print(f"jsr: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
