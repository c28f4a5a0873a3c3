"""``dq``: command-line access to the toolkit.

Every subcommand writes a JSON document or a CSV table to stdout, or to
``--out``.  Exit status is 0 on success, 2 on usage or expression errors
and 1 on any other failure (including a failing verification suite).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from .errors import ParseError, StarQuantError
from .grid import GridSpec, marginal, sample
from .kernel import eigenfunction_kernel, kernel_to_phase, mehler_kernel, slice_compose
from .oscillator import MAX_PROJECTOR_INDEX, StarExponential, projector, spectrum, star_exponential_ode
from .orthopoly import oscillator_momentum_densities, oscillator_wavefunctions
from .parser import format_poly, parse_expr
from .poly import PhysParams
from .star import SCHEMES, star_poly
from .verify import SUITES, run_suite
from .weyl import ORDERINGS, theta_order

ENV_PARAMS = {"hbar": "DQ_HBAR", "mass": "DQ_MASS", "omega": "DQ_OMEGA"}


class UsageError(Exception):
    pass


# -- serialization ------------------------------------------------------------------------


def _fmt_float(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    if x == 0:
        return "0"
    return format(x, ".17g")


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON: sorted keys, 17 significant digits, complex as {"re", "im"}."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, np.generic):
        obj = obj.item()
    if obj is None or isinstance(obj, bool):
        return {None: "null", True: "true", False: "false"}[obj]
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, complex):
        obj = {"re": obj.real, "im": obj.imag}
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{to_json(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.generic)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(to_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + to_json(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _poly_terms(f):
    return [
        {"i": i, "j": j, "hbar_power": k, "coeff": complex(c)}
        for (i, j, k), c in sorted(f.terms.items())
    ]


# -- configuration ------------------------------------------------------------------------


def _positive(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not x > 0 or not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return x


def _nonneg_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if n < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative: {n}")
    return n


def resolve_params(args, environ=None) -> PhysParams:
    """Flags beat environment variables, which beat the unit defaults."""
    environ = os.environ if environ is None else environ
    values = {}
    for name, var in ENV_PARAMS.items():
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
        elif environ.get(var):
            try:
                values[name] = _positive(environ[var])
            except argparse.ArgumentTypeError as exc:
                raise UsageError(f"{var}: {exc}")
        else:
            values[name] = 1.0
    return PhysParams(**values)


def _grid(args, params) -> GridSpec:
    return GridSpec(args.nq, args.np, args.lq, args.lp, params)


# -- subcommands --------------------------------------------------------------------------


def cmd_star(args, params):
    f = parse_expr(args.f)
    g = parse_expr(args.g)
    h = star_poly(f, g, args.scheme, params)
    doc = {"scheme": args.scheme, "f": format_poly(f), "g": format_poly(g), "result": format_poly(h), "basis": h.basis, "terms": _poly_terms(h)}
    rows = [(t["i"], t["j"], t["hbar_power"], t["coeff"].real, t["coeff"].imag) for t in doc["terms"]]
    return doc, (["i", "j", "hbar_power", "re", "im"], rows)


def cmd_spectrum(args, params):
    lines = spectrum(args.scheme, args.n_max, params)
    levels = [{"n": l.index, "energy": l.energy, "residual_norm": l.residual} for l in lines]
    doc = {"scheme": args.scheme, "params": _params_doc(params), "levels": levels}
    return doc, (["n", "energy", "residual_norm"], [(l["n"], l["energy"], l["residual_norm"]) for l in levels])


def cmd_projector(args, params):
    pi = projector(args.n, args.scheme, args.method)
    norm = pi.integrate()
    doc = {
        "n": args.n,
        "scheme": args.scheme,
        "method": args.method,
        "prefactor": format_poly(pi.prefactor),
        "mu": complex(pi.mu),
        "exponent": f"({_fmt_float(pi.mu.real)})*a*abar/hbar",
        "terms": _poly_terms(pi.prefactor),
        "normalization": complex(norm.evaluate(params.hbar)),
    }
    rows = [(t["i"], t["j"], t["hbar_power"], t["coeff"].real, t["coeff"].imag) for t in doc["terms"]]
    return doc, (["i", "j", "hbar_power", "re", "im"], rows)


def _check_level(n):
    if n > MAX_PROJECTOR_INDEX:
        raise ValueError(f"level {n} is out of range; projectors are available for 0 <= n <= {MAX_PROJECTOR_INDEX}")


def cmd_wigner(args, params):
    _check_level(args.n)
    spec = _grid(args, params)
    f = sample(projector(args.n, args.scheme), spec)
    if args.figure:
        from .plotting import plot_wigner

        plot_wigner(f, args.figure, title=f"level {args.n} ({args.scheme})")
    rows = [(q, p, f.values[i, j].real, f.values[i, j].imag) for i, q in enumerate(spec.q) for j, p in enumerate(spec.p)]
    doc = {"n": args.n, "scheme": args.scheme, "q": spec.q, "p": spec.p, "re": f.values.real, "im": f.values.imag}
    return doc, (["q", "p", "re", "im"], rows)


def cmd_marginal(args, params):
    _check_level(args.n)
    spec = _grid(args, params)
    f = sample(projector(args.n), spec)
    x, values = marginal(f, args.axis)
    hb, m, w = params.hbar, params.mass, params.omega
    if args.axis == "q":
        exact = oscillator_wavefunctions(args.n, x, hb, m, w)[args.n] ** 2
    else:
        exact = oscillator_momentum_densities(args.n, x, hb, m, w)[args.n]
    values = np.real(values)
    if args.figure:
        from .plotting import plot_marginal

        plot_marginal(x, values, args.figure, reference=exact, axis=args.axis, title=f"level {args.n}")
    doc = {"n": args.n, "axis": args.axis, "x": x, "value": values, "exact": exact, "max_abs_diff": float(np.max(np.abs(values - exact)))}
    return doc, (["x", "value", "exact"], list(zip(x, values, exact)))


def cmd_evolve(args, params):
    exp = StarExponential(args.scheme, params)
    if args.method == "ode":
        if args.scheme != "moyal":
            raise ValueError("the ODE integrator implements the Moyal evolution equation only")
        r = star_exponential_ode(args.t, h_max=args.h_max, n_points=args.points, params=params)
        H, values = r.H, r.values
        extra = {"steps": r.steps, "dt": r.dt}
    else:
        H = np.linspace(0.0, args.h_max, args.points)
        values = exp(H, args.t)
        extra = {}
    closed = exp(H, args.t)
    err = float(np.max(np.abs(values - closed) / np.abs(closed)))
    if args.figure:
        from .plotting import plot_evolution

        plot_evolution(H, values, args.figure, reference=closed if args.method == "ode" else None, title=f"t = {args.t:g}")
    doc = {"scheme": args.scheme, "method": args.method, "t": args.t, "H": H, "value": values.astype(complex).tolist(), "max_rel_err_vs_closed": err}
    doc.update(extra)
    return doc, (["H", "re", "im"], [(h, v.real, v.imag) for h, v in zip(H, values)])


def cmd_kernel(args, params):
    exact = mehler_kernel(args.t, params)
    doc = {"method": args.method, "t": args.t, "mehler": exact.coefficients()}
    if args.method == "mehler":
        K = exact
    elif args.method == "slices":
        K = slice_compose(args.t, args.slices, params, rule=args.rule)
        doc.update(slices=args.slices, rule=args.rule, max_rel_coeff_err=K.rel_diff(exact))
    else:
        t = complex(args.t, -args.damping / params.omega)
        value = eigenfunction_kernel(t, args.n_max, args.q1, args.q2, params)
        reference = mehler_kernel(t, params)(args.q2, args.q1)
        doc.update(n_max=args.n_max, q1=args.q1, q2=args.q2, damping=args.damping, value=value, mehler_value=complex(reference), rel_err=abs(value - reference) / abs(reference))
        return doc, (["q1", "q2", "re", "im", "mehler_re", "mehler_im"], [(args.q1, args.q2, value.real, value.imag, reference.real, reference.imag)])
    doc["coefficients"] = K.coefficients()
    rows = [(k, complex(v).real, complex(v).imag) for k, v in K.coefficients().items()]
    return doc, (["coefficient", "re", "im"], rows)


def cmd_weyl(args, params):
    f = parse_expr(args.f)
    op = theta_order(f, args.ordering, args.dim, params)
    M = np.asarray(op)
    doc = {"f": format_poly(f), "ordering": args.ordering, "dim": args.dim, "matrix": [[complex(v) for v in row] for row in M]}
    rows = [(i, j, M[i, j].real, M[i, j].imag) for i in range(args.dim) for j in range(args.dim) if M[i, j] != 0]
    return doc, (["row", "col", "re", "im"], rows)


def cmd_bridge(args, params):
    q = np.linspace(-args.extent, args.extent, args.samples)
    Q, P = np.meshgrid(q, q, indexing="ij")
    exp = StarExponential("moyal", params)
    H = P**2 / (2 * params.mass) + params.mass * params.omega**2 * Q**2 / 2
    results = []
    rows = []
    for t in args.t:
        got = kernel_to_phase(t, Q, P, params)
        err = float(np.max(np.abs(got - exp(H, t)) / np.abs(exp(H, t))))
        results.append({"t": t, "max_rel_diff": err})
        rows.append((t, err))
    doc = {"samples": args.samples, "extent": args.extent, "times": results, "max_rel_diff": max(r["max_rel_diff"] for r in results)}
    return doc, (["t", "max_rel_diff"], rows)


def cmd_verify(args, params):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = [run_suite(n) for n in names]
    suites = [{"name": r.name, "passed": r.passed, "seconds": r.seconds, "details": r.details} for r in results]
    doc = {"suites": suites, "passed": all(r.passed for r in results), "total_seconds": sum(r.seconds for r in results)}
    rows = [(r.name, "pass" if r.passed else "FAIL", r.seconds) for r in results]
    return doc, (["suite", "status", "seconds"], rows)


# -- argument parsing ---------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    # defaults are suppressed so the flags may appear before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--hbar", type=_positive, default=argparse.SUPPRESS)
    p.add_argument("--mass", type=_positive, default=argparse.SUPPRESS)
    p.add_argument("--omega", type=_positive, default=argparse.SUPPRESS)
    p.add_argument("--out", default=argparse.SUPPRESS, help="write output here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)
    return p


def _grid_flags(p):
    p.add_argument("--nq", type=int, default=256)
    p.add_argument("--np", type=int, default=256)
    p.add_argument("--lq", type=_positive, default=None, help="half-extent in q")
    p.add_argument("--lp", type=_positive, default=None, help="half-extent in p")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="dq", description="Phase-space quantization of polynomial and oscillator problems.", parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)
    schemes = list(SCHEMES)

    p = sub.add_parser("star", parents=[common], help="star product of two polynomials")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--scheme", choices=schemes, default="moyal")
    p.set_defaults(func=cmd_star, default_format="json")

    p = sub.add_parser("spectrum", parents=[common], help="oscillator levels with genvalue residuals")
    p.add_argument("--scheme", choices=["moyal", "normal"], default="moyal")
    p.add_argument("--n-max", type=_nonneg_int, default=8)
    p.set_defaults(func=cmd_spectrum, default_format="json")

    p = sub.add_parser("projector", parents=[common], help="closed-form phase-space projector")
    p.add_argument("--n", type=_nonneg_int, required=True)
    p.add_argument("--scheme", choices=["moyal", "normal"], default="moyal")
    p.add_argument("--method", choices=["laguerre", "ladder", "transition"], default="laguerre")
    p.set_defaults(func=cmd_projector, default_format="json")

    p = sub.add_parser("wigner", parents=[common], help="sample a projector on a phase-space grid")
    p.add_argument("--n", type=_nonneg_int, required=True)
    p.add_argument("--scheme", choices=["moyal", "normal"], default="moyal")
    _grid_flags(p)
    p.add_argument("--figure", metavar="PATH", help="also render a PNG heatmap")
    p.set_defaults(func=cmd_wigner, default_format="csv")

    p = sub.add_parser("marginal", parents=[common], help="position or momentum density of a Wigner function")
    p.add_argument("--n", type=_nonneg_int, required=True)
    p.add_argument("--axis", choices=["q", "p"], default="q")
    _grid_flags(p)
    p.add_argument("--figure", metavar="PATH", help="also render a PNG plot")
    p.set_defaults(func=cmd_marginal, default_format="csv")

    p = sub.add_parser("evolve", parents=[common], help="star exponential Exp(Ht) as a function of H")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--scheme", choices=["moyal", "normal"], default="moyal")
    p.add_argument("--method", choices=["closed", "ode"], default="closed")
    p.add_argument("--h-max", type=_positive, default=6.0)
    p.add_argument("--points", type=int, default=256)
    p.add_argument("--figure", metavar="PATH", help="also render a PNG plot")
    p.set_defaults(func=cmd_evolve, default_format="csv")

    p = sub.add_parser("kernel", parents=[common], help="oscillator propagator coefficients")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--method", choices=["mehler", "slices", "eigen"], default="mehler")
    p.add_argument("--slices", type=int, default=512)
    p.add_argument("--rule", choices=["trapezoid", "midpoint"], default="trapezoid")
    p.add_argument("--n-max", type=_nonneg_int, default=60)
    p.add_argument("--q1", type=float, default=0.3)
    p.add_argument("--q2", type=float, default=-0.2)
    p.add_argument("--damping", type=float, default=0.5, help="imaginary time shift, in units of 1/omega")
    p.set_defaults(func=cmd_kernel, default_format="json")

    p = sub.add_parser("weyl", parents=[common], help="operator matrix of a polynomial under an ordering")
    p.add_argument("--f", required=True)
    p.add_argument("--ordering", choices=sorted(ORDERINGS), default="weyl")
    p.add_argument("--dim", type=int, default=8)
    p.set_defaults(func=cmd_weyl, default_format="json")

    p = sub.add_parser("bridge", parents=[common], help="Wigner transform of the Mehler kernel vs the star exponential")
    p.add_argument("--t", type=float, nargs="+", default=[0.3, 1.0, 2.0])
    p.add_argument("--samples", type=int, default=5)
    p.add_argument("--extent", type=_positive, default=2.0)
    p.set_defaults(func=cmd_bridge, default_format="json")

    p = sub.add_parser("verify", parents=[common], help="run self-check suites")
    p.add_argument("--suite", choices=sorted(SUITES) + ["all"], default="all")
    p.set_defaults(func=cmd_verify, default_format="json")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        params = resolve_params(args)
    except UsageError as exc:
        print(f"dq: {exc}", file=sys.stderr)
        return 2
    fmt = getattr(args, "format", None) or args.default_format
    try:
        doc, (header, rows) = args.func(args, params)
    except ParseError as exc:
        print(f"dq {args.command}: parse error: {exc}", file=sys.stderr)
        return 2
    except (StarQuantError, ValueError, KeyError) as exc:
        print(f"dq {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    text = to_json(doc) + "\n" if fmt == "json" else _csv_text(header, rows)
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "verify" and not doc["passed"]:
        return 1
    return 0


def _params_doc(params: PhysParams) -> dict:
    return {"hbar": params.hbar, "mass": params.mass, "omega": params.omega}


if __name__ == "__main__":
    sys.exit(main())
