"""Command-line driver.

Each subcommand reads a coefficient file, runs one diagnostic and writes a
JSON report (with its run manifest embedded) plus CSV plot data into
``--out``.  Exit status: 0 verdict computed, 2 inconclusive (truncation
dominates), 1 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import scalars as sc
from .basis import (DEFAULT_FLOOR, LeadingCoefficientZero, InconsistentSystem, frame_bounds,
                    norm_profile, omega_solve, riesz_probe)
from .bohr import Tau, bohr_lift, bohr_lift_t, sample_moduli
from .criteria import (DEFAULT_RESOLUTION, INCONCLUSIVE, inner_test, orthogonality_test,
                       tau_symmetry_test)
from .fixtures import COEFF_SETS, blaschke, monomial, random_series
from .io import (InputError, RunManifest, envelope, read_series, write_csv, write_report,
                 write_series)
from .moment import (MomentError, MomentProblem, boundedness_probe, build_operator,
                     isometry_check, operator_norm_estimate)
from .scalars import EXACT, FLOAT, ExactnessError, ModeError
from .series import gram

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INCONCLUSIVE = 2

# coefficient files list every index up to the cap
MAX_DENSE_EXPONENT = 22


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def parse_t(text: str):
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError):
        try:
            return float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid t: {text!r}") from None
    return int(v) if v.denominator == 1 else float(v)


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t", type=parse_t, default=None, help="Dirichlet parameter (overrides the file)")
    p.add_argument("--k-cap", type=_positive, default=None,
                   help="number of dilations K (default 8; probe cap for frame-bounds)")
    p.add_argument("--degree-cap", type=_positive, default=None, help="degree cap N")
    p.add_argument("--pairs-cap", type=_positive, default=8, help="largest i, j in coprime pairs")
    p.add_argument("--samples", type=_positive, default=10_000, help="torus samples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=[EXACT, FLOAT], default=None)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--resolution", type=float, default=DEFAULT_RESOLUTION,
                   help="largest truncation bound accepted as a zero")
    p.add_argument("--floor", type=float, default=DEFAULT_FLOOR, help="lower-modulus floor")
    p.add_argument("--timestamp", default=None, help="fixed manifest timestamp (reproducible reports)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dilation-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a fixture coefficient file")
    g.add_argument("kind", choices=["blaschke", "monomial", "random"])
    g.add_argument("--a", default="1/2", help="Blaschke zero, real part")
    g.add_argument("--a-im", default="0", help="Blaschke zero, imaginary part")
    g.add_argument("--M", type=_positive, default=12, help="Blaschke truncation exponent (cap 2^M)")
    g.add_argument("--degree", type=_positive, default=1, help="monomial degree")
    g.add_argument("--c", default="1", help="monomial coefficient (rational)")
    g.add_argument("--support-size", type=_positive, default=2)
    g.add_argument("--coeff-set", choices=sorted(COEFF_SETS), default="units")
    g.add_argument("--name", default=None, help="output file name (default <kind>.json)")
    _common(g)

    for name, helptext in [("gram", "Gram matrix of the dilation system"),
                           ("ortho", "orthogonality test"),
                           ("inner", "constant-modulus test of the Bohr lift"),
                           ("tau-sym", "tau pairing identity and equivalence"),
                           ("riesz-probe", "sampled symbol bounds and basis verdict"),
                           ("frame-bounds", "Bessel ratios over monomial probes"),
                           ("norm-profile", "norms of the dilations")]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("input", help="coefficient file")
        _common(p)
        if name == "frame-bounds":
            p.add_argument("--probe-cap", type=_positive, default=64)
            p.add_argument("--ladder-prime", type=int, default=2)
        if name == "tau-sym":
            p.add_argument("--tau", default="star", help="'star', 'ones' or comma-separated radii")

    o = sub.add_parser("omega-solve", help="recover c from g = sum c_k f(z^k)")
    o.add_argument("input", help="coefficient file for f")
    o.add_argument("target", help="coefficient file for g")
    _common(o)

    m = sub.add_parser("moment", help="moment problem diagnostics")
    m.add_argument("input", help="moment problem JSON")
    _common(m)
    return parser


def _load(path, args, need_exact_ok=True):
    f, t_file = read_series(path)
    t = args.t if args.t is not None else t_file
    if args.mode == FLOAT and f.mode == EXACT:
        f = f.to_float()
    elif args.mode == EXACT and f.mode == FLOAT:
        raise InputError("cannot convert a float coefficient file to exact mode")
    if args.degree_cap is not None:
        try:
            f = f.with_degree_cap(args.degree_cap)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    return f, t


def _manifest(args, inputs, caps, seed=None, tolerances=None) -> RunManifest:
    kw = {}
    if args.timestamp is not None:
        kw["timestamp"] = args.timestamp
    return RunManifest(command=args.command, inputs=[str(x) for x in inputs], caps=caps, seed=seed,
                       tolerances=tolerances or {}, out_dir=str(args.out), **kw)


def _k(args, default=8) -> int:
    return args.k_cap if args.k_cap is not None else default


def _finish(args, manifest, result, verdict, status) -> int:
    path = write_report(args.out, args.command.replace("-", "_"), envelope(manifest, result, verdict, status))
    print(f"{verdict}\t{path}")
    return status


def cmd_gen(args) -> int:
    mode = args.mode or EXACT
    if args.kind == "blaschke":
        a = sc.to_scalar((args.a, args.a_im), EXACT)
        if mode == FLOAT:
            a = complex(a)
        try:
            f = blaschke(a, args.M, mode)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        caps = {"M": args.M}
        if args.M > MAX_DENSE_EXPONENT:
            raise InputError(f"--M {args.M} exceeds {MAX_DENSE_EXPONENT} (coefficient files are dense)")
    elif args.kind == "monomial":
        f = monomial(args.degree, sc.to_scalar(args.c, mode), mode)
        caps = {"degree": args.degree}
    else:
        cap = args.degree_cap or 12
        f = random_series(args.seed, args.support_size, cap, args.coeff_set, mode)
        caps = {"degree_cap": cap, "support_size": args.support_size}
    t = args.t if args.t is not None else 0
    target = Path(args.out) / (args.name or f"{args.kind}.json")
    write_series(target, f, t)
    manifest = _manifest(args, [], caps, args.seed if args.kind == "random" else None)
    return _finish(args, manifest, {"path": str(target), "kind": args.kind, "support": list(f.support)},
                   "written", EXIT_OK)


def cmd_gram(args) -> int:
    f, t = _load(args.input, args)
    rep = gram(f, t, _k(args))
    write_csv(args.out, "gram", ["row", "col", "re", "im", "tail_bound"], rep.csv_rows())
    result = {"t": t, "k_cap": rep.k_cap, "mode": rep.mode, "degree_cap": rep.degree_cap,
              "hermitian": rep.is_hermitian(),
              "entries": [[sc.scalar_to_json(e, rep.mode) for e in row] for row in rep.entries],
              "tail_bounds": rep.tail_bounds}
    manifest = _manifest(args, [args.input], {"k_cap": _k(args), "degree_cap": f.degree_cap})
    return _finish(args, manifest, result, "computed", EXIT_OK)


def _residual_csv(args, name, report):
    rows = [(p.i, p.j, p.k, sc.fmt_real(abs(p.residual)), repr(p.tail_bound), p.status) for p in report.pairs]
    write_csv(args.out, name, ["i", "j", "k", "abs_residual", "tail_bound", "status"], rows)


def cmd_ortho(args) -> int:
    f, t = _load(args.input, args)
    rep = orthogonality_test(f, t, max(_k(args), 2), args.resolution)
    _residual_csv(args, "residuals", rep)
    manifest = _manifest(args, [args.input], {"k_cap": _k(args), "degree_cap": f.degree_cap},
                         tolerances={"resolution": args.resolution})
    status = EXIT_INCONCLUSIVE if rep.verdict == INCONCLUSIVE else EXIT_OK
    return _finish(args, manifest, rep.to_json(), rep.verdict, status)


def cmd_inner(args) -> int:
    f, _ = _load(args.input, args)
    rep = inner_test(bohr_lift(f), args.pairs_cap, args.resolution)
    _residual_csv(args, "residuals", rep)
    manifest = _manifest(args, [args.input], {"pairs_cap": args.pairs_cap, "degree_cap": f.degree_cap},
                         tolerances={"resolution": args.resolution})
    status = EXIT_INCONCLUSIVE if rep.verdict == INCONCLUSIVE else EXIT_OK
    return _finish(args, manifest, rep.to_json(), rep.verdict, status)


def _parse_tau(text: str) -> Tau:
    if text == "star":
        return Tau.star()
    if text == "ones":
        return Tau.ones()
    try:
        radii = tuple(Fraction(x.strip()) for x in text.split(","))
        return Tau.explicit(radii)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad --tau: {text!r}") from exc


def cmd_tau_sym(args) -> int:
    f, _ = _load(args.input, args)
    rep = tau_symmetry_test(bohr_lift(f), _parse_tau(args.tau), args.pairs_cap, resolution=args.resolution)
    manifest = _manifest(args, [args.input], {"pairs_cap": args.pairs_cap},
                         tolerances={"resolution": args.resolution})
    verdict = "identity_holds" if rep.identity_holds else "identity_fails"
    inconclusive = INCONCLUSIVE in (rep.modulus_verdict, rep.product_verdict)
    return _finish(args, manifest, rep.to_json(), verdict, EXIT_INCONCLUSIVE if inconclusive else EXIT_OK)


def cmd_riesz_probe(args) -> int:
    f, t = _load(args.input, args)
    v = riesz_probe(f, t, args.samples, args.seed, args.floor)
    g = f if f.mode == FLOAT or sc.is_even_integer(t) else f.to_float()
    mods = sample_moduli(bohr_lift_t(g, t).to_float(), args.samples, args.seed)
    counts, edges = np.histogram(mods, bins=50)
    write_csv(args.out, "modulus_histogram", ["bin_lo", "bin_hi", "count"],
              [(repr(float(edges[i])), repr(float(edges[i + 1])), int(counts[i])) for i in range(len(counts))])
    manifest = _manifest(args, [args.input], {"samples": args.samples}, args.seed,
                         {"floor": args.floor})
    status = EXIT_INCONCLUSIVE if v.kind == "inconclusive" else EXIT_OK
    return _finish(args, manifest, v.to_json(), v.kind, status)


def cmd_frame_bounds(args) -> int:
    f, t = _load(args.input, args)
    rep = frame_bounds(f, t, _k(args, args.probe_cap), args.probe_cap, args.ladder_prime)
    ladder = {q for q, _ in rep.trend}
    write_csv(args.out, "bessel_ratios", ["probe", "ratio", "on_ladder"],
              [(n, sc.fmt_real(r), int(n in ladder)) for n, r in rep.ratios])
    manifest = _manifest(args, [args.input], {"k_cap": rep.k_cap, "probe_cap": args.probe_cap,
                                              "ladder_prime": args.ladder_prime})
    return _finish(args, manifest, rep.to_json(), rep.trend_direction, EXIT_OK)


def cmd_norm_profile(args) -> int:
    f, t = _load(args.input, args)
    prof = norm_profile(f, t, _k(args))
    write_csv(args.out, "norm_profile", ["k", "norm_sq", "norm"],
              [(k, sc.fmt_real(s), repr(n)) for k, (s, n) in enumerate(zip(prof.norms_sq, prof.norms), start=1)])
    manifest = _manifest(args, [args.input], {"k_cap": _k(args)})
    return _finish(args, manifest, prof.to_json(), prof.trend, EXIT_OK)


def cmd_omega_solve(args) -> int:
    f, _ = _load(args.input, args)
    g, _ = _load(args.target, args)
    manifest = _manifest(args, [args.input, args.target], {"k_cap": _k(args)})
    try:
        c = omega_solve(f, g, _k(args))
    except LeadingCoefficientZero as exc:
        _finish(args, manifest, {"error": str(exc)}, "leading_coefficient_zero", EXIT_INPUT)
        return EXIT_INPUT
    except InconsistentSystem as exc:
        _finish(args, manifest, {"error": str(exc), "degree": exc.n}, "inconsistent", EXIT_INPUT)
        return EXIT_INPUT
    result = {"mode": f.mode, "c": [sc.scalar_to_json(x, f.mode) for x in c]}
    return _finish(args, manifest, result, "solved", EXIT_OK)


def _parse_lambda(item, mode):
    if isinstance(item, list):
        return sc.scalar_from_json(item, mode)
    if isinstance(item, str):
        return sc.to_scalar(item, mode)
    if mode == EXACT:
        if isinstance(item, float) and not item.is_integer():
            raise InputError("exact lambdas must be rational")
        return sc.to_scalar(int(item), EXACT)
    return complex(item)


def load_moment_problem(path, args) -> MomentProblem:
    path = Path(path)
    try:
        prob = json.loads(path.read_text(encoding="utf-8"))
        f_path = Path(prob["f"])
        if not f_path.is_absolute():
            f_path = path.parent / f_path
        f, t_file = _load(f_path, args)
        t = args.t if args.t is not None else prob.get("t", t_file)
        k_cap = int(prob.get("k_cap", _k(args)))
        lambdas = [_parse_lambda(x, f.mode) for x in prob["lambdas"]]
        return MomentProblem(f, t, lambdas, k_cap, prob.get("degree_cap"))
    except (OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"malformed moment problem {path}: {exc}") from exc


def cmd_moment(args) -> int:
    p = load_moment_problem(args.input, args)
    op = build_operator(p)
    iso = isometry_check(op)
    bnd = boundedness_probe(p, args.samples, args.seed, args.floor)
    est = operator_norm_estimate(op)
    result = {"t": p.t, "k_cap": p.k_cap, "degree_cap": p.degree_cap, "isometry": iso.to_json(),
              "boundedness": bnd.to_json(),
              "operator_norm": {"value": est.value, "iterations": est.iterations, "residual": est.residual}}
    manifest = _manifest(args, [args.input], {"k_cap": p.k_cap, "degree_cap": p.degree_cap,
                                              "samples": args.samples}, args.seed, {"floor": args.floor})
    return _finish(args, manifest, result, "isometric" if iso.isometric else "non_isometric", EXIT_OK)


COMMANDS = {
    "gen": cmd_gen, "gram": cmd_gram, "ortho": cmd_ortho, "inner": cmd_inner, "tau-sym": cmd_tau_sym,
    "riesz-probe": cmd_riesz_probe, "frame-bounds": cmd_frame_bounds, "omega-solve": cmd_omega_solve,
    "moment": cmd_moment, "norm-profile": cmd_norm_profile,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (InputError, ModeError, ExactnessError, MomentError, OverflowError) as exc:
        print(f"dilation-lab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
