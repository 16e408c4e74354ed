"""Command-line front end: ``twistlab <subcommand> [options]``.

Exit codes: 0 success, 1 domain or validation error (a JSON error record is
written to stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional

from . import arith, conditions, curves, density, qexp
from .errors import TwistlabError, ValidationError

BOUND_CAP = 10**9
DEFAULT_BOUND = 10**6


# ---------------------------------------------------------------------------
# curve files


def _field(rec: dict, *names, required: bool = False):
    for n in names:
        if n in rec and rec[n] is not None:
            return rec[n]
    if required:
        raise ValidationError(f"curve record is missing field {names[0]!r}")
    return None


def curve_from_record(rec: dict) -> curves.CurveSpec:
    """Build a CurveSpec from its own field names or an LMFDB-style export."""
    if not isinstance(rec, dict):
        raise ValidationError("curve record must be a JSON object")
    ainvs = _field(rec, "a_invariants", "ainvs", required=True)
    if not isinstance(ainvs, list) or len(ainvs) != 5:
        raise ValidationError("field 'a_invariants' must be a list of 5 integers")
    try:
        ainvs = tuple(int(a) for a in ainvs)
    except (TypeError, ValueError):
        raise ValidationError("field 'a_invariants' must hold integers") from None
    conductor = _field(rec, "conductor", required=True)
    label = _field(rec, "label", "lmfdb_label", "cremona_label")
    al = _field(rec, "atkin_lehner")
    tam = _field(rec, "tamagawa")
    if tam is None and "tamagawa_numbers" in rec and "bad_primes" in rec:
        tam = dict(zip(rec["bad_primes"], rec["tamagawa_numbers"]))
    rank = _field(rec, "rank")
    try:
        return curves.CurveSpec(
            ainvs,
            int(conductor),
            label,
            {int(q): int(w) for q, w in al.items()} if al is not None else None,
            {int(q): int(c) for q, c in tam.items()} if tam is not None else None,
            int(rank) if rank is not None else None,
        )
    except (TypeError, AttributeError) as exc:
        raise ValidationError(f"malformed curve record: {exc}") from None


def load_curve(path) -> curves.CurveSpec:
    """Read a curve file; a bare fixture name such as ``11a1`` loads bundled data."""
    p = Path(path)
    if p.exists():
        text = p.read_text()
    else:
        name = p.name if p.suffix == ".json" else p.name + ".json"
        bundled = resources.files("twistlab") / "data" / name
        if not bundled.is_file():
            raise ValidationError(f"curve file {str(path)!r} not found")
        text = bundled.read_text()
    try:
        rec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"curve file {str(path)!r} is not valid JSON: {exc}") from None
    return curve_from_record(rec)


# ---------------------------------------------------------------------------
# output


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return density.rational_record(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _flatten(rec, prefix=""):
    if isinstance(rec, dict):
        for k, v in rec.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(rec, list) and any(isinstance(v, (dict, list)) for v in rec):
        for i, v in enumerate(rec):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        if isinstance(rec, list):
            rec = " ".join(str(v) for v in rec)
        yield prefix, "" if rec is None else rec


def emit(result, fmt: str, out) -> None:
    """Write a record (or DensityReport) in the requested format."""
    if isinstance(result, density.DensityReport):
        if fmt == "csv":
            w = csv.writer(out, lineterminator="\n")
            w.writerow(density.CSV_HEADER)
            w.writerow(result.csv_row())
            for b in result.breakdown:
                w.writerow(b.csv_row())
            return
        result = result.to_record()
    elif isinstance(result, density.SubdensityBundle):
        if fmt == "csv":
            w = csv.writer(out, lineterminator="\n")
            w.writerow(density.CSV_HEADER)
            for r in result.reports():
                w.writerow(r.csv_row())
            return
        result = result.to_record()
    rec = _jsonable(result)
    if fmt == "json":
        out.write(json.dumps(rec, sort_keys=False) + "\n")
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["field", "value"])
        for k, v in _flatten(rec):
            w.writerow([k, v])
    else:
        for k, v in _flatten(rec):
            out.write(f"{k}: {v}\n")


# ---------------------------------------------------------------------------
# argument types


def _bound(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid bound {text!r}") from None
    if v < 1 or v > BOUND_CAP:
        raise argparse.ArgumentTypeError(f"bound must lie in [1, {BOUND_CAP}]")
    return v


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid positive integer {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _prime_ge5(text: str) -> int:
    v = _positive(text)
    if v < 5 or not arith.is_prime(v):
        raise argparse.ArgumentTypeError(f"p must be a prime >= 5, got {v}")
    return v


def _mode(text: str) -> conditions.ConditionCMode:
    try:
        return conditions.ConditionCMode(text)
    except ValueError:
        raise argparse.ArgumentTypeError("mode must be strict or lenient") from None


# ---------------------------------------------------------------------------
# subcommands


def cmd_curve_info(args):
    E = load_curve(args.curve)
    rec = E.to_record()
    rec["discriminant"] = E.discriminant
    rec["j_invariant"] = E.j_invariant
    rec["c4"], rec["c6"] = E.c4, E.c6
    rec["reduction"] = {str(q): curves.reduction_type(E, q).value for q in E.bad_primes}
    return rec


def cmd_ap(args):
    E = load_curve(args.curve)
    if args.ell is not None:
        t = curves.trace_of_frobenius(E, args.ell, args.method)
        return {"ell": t.prime, "a_ell": t.a_ell, "reduction": t.reduction.value, "method": t.method}
    primes, a = curves.traces_below(E, args.bound, args.threads)
    return {"bound": args.bound, "traces": {str(int(l)): int(x) for l, x in zip(primes, a)}}


def cmd_qexp_theta(args):
    return qexp.theta_series(args.precision).to_record()


def cmd_qexp_shimura(args):
    F = qexp.shimura_theta(args.r, args.t, args.precision)
    rec = F.to_record()
    rec["flags"] = sorted(F.flags)
    return rec


def cmd_qexp_newform(args):
    return qexp.newform_qexp(load_curve(args.curve), args.precision).to_record()


def _source_series(args) -> qexp.QExpansion:
    if args.source == "theta":
        F = qexp.theta_series(args.precision)
    elif args.source == "shimura":
        F = qexp.shimura_theta(args.r, args.t, args.precision)
    elif args.source == "newform":
        if args.curve is None:
            raise ValidationError("--curve is required for the newform source")
        F = qexp.newform_qexp(load_curve(args.curve), args.precision)
    else:
        if args.input is None:
            raise ValidationError("--input is required for the file source")
        try:
            F = qexp.QExpansion.from_record(json.loads(Path(args.input).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read q-expansion: {exc}") from None
    if getattr(args, "psi", None) not in (None, 1):
        F = qexp.twist_qexp(F, args.psi)
    return F


def cmd_qexp_twist(args):
    return _source_series(args).to_record()


def cmd_qexp_hecke(args):
    F = _source_series(args)
    res = qexp.hecke_Tp2(F, args.p)
    rec = {"operator_prime": res.operator_prime, "series": res.series.to_record()}
    if args.window:
        rec["eigenvalue"] = qexp.eigen_check(F, args.p, args.window)
    return rec


def cmd_family_key(args):
    E = load_curve(args.curve)
    return {"n": args.n, "p": args.p, "key": conditions.family_key(args.n, E, args.p).to_record()}


def cmd_same_family(args):
    E = load_curve(args.curve)
    return {
        "n1": args.n1,
        "n2": args.n2,
        "p": args.p,
        "same_family": conditions.same_family(args.n1, args.n2, E, args.p),
    }


def cmd_admissible(args):
    E = load_curve(args.curve)
    chi = conditions.ProductCharacter.parse(args.chi)
    return conditions.kartik_admissible(args.s, E, chi, args.mode).to_record()


def cmd_enumerate_admissible(args):
    E = load_curve(args.curve)
    chi = conditions.ProductCharacter.parse(args.chi) if args.chi else None
    found = conditions.enumerate_admissible(E, args.bound, chi, args.p, args.mode)
    return {"bound": args.bound, "admissible": [v.to_record() for v in found]}


def cmd_assumption_check(args):
    return conditions.assumption_check(load_curve(args.curve), args.p, args.d).to_record()


def cmd_combination_check(args):
    return conditions.combination_check(load_curve(args.curve), args.p, args.s, args.d).to_record()


def cmd_density_predict(args):
    val = density.predicted_split_density(args.variant, args.p, args.s_factors, args.e)
    return {"variant": args.variant, "p": args.p, "s_factors": args.s_factors, "e": args.e, "density": val}


def cmd_density_discriminants(args):
    E = load_curve(args.curve)
    return density.empirical_discriminant_density(E, args.bound, args.p, args.squarefree)


def cmd_density_primes(args):
    E = load_curve(args.curve)
    return density.empirical_prime_twist_density(
        E, args.p, args.bound, args.sign, args.threads, not args.no_surjective
    )


def cmd_subdensities(args):
    return density.empirical_subdensities(load_curve(args.curve), args.p, args.bound, args.threads)


def cmd_example_4_14(args):
    return density.example_4_14_density(args.p, args.bound)


def cmd_selftest(args):
    from .selftest import run_all

    results = run_all()
    ok = all(r["ok"] for r in results)
    return {"ok": ok, "checks": results}


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--threads", type=_positive, default=None,
                        help="worker processes (TWISTLAB_THREADS overrides)")

    curve = argparse.ArgumentParser(add_help=False)
    curve.add_argument("--curve", required=True, help="curve JSON file or bundled fixture name")

    parser = argparse.ArgumentParser(prog="twistlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, func, parents=(), help=None):
        sp = sub.add_parser(name, parents=[common, *parents], help=help)
        sp.set_defaults(func=func)
        return sp

    add("curve-info", cmd_curve_info, [curve], "invariants and reduction data")

    sp = add("ap", cmd_ap, [curve], "traces of Frobenius")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--ell", type=_positive)
    g.add_argument("--bound", type=_bound)
    sp.add_argument("--method", choices=("auto", "exhaustive", "bsgs"), default="auto")

    sp = add("qexp-theta", cmd_qexp_theta, help="theta series")
    sp.add_argument("--precision", type=_positive, default=100)

    sp = add("qexp-shimura", cmd_qexp_shimura, help="weight 3/2 Shimura theta series")
    sp.add_argument("--r", type=_positive, required=True, help="odd square-free character modulus")
    sp.add_argument("--t", type=_positive, default=1)
    sp.add_argument("--precision", type=_positive, default=100)

    sp = add("qexp-newform", cmd_qexp_newform, [curve], "weight 2 newform of E")
    sp.add_argument("--precision", type=_positive, default=100)

    for name, func, hlp in (
        ("qexp-twist", cmd_qexp_twist, "twist a q-expansion by a quadratic character"),
        ("qexp-hecke", cmd_qexp_hecke, "apply T(p^2) to a half-integral weight form"),
    ):
        sp = add(name, func, help=hlp)
        sp.add_argument("--source", choices=("theta", "shimura", "newform", "file"), default="theta")
        sp.add_argument("--r", type=_positive, default=3)
        sp.add_argument("--t", type=_positive, default=1)
        sp.add_argument("--curve")
        sp.add_argument("--input", help="q-expansion JSON record (source=file)")
        sp.add_argument("--precision", type=_positive, default=1000)
        sp.add_argument("--psi", type=int, default=None if name == "qexp-hecke" else -4,
                        help="fundamental discriminant of the twisting character")
        if name == "qexp-hecke":
            sp.add_argument("--p", type=_positive, required=True)
            sp.add_argument("--window", type=_positive, default=None,
                            help="also report the eigenvalue read off n < WINDOW")

    sp = add("family-key", cmd_family_key, [curve], "twist family of n at p")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=_positive, required=True)

    sp = add("same-family", cmd_same_family, [curve], "whether n1, n2 share a twist family")
    sp.add_argument("--n1", type=int, required=True)
    sp.add_argument("--n2", type=int, required=True)
    sp.add_argument("--p", type=_positive, required=True)

    sp = add("admissible", cmd_admissible, [curve], "conditions (a), (b), (c) for s")
    sp.add_argument("--s", type=int, required=True)
    sp.add_argument("--chi", default="trivial")
    sp.add_argument("--mode", type=_mode, default=conditions.ConditionCMode.STRICT)

    sp = add("enumerate-admissible", cmd_enumerate_admissible, [curve], "admissible s below a bound")
    sp.add_argument("--bound", type=_bound, default=100)
    sp.add_argument("--chi", default=None)
    sp.add_argument("--p", type=_positive, default=None)
    sp.add_argument("--mode", type=_mode, default=conditions.ConditionCMode.STRICT)

    sp = add("assumption-check", cmd_assumption_check, [curve], "assumptions (i)-(iv) for Q(sqrt d)")
    sp.add_argument("--p", type=_prime_ge5, required=True)
    sp.add_argument("--d", type=int, required=True)

    sp = add("combination-check", cmd_combination_check, [curve], "hypothesis bundle for (s, d)")
    sp.add_argument("--p", type=_prime_ge5, required=True)
    sp.add_argument("--s", type=_positive, required=True)
    sp.add_argument("--d", type=int, required=True)

    sp = add("density-predict", cmd_density_predict, help="closed-form split densities")
    sp.add_argument("--variant", choices=density.VARIANTS, default="thm54")
    sp.add_argument("--p", type=_prime_ge5, required=True)
    sp.add_argument("--s-factors", type=int, required=True)
    sp.add_argument("--e", type=int, choices=(0, 1), default=0)

    sp = add("density-discriminants", cmd_density_discriminants, [curve], "admissible discriminant density")
    sp.add_argument("--bound", type=_bound, default=DEFAULT_BOUND)
    sp.add_argument("--p", type=_positive, default=None)
    sp.add_argument("--squarefree", action="store_true")

    sp = add("density-primes", cmd_density_primes, [curve], "density of good twisting primes")
    sp.add_argument("--p", type=_prime_ge5, required=True)
    sp.add_argument("--bound", type=_bound, default=DEFAULT_BOUND)
    sp.add_argument("--sign", choices=("plus", "minus", "both"), default="both")
    sp.add_argument("--no-surjective", action="store_true",
                    help="do not assume a surjective mod-p representation")

    sp = add("subdensities", cmd_subdensities, [curve], "the three Chebotarev sub-densities")
    sp.add_argument("--p", type=_prime_ge5, required=True)
    sp.add_argument("--bound", type=_bound, default=DEFAULT_BOUND)

    sp = add("example-4-14", cmd_example_4_14, help="discriminant density for the 11a1 example")
    sp.add_argument("--p", type=_positive, default=7)
    sp.add_argument("--bound", type=_bound, default=DEFAULT_BOUND)

    add("selftest", cmd_selftest, help="run the built-in oracle checks")
    return parser


def _threads(cli_value: Optional[int]) -> int:
    env = os.environ.get("TWISTLAB_THREADS")
    if env:
        try:
            v = int(env)
        except ValueError:
            raise ValidationError(f"TWISTLAB_THREADS={env!r} is not an integer") from None
        if v < 1:
            raise ValidationError("TWISTLAB_THREADS must be positive")
        return v
    return cli_value or os.cpu_count() or 1


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.threads = _threads(args.threads)
        result = args.func(args)
        buf = io.StringIO()
        emit(result, args.format, buf)
    except (TwistlabError, ValueError, ArithmeticError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        stderr.write(json.dumps(err) + "\n")
        return 1
    stdout.write(buf.getvalue())
    if args.command == "selftest" and not result["ok"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
