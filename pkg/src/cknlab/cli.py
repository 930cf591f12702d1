"""Command-line front end.

Exit status: 0 success, 1 usage error, 2 invalid input, 3 numerical failure,
4 construction impossible or inconclusive verdict.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import constants as K
from . import counterexample as CE
from . import transform as T
from . import variational as V
from .errors import (
    ConstructionImpossible,
    InconclusiveError,
    NumericError,
    ValidationError,
)
from .exponents import ExponentSet
from .weights import classify, parse_weight

SCHEMA = 1

CSV_HELP = """CSV outputs:
  profile          rho,phi,H        one row per grid point
  degenerate-demo  j,lhs,rhs,quotient
  minimize         z,y,value        best trial (with --dump-csv)
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise UsageError(message)


def _fmt_floats(obj):
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return f"__F__{x:.17g}__"
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _fmt_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_fmt_floats(v) for v in obj]
    return obj


def dumps(obj) -> str:
    """JSON with every float written at 17 significant digits."""
    text = json.dumps(_fmt_floats(obj), indent=2, sort_keys=True)
    return re.sub(r'"__F__([^_"]+)__"', r"\1", text)


def _add_exponents(sp, need_npq=True):
    g = sp.add_argument_group("exponents")
    g.add_argument("--n", type=int, required=need_npq)
    g.add_argument("--p", type=float, required=need_npq)
    g.add_argument("--q", type=float, required=need_npq)
    g.add_argument("--gamma", type=float)
    g.add_argument("--R", type=float)
    g.add_argument("--mu", type=float, help="required whenever the weight is of class P")
    g.add_argument("--eta", type=float, default=1.0)


def _add_common(sp):
    sp.add_argument("--output", "-o", default="-")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="cknlab", description="Weighted CKN-type inequality toolkit",
                 epilog=CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    sp = sub.add_parser("classify", help="P/Q class of a weight")
    sp.add_argument("--weight", required=True)
    sp.add_argument("--eta", type=float, default=1.0)
    sp.add_argument("--order", action="store_true", help="also run infinite-order detection")
    _add_common(sp)

    for name in ("profile", "ndc"):
        sp = sub.add_parser(name, help="tabulate phi and H" if name == "profile" else "non-degenerate condition")
        sp.add_argument("--weight", required=True)
        _add_exponents(sp, need_npq=False)
        sp.add_argument("--grid-size", type=int, default=4096)
        sp.add_argument("--rho-min-factor", type=float, default=1e-8)
        if name == "ndc":
            sp.add_argument("--threshold", type=float, default=1e-6)
            sp.add_argument("--detect-order", action="store_true")
        _add_common(sp)

    sp = sub.add_parser("constants", help="closed-form best constants")
    _add_exponents(sp)
    _add_common(sp)

    sp = sub.add_parser("rayleigh", help="evaluate one radial quotient")
    sp.add_argument("--mode", choices=("noncritical", "critical", "weighted"), required=True)
    sp.add_argument("--weight")
    sp.add_argument("--trial", default="bump:lo=0.05,hi=0.6", help="bump:lo=<t>,hi=<t>")
    _add_exponents(sp)
    _add_common(sp)

    sp = sub.add_parser("minimize", help="upper-bound estimate of the radial infimum")
    sp.add_argument("--mode", choices=("noncritical", "critical", "weighted"), required=True)
    sp.add_argument("--weight")
    sp.add_argument("--budget", type=int, default=10_000)
    sp.add_argument("--dump-csv", help="write the best trial to this CSV path")
    _add_exponents(sp)
    _add_common(sp)

    sp = sub.add_parser("substitution", help="compare original and transformed integrals")
    sp.add_argument("--weight", required=True)
    sp.add_argument("--trial", default="bump:lo=0.05,hi=0.6")
    _add_exponents(sp)
    _add_common(sp)

    sp = sub.add_parser("degenerate-demo", help="failure sequence for degenerating H")
    sp.add_argument("--weight", required=True)
    sp.add_argument("--j-max", type=int, default=64)
    sp.add_argument("--beta", type=float)
    _add_exponents(sp)
    _add_common(sp)

    sp = sub.add_parser("lemma21", help="even extension versus half line in one dimension")
    sp.add_argument("--trial", default="bump:lo=0.05,hi=0.6")
    _add_exponents(sp)
    _add_common(sp)
    return ap


def _exponents(args) -> ExponentSet:
    # n, p, q only shape the quotients; profile and ndc run without them
    n = args.n if args.n is not None else 1
    p = args.p if args.p is not None else 2.0
    q = args.q if args.q is not None else 2.0
    exps = ExponentSet(n=n, p=p, q=q, gamma=args.gamma, R=args.R,
                       mu=args.mu if args.mu is not None else 1.0, eta=args.eta)
    args.resolved_exponents = exps.as_dict()
    return exps


def _weight_and_exps(args):
    w = parse_weight(args.weight, args.eta)
    exps = _exponents(args)
    if abs(w.eta - exps.eta) > 1e-15 * max(1.0, exps.eta):
        exps = exps.with_(eta=w.eta)
        args.resolved_exponents = exps.as_dict()
    cls = classify(w)
    if cls.kind == "P" and args.mu is None:
        raise ValidationError("--mu is required for weights of class P")
    return w, exps, cls


def _trial(spec: str, eta: float) -> V.RadialFunction:
    name, _, rest = spec.partition(":")
    if name != "bump":
        raise ValidationError(f"unknown trial {spec!r}")
    kv = dict(item.split("=", 1) for item in rest.split(",") if "=" in item)
    try:
        lo, hi = float(kv["lo"]) * eta, float(kv["hi"]) * eta
    except (KeyError, ValueError):
        raise ValidationError("trial needs lo=<t> and hi=<t> as fractions of eta") from None
    return V.make_bump(lo, hi)


def _config(args) -> dict:
    d = {k: v for k, v in vars(args).items() if k not in ("output",)}
    return d


def _report_quotient(r: V.QuotientReport) -> dict:
    return {k: getattr(r, k) for k in ("lhs", "rhs", "quotient", "reference", "reference_name", "ratio_to_reference")}


def run(argv=None) -> tuple[int, str]:
    """Parse and execute; returns (exit status, report text)."""
    code, text, _ = _run(argv)
    return code, text


def _run(argv):
    try:
        args = build_parser().parse_args(argv)
    except UsageError:
        return 1, "", "-"
    except SystemExit as exc:  # --help
        return int(exc.code or 0), "", "-"
    out = args.output

    def fail(code, exc_name, message):
        return code, dumps({"schema": SCHEMA, "config": _config(args), "error": exc_name,
                            "message": message}), "-"

    try:
        result, csv_text = _dispatch(args)
    except (ConstructionImpossible, InconclusiveError) as exc:
        return fail(4, type(exc).__name__, str(exc))
    except ValidationError as exc:
        return fail(2, type(exc).__name__, str(exc))
    except (NumericError, ArithmeticError) as exc:
        return fail(3, type(exc).__name__, str(exc))
    if args.format == "csv":
        if csv_text is None:
            return fail(2, "ValidationError", f"{args.subcommand} has no CSV output")
        return 0, csv_text, out
    return 0, dumps({"schema": SCHEMA, "config": _config(args), "result": result}), out


def _dispatch(args):
    sc = args.subcommand
    if sc == "classify":
        w = parse_weight(args.weight, args.eta)
        cls = classify(w)
        out = {"kind": cls.kind, "limit_at_zero": cls.limit_at_zero, "confidence": cls.confidence}
        if args.order:
            from .weights import order_detect
            rep = order_detect(w)
            out["order"] = {"verdict": rep.verdict, "witnesses": [list(x) for x in rep.witnesses]}
        return out, None

    if sc in ("profile", "ndc"):
        w, exps, cls = _weight_and_exps(args)
        prof = T.build_profile(w, exps, grid_size=args.grid_size, rho_min_factor=args.rho_min_factor)
        if sc == "profile":
            return T.profile_json(prof), prof.to_csv()
        res = T.ndc_check(prof, threshold=args.threshold, detect_order=args.detect_order)
        return T.ndc_json(prof, res), None

    if sc == "constants":
        exps = _exponents(args)
        return K.constants_report(exps), None

    if sc == "rayleigh":
        exps = _exponents(args)
        u = _trial(args.trial, exps.eta)
        if args.mode == "noncritical":
            r = V.quotient_noncritical(u, exps)
        elif args.mode == "critical":
            r = V.quotient_critical(u, exps)
        else:
            if not args.weight:
                raise ValidationError("weighted mode needs --weight")
            w, exps, _ = _weight_and_exps(args)
            r = V.quotient_weighted(u, w, exps)
        return _report_quotient(r), None

    if sc == "minimize":
        exps = _exponents(args)
        w = None
        if args.mode == "weighted":
            if not args.weight:
                raise ValidationError("weighted mode needs --weight")
            w, exps, _ = _weight_and_exps(args)
        res = V.minimize_radial(exps, args.mode, w, budget=args.budget, seed=args.seed)
        u = res.best_u
        zs = np.linspace(u.z_lo, u.z_hi, 257)
        vals, _ = u.eval(zs)
        csv_text = "z,y,value\n" + "".join(
            f"{z:.17g},{y:.17g},{v:.17g}\n" for z, y, v in zip(zs, u.chart.y(zs), vals))
        if args.dump_csv:
            Path(args.dump_csv).write_text(csv_text)
        out = {
            "best_quotient": res.best_quotient,
            "reference": res.reference,
            "reference_name": res.reference_name,
            "ratio_to_reference": res.best_quotient / res.reference,
            "evaluations": res.evaluations,
            "trial": {"kind": u.kind, "chart": u.chart.name, "z_lo": u.z_lo, "z_hi": u.z_hi,
                      "nodes": len(u.values) if u.values is not None else None},
        }
        return out, csv_text

    if sc == "substitution":
        w, exps, _ = _weight_and_exps(args)
        r = V.substitution_check(_trial(args.trial, exps.eta), w, exps)
        return r._asdict(), None

    if sc == "degenerate-demo":
        w, exps, _ = _weight_and_exps(args)
        res = CE.demo_failure(w, exps, j_max=args.j_max, beta=args.beta)
        out = res.verdict()
        out["rows"] = [r._asdict() for r in res.rows]
        return out, res.to_csv()

    if sc == "lemma21":
        exps = _exponents(args)
        r = V.lemma21_check(_trial(args.trial, exps.eta), exps)
        return r._asdict(), None
    raise UsageError(sc)


def main(argv=None) -> int:
    code, text, out = _run(sys.argv[1:] if argv is None else argv)
    if text:
        text = text if text.endswith("\n") else text + "\n"
        if code != 0:
            sys.stderr.write(text)
        elif out == "-":
            sys.stdout.write(text)
        else:
            Path(out).write_text(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
