"""Command-line front end.

Subcommands read a base-space JSON and an element JSON (the space may be
omitted when the element embeds a ``"space"`` key or lives over a Schatten
base, which is then inferred with ``--p``)::

    matorder norm space.json element.json --kind min
    matorder cone flip.json --kind schatten
    matorder regularity space.json --kind min --level 2 --budget 200
    matorder positivise space.json element.json --kind matsys
    matorder dual space.json dual_element.json --kind max
    matorder experiment flip_separation
    matorder suite

Exit codes: 0 success, 1 malformed input, 2 UNDECIDED verdict under
``--strict``, 3 experiment failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import config as cfg
from . import duality as du
from . import experiments as ex
from . import io
from . import positivisation as ps
from . import regularity as rg
from . import spaces as sp
from . import structures as st
from .errors import MatorderError

EXIT_OK, EXIT_INPUT, EXIT_UNDECIDED, EXIT_FAILED = 0, 1, 2, 3


def fmt(v) -> str:
    """Fixed numeric output: 12 digits after the decimal point."""
    v = float(v)
    if math.isinf(v) or math.isnan(v):
        return str(v)
    return f"{v:.12f}"


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--tol", type=float, default=None, help="absolute PSD tolerance (default: relative)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--strict", action="store_true", help="exit 2 on UNDECIDED verdicts")
    p.add_argument("--config", default=None, help="JSON or key = value file with default settings")


def _add_inputs(p: argparse.ArgumentParser, kinds=True):
    p.add_argument("inputs", nargs="+", help="[space.json] element.json")
    if kinds:
        p.add_argument("--kind", choices=st.KINDS, required=True)
    p.add_argument("--level", type=int, default=None)
    p.add_argument("--p", default="inf", help="exponent for an inferred Schatten base")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matorder", description="Matricial orders, norms and their duality.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("norm", "level norm bracket"), ("cone", "cone membership verdict"),
                           ("positivise", "positivised norm bracket"), ("dual", "dual cone membership")):
        p = sub.add_parser(name, help=helptext)
        _add_inputs(p)
        _add_common(p)
    p = sub.add_parser("regularity", help="normality and generation probes")
    p.add_argument("space")
    p.add_argument("--kind", choices=st.KINDS, required=True)
    p.add_argument("--level", type=int, default=2)
    _add_common(p)
    p = sub.add_parser("experiment", help="run one registered experiment")
    p.add_argument("name")
    _add_common(p)
    p = sub.add_parser("suite", help="run every registered experiment (NDJSON output)")
    _add_common(p)
    return parser


def _settings(args) -> cfg.Settings:
    s = cfg.resolve_settings(args.config)
    if args.seed is not None:
        s.seed = args.seed
    if args.budget is not None:
        s.budget = args.budget
    if args.restarts is not None:
        s.restarts = args.restarts
    return s


def _load_inputs(args, dual=False):
    if len(args.inputs) > 2:
        raise MatorderError("expected [space.json] element.json")
    elem = io.load_json(args.inputs[-1])
    if len(args.inputs) == 2:
        space = sp.from_json(io.load_json(args.inputs[0]))
    elif "space" in elem:
        space = sp.from_json(elem["space"])
    else:
        space = io.infer_schatten_space(elem, sp._parse_p(args.p))
    element_space = sp.dual_space(space) if dual else space
    x = io.element_from_json(elem, element_space)
    if args.level is not None and args.level != x.level:
        raise MatorderError(f"--level {args.level} does not match the element level {x.level}")
    return space, x


def _structure(space, kind, s: cfg.Settings) -> st.MatricialStructure:
    return st.MatricialStructure(space, kind, restarts=s.restarts, iterations=s.iterations, seed=s.seed)


def _verdict_line(v: st.ConeVerdict) -> str:
    if v.member is None:
        return "UNDECIDED"
    if v.member:
        return "member"
    cert = v.certificate
    for key in ("min_eig", "value"):
        if key in cert and cert[key] is not None and math.isfinite(cert[key]):
            return f"non-member, min_eig={fmt(cert[key])}"
    return f"non-member, reason={cert.get('type')}"


def _emit(obj, args, line, out):
    if args.json:
        out.write(json.dumps(st._jsonable(obj)) + "\n")
    else:
        out.write(line + "\n")


def _run(args, out) -> int:
    s = _settings(args)
    if args.command in ("experiment", "suite"):
        conf = {"seed": s.seed}
        if args.budget is not None:
            conf["samples"] = args.budget
        if args.command == "experiment":
            rec = ex.run_experiment(args.name, conf)
            recs = [rec]
            out.write(json.dumps(rec) + "\n" if args.json else
                      f"{rec['name']}: {'pass' if rec['pass'] else 'FAIL'}\n")
        else:
            recs = ex.run_suite(conf, stream=out)
        return EXIT_OK if all(r["pass"] for r in recs) else EXIT_FAILED
    if args.command == "regularity":
        space = sp.from_json(io.load_json(args.space))
        S = _structure(space, args.kind, s)
        rep = rg.regularity_report(S, args.level, s.budget, s.seed)
        _emit(rep.to_json(), args, f"normality_lower_bound={fmt(rep.normality_lower_bound)}, "
                                   f"generation_upper_bound={fmt(rep.generation_upper_bound)}", out)
        return EXIT_OK
    space, x = _load_inputs(args, dual=args.command == "dual")
    S = _structure(space, args.kind, s)
    if args.command == "norm":
        e = st.level_norm(S, x)
        line = fmt(e.lower) if e.exact else f"lower={fmt(e.lower)}, upper={fmt(e.upper)}"
        _emit(e.to_json(), args, line, out)
        return EXIT_OK
    if args.command in ("cone", "dual"):
        v = st.cone_member(S, x, args.tol) if args.command == "cone" else du.dual_cone_member(S, x, args.tol)
        _emit(v.to_json(), args, _verdict_line(v), out)
        return EXIT_UNDECIDED if (args.strict and v.member is None) else EXIT_OK
    r = ps.alpha_plus(S, x, s.budget, s.seed)
    payload = r.to_json()
    _emit(payload, args, f"lower={fmt(r.value_lower)}, upper={fmt(r.value_upper)}", out)
    return EXIT_UNDECIDED if (args.strict and r.undecided) else EXIT_OK


def cli_main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return _run(args, out)
    except (MatorderError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


def main():  # pragma: no cover - console entry point
    sys.exit(cli_main())
