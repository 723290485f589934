"""``atlc``: parse, check, evaluate, cost, normalize, differentiate and
verify ``.atl`` programs.

Exit codes: 0 success, 1 a check failed (including diagnostics in the
program), 2 usage error.  ``--format=json`` output always carries
``"schema": 1``.
"""
import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from ..errors import AtlError
from ..frontend import parse, format_expr
from ..frontend.parser import desugar_guards
from ..interp import EXACT, FLOAT, Env, evaluate, from_json, to_json, flatten
from ..lang_core import BlackBox, children
from .corpus import parse_sizes, load_fixture, load_corpus

SCHEMA = 1
OK, FAILED, USAGE = 0, 1, 2
CHECKS = ("universal", "finite-diff", "jacobian", "cost")


class UsageError(Exception):
    pass


# ---- argument parsing ---- #

def _default_seed():
    raw = os.environ.get("ATLC_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"ATLC_SEED must be an integer, got {raw!r}") from None


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")

    sized = argparse.ArgumentParser(add_help=False)
    sized.add_argument("--size", action="append", default=[], metavar="N=INT",
                       help="size binding; repeatable or comma separated")
    sized.add_argument("--relations", metavar="FILE",
                       help="JSON object: relation name -> list of tuples")

    valued = argparse.ArgumentParser(add_help=False)
    valued.add_argument("--inputs", action="append", default=[], metavar="X=VALUE",
                        help="input value as a JSON literal; repeatable")
    valued.add_argument("--values", metavar="FILE", help="JSON object of input values")
    valued.add_argument("--mode", choices=("auto", EXACT, FLOAT), default="auto")

    p = argparse.ArgumentParser(prog="atlc", description=" ".join(__doc__.split("\n\n")[0].split()))
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="parse and type-check")
    c.add_argument("file")

    c = sub.add_parser("eval", parents=[common, sized, valued], help="evaluate")
    c.add_argument("file")

    c = sub.add_parser("cost", parents=[common, sized], help="work cost")
    c.add_argument("file")
    c.add_argument("--ssa", action="store_true", help="cost the Tensor SSA form")

    c = sub.add_parser("normalize", parents=[common], help="run normalization passes")
    c.add_argument("file")
    c.add_argument("--pass", dest="pass_", default="all",
                   choices=("none", "let-lift", "pair-elim", "gen-pushout", "ssa", "all"))
    c.add_argument("--validate", metavar="FORM",
                   choices=("let-lifted", "pair-free", "gen-outer", "ssa"))

    c = sub.add_parser("deriv", parents=[common, sized], help="forward or adjoint derivative")
    c.add_argument("file")
    c.add_argument("--mode", choices=("fwd", "adj"), required=True)
    c.add_argument("--wrt", help="comma separated inputs (default: all)")
    c.add_argument("--seed", metavar="FILE",
                   help="JSON file with the seed: dy for adj, {dx: value} for fwd")
    c.add_argument("--inputs", action="append", default=[], metavar="X=VALUE")
    c.add_argument("--values", metavar="FILE")

    c = sub.add_parser("verify", parents=[common, sized], help="oracle checks")
    c.add_argument("file", nargs="?")
    c.add_argument("--program", help="program file (alternative to the positional)")
    c.add_argument("--checks", default=",".join(CHECKS))
    c.add_argument("--seed", type=int)
    c.add_argument("--wrt")
    c.add_argument("--trials", type=int, default=100)

    c = sub.add_parser("report", parents=[common], help="run the fixture corpus")
    c.add_argument("--corpus", metavar="DIR")
    c.add_argument("--seed", type=int)
    c.add_argument("--update-golden", action="store_true",
                   help="rewrite the golden files instead of comparing")
    return p


def _sizes(args):
    out = {}
    for s in args.size:
        try:
            out.update(parse_sizes(s))
        except ValueError:
            raise UsageError(f"bad size binding {s!r} (expected name=int)") from None
    return out


def _literal(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        try:
            return str(Fraction(text))
        except ValueError:
            raise UsageError(f"cannot read value {text!r}") from None


def _read_json(path, what):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {what} file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None


def _raw_inputs(args):
    raw = dict(_read_json(args.values, "values")) if args.values else {}
    for item in args.inputs:
        name, eq, text = item.partition("=")
        if not eq or not name:
            raise UsageError(f"bad input binding {item!r} (expected name=value)")
        raw[name.strip()] = _literal(text)
    return raw


def _relations(args, prog):
    got = {}
    if getattr(args, "relations", None):
        got = {r: {tuple(t) for t in rows}
               for r, rows in _read_json(args.relations, "relations").items()}
    missing = [r for r in prog.relations if r not in got]
    if missing:
        raise UsageError(f"no table for relation {missing[0]!r} (use --relations)")
    return got


def _load(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return parse(text)


def _require_sizes(prog, sizes, path):
    missing = [n for n in prog.sizes if n not in sizes]
    if missing:
        raise UsageError(f"{path}: size {missing[0]!r} is not bound (use --size {missing[0]}=N)")
    extra = [n for n in sizes if n not in prog.sizes]
    if extra:
        raise UsageError(f"{path}: program has no size named {extra[0]!r}")


def _sizes_or_fixture(args, prog):
    sizes = _sizes(args)
    if all(n in sizes for n in prog.sizes):
        return sizes
    fixture = load_fixture(args.file).sizes
    return {**fixture, **sizes}


def _has_blackbox(e):
    return isinstance(e, BlackBox) or any(_has_blackbox(c) for c in children(e))


# ---- output ---- #

def _text_value(v):
    if isinstance(v, tuple):
        return f"({_text_value(v[0])}, {_text_value(v[1])})"
    if isinstance(v, list):
        return "[" + ", ".join(_text_value(x) for x in v) + "]"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _emit(args, payload, text):
    if args.format == "json":
        print(json.dumps({"schema": SCHEMA, **payload}, indent=2, sort_keys=True))
    elif text is not None:
        print(text)


def _program_text(sizes, relations, inputs, body):
    lines = []
    if sizes:
        lines.append("size " + ", ".join(sizes))
    for r, k in relations.items():
        lines.append(f"relation {r}/{k}")
    for x, t in inputs.items():
        lines.append(f"input {x} : {t}")
    lines.append(body)
    return "\n".join(lines)


# ---- commands ---- #

def cmd_check(args):
    prog = _load(args.file)
    t = prog.typecheck()
    _emit(args, {"ok": True, "type": str(t)}, f"ok: {t}")
    return OK


def cmd_eval(args):
    prog = _load(args.file)
    prog.typecheck()
    sizes = _sizes_or_fixture(args, prog)
    _require_sizes(prog, sizes, args.file)
    raw = _raw_inputs(args)
    missing = [x for x in prog.inputs if x not in raw]
    if missing:
        raise UsageError(f"{args.file}: no value for input {missing[0]!r} (use --inputs)")
    unknown = [x for x in raw if x not in prog.inputs]
    if unknown:
        raise UsageError(f"{args.file}: program has no input named {unknown[0]!r}")
    body = desugar_guards(prog)
    mode = args.mode
    if mode == "auto":
        mode = FLOAT if _has_blackbox(body) else EXACT
    values = {x: from_json(raw[x], t, mode) for x, t in prog.inputs.items()}
    env = Env(values, sizes, _relations(args, prog))
    v = evaluate(body, env, mode, types=dict(prog.inputs))
    _emit(args, {"value": to_json(v), "mode": mode}, _text_value(v))
    return OK


def cmd_cost(args):
    from ..cost_model import cost_breakdown, type_size
    from ..normalize import normalize
    prog = _load(args.file)
    prog.typecheck()
    sizes = _sizes_or_fixture(args, prog)
    _require_sizes(prog, sizes, args.file)
    env = Env({}, sizes, _relations(args, prog))
    e = normalize(prog).to_expr() if args.ssa else desugar_guards(prog)
    b = cost_breakdown(e, env)
    total = sum(b)
    io = (total + sum(type_size(t, env) for t in prog.inputs.values())
          + type_size(prog.typecheck(), env))
    payload = {"cost": total, "io_cost": io, "form": "ssa" if args.ssa else "source",
               "breakdown": {"add": b.adds, "mul": b.muls, "call": b.calls}}
    _emit(args, payload, str(total))
    return OK


def cmd_normalize(args):
    from ..normalize import (let_lift, pair_elim, gen_pushout, to_ssa, normalize,
                             validate_normal_form, validate_ssa)
    prog = _load(args.file)
    prog.typecheck()
    body = desugar_guards(prog)
    steps = ("let-lift", "pair-elim", "gen-pushout", "ssa")
    result = body
    if args.pass_ == "all":
        result = normalize(prog)
    elif args.pass_ != "none":
        for step in steps[:steps.index(args.pass_) + 1]:
            if step == "let-lift":
                result = let_lift(result)
            elif step == "pair-elim":
                result = pair_elim(result, prog.inputs)
            elif step == "gen-pushout":
                result = gen_pushout(result)
            else:
                result = to_ssa(result, prog.inputs, prog.sizes, prog.relations)
    is_ssa = hasattr(result, "bindings")
    text = result.to_text() if is_ssa else format_expr(result)
    payload = {"pass": args.pass_, "program": text}
    code = OK
    if args.validate:
        if args.validate == "ssa":
            ok, msg = (True, None) if is_ssa else (False, "not a Tensor SSA program")
            if is_ssa:
                try:
                    validate_ssa(result)
                except AtlError as exc:
                    ok, msg = False, str(exc)
        else:
            e = result.to_expr() if is_ssa else result
            ok, msg = validate_normal_form(e, args.validate)
        payload["valid"] = ok
        payload["violation"] = msg
        code = OK if ok else FAILED
        if not ok and args.format == "text":
            print(f"{args.file}: not {args.validate}: {msg}", file=sys.stderr)
    _emit(args, payload, text)
    return code


def cmd_deriv(args):
    from ..ad import forward_deriv, adjoint_cost_report
    from ..cost_model import cost
    from ..oracle import Subject
    prog = _load(args.file)
    prog.typecheck()
    wrt = [w.strip() for w in args.wrt.split(",")] if args.wrt else None
    for w in wrt or ():
        if w not in prog.inputs:
            raise UsageError(f"{args.file}: no input named {w!r} to differentiate")
    sub = Subject(prog, wrt)
    sizes = _sizes_or_fixture(args, prog)
    bound = all(n in sizes for n in prog.sizes)
    if bound and prog.relations and not args.relations:
        bound = False       # the cost report needs the relation tables
    env = Env({}, sizes, _relations(args, prog)) if bound else None
    inputs = dict(prog.inputs)
    report = {}
    if args.mode == "fwd":
        e = sub.ssa.to_expr()
        de = forward_deriv(e, sub.d)
        body = format_expr(de)
        inputs.update({sub.d[x]: prog.inputs[x] for x in sub.wrt})
        if env is not None:
            ce, cd = cost(e, env), cost(de, env)
            report = {"cost": ce, "cost_derivative": cd, "bound_holds": cd <= 4 * ce}
    else:
        body = sub.adjoint.to_text()
        inputs[sub.seed] = sub.output_type()
        if env is not None:
            r = adjoint_cost_report(sub.ssa, sub.d, env, adjoint=sub.adjoint)
            report = {k: v for k, v in r.to_json().items() if k != "ledger"}
    if env is not None:
        report["sizes"] = sizes
    text = _program_text(prog.sizes, prog.relations, inputs, body)
    payload = {"mode": args.mode, "wrt": sub.wrt, "program": text, "cost_report": report}
    if args.seed:
        payload["value"] = to_json(_deriv_value(args, prog, sub, sizes))
    out = text + "\n\n" + json.dumps({"schema": SCHEMA, **report}, sort_keys=True)
    if "value" in payload:
        out += "\n" + json.dumps(payload["value"])
    _emit(args, payload, out)
    return OK


def _deriv_value(args, prog, sub, sizes):
    """The derivative evaluated at the given inputs and seed."""
    _require_sizes(prog, sizes, args.file)
    raw = _raw_inputs(argparse.Namespace(values=args.values, inputs=args.inputs))
    missing = [x for x in prog.inputs if x not in raw]
    if missing:
        raise UsageError(f"{args.file}: no value for input {missing[0]!r} (use --inputs)")
    mode = FLOAT if not sub.polynomial() else EXACT
    env = Env({x: from_json(raw[x], t, mode) for x, t in prog.inputs.items()}, sizes,
              _relations(args, prog))
    seed = _read_json(args.seed, "seed")
    if args.mode == "adj":
        return sub.eval_adjoint(env, from_json(seed, sub.output_type(), mode), mode)
    if not isinstance(seed, dict):
        raise UsageError("a forward seed is a JSON object {input: dx}")
    dxs = [from_json(seed[x], sub.inputs[x], mode) if x in seed else None for x in sub.wrt]
    if any(d is None for d in dxs):
        raise UsageError("the forward seed needs a tangent for every --wrt input")
    return sub.eval_forward(env, dxs, mode)


def cmd_verify(args):
    from .verify import run_checks
    path = args.program or args.file
    if not path:
        raise UsageError("verify needs a program (positional or --program)")
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    bad = [c for c in checks if c not in CHECKS]
    if bad:
        raise UsageError(f"unknown check {bad[0]!r}; choose from {', '.join(CHECKS)}")
    prog = _load(path)
    prog.typecheck()
    sizes = _sizes(args)
    seed = args.seed if args.seed is not None else _default_seed()
    wrt = [w.strip() for w in args.wrt.split(",")] if args.wrt else None
    fixture_sizes = load_fixture(path).sizes
    results = run_checks(prog, checks, sizes, fixture_sizes, seed, wrt, args.trials)
    passed = all(r["passed"] is not False for r in results.values())
    payload = {"program": str(path), "seed": seed, "checks": results, "passed": passed}
    lines = [f"{name:12s} {_verdict(r['passed'])}  {r.get('detail', '')}".rstrip()
             for name, r in results.items()]
    _emit(args, payload, "\n".join(lines))
    return OK if passed else FAILED


def _verdict(p):
    return "skip" if p is None else ("pass" if p else "FAIL")


def cmd_report(args):
    from .verify import run_checks
    from .golden import golden_diff, write_golden
    seed = args.seed if args.seed is not None else _default_seed()
    fixtures = load_corpus(args.corpus)
    if not fixtures:
        raise UsageError("no corpus fixtures found")
    rows, all_ok = [], True
    for fx in fixtures:
        try:
            res = run_checks(fx.program, CHECKS, {}, fx.sizes, seed, None, 100)
            if args.update_golden:
                write_golden(fx)
                diff = []
            else:
                diff = golden_diff(fx)
            res["golden"] = {"passed": not diff, "detail": ",".join(diff)}
        except AtlError as exc:
            res = {"error": {"passed": False, "detail": str(exc)}}
        ok = all(r["passed"] is not False for r in res.values())
        all_ok = all_ok and ok
        rows.append((fx.name, res, ok))
    cols = list(CHECKS) + ["golden"]
    header = f"{'program':16s}" + "".join(f"{c:>13s}" for c in cols)
    lines = [header, "-" * len(header)]
    for name, res, _ in rows:
        cells = [_verdict(res[c]["passed"]) if c in res else "error" for c in cols]
        lines.append(f"{name:16s}" + "".join(f"{c:>13s}" for c in cells))
    lines.append(f"{sum(ok for *_, ok in rows)}/{len(rows)} programs pass")
    payload = {"programs": {name: res for name, res, _ in rows}, "passed": all_ok}
    _emit(args, payload, "\n".join(lines))
    return OK if all_ok else FAILED


COMMANDS = {"check": cmd_check, "eval": cmd_eval, "cost": cmd_cost,
            "normalize": cmd_normalize, "deriv": cmd_deriv, "verify": cmd_verify,
            "report": cmd_report}


def main(argv=None):
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE
    path = getattr(args, "program", None) or getattr(args, "file", None) or "atlc"
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"atlc: error: {exc}", file=sys.stderr)
        return USAGE
    except AtlError as exc:
        print(f"{path}:{exc}" if exc.pos else f"{path}: {exc}", file=sys.stderr)
        return FAILED
    except RecursionError:
        print(f"{path}: program is nested too deeply", file=sys.stderr)
        return FAILED


if __name__ == "__main__":
    sys.exit(main())
