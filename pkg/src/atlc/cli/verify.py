"""The oracle checks behind ``atlc verify`` and ``atlc report``."""
from ..interp import EXACT, FLOAT, flatten
from ..lang_core import REAL
from ..errors import DimensionTooLarge
from ..oracle import (Subject, rng_for, random_env, random_sizes,
                      check_universal_property, jacobian_by_probing,
                      finite_diff_gradient)
from ..ad import forward_cost_check, adjoint_cost_report, gradient

COST_SIZES = (2, 4, 8)
FD_STEP, FD_REL, FD_FLOOR = 1e-5, 1e-4, 1e-8


def _point_sizes(sub, sizes, fixture_sizes, rng):
    if all(n in sizes for n in sub.sizes):
        return dict(sizes)
    out = random_sizes(sub.sizes, rng)
    out.update(fixture_sizes)
    out.update(sizes)
    return out


def check_universal(sub, sizes, seed, trials):
    r = check_universal_property(sub, trials=trials, seed=seed,
                                 sizes=sizes if all(n in sizes for n in sub.sizes) else None)
    return {"passed": r.passed, "mode": r.mode, "trials": r.trials, "failures": r.failures,
            "max_rel_err": r.max_rel_err,
            "detail": f"{r.trials} trials, {r.mode}, worst rel err {r.max_rel_err:.3g}"}


def check_jacobian(sub, sz, seed):
    env = random_env(sub.inputs, sz, rng_for(seed), EXACT, sub.relations)
    try:
        jf = jacobian_by_probing(sub, env, use="forward")
        ja = jacobian_by_probing(sub, env, use="adjoint")
    except DimensionTooLarge as exc:
        return {"passed": None, "detail": str(exc)}
    if sub.polynomial():
        ok = jf == ja.transpose()
        diff = 0 if ok else float(jf.max_abs_diff(ja.transpose()))
    else:
        diff = float(jf.max_abs_diff(ja.transpose()))
        scale = max((abs(x) for row in jf.entries for x in row), default=0)
        ok = diff <= 1e-9 * max(scale, 1.0)
    return {"passed": ok, "shape": [jf.rows, jf.cols], "max_abs_diff": diff,
            "detail": f"{jf.rows}x{jf.cols}, max abs diff {diff:.3g}"}


def check_finite_diff(sub, sz, seed):
    if sub.output_type() is not REAL:
        return {"passed": None, "detail": "non-scalar output"}
    env = random_env(sub.inputs, sz, rng_for(seed), FLOAT, sub.relations)
    g = flatten(gradient(sub.ssa, sub.d, env, FLOAT, adjoint=sub.adjoint))
    fd = flatten(finite_diff_gradient(sub, env, h=FD_STEP))
    worst = max((abs(a - b) / max(abs(a), abs(b), FD_FLOOR) for a, b in zip(g, fd)),
                default=0.0)
    return {"passed": worst <= FD_REL, "max_rel_err": worst,
            "detail": f"{len(g)} components, worst rel err {worst:.3g}"}


def check_cost(sub, sizes, seed):
    if sizes and all(n in sizes for n in sub.sizes):
        points = [dict(sizes)]
    else:
        points = [{n: k for n in sub.sizes} for k in COST_SIZES] if sub.sizes else [{}]
    rows, ok = [], True
    for sz in points:
        env = random_env(sub.inputs, sz, rng_for(seed), EXACT, sub.relations)
        ce, cd, fwd_ok = forward_cost_check(sub.ssa, env)
        r = adjoint_cost_report(sub.ssa, sub.d, env, adjoint=sub.adjoint)
        ok = ok and fwd_ok and r.ok
        rows.append({"sizes": sz, "cost": ce, "cost_forward": cd, "io_cost": r.io,
                     "io_cost_adjoint": r.io_adj, "forward_ok": fwd_ok,
                     "adjoint_ok": r.bound_holds, "ledger_ok": r.ledger_ok})
    detail = "; ".join(f"fwd {x['cost_forward']}/{x['cost']} adj {x['io_cost_adjoint']}"
                       f"/{x['io_cost']}" for x in rows)
    return {"passed": ok, "points": rows, "detail": detail}


def run_checks(prog, checks, sizes, fixture_sizes, seed, wrt=None, trials=100):
    sub = Subject(prog, wrt)
    sz = _point_sizes(sub, sizes, fixture_sizes, rng_for(seed))
    out = {}
    for c in checks:
        if c == "universal":
            out[c] = check_universal(sub, sizes, seed, trials)
        elif c == "jacobian":
            out[c] = check_jacobian(sub, sz, seed)
        elif c == "finite-diff":
            out[c] = check_finite_diff(sub, sz, seed)
        elif c == "cost":
            out[c] = check_cost(sub, sizes, seed)
    return out
