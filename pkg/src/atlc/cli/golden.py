"""Golden records for the corpus: the observable results of every stage at
a fixture's default sizes, frozen next to the fixture as JSON."""
import json

from ..interp import EXACT, to_json
from ..lang_core import REAL
from ..normalize import normalize
from ..cost_model import cost
from ..oracle import Subject, rng_for, random_env

SCHEMA = 1
GOLDEN_SEED = 7


def golden_record(fixture, registry=None):
    prog = fixture.program
    sub = Subject(prog, registry=registry)
    sizes = dict(fixture.sizes)
    env = random_env(sub.inputs, sizes, rng_for(GOLDEN_SEED), EXACT, sub.relations)
    out_type = prog.typecheck()
    rec = {
        "schema": SCHEMA,
        "sizes": sizes,
        "type": str(out_type),
        "ssa": normalize(prog).to_text(),
        "adjoint": sub.adjoint.to_text(),
        "cost": cost(sub.expr, env),
        "ssa_cost": cost(sub.ssa.to_expr(), env),
        "forward_cost": cost(sub.forward, env),
        "adjoint_cost": cost(sub.adjoint.to_expr(), env),
    }
    if sub.polynomial():
        rec["inputs"] = {x: to_json(v) for x, v in env.values.items()}
        rec["value"] = to_json(sub.evaluate(env, EXACT))
        if out_type is REAL:
            from ..ad import gradient
            g = gradient(sub.ssa, sub.d, env, EXACT, registry, sub.adjoint)
            rec["gradient"] = to_json(g)
    return rec


def write_golden(fixture, registry=None):
    rec = golden_record(fixture, registry)
    fixture.golden_path.write_text(json.dumps(rec, indent=2, sort_keys=True) + "\n",
                                   encoding="utf-8")
    return rec


def read_golden(fixture):
    if not fixture.golden_path.exists():
        return None
    return json.loads(fixture.golden_path.read_text(encoding="utf-8"))


def golden_diff(fixture, registry=None):
    """Keys whose current value differs from the frozen one (all keys when
    no golden file exists)."""
    want = read_golden(fixture)
    got = golden_record(fixture, registry)
    if want is None:
        return sorted(got)
    return sorted(k for k in set(want) | set(got) if want.get(k) != got.get(k))
