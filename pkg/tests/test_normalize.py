"""Normalization passes, their validators and SSA simplification."""
from fractions import Fraction
import itertools

from hypothesis import given, strategies as st
import pytest

from atlc.frontend import parse, parse_expr, desugar_guards
from atlc.interp import Env, EXACT, FLOAT, evaluate, compile_pred, values_close
from atlc.cost_model import cost
from atlc.lang_core import Idx, cmp, conj, eq, tensor
from atlc.normalize import (let_lift, pair_elim, gen_pushout, to_ssa, normalize,
                            validate_normal_form, validate_ssa, simplify_ssa, tidy_pred,
                            InputRef, ConstGen, AddGen, MapGen, Contract)
from atlc.oracle import random_env, rng_for

from helpers import corpus


def same(a, b, mode):
    return a == b if mode == EXACT else values_close(a, b, rel=1e-12)


def stages(prog):
    e0 = desugar_guards(prog)
    e1 = let_lift(e0)
    e2 = pair_elim(e1, prog.inputs)
    e3 = gen_pushout(e2)
    return e0, e1, e2, e3


def test_let_lift_hoists_lets_out_of_generators():
    e = parse_expr("gen i:n. let y = (let z = x[i] in z*z) in y + 1")
    ok, msg = validate_normal_form(e, "let-lifted")
    assert not ok and "nested let" in msg
    out = let_lift(e)
    assert validate_normal_form(out, "let-lifted") == (True, None)
    env = Env({"x": [Fraction(2), Fraction(-3)]}, {"n": 2})
    types = {"x": tensor(["n"])}
    assert evaluate(out, env, types=types) == evaluate(e, env, types=types) == [5, 10]


def test_pair_elim_splits_pair_bindings():
    prog = parse("size n\ninput p : ([n]real, real)\n"
                 "let q = (gen i:n. (fst p)[i]*snd p, snd p) in (fst q, snd q)")
    e = pair_elim(let_lift(prog.body), prog.inputs)
    assert validate_normal_form(e, "pair-free") == (True, None)


def test_validators_name_the_offending_term():
    e = parse_expr("let q = (x, y) in fst q")
    ok, msg = validate_normal_form(e, "pair-free")
    assert not ok and "(x, y)" in msg


def test_gen_pushout_reaches_gen_outer_form():
    prog = parse("size n\ninput x : [n]real\nsum i:n. (gen j:n. x[j]*x[j])[i]")
    e = gen_pushout(pair_elim(let_lift(prog.body), prog.inputs))
    assert validate_normal_form(e, "gen-outer") == (True, None)


@pytest.mark.parametrize("fx", corpus(), ids=lambda fx: fx.name)
def test_pipeline_preserves_meaning(fx):
    prog = fx.program
    prog.typecheck()
    mode = FLOAT if fx.name in ("logistic", "softexp") else EXACT
    env = random_env(prog.inputs, fx.sizes, rng_for(11), mode, prog.relations)
    types = dict(prog.inputs)
    want = evaluate(desugar_guards(prog), env, mode, types=types)
    for e in stages(prog)[1:]:
        assert same(evaluate(e, env, mode, types=types), want, mode)
    ssa = normalize(prog)
    validate_ssa(ssa)
    assert same(ssa.evaluate(env, mode), want, mode)


def test_ssa_uses_every_binding_form():
    kinds = set()
    unary = binary = False
    for fx in corpus():
        for _, rhs in normalize(fx.program).bindings:
            kinds.add(type(rhs))
            if isinstance(rhs, Contract):
                unary |= len(rhs.factors) == 1
                binary |= len(rhs.factors) == 2
    assert kinds == {InputRef, ConstGen, AddGen, MapGen, Contract}
    assert unary and binary


@pytest.mark.parametrize("fx", corpus(), ids=lambda fx: fx.name)
def test_simplification_never_increases_cost(fx):
    prog = fx.program
    raw = normalize(prog, simplify=False)
    tidy = simplify_ssa(raw)
    env = random_env(prog.inputs, fx.sizes, rng_for(2), EXACT, prog.relations)
    assert cost(tidy.to_expr(), env) <= cost(raw.to_expr(), env)
    mode = FLOAT if fx.name in ("logistic", "softexp") else EXACT
    env = random_env(prog.inputs, fx.sizes, rng_for(2), mode, prog.relations)
    assert same(tidy.evaluate(env, mode), raw.evaluate(env, mode), mode)


# ---- predicate tidying keeps the truth table ---- #

vars_ = ["g", "s", "t"]
terms = st.builds(lambda ts, c: Idx(tuple(ts), c),
                  st.lists(st.tuples(st.sampled_from(vars_ + ["n"]), st.integers(-2, 2)),
                           max_size=3), st.integers(-3, 3))
atoms = st.builds(lambda op, a, b: cmp(op, a, b), st.sampled_from(["<", "<=", "="]), terms, terms)


@given(st.lists(atoms, min_size=1, max_size=4), st.integers(1, 4))
def test_tidy_pred_is_equivalent_on_the_box(cs, n):
    p = conj(*cs)
    extents = {v: Idx.var("n") for v in vars_}
    q = tidy_pred(p, extents)
    fp, fq = compile_pred(p, {}), compile_pred(q, {})
    for point in itertools.product(range(n), repeat=len(vars_)):
        ie = dict(zip(vars_, point), n=n)
        assert bool(fp(ie)) == bool(fq(ie))
