"""Reference evaluator against direct Python loops."""
from fractions import Fraction

from hypothesis import given, strategies as st
import pytest

from helpers import fixture

from atlc.frontend import parse, parse_expr, desugar_guards
from atlc.interp import (Env, EXACT, FLOAT, evaluate, evaluate_counting, eval_pred,
                         flatten, unflatten, from_json, to_json, zero_of, inner)
from atlc.lang_core import tensor, PairT, REAL
from atlc.errors import IndexOutOfBounds, MissingRelationTable, UnboundVariable

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def vec(n):
    return st.lists(rationals, min_size=n, max_size=n)


def run(fixture, values, sizes, relations=None, mode=EXACT):
    prog = fixture.program
    env = Env(values, sizes, relations or {})
    return evaluate(desugar_guards(prog), env, mode, types=dict(prog.inputs))


def test_scaled_identity_trace():
    assert run(fixture("trace_eye"), {"x": Fraction(3)}, {"n": 2}) == 6


@given(st.integers(1, 4), st.integers(1, 3), st.data())
def test_convolution_matches_loops(n, m, data):
    x = data.draw(vec(n + m - 1))
    c = data.draw(vec(m))
    want = [sum(x[i - j + m - 1] * c[j] for j in range(m)) for i in range(n)]
    assert run(fixture("conv"), {"x": x, "c": c}, {"n": n, "m": m}) == want


@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3), st.data())
def test_matmul_matches_loops(n, m, k, data):
    A = [data.draw(vec(m)) for _ in range(n)]
    B = [data.draw(vec(k)) for _ in range(m)]
    want = [[sum(A[i][j] * B[j][l] for j in range(m)) for l in range(k)] for i in range(n)]
    assert run(fixture("matmul"), {"A": A, "B": B}, {"n": n, "m": m, "k": k}) == want


@given(st.integers(1, 4), st.data())
def test_relation_guarded_matvec(n, data):
    A = [data.draw(vec(n)) for _ in range(n)]
    v = data.draw(vec(n))
    R = data.draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))))
    want = [sum(A[i][j] * v[j] for j in range(n) if (i, j) in R) for i in range(n)]
    got = run(fixture("sparse_matvec"), {"A": A, "v": v}, {"n": n}, {"R": R})
    assert got == want


@given(st.integers(1, 4), st.integers(1, 3), st.data())
def test_correlation_with_guarded_reads(n, m, data):
    dy = data.draw(vec(n))
    c = data.draw(vec(m))
    want = [sum(dy[k + j - m + 1] * c[j] for j in range(m) if 0 <= k + j - m + 1 < n)
            for k in range(n + m - 1)]
    assert run(fixture("correlation"), {"dy": dy, "c": c}, {"n": n, "m": m}) == want


def test_pair_values():
    p = ([Fraction(1), Fraction(2)], Fraction(3))
    s, v = run(fixture("pairs"), {"p": p}, {"n": 2})
    assert v == [3, 6]
    assert s == 3 * 6 + 6 * 6


def test_float_mode_with_primitives():
    import math
    x, w = [0.5, -1.0, 2.0], [1.0, 0.25, -0.5]
    got = run(fixture("logistic"), {"x": x, "w": w}, {"n": 3}, mode=FLOAT)
    want = sum(1 / (1 + math.exp(-a * b)) for a, b in zip(x, w))
    assert got == pytest.approx(want, rel=1e-12)


def test_out_of_range_access_is_an_error():
    prog = parse("size n\ninput x : [n]real\nsum i:n. x[i+1]")
    with pytest.raises(IndexOutOfBounds):
        evaluate(prog.body, Env({"x": [1, 2]}, {"n": 2}))


def test_missing_relation_table():
    prog = parse("size n\nrelation R/1\ninput x : [n]real\nsum i:n. [R(i)]*x[i]")
    with pytest.raises(MissingRelationTable):
        evaluate(prog.body, Env({"x": [1, 2]}, {"n": 2}))


def test_unbound_variable():
    with pytest.raises(UnboundVariable):
        evaluate(parse_expr("x + 1"), Env({}, {}))


def test_let_shadowing():
    assert evaluate(parse_expr("let y = 2 in let y = y*y in y + 1"), Env({}, {})) == 5


def test_predicates_with_existentials():
    env = Env(sizes={"n": 4, "i": 2})
    from atlc.frontend import parse_pred
    assert eval_pred(parse_pred("exists k:n. i = 2*k"), env)
    assert not eval_pred(parse_pred("exists k:n. i = 2*k + 1"), env)


def test_counting_evaluator_counts_live_operations():
    e = parse_expr("sum i:n. [i<2]*(x[i]*x[i])")
    v, ops = evaluate_counting(e, Env({"x": [1, 2, 3]}, {"n": 3}), types={"x": tensor(["n"])})
    assert v == 5
    assert ops == 3        # two products, one addition


# ---- value plumbing ---- #

shapes = st.sampled_from([REAL, tensor(["n"]), PairT(tensor(["n", "m"]), REAL)])


@given(shapes, st.integers(1, 3), st.integers(1, 3), st.data())
def test_flatten_unflatten_round_trip(t, n, m, data):
    sizes = {"n": n, "m": m}
    size = len(flatten(zero_of(t, sizes)))
    flat = data.draw(vec(size))
    v = unflatten(flat, t, sizes)
    assert flatten(v) == flat
    assert from_json(to_json(v), t) == v
    assert inner(v, v) == sum(a * a for a in flat)
