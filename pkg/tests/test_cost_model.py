"""Work cost: closed forms, the guard rules and the pinned-sum shortcut."""
from hypothesis import given, strategies as st
import pytest

import atlc.cost_model.work as work
import atlc.interp.evaluator as evaluator
from atlc.cost_model import cost, cost_breakdown, guard, type_size, pred_count
from atlc.frontend import parse_expr, parse_pred
from atlc.interp import Env, evaluate_counting
from atlc.lang_core import tensor, PairT, REAL

from helpers import corpus


def c(text, **sizes):
    return cost(parse_expr(text), sizes)


# ---- closed forms ---- #

@given(st.integers(1, 9))
def test_dense_sum_costs_n_minus_one_additions(n):
    assert c("sum i:n. x[i]", n=n) == n - 1
    assert c("sum i:n. x[i]*y[i]", n=n) == 2 * n - 1


@given(st.integers(1, 9))
def test_matrix_product(n):
    # n^2 outputs, each n multiplications and n-1 additions
    assert c("gen i:n. gen k:n. sum j:n. A[i, j]*B[j, k]", n=n) == n * n * (2 * n - 1)


@given(st.integers(1, 9))
def test_indicator_masks_are_free(n):
    assert c("gen i:n. gen j:n. [i=j]*x", n=n) == 0
    assert c("sum i:n. sum j:n. [i=j]*A[i, j]", n=n) == n - 1


@given(st.integers(1, 8), st.integers(-9, 9))
def test_shifted_diagonal_counts_live_pairs(n, k):
    live = max(0, n - abs(k))
    want = live + max(live - 1, 0)
    assert c(f"sum i:n. sum j:n. [j=i+{k}]*x[j]*y[i]".replace("+-", "-"), n=n) == want


def test_disjoint_guards_add_for_free():
    assert c("gen i:n. [i<2]*x[i] + [2<=i]*y[i]", n=5) == 0
    assert c("gen i:n. [i<3]*x[i] + [2<=i]*y[i]", n=5) == 1


def test_breakdown_by_operation():
    b = cost_breakdown(parse_expr("sum i:n. exp(x[i])*x[i]"), {"n": 3})
    assert (b.adds, b.muls, b.calls) == (2, 3, 3)


def test_guard_of_a_dead_sum():
    assert not guard(parse_expr("sum i:n. [n<i]*x[i]"), {"n": 3})
    assert guard(parse_expr("sum i:n. [i=0]*x[i]"), {"n": 3})


def test_type_sizes_and_predicate_counts():
    assert type_size(PairT(tensor(["n", "n"]), REAL), {"n": 3}) == 10
    p = parse_pred("i<j")
    assert pred_count(p, [("i", 4), ("j", 4)]) == 6


def test_relation_guard_counts_table_entries():
    e = parse_expr("sum i:n. sum j:n. [R(i, j)]*A[i, j]*v[j]")
    env = Env({}, {"n": 3}, {"R": {(0, 1), (2, 2), (1, 0)}})
    assert cost(e, env) == 3 + 2


# ---- the pinned-sum shortcut against plain enumeration ---- #

def unpinned(monkeypatch):
    monkeypatch.setattr(work, "pinned_sum_index", lambda e: None)
    monkeypatch.setattr(evaluator, "pinned_sum_index", lambda e: None)
    monkeypatch.setattr(evaluator, "_pinned_exists", lambda p: None)


coeffs = st.integers(-2, 2)


@given(coeffs, coeffs, coeffs, st.integers(-3, 3), st.integers(1, 5), st.integers(1, 4))
def test_pinned_sums_match_enumeration(a, b, k, off, n, m):
    pred = f"{a}*i + {b}*s = t + {k}*m + {off}".replace("+ -", "- ")
    text = f"gen i:n. sum s:n+m. sum t:m. [{pred} and s<n]*x[s]*y[t]"
    e = parse_expr(text)
    env = {"n": n, "m": m}
    fast = cost(e, env)
    with pytest.MonkeyPatch.context() as mp:
        unpinned(mp)
        slow = cost(e, env)
    assert fast == slow


def test_pinned_sums_agree_on_the_corpus():
    from atlc.oracle import Subject, random_env, rng_for
    for fx in corpus():
        s = Subject(fx.program)
        env = random_env(s.inputs, fx.sizes, rng_for(0), relations=s.relations)
        terms = [s.expr, s.ssa.to_expr(), s.adjoint.to_expr()]
        fast = [cost(t, env) for t in terms]
        with pytest.MonkeyPatch.context() as mp:
            unpinned(mp)
            slow = [cost(t, env) for t in terms]
        assert fast == slow, fx.name


def test_instrumented_count_matches_on_a_masked_contraction():
    e = parse_expr("gen i:n. sum j:n. [i=j+1 or j=i]*x[j]*x[i]")
    env = Env({"x": [1, 2, 3, 4]}, {"n": 4})
    _, ops = evaluate_counting(e, env, types={"x": tensor(["n"])})
    assert ops == cost(e, env) == 7 + 3
