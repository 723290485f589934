"""Core terms: affine indices, predicates, typing, substitution."""
from hypothesis import given, strategies as st
import pytest

from atlc.lang_core import (Idx, Var, Const, Gen, BigSum, Access, Mul, Add, Let,
                            REAL, Tensor, PairT, tensor, TRUE, FALSE, cmp, conj, disj,
                            eq, exists, in_range, conjuncts, pred_subst, pred_free,
                            free_vars, free_index, substitute, alpha_equal,
                            canonicalize, typecheck, type_size, is_soa)
from atlc.errors import TypeMismatch, UnboundVariable, NonAffineIndex
from atlc.frontend import parse_expr

names = st.sampled_from(["i", "j", "n", "m"])
coef = st.integers(-5, 5)
affine = st.builds(lambda ts, c: Idx(tuple(ts), c), st.lists(st.tuples(names, coef), max_size=4),
                   st.integers(-9, 9))
points = st.fixed_dictionaries({k: st.integers(-20, 20) for k in ("i", "j", "n", "m")})


def ev(a, env):
    return a.const + sum(k * env[n] for n, k in a.terms)


# ---- indices ---- #

@given(affine, affine, points)
def test_index_addition_is_pointwise(a, b, env):
    assert ev(a + b, env) == ev(a, env) + ev(b, env)
    assert ev(a - b, env) == ev(a, env) - ev(b, env)


@given(affine, st.integers(-4, 4), points)
def test_index_scaling_is_pointwise(a, k, env):
    assert ev(a * k, env) == k * ev(a, env)


@given(affine)
def test_index_normal_form_is_canonical(a):
    assert a + Idx.lit(0) is a
    assert a - a == Idx.lit(0)


def test_index_product_of_variables_is_rejected():
    with pytest.raises(NonAffineIndex):
        Idx.var("i") * Idx.var("j")


def test_hash_consing_shares_equal_terms():
    a = Mul(Var("x"), Const(2))
    b = Mul(Var("x"), Const(2))
    assert a is b


# ---- predicates ---- #

def test_constant_comparisons_fold():
    assert cmp("<", 1, 2) is TRUE
    assert cmp("=", 1, 2) is FALSE
    assert conj(TRUE, eq("i", "j")) == eq("i", "j")
    assert disj(FALSE, FALSE) is FALSE


def test_conjuncts_flatten():
    p = conj(eq("i", "j"), conj(cmp("<", "i", "n"), cmp("<=", 0, "j")))
    assert len(conjuncts(p)) == 3


def test_exists_binds_its_variable():
    p = exists("k", Idx.var("n"), eq("i", Idx.var("k") + 1))
    assert pred_free(p) == {"i", "n"}


def test_pred_subst_avoids_capture():
    p = exists("k", Idx.var("n"), eq("i", "k"))
    q = pred_subst(p, {"i": Idx.var("k")})
    assert "k" in pred_free(q)


# ---- types ---- #

def test_type_sizes():
    t = PairT(tensor(["n", "m"]), REAL)
    assert type_size(t, {"n": 3, "m": 2}) == 7
    assert is_soa(t)
    assert not is_soa(Tensor(Idx.var("n"), PairT(REAL, REAL)))


def test_typecheck_gen_and_sum():
    e = parse_expr("gen i:n. sum j:m. A[i, j]*x[j]")
    t = typecheck(e, {"A": tensor(["n", "m"]), "x": tensor(["m"])}, index_scope={"n", "m"})
    assert t == tensor(["n"])


def test_typecheck_rejects_adding_arrays():
    with pytest.raises(TypeMismatch):
        typecheck(parse_expr("x + x"), {"x": tensor(["n"])}, index_scope={"n"})


def test_typecheck_rejects_unbound_index():
    with pytest.raises(UnboundVariable):
        typecheck(parse_expr("sum i:n. x[k]"), {"x": tensor(["n"])}, index_scope={"n"})


# ---- binding structure ---- #

def test_free_variables_respect_binders():
    e = parse_expr("let y = 2*x in gen i:n. y*z[i]")
    assert free_vars(e) == {"x", "z"}
    assert free_index(e) == {"n"}


def test_substitution_is_capture_avoiding():
    e = parse_expr("let y = 2 in x*y")
    out = substitute(e, {"x": Var("y")})
    assert free_vars(out) == {"y"}


def test_alpha_equivalence():
    a = parse_expr("gen i:n. sum j:n. A[i, j]")
    b = parse_expr("gen p:n. sum q:n. A[p, q]")
    c = parse_expr("gen p:n. sum q:n. A[q, p]")
    assert alpha_equal(a, b)
    assert not alpha_equal(a, c)


def test_canonicalize_orders_commutative_sums():
    a = parse_expr("x*2 + y")
    b = parse_expr("y + x*2")
    assert canonicalize(a) == canonicalize(b)
