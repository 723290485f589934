"""Tokenizer, parser, printer and positioned diagnostics."""
from fractions import Fraction

from hypothesis import given, strategies as st
import pytest

from helpers import fixture

from atlc.frontend import (parse, parse_expr, parse_pred, parse_type, format_expr,
                           format_program, desugar_guards)
from atlc.lang_core import (Var, Const, Add, Mul, BigSum, Gen, Access, Indicator, Let,
                            BlackBox, Idx, REAL, PairT, tensor, cmp, conj)
from atlc.errors import AtlSyntaxError, DuplicateBinding, TypeMismatch, UnboundVariable


# ---- generated round trips ---- #

def scalars(depth, idx):
    """Scalar terms over x:[n]real, a:real and the index variables ``idx``."""
    leaves = [st.just(Var("a")),
              st.builds(Const, st.fractions(min_value=-9, max_value=9, max_denominator=5))]
    if idx:
        leaves.append(st.sampled_from(idx).map(lambda i: Access(Var("x"), Idx.var(i))))
    leaf = st.one_of(leaves)
    if depth == 0:
        return leaf
    sub = scalars(depth - 1, idx)
    k = f"k{len(idx)}"
    inner = scalars(depth - 1, idx + [k])
    guard = st.sampled_from(idx or ["n"]).map(lambda i: cmp("<", Idx.var(i), Idx.var("n")))
    return st.one_of(
        leaf,
        st.builds(Add, sub, sub),
        st.builds(Mul, sub, sub),
        st.builds(lambda b: BigSum(k, Idx.var("n"), b), inner),
        st.builds(Indicator, guard, sub),
        st.builds(lambda r, b: Let("t", None, r, Add(Var("t"), b)), sub, sub),
        st.builds(lambda b: BlackBox("exp", (b,)), sub),
    )


@given(scalars(3, []))
def test_print_parse_round_trip(e):
    assert parse_expr(format_expr(e)) == e


@given(scalars(2, ["i"]))
def test_print_parse_round_trip_in_gen(body):
    e = Gen("i", Idx.var("n"), body)
    assert parse_expr(format_expr(e)) == e


def test_program_round_trip():
    for name in ("conv", "pairs", "deconv_loss", "sparse_matvec"):
        prog = fixture(name).program
        again = parse(format_program(prog))
        assert again.body == prog.body
        assert again.inputs == prog.inputs


# ---- concrete syntax ---- #

def test_precedence():
    assert parse_expr("a + b*c") == Add(Var("a"), Mul(Var("b"), Var("c")))
    assert parse_expr("-a*b") == Mul(Mul(Const(-1), Var("a")), Var("b"))
    assert parse_expr("a - b") == Add(Var("a"), Mul(Const(-1), Var("b")))
    assert parse_expr("(a + b)*c") == Mul(Add(Var("a"), Var("b")), Var("c"))


def test_rational_literals():
    assert parse_expr("3/4") == Const(Fraction(3, 4))


def test_multi_index_access_and_binders():
    e = parse_expr("gen i:n. gen j:m. A[i, j]")
    assert e == Gen("i", Idx.var("n"), Gen("j", Idx.var("m"),
                    Access(Access(Var("A"), Idx.var("i")), Idx.var("j"))))


def test_types_and_predicates():
    assert parse_type("[n](real, [m]real)") == tensor(["n"], PairT(REAL, tensor(["m"])))
    p = parse_pred("i < n and j = 2*i")
    assert p == conj(cmp("<", "i", "n"), cmp("=", "j", Idx.var("i") * 2))


def test_guarded_access_desugars_to_a_range_check():
    prog = parse("size n\ninput x : [n]real\nsum i:n. x[i+1]?")
    body = desugar_guards(prog)
    assert isinstance(body.body, Indicator)


# ---- diagnostics ---- #

@pytest.mark.parametrize("src, pos", [
    ("size n\ninput x : [n]real\ngen i:n. x[i] +* 2", (3, 16)),
    ("size n\ninput x : [n]real\ngen i:n x[i]", (3, 9)),
    ("input x : real\n(x, x", (2, 6)),
])
def test_syntax_errors_carry_positions(src, pos):
    with pytest.raises(AtlSyntaxError) as exc:
        parse(src)
    assert exc.value.pos == pos


def test_duplicate_declarations_are_rejected():
    with pytest.raises(DuplicateBinding):
        parse("size n, n\ninput x : real\nx")


def test_type_errors_carry_positions():
    prog = parse("size n\ninput x : [n]real\nx + 1")
    with pytest.raises(TypeMismatch) as exc:
        prog.typecheck()
    assert exc.value.pos == (3, 1)


def test_undeclared_size_in_input_type():
    prog = parse("input x : [n]real\n1")
    with pytest.raises(UnboundVariable) as exc:
        prog.typecheck()
    assert exc.value.pos is not None
