"""The oracles themselves: known Jacobians, differences, and that they
notice a wrong derivative."""
from fractions import Fraction

import pytest

from atlc.errors import DimensionTooLarge, NonScalarOutput
from atlc.frontend import parse
from atlc.interp import Env, EXACT, FLOAT
from atlc.normalize import normalize
from atlc.oracle import (Subject, jacobian_by_probing, finite_diff_gradient,
                         check_universal_property, instrumented_cost, ssa_match,
                         random_env, rng_for)

from helpers import fixture


def test_convolution_jacobian_is_banded():
    s = Subject(fixture("conv").program, wrt=["x"])
    env = Env({"x": [Fraction(k) for k in range(4)], "c": [Fraction(10), Fraction(20)]},
              {"n": 3, "m": 2})
    J = jacobian_by_probing(s, env, use="forward")
    assert J.entries == [[20, 10, 0, 0], [0, 20, 10, 0], [0, 0, 20, 10]]
    assert jacobian_by_probing(s, env, use="adjoint") == J.transpose()


def test_linear_dag_jacobian():
    s = Subject(fixture("linear_dag").program)
    env = Env({"x": Fraction(1), "y": Fraction(1)}, {})
    assert jacobian_by_probing(s, env).entries == [[8, 0], [46, 33]]


def test_finite_differences_of_a_square():
    prog = parse("input x : real\nx*x")
    g = finite_diff_gradient(prog, Env({"x": 3.0}, {}))
    assert g == pytest.approx(6.0, rel=1e-9)


def test_finite_differences_of_a_constant():
    prog = parse("input x : real\n5")
    assert finite_diff_gradient(prog, Env({"x": 3.0}, {})) == 0.0


def test_finite_differences_need_a_scalar():
    with pytest.raises(NonScalarOutput):
        finite_diff_gradient(fixture("conv").program, Env({}, {"n": 2, "m": 1}))


def test_probing_refuses_large_jacobians():
    s = Subject(fixture("matmul").program)
    env = random_env(s.inputs, {"n": 8, "m": 8, "k": 8}, rng_for(0))
    with pytest.raises(DimensionTooLarge):
        jacobian_by_probing(s, env)


# ---- the oracles catch mistakes ---- #

def wrong_adjoint(name, factor):
    """A subject whose adjoint is replaced by a scaled copy."""
    s = Subject(fixture(name).program)
    good = s.eval_adjoint

    def scaled(env, dy, mode=EXACT):
        g = good(env, dy, mode)
        return [factor * v for v in g] if isinstance(g, list) else factor * g
    s.eval_adjoint = scaled
    return s


def test_pairing_check_rejects_a_scaled_adjoint():
    rep = check_universal_property(wrong_adjoint("trace", 2), trials=5, seed=1)
    assert not rep.passed
    assert check_universal_property(Subject(fixture("trace").program), trials=5, seed=1).passed


def test_jacobian_check_rejects_a_scaled_adjoint():
    s = wrong_adjoint("sum_squares", 3)
    env = random_env(s.inputs, {"n": 3}, rng_for(2))
    assert jacobian_by_probing(s, env, use="adjoint") != \
        jacobian_by_probing(s, env, use="forward").transpose()


def test_float_trials_use_relative_error():
    rep = check_universal_property(Subject(fixture("logistic").program), trials=20, seed=4)
    assert rep.mode == FLOAT and rep.passed and rep.max_rel_err < 1e-12


# ---- structural comparison ---- #

def test_ssa_match_up_to_names_and_order():
    a = normalize(parse("size n\ninput A : [n][n]real, B : [n][n]real\n"
                        "gen i:n. gen k:n. sum j:n. A[i, j]*B[j, k]"))
    b = normalize(parse("size n\ninput P : [n][n]real, Q : [n][n]real\n"
                        "gen p:n. gen q:n. sum r:n. P[p, r]*Q[r, q]"))
    c = normalize(parse("size n\ninput A : [n][n]real, B : [n][n]real\n"
                        "gen i:n. gen k:n. sum j:n. A[j, i]*B[j, k]"))
    sizes = [{"n": k} for k in (1, 2, 3)]
    assert ssa_match(a, b, sizes, {"A": "P", "B": "Q"})
    assert not ssa_match(a, c, sizes)


def test_instrumented_counts_on_a_fixture():
    s = Subject(fixture("matmul").program)
    env = random_env(s.inputs, {"n": 2, "m": 3, "k": 2}, rng_for(0))
    ops, model = instrumented_cost(s.expr, env)
    assert ops == model == 2 * 2 * (3 + 2)
