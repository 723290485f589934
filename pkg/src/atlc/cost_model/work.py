"""Sparsity-aware work cost.

Every sub-term has a *guard*: whether it can be non-zero at the current
index point.  An indicator's guard is its predicate (and its body's), a
sum's is "some iteration is live", an addition's is "either side is live",
a let's is its body's; every other term is always live.  Additions count
only when both sides are live and a summation over ``k`` live iterations
costs ``k - 1`` additions, which reproduces the starred rules of the cost
model on their stated forms and costs nested summations jointly.
"""
from collections import namedtuple

from ..lang_core import (Var, Const, Add, Mul, BlackBox, PairCons, Proj, Gen,
                         BigSum, Access, Indicator, Let, free_index)
from ..interp.evaluator import (compile_idx, compile_pred, Env, _restore, _MISSING,
                                pinned_sum_index, _span)
from ..errors import UnboundIndexVariable

Breakdown = namedtuple("Breakdown", "adds muls calls")


class _CostCompiler:
    def __init__(self, relations):
        self.relations = relations
        self.acc = [0, 0, 0]       # adds, muls, calls

    def go(self, e):
        acc = self.acc
        go = self.go
        if isinstance(e, (Var, Const)):
            return lambda ie: True
        if isinstance(e, Add):
            fa, fb = go(e.left), go(e.right)

            def add(ie):
                ga = fa(ie)
                gb = fb(ie)
                if ga and gb:
                    acc[0] += 1
                return ga or gb
            return add
        if isinstance(e, Mul):
            fa, fb = go(e.left), go(e.right)

            def mul(ie):
                fa(ie)
                fb(ie)
                acc[1] += 1
                return True
            return mul
        if isinstance(e, BlackBox):
            fs = [go(a) for a in e.args]

            def call(ie):
                for f in fs:
                    f(ie)
                acc[2] += 1
                return True
            return call
        if isinstance(e, PairCons):
            fa, fb = go(e.left), go(e.right)

            def pair(ie):
                fa(ie)
                fb(ie)
                return True
            return pair
        if isinstance(e, (Proj, Access)):
            fb = go(e.body)

            def through(ie):
                fb(ie)
                return True
            return through
        if isinstance(e, Gen):
            fn, fb, var = compile_idx(e.extent), go(e.body), e.var

            def gen(ie):
                old = ie.get(var, _MISSING)
                for k in range(fn(ie)):
                    ie[var] = k
                    fb(ie)
                _restore(ie, var, old)
                return True
            return gen
        if isinstance(e, BigSum):
            fn, fb, var = compile_idx(e.extent), go(e.body), e.var
            pin = pinned_sum_index(e)    # other iterations are guarded off

            def bigsum(ie):
                old = ie.get(var, _MISSING)
                live = 0
                for k in _span(fn(ie), pin, ie):
                    ie[var] = k
                    if fb(ie):
                        live += 1
                _restore(ie, var, old)
                if live:
                    acc[0] += live - 1
                return live > 0
            return bigsum
        if isinstance(e, Indicator):
            fp, fb = compile_pred(e.pred, self.relations), go(e.body)
            return lambda ie: fb(ie) if fp(ie) else False
        if isinstance(e, Let):
            fr, fb = go(e.rhs), go(e.body)

            def let(ie):
                fr(ie)
                return fb(ie)
            return let
        raise TypeError(e)


def _sizes_relations(env):
    if isinstance(env, Env):
        return env.sizes, env.relations
    if env is None:
        return {}, {}
    return env, {}


def cost_breakdown(e, env=None):
    """Additions, multiplications and black-box calls executed by ``e``."""
    sizes, relations = _sizes_relations(env)
    missing = free_index(e) - sizes.keys()
    if missing:
        raise UnboundIndexVariable(f"unbound index variable {sorted(missing)[0]!r}")
    comp = _CostCompiler(relations)
    comp.go(e)(dict(sizes))
    return Breakdown(*comp.acc)


def cost(e, env=None):
    """Work cost of ``e``: scalar additions + multiplications + calls."""
    return sum(cost_breakdown(e, env))


def guard(e, env=None):
    """Whether ``e`` may be non-zero under the bindings of ``env``."""
    sizes, relations = _sizes_relations(env)
    comp = _CostCompiler(relations)
    return comp.go(e)(dict(sizes))
