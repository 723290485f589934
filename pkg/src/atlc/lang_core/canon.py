"""Canonical form for expressions: commutative additions put in a fixed
order, then binders renamed by order of first occurrence.

Sort keys ignore bound names, so renaming never changes an ordering
decision and the transform is idempotent."""
from .expr import (Var, Const, Add, Mul, BlackBox, PairCons, Proj, Gen, BigSum,
                   Access, Indicator, Let)
from .index import Idx
from .pred import PTrue, PFalse, Cmp, Rel, And, Or, Exists, pred_subst, exists, conj, disj
from .subst import free_vars, free_index
from .types import type_subst


def _idx_key(a, bound):
    return (tuple(("_" if n in bound else n, k) for n, k in a.terms), a.const)


def _pred_key(p, bound):
    if isinstance(p, PTrue):
        return ("T",)
    if isinstance(p, PFalse):
        return ("F",)
    if isinstance(p, Cmp):
        return ("C", p.op, _idx_key(p.lhs, bound), _idx_key(p.rhs, bound))
    if isinstance(p, Rel):
        return ("R", p.name) + tuple(_idx_key(a, bound) for a in p.args)
    if isinstance(p, (And, Or)):
        return (type(p).__name__, _pred_key(p.left, bound), _pred_key(p.right, bound))
    return ("E", _idx_key(p.extent, bound), _pred_key(p.body, bound | {p.var}))


def shape_key(e, bound=frozenset()):
    """Structural key that erases every bound name."""
    if isinstance(e, Var):
        return ("v", "_" if e.name in bound else e.name)
    if isinstance(e, Const):
        return ("c", e.value)
    if isinstance(e, (Add, Mul, PairCons)):
        return (type(e).__name__, shape_key(e.left, bound), shape_key(e.right, bound))
    if isinstance(e, BlackBox):
        return ("f", e.fn) + tuple(shape_key(a, bound) for a in e.args)
    if isinstance(e, Proj):
        return ("p", e.side, shape_key(e.body, bound))
    if isinstance(e, (Gen, BigSum)):
        return (type(e).__name__, _idx_key(e.extent, bound),
                shape_key(e.body, bound | {e.var}))
    if isinstance(e, Access):
        return ("a", shape_key(e.body, bound), _idx_key(e.index, bound))
    if isinstance(e, Indicator):
        return ("i", _pred_key(e.pred, bound), shape_key(e.body, bound))
    if isinstance(e, Let):
        return ("l", shape_key(e.rhs, bound), shape_key(e.body, bound | {e.var}))
    raise TypeError(e)


def _order_adds(e, bound=frozenset()):
    if isinstance(e, Add):
        a, b = _order_adds(e.left, bound), _order_adds(e.right, bound)
        if shape_key(b, bound) < shape_key(a, bound):
            a, b = b, a
        return Add(a, b)
    if isinstance(e, (Mul, PairCons)):
        return type(e)(_order_adds(e.left, bound), _order_adds(e.right, bound))
    if isinstance(e, BlackBox):
        return BlackBox(e.fn, [_order_adds(a, bound) for a in e.args])
    if isinstance(e, Proj):
        return Proj(e.side, _order_adds(e.body, bound))
    if isinstance(e, (Gen, BigSum)):
        return type(e)(e.var, e.extent, _order_adds(e.body, bound | {e.var}))
    if isinstance(e, Access):
        return Access(_order_adds(e.body, bound), e.index)
    if isinstance(e, Indicator):
        return Indicator(e.pred, _order_adds(e.body, bound))
    if isinstance(e, Let):
        return Let(e.var, e.ann, _order_adds(e.rhs, bound),
                   _order_adds(e.body, bound | {e.var}))
    return e


def _rename_binders(e, index_prefix="i", var_prefix="v"):
    taken = set(free_vars(e)) | set(free_index(e))
    counters = {"i": 0, "v": 0}

    def next_name(kind, prefix):
        while True:
            name = f"{prefix}{counters[kind]}"
            counters[kind] += 1
            if name not in taken:
                return name

    def pred(p, ren):
        if isinstance(p, Exists):
            v = next_name("i", index_prefix)
            inner = dict(ren)
            inner[p.var] = Idx.var(v)
            return exists(v, p.extent.subst(ren), pred(p.body, inner))
        if isinstance(p, And):
            return conj(pred(p.left, ren), pred(p.right, ren))
        if isinstance(p, Or):
            return disj(pred(p.left, ren), pred(p.right, ren))
        return pred_subst(p, ren)

    def go(t, vren, iren):
        if isinstance(t, Var):
            return vren.get(t.name, t)
        if isinstance(t, Const):
            return t
        if isinstance(t, (Add, Mul, PairCons)):
            return type(t)(go(t.left, vren, iren), go(t.right, vren, iren))
        if isinstance(t, BlackBox):
            return BlackBox(t.fn, [go(a, vren, iren) for a in t.args])
        if isinstance(t, Proj):
            return Proj(t.side, go(t.body, vren, iren))
        if isinstance(t, Access):
            return Access(go(t.body, vren, iren), t.index.subst(iren))
        if isinstance(t, Indicator):
            return Indicator(pred(t.pred, iren), go(t.body, vren, iren))
        if isinstance(t, (Gen, BigSum)):
            v = next_name("i", index_prefix)
            inner = dict(iren)
            inner[t.var] = Idx.var(v)
            return type(t)(v, t.extent.subst(iren), go(t.body, vren, inner))
        if isinstance(t, Let):
            rhs = go(t.rhs, vren, iren)
            v = next_name("v", var_prefix)
            inner = dict(vren)
            inner[t.var] = Var(v)
            ann = None if t.ann is None else type_subst(t.ann, iren)
            return Let(v, ann, rhs, go(t.body, inner, iren))
        raise TypeError(t)

    return go(e, {}, {})


def canonicalize(e):
    return _rename_binders(_order_adds(e))


def alpha_equal(a, b):
    return canonicalize(a) is canonicalize(b)
