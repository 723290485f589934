"""Predicate cardinalities, type sizes and the inner-product extension."""
from itertools import product

from ..lang_core import Idx, TRUE, type_size as _type_size, PairT
from ..interp.evaluator import compile_pred, Env
from .work import cost, _sizes_relations


def type_size(t, env=None):
    """$(T): 1 for a scalar, sums over pairs, extent times element size."""
    sizes, _ = _sizes_relations(env)
    return _type_size(t, sizes)


def pred_count(p, ranges, env=None):
    """Number of points in the box ``ranges`` satisfying ``p``.

    ``ranges`` is a list of ``(var, extent)`` or ``(var, lo, hi)``."""
    sizes, relations = _sizes_relations(env)
    ie = dict(sizes)
    names, spans = [], []
    for r in ranges:
        if len(r) == 2:
            v, lo, hi = r[0], 0, r[1]
        else:
            v, lo, hi = r
        lo = Idx.coerce(lo).evaluate(ie) if not isinstance(lo, int) else lo
        hi = Idx.coerce(hi).evaluate(ie) if not isinstance(hi, int) else hi
        names.append(v)
        spans.append(range(lo, hi))
    f = compile_pred(p, relations)
    n = 0
    for point in product(*spans):
        ie.update(zip(names, point))
        if f(ie):
            n += 1
    return n


def size_cost_io(e, input_types, output_type, env=None):
    """$_IO: cost plus the flat sizes of the input tuple and the output."""
    return (cost(e, env) + sum(type_size(t, env) for t in input_types)
            + type_size(output_type, env))


def cost_extended(state, env=None):
    """Cost of an inner-product state: its lets, the forward derivatives held
    by its pending differential lets, and per inner product the interface
    size ($(T), or the predicate's cardinality) plus both sides' costs."""
    total = 0
    for _, rhs in state.lets:
        total += cost(rhs, env)
    for _, deriv in state.pending_derivatives():
        total += cost(deriv, env)
    for ip in state.products:
        total += inner_product_cost(ip, env)
    return total


def inner_product_cost(ip, env=None):
    """``ip`` has ``left``, ``right``, ``type``, ``pred`` (None when
    unpredicated) and ``index`` (one variable per array dimension)."""
    side = cost(ip.left, env) + cost(ip.right, env)
    if ip.pred is None or ip.pred is TRUE:
        return type_size(ip.type, env) + side
    sizes, _ = _sizes_relations(env)
    t, ranges = ip.type, []
    for v in ip.index:
        ranges.append((v, t.size.evaluate(sizes)))
        t = t.elem
    return pred_count(ip.pred, ranges, env) + side
