"""Predicates over affine indices: comparisons, relation atoms, boolean
connectives and bounded existentials.

The smart constructors ``conj``, ``disj``, ``cmp`` and ``exists`` fold
constants and drop neutral elements; the raw classes never simplify.
"""
from .hashcons import Node
from .index import Idx, ZERO


class Pred(Node):
    __slots__ = ()


class PTrue(Pred):
    __slots__ = ()
    _fields = ()


class PFalse(Pred):
    __slots__ = ()
    _fields = ()


TRUE = PTrue()
FALSE = PFalse()

CMP_OPS = ("<", "<=", "=")


class Cmp(Pred):
    __slots__ = ()
    _fields = ("op", "lhs", "rhs")


class Rel(Pred):
    __slots__ = ()
    _fields = ("name", "args")


class And(Pred):
    __slots__ = ()
    _fields = ("left", "right")


class Or(Pred):
    __slots__ = ()
    _fields = ("left", "right")


class Exists(Pred):
    """``exists var in [0, extent). body``"""
    __slots__ = ()
    _fields = ("var", "extent", "body")


# --------------------------------------------------------------------------- #

def cmp(op, a, b):
    a, b = Idx.coerce(a), Idx.coerce(b)
    if op not in CMP_OPS:
        raise ValueError(f"bad comparison {op!r}")
    d = b - a
    if d.is_const():
        ok = {"<": d.const > 0, "<=": d.const >= 0, "=": d.const == 0}[op]
        return TRUE if ok else FALSE
    return Cmp(op, a, b)


def eq(a, b):
    return cmp("=", a, b)


def lt(a, b):
    return cmp("<", a, b)


def le(a, b):
    return cmp("<=", a, b)


def in_range(a, extent):
    """0 <= a < extent"""
    return conj(le(ZERO, a), lt(a, extent))


def conj(*ps):
    out = TRUE
    for p in ps:
        if p is FALSE or out is FALSE:
            return FALSE
        if p is TRUE:
            continue
        out = p if out is TRUE else And(out, p)
    return out


def disj(*ps):
    out = FALSE
    for p in ps:
        if p is TRUE or out is TRUE:
            return TRUE
        if p is FALSE:
            continue
        out = p if out is FALSE else Or(out, p)
    return out


def exists(var, extent, body):
    if body is TRUE:
        extent = Idx.coerce(extent)
        if extent.is_const():
            return TRUE if extent.const > 0 else FALSE
        return lt(ZERO, extent)
    if body is FALSE:
        return FALSE
    if var not in pred_free(body):
        return conj(lt(ZERO, extent), body)
    return Exists(var, Idx.coerce(extent), body)


def exists_many(binds, body):
    """Quantify over ``binds`` = [(var, extent), ...], outermost first."""
    for v, n in reversed(list(binds)):
        body = exists(v, n, body)
    return body


def conjuncts(p):
    if p is TRUE:
        return []
    if isinstance(p, And):
        return conjuncts(p.left) + conjuncts(p.right)
    return [p]


# --------------------------------------------------------------------------- #

def pred_free(p):
    """Free index/size names of a predicate."""
    if isinstance(p, (PTrue, PFalse)):
        return frozenset()
    if isinstance(p, Cmp):
        return p.lhs.names() | p.rhs.names()
    if isinstance(p, Rel):
        out = frozenset()
        for a in p.args:
            out |= a.names()
        return out
    if isinstance(p, (And, Or)):
        return pred_free(p.left) | pred_free(p.right)
    if isinstance(p, Exists):
        return (pred_free(p.body) - {p.var}) | p.extent.names()
    raise TypeError(p)


def pred_relations(p):
    if isinstance(p, Rel):
        return frozenset([p.name])
    if isinstance(p, (And, Or)):
        return pred_relations(p.left) | pred_relations(p.right)
    if isinstance(p, Exists):
        return pred_relations(p.body)
    return frozenset()


def pred_bound(p):
    """Names bound by existentials anywhere inside ``p``."""
    if isinstance(p, (And, Or)):
        return pred_bound(p.left) | pred_bound(p.right)
    if isinstance(p, Exists):
        return pred_bound(p.body) | {p.var}
    return frozenset()


def pred_subst(p, mapping, fresh=None):
    """Substitute index names by index expressions, avoiding capture."""
    if not mapping:
        return p
    if isinstance(p, (PTrue, PFalse)):
        return p
    if isinstance(p, Cmp):
        return cmp(p.op, p.lhs.subst(mapping), p.rhs.subst(mapping))
    if isinstance(p, Rel):
        return Rel(p.name, tuple(a.subst(mapping) for a in p.args))
    if isinstance(p, And):
        return conj(pred_subst(p.left, mapping, fresh), pred_subst(p.right, mapping, fresh))
    if isinstance(p, Or):
        return disj(pred_subst(p.left, mapping, fresh), pred_subst(p.right, mapping, fresh))
    if isinstance(p, Exists):
        inner = {k: v for k, v in mapping.items() if k != p.var}
        ext = p.extent.subst(mapping)
        if not inner:
            return exists(p.var, ext, p.body)
        incoming = frozenset()
        for v in inner.values():
            incoming |= Idx.coerce(v).names()
        var, body = p.var, p.body
        if var in incoming:
            new = _fresh_index(var, incoming | pred_free(body) | set(inner), fresh)
            body = pred_subst(body, {var: Idx.var(new)})
            var = new
        return exists(var, ext, pred_subst(body, inner, fresh))
    raise TypeError(p)


def pred_rename(p, mapping, fresh=None):
    return pred_subst(p, {a: Idx.var(b) for a, b in mapping.items()}, fresh)


def _fresh_index(base, avoid, fresh):
    if fresh is not None:
        return fresh(base)
    k = 0
    while True:
        cand = f"{base}_{k}"
        if cand not in avoid:
            return cand
        k += 1


def pred_size(p):
    if isinstance(p, (And, Or)):
        return 1 + pred_size(p.left) + pred_size(p.right)
    if isinstance(p, Exists):
        return 1 + pred_size(p.body)
    return 1
