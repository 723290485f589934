"""Expression terms of the core tensor language.

``Gen`` and ``BigSum`` iterate their index over ``[0, extent)``; the front
end shifts any other lower bound into the body.  Scalar constants are
always stored as ``Fraction`` so exact evaluation is possible.
"""
from fractions import Fraction

from .hashcons import Node
from .index import Idx


class Expr(Node):
    __slots__ = ()


class Var(Expr):
    __slots__ = ()
    _fields = ("name",)


class Const(Expr):
    __slots__ = ()
    _fields = ("value",)

    def __new__(cls, value):
        if isinstance(value, float):
            value = Fraction(value)
        elif not isinstance(value, Fraction):
            value = Fraction(value)
        return cls._make(value)


class Add(Expr):
    __slots__ = ()
    _fields = ("left", "right")


class Mul(Expr):
    __slots__ = ()
    _fields = ("left", "right")


class BlackBox(Expr):
    __slots__ = ()
    _fields = ("fn", "args")

    def __new__(cls, fn, args):
        return cls._make(fn, tuple(args))


class PairCons(Expr):
    __slots__ = ()
    _fields = ("left", "right")


class Proj(Expr):
    __slots__ = ()
    _fields = ("side", "body")


class Gen(Expr):
    __slots__ = ()
    _fields = ("var", "extent", "body")

    def __new__(cls, var, extent, body):
        return cls._make(var, Idx.coerce(extent), body)


class BigSum(Expr):
    __slots__ = ()
    _fields = ("var", "extent", "body")

    def __new__(cls, var, extent, body):
        return cls._make(var, Idx.coerce(extent), body)


class Access(Expr):
    __slots__ = ()
    _fields = ("body", "index")

    def __new__(cls, body, index):
        return cls._make(body, Idx.coerce(index))


class Indicator(Expr):
    __slots__ = ()
    _fields = ("pred", "body")


class Let(Expr):
    """``let var (: ann)? = rhs in body``; ``ann`` is a Type or None."""
    __slots__ = ()
    _fields = ("var", "ann", "rhs", "body")


BINDERS = (Gen, BigSum)
ZERO_C = Const(0)
ONE_C = Const(1)


# ---- small builders ---- #

def const(v):
    return Const(v)


def neg(e):
    return Mul(Const(-1), e)


def sub(a, b):
    return Add(a, neg(b))


def access(e, *idxs):
    for a in idxs:
        e = Access(e, a)
    return e


def gen(binds, body):
    """``gen([(i, n), (j, m)], e)`` nests Gens outermost first."""
    for v, n in reversed(list(binds)):
        body = Gen(v, n, body)
    return body


def bigsum(binds, body):
    for v, n in reversed(list(binds)):
        body = BigSum(v, n, body)
    return body


def lets(bindings, body):
    """Wrap ``body`` in ``[(x, rhs), ...]`` lets, first binding outermost."""
    for b in reversed(list(bindings)):
        x, rhs = b[0], b[1]
        ann = b[2] if len(b) > 2 else None
        body = Let(x, ann, rhs, body)
    return body


def proj_chain(x, path):
    """``path`` lists projections innermost first: (0, 1) is snd (fst x)."""
    e = x if isinstance(x, Expr) else Var(x)
    for k in path:
        e = Proj(k, e)
    return e


def children(e):
    """Sub-expressions in evaluation order."""
    if isinstance(e, (Add, Mul, PairCons)):
        return (e.left, e.right)
    if isinstance(e, BlackBox):
        return e.args
    if isinstance(e, (Proj, Gen, BigSum, Access, Indicator)):
        return (e.body,)
    if isinstance(e, Let):
        return (e.rhs, e.body)
    return ()


def term_size(e):
    seen = {}

    def go(t):
        if t in seen:
            return seen[t]
        r = 1 + sum(go(c) for c in children(t))
        seen[t] = r
        return r
    return go(e)
