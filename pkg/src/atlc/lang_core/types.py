"""Types: scalars, pairs and sized arrays.  Array sizes are affine index
terms over size variables, so ``[n+m-1]real`` is expressible."""
from .hashcons import Node
from .index import Idx
from ..errors import TypeMismatch


class Type(Node):
    __slots__ = ()


class Real(Type):
    __slots__ = ()
    _fields = ()

    def __str__(self):
        return "real"


class PairT(Type):
    __slots__ = ()
    _fields = ("left", "right")

    def __str__(self):
        return f"({self.left}, {self.right})"


class Tensor(Type):
    __slots__ = ()
    _fields = ("size", "elem")

    def __new__(cls, size, elem):
        return cls._make(Idx.coerce(size), elem)

    def __str__(self):
        return f"[{self.size}]{self.elem}"


REAL = Real()


def tensor(sizes, elem=REAL):
    """``tensor([n, m])`` is ``[n][m]real``."""
    for n in reversed(list(sizes)):
        elem = Tensor(n, elem)
    return elem


def dims(t):
    """Split ``[n0]..[nk]T`` into ([n0..nk], T) with T not a tensor."""
    out = []
    while isinstance(t, Tensor):
        out.append(t.size)
        t = t.elem
    return out, t


def is_scalar(t):
    return t is REAL


def is_soa(t):
    """Struct-of-arrays: no pair appears under an array constructor."""
    if isinstance(t, Real):
        return True
    if isinstance(t, PairT):
        return is_soa(t.left) and is_soa(t.right)
    _, base = dims(t)
    return isinstance(base, Real)


def type_subst(t, mapping):
    if isinstance(t, Real):
        return t
    if isinstance(t, PairT):
        return PairT(type_subst(t.left, mapping), type_subst(t.right, mapping))
    return Tensor(t.size.subst(mapping), type_subst(t.elem, mapping))


def type_names(t):
    if isinstance(t, Tensor):
        return t.size.names() | type_names(t.elem)
    if isinstance(t, PairT):
        return type_names(t.left) | type_names(t.right)
    return frozenset()


def type_size(t, sizes):
    """Number of scalars in a value of type ``t`` at concrete sizes."""
    if isinstance(t, Real):
        return 1
    if isinstance(t, PairT):
        return type_size(t.left, sizes) + type_size(t.right, sizes)
    n = t.size.evaluate(sizes)
    if n < 0:
        raise TypeMismatch(f"negative array size {n} for {t}")
    return n * type_size(t.elem, sizes)


def proj_type(t, k):
    if not isinstance(t, PairT):
        raise TypeMismatch(f"projection from non-pair type {t}")
    return t.left if k == 0 else t.right


def types_equal(a, b, sizes=None):
    """Structural equality; with ``sizes`` array extents are compared by value."""
    if sizes is None:
        return a is b
    if type(a) is not type(b):
        return False
    if isinstance(a, Real):
        return True
    if isinstance(a, PairT):
        return types_equal(a.left, b.left, sizes) and types_equal(a.right, b.right, sizes)
    return (a.size.evaluate(sizes) == b.size.evaluate(sizes)
            and types_equal(a.elem, b.elem, sizes))
