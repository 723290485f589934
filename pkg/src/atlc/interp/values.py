"""Runtime values.

Scalars are ``Fraction`` (exact mode) or ``float``; pairs are 2-tuples;
arrays are lists.  Keeping to plain containers lets values round-trip
through JSON literal files with no wrapper classes.
"""
from fractions import Fraction

from ..lang_core import Real, PairT, Tensor, REAL
from ..errors import TypeMismatch

EXACT = "exact"
FLOAT = "float"


def scalar_zero(mode):
    return Fraction(0) if mode == EXACT else 0.0


def to_mode(v, mode):
    """Convert every scalar in ``v`` to the number type of ``mode``."""
    if isinstance(v, tuple):
        return (to_mode(v[0], mode), to_mode(v[1], mode))
    if isinstance(v, list):
        return [to_mode(x, mode) for x in v]
    if mode == EXACT:
        return v if isinstance(v, Fraction) else Fraction(v)
    return float(v)


def zero_of(t, sizes, mode=EXACT):
    """The zero value of type ``t`` at the given size bindings."""
    z = scalar_zero(mode)

    def build(t):
        if isinstance(t, Real):
            return z
        if isinstance(t, PairT):
            return (build(t.left), build(t.right))
        return [build(t.elem) for _ in range(t.size.evaluate(sizes))]
    return build(t)


def type_of_value(v):
    if isinstance(v, tuple):
        return PairT(type_of_value(v[0]), type_of_value(v[1]))
    if isinstance(v, list):
        if not v:
            raise TypeMismatch("cannot infer the element type of an empty array")
        return Tensor(len(v), type_of_value(v[0]))
    return REAL


def check_value(v, t, sizes, what="value"):
    """Raise TypeMismatch unless ``v`` has shape ``t``."""
    if isinstance(t, Real):
        if isinstance(v, (tuple, list)) or isinstance(v, bool):
            raise TypeMismatch(f"{what}: expected a scalar")
        return
    if isinstance(t, PairT):
        if not isinstance(v, tuple) or len(v) != 2:
            raise TypeMismatch(f"{what}: expected a pair")
        check_value(v[0], t.left, sizes, what)
        check_value(v[1], t.right, sizes, what)
        return
    n = t.size.evaluate(sizes)
    if not isinstance(v, list) or len(v) != n:
        raise TypeMismatch(f"{what}: expected an array of length {n}")
    for x in v:
        check_value(x, t.elem, sizes, what)


def from_json(obj, t, mode=EXACT):
    """Map a JSON-like literal (lists, 2-element lists for pairs, numbers or
    ``"p/q"`` strings) to a value of type ``t``."""
    if isinstance(t, Real):
        if isinstance(obj, str):
            return to_mode(Fraction(obj), mode)
        if isinstance(obj, (list, tuple, dict)) or isinstance(obj, bool):
            raise TypeMismatch("expected a number")
        return to_mode(Fraction(obj) if mode == EXACT else obj, mode)
    if isinstance(t, PairT):
        if not isinstance(obj, (list, tuple)) or len(obj) != 2:
            raise TypeMismatch("expected a 2-element list for a pair")
        return (from_json(obj[0], t.left, mode), from_json(obj[1], t.right, mode))
    if not isinstance(obj, (list, tuple)):
        raise TypeMismatch("expected a list for an array")
    return [from_json(x, t.elem, mode) for x in obj]


def to_json(v):
    if isinstance(v, tuple):
        return [to_json(v[0]), to_json(v[1])]
    if isinstance(v, list):
        return [to_json(x) for x in v]
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return v


def flatten(v):
    """Scalars of ``v`` in canonical order: pairs left to right, arrays by index."""
    out = []

    def go(v):
        if isinstance(v, (tuple, list)):
            for x in v:
                go(x)
        else:
            out.append(v)
    go(v)
    return out


def unflatten(flat, t, sizes):
    it = iter(flat)

    def build(t):
        if isinstance(t, Real):
            return next(it)
        if isinstance(t, PairT):
            return (build(t.left), build(t.right))
        return [build(t.elem) for _ in range(t.size.evaluate(sizes))]
    return build(t)


def inner(a, b):
    """Standard inner product of two values of the same shape."""
    acc = 0
    for x, y in zip(flatten(a), flatten(b)):
        acc += x * y
    return acc


def values_close(a, b, rel=1e-9, floor=1e-12):
    fa, fb = flatten(a), flatten(b)
    if len(fa) != len(fb):
        return False
    return all(abs(x - y) <= max(rel * max(abs(x), abs(y)), floor) for x, y in zip(fa, fb))
