"""Scalar primitives callable as black boxes.

Each entry carries its arity, a float evaluator and one partial derivative
per argument, written as a core-language template over the placeholders
``_a0, _a1, ...``.  Partials are themselves built from registered
primitives, so derivatives of any order stay inside the language.
"""
import math
from fractions import Fraction
from dataclasses import dataclass

from ..lang_core import Var, Const, Add, Mul, BlackBox, substitute
from ..errors import UnregisteredBlackBox


@dataclass(frozen=True)
class Primitive:
    name: str
    arity: int
    fn: object
    partials: tuple

    def partial(self, k, args):
        """``df/dx_k`` instantiated at argument expressions ``args``."""
        return substitute(self.partials[k], {f"_a{j}": a for j, a in enumerate(args)})


def _arg(k):
    return Var(f"_a{k}")


def _call(name, *args):
    return BlackBox(name, args)


class PrimitiveRegistry:
    def __init__(self):
        self.table = {}

    def register(self, name, arity, fn, partials):
        self.table[name] = Primitive(name, arity, fn, tuple(partials))

    def __contains__(self, name):
        return name in self.table

    def get(self, name):
        p = self.table.get(name)
        if p is None:
            raise UnregisteredBlackBox(f"no primitive named {name!r}")
        return p

    def arities(self):
        return {n: p.arity for n, p in self.table.items()}

    def names(self):
        return sorted(self.table)


# ---- numeric kernels ---- #

def _dtanh(x):
    t = math.tanh(x)
    return 1.0 - t * t


def _dsqrt(x):
    return 0.5 / math.sqrt(x)


def _recip(x):
    return 1.0 / x


def _drecip(x):
    return -1.0 / (x * x)


def _sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


def _dsigmoid(x):
    s = _sigmoid(x)
    return s * (1.0 - s)


def default_registry():
    r = PrimitiveRegistry()
    x, y = _arg(0), _arg(1)
    neg1 = Const(-1)
    r.register("exp", 1, math.exp, [_call("exp", x)])
    r.register("sin", 1, math.sin, [_call("cos", x)])
    r.register("cos", 1, math.cos, [Mul(neg1, _call("sin", x))])
    r.register("log", 1, math.log, [_call("recip", x)])
    r.register("recip", 1, _recip, [_call("drecip", x)])
    r.register("drecip", 1, _drecip, [Mul(Const(-2), Mul(_call("drecip", x), _call("recip", x)))])
    r.register("sqrt", 1, math.sqrt, [_call("dsqrt", x)])
    r.register("dsqrt", 1, _dsqrt, [Mul(Const(Fraction(-1, 2)),
                                        Mul(_call("dsqrt", x), _call("recip", x)))])
    r.register("tanh", 1, math.tanh, [_call("dtanh", x)])
    r.register("dtanh", 1, _dtanh, [Mul(Const(-2), Mul(_call("tanh", x), _call("dtanh", x)))])
    r.register("sigmoid", 1, _sigmoid, [_call("dsigmoid", x)])
    r.register("dsigmoid", 1, _dsigmoid,
               [Mul(_call("dsigmoid", x), Add(Const(1), Mul(Const(-2), _call("sigmoid", x))))])
    r.register("hypot", 2, math.hypot, [Mul(x, _call("recip", _call("hypot", x, y))),
                                        Mul(y, _call("recip", _call("hypot", x, y)))])
    return r


DEFAULT = default_registry()
