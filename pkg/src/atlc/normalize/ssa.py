"""Tensor SSA: a flat list of single-assignment bindings, each one of six
predicated primitive forms, and an output variable or tuple of variables.

Index variables inside a right-hand side are named by position:
``i0, i1, ..`` for element-wise forms, ``g0, ..`` (generated) and
``s0, ..`` (summed) for contractions.  Contraction factors are indexed by
summed variables only, each summed variable used by at most one factor
position.
"""
from dataclasses import dataclass
from fractions import Fraction

from ..lang_core import (Var, Const, Add, Mul, BlackBox, Indicator, Idx, REAL,
                         TRUE, PairT, PairCons, Tensor, tensor, dims, gen,
                         bigsum, access, proj_chain, lets, pred_free, proj_type)
from ..lang_core.pred import Pred


def ivar(k):
    return f"i{k}"


def gvar(k):
    return f"g{k}"


def svar(k):
    return f"s{k}"


def _ind(p, e):
    return e if p is TRUE else Indicator(p, e)


@dataclass(frozen=True)
class InputRef:
    """Projection chain ``snd (fst x)``; ``path`` lists sides innermost first."""
    var: str
    path: tuple = ()

    def refs(self):
        return ()

    def to_expr(self):
        return proj_chain(self.var, self.path)


@dataclass(frozen=True)
class ConstGen:
    dims: tuple
    value: Fraction

    def refs(self):
        return ()

    def to_expr(self):
        return gen([(ivar(k), n) for k, n in enumerate(self.dims)], Const(self.value))


@dataclass(frozen=True)
class AddGen:
    """``gen i. [p0] a[i] + [p1] b[i]``"""
    dims: tuple
    pred0: Pred
    arg0: str
    pred1: Pred
    arg1: str

    def refs(self):
        return (self.arg0, self.arg1)

    def to_expr(self):
        ix = [Idx.var(ivar(k)) for k in range(len(self.dims))]
        body = Add(_ind(self.pred0, access(Var(self.arg0), *ix)),
                   _ind(self.pred1, access(Var(self.arg1), *ix)))
        return gen([(ivar(k), n) for k, n in enumerate(self.dims)], body)


@dataclass(frozen=True)
class MapGen:
    """``gen i. [p] f(a[i], ..)``"""
    dims: tuple
    pred: Pred
    fn: str
    args: tuple

    def refs(self):
        return self.args

    def to_expr(self):
        ix = [Idx.var(ivar(k)) for k in range(len(self.dims))]
        body = BlackBox(self.fn, [access(Var(a), *ix) for a in self.args])
        return gen([(ivar(k), n) for k, n in enumerate(self.dims)], _ind(self.pred, body))


@dataclass(frozen=True)
class Contract:
    """``gen g. sum s. [p] X0[s..] * X1[s..]`` (one or two factors).

    ``factors`` is a tuple of ``(name, positions)`` where ``positions`` are
    the summed-variable numbers indexing that factor, outermost first."""
    out: tuple
    sums: tuple
    pred: Pred
    factors: tuple

    def refs(self):
        return tuple(f for f, _ in self.factors)

    @property
    def unary(self):
        return len(self.factors) == 1

    def to_expr(self):
        terms = [access(Var(f), *[Idx.var(svar(k)) for k in pos]) for f, pos in self.factors]
        body = terms[0] if len(terms) == 1 else Mul(terms[0], terms[1])
        body = bigsum([(svar(k), n) for k, n in enumerate(self.sums)], _ind(self.pred, body))
        return gen([(gvar(k), n) for k, n in enumerate(self.out)], body)


FORMS = (InputRef, ConstGen, AddGen, MapGen, Contract)


def rhs_dims(rhs, shapes, inputs):
    """Array extents of a right-hand side's value."""
    if isinstance(rhs, InputRef):
        t = inputs[rhs.var]
        for k in rhs.path:
            t = proj_type(t, k)
        return tuple(dims(t)[0])
    if isinstance(rhs, Contract):
        return rhs.out
    return rhs.dims


def output_names(out):
    if isinstance(out, str):
        return [out]
    return output_names(out[0]) + output_names(out[1])


def map_output(out, f):
    if isinstance(out, str):
        return f(out)
    return (map_output(out[0], f), map_output(out[1], f))


class SSAProgram:
    """``inputs`` maps names to (struct-of-arrays) types, ``bindings`` is a
    tuple of ``(name, rhs)``; ``output`` is a name or nested pairs of names."""

    def __init__(self, inputs, bindings, output, sizes=(), relations=None):
        self.inputs = dict(inputs)
        self.bindings = tuple(bindings)
        self.output = output
        self.sizes = tuple(sizes)
        self.relations = dict(relations or {})
        self._shapes = None

    # ---- structure ---- #

    def shapes(self):
        if self._shapes is None:
            out = {}
            for x, rhs in self.bindings:
                out[x] = rhs_dims(rhs, out, self.inputs)
            self._shapes = out
        return self._shapes

    def rhs_of(self, name):
        for x, rhs in self.bindings:
            if x == name:
                return rhs
        raise KeyError(name)

    def binding_type(self, name):
        return tensor(self.shapes()[name])

    def output_type(self):
        def go(o):
            if isinstance(o, str):
                return self.binding_type(o)
            return PairT(go(o[0]), go(o[1]))
        return go(self.output)

    def uses(self):
        count = {}
        for _, rhs in self.bindings:
            for r in rhs.refs():
                count[r] = count.get(r, 0) + 1
        for o in output_names(self.output):
            count[o] = count.get(o, 0) + 1
        return count

    def replace(self, bindings=None, output=None, inputs=None):
        return SSAProgram(self.inputs if inputs is None else inputs,
                          self.bindings if bindings is None else bindings,
                          self.output if output is None else output,
                          self.sizes, self.relations)

    # ---- views ---- #

    def output_expr(self):
        def go(o):
            if isinstance(o, str):
                return Var(o)
            return PairCons(go(o[0]), go(o[1]))
        return go(self.output)

    def to_expr(self):
        """The program as a core let-block."""
        return lets([(x, rhs.to_expr()) for x, rhs in self.bindings], self.output_expr())

    def to_text(self):
        from ..frontend.printer import format_expr
        return format_expr(self.to_expr())

    def __str__(self):
        return self.to_text()

    def __eq__(self, other):
        return (isinstance(other, SSAProgram) and self.bindings == other.bindings
                and self.output == other.output and self.inputs == other.inputs)

    def __hash__(self):
        return hash((self.bindings, self.output))

    # ---- semantics ---- #

    def evaluate(self, env, mode=None, registry=None):
        from ..interp import evaluate, EXACT
        return evaluate(self.to_expr(), env, mode or EXACT, registry=registry)

    def cost(self, env=None):
        from ..cost_model import cost
        return cost(self.to_expr(), env)

    def io_cost(self, env=None):
        from ..cost_model import type_size
        return (self.cost(env) + sum(type_size(t, env) for t in self.inputs.values())
                + type_size(self.output_type(), env))


# ---- validation ---- #

def validate_ssa(prog, cse=True):
    """(True, None) or (False, message) for the SSA grammar and its
    single-assignment, CSE (unless ``cse`` is off) and naming invariants."""
    bound = set(prog.inputs)
    seen_rhs = {}
    shapes = {}
    for x, rhs in prog.bindings:
        if x in bound:
            return False, f"{x} bound twice"
        if not isinstance(rhs, FORMS):
            return False, f"{x}: not a primitive form"
        for r in rhs.refs():
            if r not in shapes:
                return False, f"{x}: refers to {r} before its binding"
        if cse and rhs in seen_rhs:
            return False, f"{x}: duplicates {seen_rhs[rhs]}"
        seen_rhs[rhs] = x
        msg = _check_rhs(x, rhs, shapes, prog.inputs)
        if msg:
            return False, msg
        shapes[x] = rhs_dims(rhs, shapes, prog.inputs)
        bound.add(x)
    for o in output_names(prog.output):
        if o not in shapes:
            return False, f"output {o} is not a binding"
    return True, None


def _check_rhs(x, rhs, shapes, inputs):
    if isinstance(rhs, InputRef):
        if rhs.var not in inputs:
            return f"{x}: unknown input {rhs.var}"
        t = inputs[rhs.var]
        for k in rhs.path:
            if not isinstance(t, PairT):
                return f"{x}: projection from non-pair input"
            t = proj_type(t, k)
        if isinstance(t, PairT):
            return f"{x}: input reference of pair type"
        return None
    if isinstance(rhs, ConstGen):
        return None
    if isinstance(rhs, (AddGen, MapGen)):
        allowed = {ivar(k) for k in range(len(rhs.dims))}
        preds = (rhs.pred0, rhs.pred1) if isinstance(rhs, AddGen) else (rhs.pred,)
        for p in preds:
            extra = {n for n in pred_free(p) if n.startswith(("i", "g", "s")) and n not in allowed}
            if extra & _loopish(extra):
                return f"{x}: predicate mentions {sorted(extra)[0]}"
        for a in rhs.refs():
            if shapes[a] != tuple(rhs.dims):
                return f"{x}: operand {a} has the wrong shape"
        return None
    if isinstance(rhs, Contract):
        if len(rhs.factors) not in (1, 2):
            return f"{x}: contraction with {len(rhs.factors)} factors"
        used = []
        for f, pos in rhs.factors:
            if len(pos) != len(shapes[f]):
                return f"{x}: factor {f} indexed with {len(pos)} of {len(shapes[f])} dims"
            for k, d in zip(pos, shapes[f]):
                if not 0 <= k < len(rhs.sums):
                    return f"{x}: factor {f} uses a non-summed index"
                if rhs.sums[k] != d:
                    return f"{x}: extent mismatch on factor {f}"
            used += list(pos)
        if len(set(used)) != len(used):
            return f"{x}: a summed index is shared between factor positions"
        return None
    return f"{x}: unknown form"


def _loopish(names):
    import re
    return {n for n in names if re.fullmatch(r"[igs]\d+", n)}
