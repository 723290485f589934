"""Reference evaluator.

Terms are compiled once into nested closures over two mutable
dictionaries (index/size bindings and value bindings); binders save and
restore the previous binding, which gives the usual shadowing.  A second
compiler produces the instrumented variant that also counts scalar
additions, multiplications and black-box calls as they happen.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction

from ..lang_core import (Var, Const, Add, Mul, BlackBox, PairCons, Proj, Gen,
                         BigSum, Access, Indicator, Let, PTrue, PFalse, Cmp, Rel,
                         And, Or, Exists, Typer, free_vars, free_index,
                         pred_relations, children)
from ..errors import (IndexOutOfBounds, UnknownBlackBox, MissingRelationTable,
                      UnboundIndexVariable, UnboundVariable, EvalError)
from .values import EXACT, FLOAT, zero_of, scalar_zero, type_of_value, to_mode

_MISSING = object()


@dataclass
class Env:
    """Value bindings, index/size bindings and relation tables."""
    values: dict = field(default_factory=dict)
    sizes: dict = field(default_factory=dict)
    relations: dict = field(default_factory=dict)

    def extend(self, values=None, sizes=None):
        v = dict(self.values)
        v.update(values or {})
        s = dict(self.sizes)
        s.update(sizes or {})
        return Env(v, s, self.relations)


# ---- indices and predicates ---- #

def compile_idx(a):
    terms, c = a.terms, a.const
    if not terms:
        return lambda ie: c
    if len(terms) == 1:
        (n, k), = terms
        if k == 1:
            return lambda ie: ie[n] + c
        return lambda ie: k * ie[n] + c

    def f(ie):
        v = c
        for n, k in terms:
            v += k * ie[n]
        return v
    return f


def _conjuncts(p):
    if isinstance(p, And):
        return _conjuncts(p.left) + _conjuncts(p.right)
    return [p]


def _solve_for(var, conjuncts, blocked):
    """A compiled ``ie -> k`` when some conjunct reads ``var = affine`` with
    a unit coefficient on ``var`` and no variable from ``blocked``."""
    for c in conjuncts:
        if not isinstance(c, Cmp) or c.op != "=":
            continue
        diff = c.lhs - c.rhs
        terms = dict(diff.terms)
        k = terms.pop(var, 0)
        if k not in (1, -1) or blocked & terms.keys():
            continue
        # k*var + rest = 0  =>  var = -rest/k
        rest = compile_idx(type(diff)(tuple(terms.items()), diff.const))
        return (lambda ie: -rest(ie)) if k == 1 else rest
    return None


def pinned_sum_index(e):
    """For ``sum var ...`` whose body is a chain of sums ending in an
    indicator that fixes ``var``, the solved value; every other iteration
    is guarded off.  ``None`` otherwise."""
    blocked, body = set(), e.body
    while isinstance(body, BigSum):
        blocked.add(body.var)
        body = body.body
    if not isinstance(body, Indicator):
        return None
    return _solve_for(e.var, _conjuncts(body.pred), blocked)


def _pinned_exists(p):
    blocked, body = set(), p.body
    while isinstance(body, Exists):
        blocked.add(body.var)
        body = body.body
    return _solve_for(p.var, _conjuncts(body), blocked)


def compile_pred(p, relations):
    if isinstance(p, PTrue):
        return lambda ie: True
    if isinstance(p, PFalse):
        return lambda ie: False
    if isinstance(p, Cmp):
        fa, fb = compile_idx(p.lhs), compile_idx(p.rhs)
        if p.op == "<":
            return lambda ie: fa(ie) < fb(ie)
        if p.op == "<=":
            return lambda ie: fa(ie) <= fb(ie)
        return lambda ie: fa(ie) == fb(ie)
    if isinstance(p, Rel):
        table = relations.get(p.name)
        if table is None:
            raise MissingRelationTable(f"no table supplied for relation {p.name!r}")
        table = frozenset(tuple(t) for t in table)
        fs = [compile_idx(a) for a in p.args]
        return lambda ie: tuple(f(ie) for f in fs) in table
    if isinstance(p, And):
        fa, fb = compile_pred(p.left, relations), compile_pred(p.right, relations)
        return lambda ie: fa(ie) and fb(ie)
    if isinstance(p, Or):
        fa, fb = compile_pred(p.left, relations), compile_pred(p.right, relations)
        return lambda ie: fa(ie) or fb(ie)
    if isinstance(p, Exists):
        fn, fb, var = compile_idx(p.extent), compile_pred(p.body, relations), p.var
        pin = _pinned_exists(p)
        if pin is not None:
            def pinned(ie):
                k = pin(ie)
                if not 0 <= k < fn(ie):
                    return False
                old = ie.get(var, _MISSING)
                ie[var] = k
                try:
                    return fb(ie)
                finally:
                    _restore(ie, var, old)
            return pinned

        def f(ie):
            old = ie.get(var, _MISSING)
            try:
                for k in range(fn(ie)):
                    ie[var] = k
                    if fb(ie):
                        return True
                return False
            finally:
                _restore(ie, var, old)
        return f
    raise TypeError(p)


def _span(n, pin, ie):
    """Iterations of a sum worth visiting."""
    if pin is None:
        return range(n)
    k = pin(ie)
    return (k,) if 0 <= k < n else ()


def _restore(d, k, old):
    if old is _MISSING:
        d.pop(k, None)
    else:
        d[k] = old


def eval_idx(a, env):
    sizes = env.sizes if isinstance(env, Env) else env
    missing = a.names() - sizes.keys()
    if missing:
        raise UnboundIndexVariable(f"unbound index variable {sorted(missing)[0]!r}")
    return compile_idx(a)(dict(sizes))


def eval_pred(p, env):
    if not isinstance(env, Env):
        env = Env(sizes=env)
    from ..lang_core import pred_free
    missing = pred_free(p) - env.sizes.keys()
    if missing:
        raise UnboundIndexVariable(f"unbound index variable {sorted(missing)[0]!r}")
    return compile_pred(p, env.relations)(dict(env.sizes))


# ---- expressions ---- #

def _primitive(name, registry):
    if registry is None:
        from ..ad.registry import DEFAULT as registry
    if name not in registry:
        raise UnknownBlackBox(f"unknown black-box function {name!r}")
    return registry.get(name).fn


def _call(fn, name, args, mode):
    try:
        if mode == EXACT:
            return Fraction(fn(*[float(a) for a in args]))
        return fn(*args)
    except (ValueError, ZeroDivisionError, OverflowError) as err:
        raise EvalError(f"{name}: {err}") from None


class _Compiler:
    def __init__(self, typer, relations, mode, registry, counting):
        self.typer = typer
        self.relations = relations
        self.mode = mode
        self.registry = registry
        self.counting = counting
        self.count = [0]
        self.zero = scalar_zero(mode)

    def pred(self, p):
        return compile_pred(p, self.relations)

    def expr(self, e, tenv):
        return (self._counting if self.counting else self._plain)(e, tenv)

    # ---- plain evaluation ---- #
    def _plain(self, e, tenv):
        go = self._plain
        mode = self.mode
        if isinstance(e, Var):
            name = e.name
            return lambda ie, ve: ve[name]
        if isinstance(e, Const):
            c = e.value if mode == EXACT else float(e.value)
            return lambda ie, ve: c
        if isinstance(e, Add):
            fa, fb = go(e.left, tenv), go(e.right, tenv)
            return lambda ie, ve: fa(ie, ve) + fb(ie, ve)
        if isinstance(e, Mul):
            fa, fb = go(e.left, tenv), go(e.right, tenv)
            return lambda ie, ve: fa(ie, ve) * fb(ie, ve)
        if isinstance(e, BlackBox):
            fn, name = _primitive(e.fn, self.registry), e.fn
            fs = [go(a, tenv) for a in e.args]
            return lambda ie, ve: _call(fn, name, [f(ie, ve) for f in fs], mode)
        if isinstance(e, PairCons):
            fa, fb = go(e.left, tenv), go(e.right, tenv)
            return lambda ie, ve: (fa(ie, ve), fb(ie, ve))
        if isinstance(e, Proj):
            fb, k = go(e.body, tenv), e.side
            return lambda ie, ve: fb(ie, ve)[k]
        if isinstance(e, Gen):
            fn, fb, var = compile_idx(e.extent), go(e.body, tenv), e.var

            def gen(ie, ve):
                old = ie.get(var, _MISSING)
                out = []
                for k in range(fn(ie)):
                    ie[var] = k
                    out.append(fb(ie, ve))
                _restore(ie, var, old)
                return out
            return gen
        if isinstance(e, BigSum):
            fn, fb, var, zero = compile_idx(e.extent), go(e.body, tenv), e.var, self.zero
            pin = pinned_sum_index(e)

            def bigsum(ie, ve):
                old = ie.get(var, _MISSING)
                acc = zero
                for k in _span(fn(ie), pin, ie):
                    ie[var] = k
                    acc = acc + fb(ie, ve)
                _restore(ie, var, old)
                return acc
            return bigsum
        if isinstance(e, Access):
            fb, fi = go(e.body, tenv), compile_idx(e.index)

            def access(ie, ve):
                arr = fb(ie, ve)
                k = fi(ie)
                if not 0 <= k < len(arr):
                    raise IndexOutOfBounds(f"index {k} out of bounds for length {len(arr)}")
                return arr[k]
            return access
        if isinstance(e, Indicator):
            fp, fb = self.pred(e.pred), go(e.body, tenv)
            t = self.typer.typeof(e.body, tenv)
            return lambda ie, ve: fb(ie, ve) if fp(ie) else zero_of(t, ie, mode)
        if isinstance(e, Let):
            fr = go(e.rhs, tenv)
            inner = dict(tenv)
            inner[e.var] = self.typer.typeof(e.rhs, tenv)
            fb, x = go(e.body, inner), e.var

            def let(ie, ve):
                v = fr(ie, ve)
                old = ve.get(x, _MISSING)
                ve[x] = v
                r = fb(ie, ve)
                _restore(ve, x, old)
                return r
            return let
        raise TypeError(e)

    # ---- instrumented evaluation: closures return (value, skipped) ---- #
    def _counting(self, e, tenv):
        go = self._counting
        mode, count = self.mode, self.count
        if isinstance(e, Var):
            name = e.name
            return lambda ie, ve: (ve[name], False)
        if isinstance(e, Const):
            c = e.value if mode == EXACT else float(e.value)
            return lambda ie, ve: (c, False)
        if isinstance(e, Add):
            fa, fb = go(e.left, tenv), go(e.right, tenv)

            def add(ie, ve):
                va, sa = fa(ie, ve)
                vb, sb = fb(ie, ve)
                if sa:
                    return vb, sb
                if sb:
                    return va, False
                count[0] += 1
                return va + vb, False
            return add
        if isinstance(e, Mul):
            fa, fb = go(e.left, tenv), go(e.right, tenv)

            def mul(ie, ve):
                va, _ = fa(ie, ve)
                vb, _ = fb(ie, ve)
                count[0] += 1
                return va * vb, False
            return mul
        if isinstance(e, BlackBox):
            fn, name = _primitive(e.fn, self.registry), e.fn
            fs = [go(a, tenv) for a in e.args]

            def call(ie, ve):
                args = [f(ie, ve)[0] for f in fs]
                count[0] += 1
                return _call(fn, name, args, mode), False
            return call
        if isinstance(e, PairCons):
            fa, fb = go(e.left, tenv), go(e.right, tenv)
            return lambda ie, ve: ((fa(ie, ve)[0], fb(ie, ve)[0]), False)
        if isinstance(e, Proj):
            fb, k = go(e.body, tenv), e.side
            return lambda ie, ve: (fb(ie, ve)[0][k], False)
        if isinstance(e, Gen):
            fn, fb, var = compile_idx(e.extent), go(e.body, tenv), e.var

            def gen(ie, ve):
                old = ie.get(var, _MISSING)
                out = []
                for k in range(fn(ie)):
                    ie[var] = k
                    out.append(fb(ie, ve)[0])
                _restore(ie, var, old)
                return out, False
            return gen
        if isinstance(e, BigSum):
            fn, fb, var, zero = compile_idx(e.extent), go(e.body, tenv), e.var, self.zero
            pin = pinned_sum_index(e)

            def bigsum(ie, ve):
                old = ie.get(var, _MISSING)
                acc, live = zero, 0
                for k in _span(fn(ie), pin, ie):
                    ie[var] = k
                    v, skipped = fb(ie, ve)
                    if not skipped:
                        acc = v if live == 0 else acc + v
                        live += 1
                _restore(ie, var, old)
                if live:
                    count[0] += live - 1
                return acc, live == 0
            return bigsum
        if isinstance(e, Access):
            fb, fi = go(e.body, tenv), compile_idx(e.index)

            def access(ie, ve):
                arr = fb(ie, ve)[0]
                k = fi(ie)
                if not 0 <= k < len(arr):
                    raise IndexOutOfBounds(f"index {k} out of bounds for length {len(arr)}")
                return arr[k], False
            return access
        if isinstance(e, Indicator):
            fp, fb = self.pred(e.pred), go(e.body, tenv)
            t = self.typer.typeof(e.body, tenv)
            return lambda ie, ve: fb(ie, ve) if fp(ie) else (zero_of(t, ie, mode), True)
        if isinstance(e, Let):
            fr = go(e.rhs, tenv)
            inner = dict(tenv)
            inner[e.var] = self.typer.typeof(e.rhs, tenv)
            fb, x = go(e.body, inner), e.var

            def let(ie, ve):
                v, _ = fr(ie, ve)
                old = ve.get(x, _MISSING)
                ve[x] = v
                r = fb(ie, ve)
                _restore(ve, x, old)
                return r
            return let
        raise TypeError(e)


def _relations_of(e, out=None):
    out = set() if out is None else out
    seen = set()
    stack = [e]
    while stack:
        t = stack.pop()
        if t in seen:
            continue
        seen.add(t)
        if isinstance(t, Indicator):
            out |= pred_relations(t.pred)
        stack.extend(children(t))
    return out


def _prepare(e, env, mode, types):
    if mode not in (EXACT, FLOAT):
        raise ValueError(f"unknown mode {mode!r}")
    missing = free_vars(e) - env.values.keys()
    if missing:
        raise UnboundVariable(f"unbound variable {sorted(missing)[0]!r}")
    missing = free_index(e) - env.sizes.keys()
    if missing:
        raise UnboundIndexVariable(f"unbound index variable {sorted(missing)[0]!r}")
    for r in _relations_of(e):
        if r not in env.relations:
            raise MissingRelationTable(f"no table supplied for relation {r!r}")
    if types is None:
        types = {x: type_of_value(v) for x, v in env.values.items() if x in free_vars(e)}
    values = {x: to_mode(v, mode) for x, v in env.values.items()}
    return Typer(types), values


def evaluate(e, env, mode=EXACT, types=None, registry=None):
    """Value of ``e`` under ``env``; ``types`` gives the free variables' types
    (inferred from the values when omitted)."""
    typer, values = _prepare(e, env, mode, types)
    f = _Compiler(typer, env.relations, mode, registry, False).expr(e, typer.fvt)
    return f(dict(env.sizes), values)


def evaluate_counting(e, env, mode=EXACT, types=None, registry=None):
    """``(value, ops)`` where ``ops`` counts the scalar operations performed
    by the short-circuiting evaluator."""
    typer, values = _prepare(e, env, mode, types)
    comp = _Compiler(typer, env.relations, mode, registry, True)
    f = comp.expr(e, typer.fvt)
    v, _ = f(dict(env.sizes), values)
    return v, comp.count[0]
