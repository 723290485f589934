"""Total (forward) derivative.

``D[[e]]sigma`` is built structurally; zero derivatives are tracked
symbolically (``None``) so that constants and inactive variables cost
nothing, and typed zeros are materialized only where a value is needed.
"""
from dataclasses import dataclass, field

from ..lang_core import (Var, Const, Add, Mul, BlackBox, PairCons, Proj, Gen,
                         BigSum, Access, Indicator, Let, REAL, PairT, Tensor,
                         Typer, supply_for)
from ..errors import TypeMismatch
from .registry import DEFAULT


@dataclass
class DiffEnv:
    """Input name -> differential name.  Absent inputs are constants.

    ``types`` (input name -> type) lets the transform materialize typed
    zeros; it is only consulted when a zero has to be written out."""
    mapping: dict
    types: dict = field(default_factory=dict)

    @classmethod
    def for_inputs(cls, names, types=None, prefix="d", avoid=()):
        """``dx`` for every ``x`` in ``names``, avoiding clashes with the
        names in ``types`` and ``avoid``."""
        taken = set(types or ()) | set(names) | set(avoid)
        mapping = {}
        for x in names:
            dx = prefix + x
            k = 0
            while dx in taken:
                dx = f"{prefix}{x}_{k}"
                k += 1
            taken.add(dx)
            mapping[x] = dx
        return cls(mapping, dict(types or {}))

    def __contains__(self, x):
        return x in self.mapping

    def __getitem__(self, x):
        return self.mapping[x]

    def diff_types(self):
        """Types of the differential variables."""
        return {dx: self.types[x] for x, dx in self.mapping.items() if x in self.types}


class _Pair:
    """Symbolic pair of derivatives whose sides may be zero (``None``)."""
    __slots__ = ("left", "right")

    def __init__(self, left, right):
        self.left, self.right = left, right


def zero_expr(t, fresh):
    """A literal zero of type ``t``."""
    if t is REAL:
        return Const(0)
    if isinstance(t, PairT):
        return PairCons(zero_expr(t.left, fresh), zero_expr(t.right, fresh))
    return Gen(fresh("i"), t.size, zero_expr(t.elem, fresh))


class _Forward:
    def __init__(self, e, d, registry):
        self.registry = registry
        self.typer = Typer(d.types)
        self.fresh = supply_for(e)
        self.fresh.avoid(d.mapping.values())
        self.fresh.avoid(d.mapping)

    def typeof(self, e, tenv):
        try:
            return self.typer.typeof(e, tenv)
        except Exception as exc:
            raise TypeMismatch(f"cannot type a zero derivative: {exc}") from exc

    def materialize(self, de, e, tenv):
        if isinstance(de, _Pair):
            t = None
            if de.left is None or de.right is None:
                t = self.typeof(e, tenv)
            left = zero_expr(t.left, self.fresh) if de.left is None else \
                self.materialize(de.left, Proj(0, e), tenv)
            right = zero_expr(t.right, self.fresh) if de.right is None else \
                self.materialize(de.right, Proj(1, e), tenv)
            return PairCons(left, right)
        if de is None:
            return zero_expr(self.typeof(e, tenv), self.fresh)
        return de

    def value(self, de, e, tenv):
        """A plain expression for a non-zero derivative (pairs written out)."""
        return self.materialize(de, e, tenv) if isinstance(de, _Pair) else de

    # ---- the rules ---- #

    def go(self, e, sigma, tenv):
        if isinstance(e, Var):
            dx = sigma.get(e.name)
            return None if dx is None else Var(dx)
        if isinstance(e, Const):
            return None
        if isinstance(e, Add):
            a = self.go(e.left, sigma, tenv)
            b = self.go(e.right, sigma, tenv)
            if a is None:
                return b
            if b is None:
                return a
            return Add(a, b)
        if isinstance(e, Mul):
            a = self.go(e.left, sigma, tenv)
            b = self.go(e.right, sigma, tenv)
            terms = []
            if a is not None:
                terms.append(Mul(a, e.right))
            if b is not None:
                terms.append(Mul(e.left, b))
            return _sum(terms)
        if isinstance(e, BlackBox):
            prim = self.registry.get(e.fn)
            terms = []
            for k, arg in enumerate(e.args):
                da = self.go(arg, sigma, tenv)
                if da is not None:
                    terms.append(Mul(prim.partial(k, e.args), da))
            return _sum(terms)
        if isinstance(e, PairCons):
            a = self.go(e.left, sigma, tenv)
            b = self.go(e.right, sigma, tenv)
            if a is None and b is None:
                return None
            return _Pair(a, b)
        if isinstance(e, Proj):
            de = self.go(e.body, sigma, tenv)
            if de is None:
                return None
            if isinstance(de, _Pair):
                return de.left if e.side == 0 else de.right
            return Proj(e.side, de)
        if isinstance(e, (Gen, BigSum)):
            de = self.go(e.body, sigma, tenv)
            if de is None:
                return None
            return type(e)(e.var, e.extent, self.value(de, e.body, tenv))
        if isinstance(e, Access):
            de = self.go(e.body, sigma, tenv)
            return None if de is None else Access(de, e.index)
        if isinstance(e, Indicator):
            de = self.go(e.body, sigma, tenv)
            if de is None:
                return None
            return Indicator(e.pred, self.value(de, e.body, tenv))
        if isinstance(e, Let):
            d0 = self.go(e.rhs, sigma, tenv)
            inner_t = dict(tenv)
            inner_t[e.var] = e.ann if e.ann is not None else self.typeof(e.rhs, tenv)
            inner = dict(sigma)
            if d0 is None:
                inner.pop(e.var, None)
                d1 = self.go(e.body, inner, inner_t)
                if d1 is None:
                    return None
                return Let(e.var, e.ann, e.rhs, self.value(d1, e.body, inner_t))
            dx = self.fresh("d" + e.var)
            inner[e.var] = dx
            inner_t[dx] = inner_t[e.var]
            d1 = self.go(e.body, inner, inner_t)
            if d1 is None:
                return None
            body = self.value(d1, e.body, inner_t)
            return Let(e.var, e.ann, e.rhs,
                       Let(dx, e.ann, self.value(d0, e.rhs, tenv), body))
        raise TypeError(e)


def _sum(terms):
    if not terms:
        return None
    out = terms[0]
    for t in terms[1:]:
        out = Add(out, t)
    return out


def forward_deriv(e, d, registry=None, types=None):
    """``D[[e]]d``: an expression linear in the differential variables.

    ``types`` adds or overrides input types used for typed zeros."""
    if not isinstance(d, DiffEnv):
        d = DiffEnv(dict(d))
    if types:
        d = DiffEnv(d.mapping, {**d.types, **types})
    fwd = _Forward(e, d, registry or DEFAULT)
    de = fwd.go(e, dict(d.mapping), dict(d.types))
    return fwd.materialize(de, e, dict(d.types))


def forward_cost_check(prog, env=None, registry=None):
    """(cost(e), cost(D[[e]]), bound holds) for an SSA program with every
    input differentiated."""
    from ..cost_model import cost
    d = DiffEnv.for_inputs(list(prog.inputs), prog.inputs)
    e = prog.to_expr()
    ce = cost(e, env)
    cd = cost(forward_deriv(e, d, registry), env)
    return ce, cd, cd <= 4 * ce
