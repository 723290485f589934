"""Type checking and Let-annotation inference."""
from .expr import (Var, Const, Add, Mul, BlackBox, PairCons, Proj, Gen, BigSum,
                   Access, Indicator, Let)
from .pred import PTrue, PFalse, Cmp, Rel, And, Or, Exists
from .subst import free_vars
from .types import REAL, PairT, Tensor, type_names
from ..errors import UnboundVariable, TypeMismatch, ArityMismatch, AtlError


def _default_arities():
    from ..ad.registry import DEFAULT
    return DEFAULT.arities()


class Typer:
    """Computes types of sub-terms under a fixed set of input types.

    ``index_scope`` (size variable names) enables scope checking of index
    terms; ``relations`` maps relation names to arities; ``positions`` maps
    nodes to source positions for diagnostics."""

    def __init__(self, fvt, index_scope=None, relations=None, arities=None,
                 positions=None):
        self.fvt = dict(fvt)
        self.index_scope = None if index_scope is None else frozenset(index_scope)
        self.relations = relations
        self.arities = arities
        self.positions = positions or {}
        self.memo = {}

    def _err(self, cls, msg, node):
        return cls(msg, self.positions.get(node))

    def _arity(self, fn):
        if self.arities is None:
            self.arities = _default_arities()
        return self.arities.get(fn)

    def _check_idx(self, a, scope, node):
        if scope is None:
            return
        for n in a.names():
            if n not in scope:
                raise self._err(UnboundVariable, f"unbound index variable {n!r}", node)

    def _check_pred(self, p, scope, node):
        if isinstance(p, (PTrue, PFalse)):
            return
        if isinstance(p, Cmp):
            self._check_idx(p.lhs, scope, node)
            self._check_idx(p.rhs, scope, node)
        elif isinstance(p, Rel):
            if self.relations is not None:
                if p.name not in self.relations:
                    raise self._err(UnboundVariable, f"unknown relation {p.name!r}", node)
                if self.relations[p.name] != len(p.args):
                    raise self._err(ArityMismatch,
                                    f"relation {p.name} expects {self.relations[p.name]} "
                                    f"arguments, got {len(p.args)}", node)
            for a in p.args:
                self._check_idx(a, scope, node)
        elif isinstance(p, (And, Or)):
            self._check_pred(p.left, scope, node)
            self._check_pred(p.right, scope, node)
        elif isinstance(p, Exists):
            self._check_idx(p.extent, scope, node)
            self._check_pred(p.body, None if scope is None else scope | {p.var}, node)

    def typeof(self, e, env=None, scope=None):
        """Type of ``e``; ``env`` maps let-bound names to types."""
        env = self.fvt if env is None else env
        if scope is None and self.index_scope is not None:
            scope = self.index_scope
        key = (e, tuple((v, env.get(v)) for v in sorted(free_vars(e))), scope)
        r = self.memo.get(key)
        if r is None:
            r = self._typeof(e, env, scope)
            self.memo[key] = r
        return r

    def _scalar(self, e, env, scope, what):
        t = self.typeof(e, env, scope)
        if t is not REAL:
            raise self._err(TypeMismatch, f"{what} requires scalar operands, got {t}", e)

    def _typeof(self, e, env, scope):
        if isinstance(e, Var):
            t = env.get(e.name)
            if t is None:
                raise self._err(UnboundVariable, f"unbound variable {e.name!r}", e)
            return t
        if isinstance(e, Const):
            return REAL
        if isinstance(e, (Add, Mul)):
            what = "addition" if isinstance(e, Add) else "multiplication"
            self._scalar(e.left, env, scope, what)
            self._scalar(e.right, env, scope, what)
            return REAL
        if isinstance(e, BlackBox):
            k = self._arity(e.fn)
            if k is None:
                from ..errors import UnregisteredBlackBox
                raise self._err(UnregisteredBlackBox, f"unknown function {e.fn!r}", e)
            if k != len(e.args):
                raise self._err(ArityMismatch,
                                f"{e.fn} expects {k} arguments, got {len(e.args)}", e)
            for a in e.args:
                self._scalar(a, env, scope, f"function {e.fn}")
            return REAL
        if isinstance(e, PairCons):
            return PairT(self.typeof(e.left, env, scope), self.typeof(e.right, env, scope))
        if isinstance(e, Proj):
            t = self.typeof(e.body, env, scope)
            if not isinstance(t, PairT):
                raise self._err(TypeMismatch, f"projection from non-pair type {t}", e)
            return t.left if e.side == 0 else t.right
        if isinstance(e, (Gen, BigSum)):
            # extents range over sizes only: no triangular loops
            self._check_idx(e.extent, None if scope is None else self.index_scope, e)
            inner = None if scope is None else scope | {e.var}
            t = self.typeof(e.body, env, inner)
            if isinstance(e, Gen):
                return Tensor(e.extent, t)
            if t is not REAL:
                raise self._err(TypeMismatch, f"summation requires a scalar body, got {t}", e)
            return REAL
        if isinstance(e, Access):
            self._check_idx(e.index, scope, e)
            t = self.typeof(e.body, env, scope)
            if not isinstance(t, Tensor):
                raise self._err(TypeMismatch, f"indexing into non-array type {t}", e)
            return t.elem
        if isinstance(e, Indicator):
            self._check_pred(e.pred, scope, e)
            return self.typeof(e.body, env, scope)
        if isinstance(e, Let):
            t = self.typeof(e.rhs, env, scope)
            if e.ann is not None and e.ann is not t:
                raise self._err(TypeMismatch,
                                f"let {e.var} annotated {e.ann} but bound to {t}", e)
            inner = dict(env)
            inner[e.var] = t
            return self.typeof(e.body, inner, scope)
        raise TypeError(e)

    def annotate(self, e, env=None, scope=None):
        """Copy of ``e`` with every Let annotated by its inferred type."""
        env = self.fvt if env is None else env
        if isinstance(e, Let):
            t = self.typeof(e.rhs, env, scope)
            inner = dict(env)
            inner[e.var] = t
            return Let(e.var, t, self.annotate(e.rhs, env, scope),
                       self.annotate(e.body, inner, scope))
        if isinstance(e, (Gen, BigSum)):
            sc = None if scope is None else scope | {e.var}
            return type(e)(e.var, e.extent, self.annotate(e.body, env, sc))
        if isinstance(e, (Add, Mul, PairCons)):
            return type(e)(self.annotate(e.left, env, scope), self.annotate(e.right, env, scope))
        if isinstance(e, BlackBox):
            return BlackBox(e.fn, [self.annotate(a, env, scope) for a in e.args])
        if isinstance(e, Proj):
            return Proj(e.side, self.annotate(e.body, env, scope))
        if isinstance(e, Access):
            return Access(self.annotate(e.body, env, scope), e.index)
        if isinstance(e, Indicator):
            return Indicator(e.pred, self.annotate(e.body, env, scope))
        return e


def typecheck(e, free_var_types, index_scope=None, relations=None, arities=None,
              positions=None):
    """Type of ``e`` given the types of its free variables."""
    typer = Typer(free_var_types, index_scope, relations, arities, positions)
    for x, t in free_var_types.items():
        if index_scope is not None:
            missing = type_names(t) - frozenset(index_scope)
            if missing:
                raise UnboundVariable(f"input {x} uses undeclared size {sorted(missing)[0]!r}")
    return typer.typeof(e)


def annotate(e, free_var_types, **kw):
    typer = Typer(free_var_types, **kw)
    typer.typeof(e)
    return typer.annotate(e)


def well_typed(e, free_var_types, **kw):
    try:
        typecheck(e, free_var_types, **kw)
        return True
    except AtlError:
        return False
