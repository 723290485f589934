"""Free variables, fresh names and capture-avoiding substitution."""
import re
import weakref

from .expr import (Var, Const, Add, Mul, BlackBox, PairCons, Proj, Gen, BigSum,
                   Access, Indicator, Let, children)
from .index import Idx
from .pred import pred_free, pred_subst, pred_bound, Exists, And, Or
from .types import type_subst, type_names

_FV = weakref.WeakKeyDictionary()
_FI = weakref.WeakKeyDictionary()


def free_vars(e):
    """Free expression (value) variables."""
    r = _FV.get(e)
    if r is not None:
        return r
    if isinstance(e, Var):
        r = frozenset([e.name])
    elif isinstance(e, Let):
        r = free_vars(e.rhs) | (free_vars(e.body) - {e.var})
    else:
        r = frozenset()
        for c in children(e):
            r |= free_vars(c)
    _FV[e] = r
    return r


def free_index(e):
    """Free index and size names (including those in Let annotations)."""
    r = _FI.get(e)
    if r is not None:
        return r
    if isinstance(e, (Gen, BigSum)):
        r = (free_index(e.body) - {e.var}) | e.extent.names()
    elif isinstance(e, Access):
        r = free_index(e.body) | e.index.names()
    elif isinstance(e, Indicator):
        r = free_index(e.body) | pred_free(e.pred)
    elif isinstance(e, Let):
        r = free_index(e.rhs) | free_index(e.body)
        if e.ann is not None:
            r |= type_names(e.ann)
    else:
        r = frozenset()
        for c in children(e):
            r |= free_index(c)
    _FI[e] = r
    return r


def all_names(e, out=None):
    """Every variable, index and binder name occurring anywhere in ``e``."""
    out = set() if out is None else out
    seen = set()
    stack = [e]
    while stack:
        t = stack.pop()
        if t in seen:
            continue
        seen.add(t)
        if isinstance(t, Var):
            out.add(t.name)
        elif isinstance(t, (Gen, BigSum)):
            out.add(t.var)
            out |= t.extent.names()
        elif isinstance(t, Access):
            out |= t.index.names()
        elif isinstance(t, Indicator):
            out |= pred_free(t.pred) | pred_bound(t.pred)
        elif isinstance(t, Let):
            out.add(t.var)
        stack.extend(children(t))
    return out


# ---- fresh names ---- #

_SUFFIX = re.compile(r"_\d+$")


class NameSupply:
    """Deterministic fresh names avoiding a given set; per-call state."""

    def __init__(self, avoid=()):
        self.used = set(avoid)
        self.counters = {}

    def avoid(self, names):
        self.used |= set(names)

    def __call__(self, base="t"):
        base = _SUFFIX.sub("", base) or "t"
        k = self.counters.get(base, 0)
        while True:
            cand = f"{base}_{k}"
            k += 1
            if cand not in self.used:
                break
        self.counters[base] = k
        self.used.add(cand)
        return cand


def supply_for(*terms):
    names = set()
    for t in terms:
        all_names(t, names)
    return NameSupply(names)


# ---- substitution ---- #

def substitute(e, emap=None, imap=None, fresh=None):
    """Replace free value variables by expressions (``emap``) and free index
    names by index terms (``imap``), renaming binders to avoid capture."""
    emap = dict(emap or {})
    imap = {k: Idx.coerce(v) for k, v in (imap or {}).items()}
    if not emap and not imap:
        return e
    if fresh is None:
        fresh = supply_for(e, *emap.values())
        for v in imap.values():
            fresh.avoid(v.names())
        fresh.avoid(emap)
        fresh.avoid(imap)
    return _Subst(emap, imap, fresh).go(e)


class _Subst:
    def __init__(self, emap, imap, fresh):
        self.emap, self.imap, self.fresh = emap, imap, fresh
        self.in_vars = frozenset()
        self.in_idx = frozenset()
        for v in emap.values():
            self.in_vars |= free_vars(v)
            self.in_idx |= free_index(v)
        for v in imap.values():
            self.in_idx |= v.names()
        self.memo = {}

    def go(self, e):
        emap, imap = self.emap, self.imap
        if not (free_vars(e) & emap.keys()) and not (free_index(e) & imap.keys()):
            return e
        r = self.memo.get(e)
        if r is not None:
            return r
        r = self._go(e)
        self.memo[e] = r
        return r

    def _sub(self, e, emap, imap):
        return substitute(e, emap, imap, self.fresh)

    def _go(self, e):
        emap, imap = self.emap, self.imap
        if isinstance(e, Var):
            return emap.get(e.name, e)
        if isinstance(e, Const):
            return e
        if isinstance(e, Add):
            return Add(self.go(e.left), self.go(e.right))
        if isinstance(e, Mul):
            return Mul(self.go(e.left), self.go(e.right))
        if isinstance(e, BlackBox):
            return BlackBox(e.fn, tuple(self.go(a) for a in e.args))
        if isinstance(e, PairCons):
            return PairCons(self.go(e.left), self.go(e.right))
        if isinstance(e, Proj):
            return Proj(e.side, self.go(e.body))
        if isinstance(e, Access):
            return type(e)(self.go(e.body), e.index.subst(imap))
        if isinstance(e, Indicator):
            return Indicator(pred_subst(e.pred, imap, self.fresh), self.go(e.body))
        if isinstance(e, (Gen, BigSum)):
            ext = e.extent.subst(imap)
            var, body = e.var, e.body
            inner = {k: v for k, v in imap.items() if k != var}
            if var in self.in_idx:
                new = self.fresh(var)
                inner[var] = Idx.var(new)
                var = new
            return type(e)(var, ext, self._sub(body, emap, inner))
        if isinstance(e, Let):
            rhs = self.go(e.rhs)
            ann = None if e.ann is None else type_subst(e.ann, imap)
            var = e.var
            inner = {k: v for k, v in emap.items() if k != var}
            if var in self.in_vars:
                new = self.fresh(var)
                inner[var] = Var(new)
                var = new
            return Let(var, ann, rhs, self._sub(e.body, inner, imap))
        raise TypeError(e)


def rename_vars(e, mapping, fresh=None):
    return substitute(e, {a: Var(b) for a, b in mapping.items()}, None, fresh)


def rename_index(e, mapping, fresh=None):
    return substitute(e, None, {a: Idx.var(b) for a, b in mapping.items()}, fresh)


# ---- alpha renaming ---- #

def alpha_unique(e, fresh=None, reserved=()):
    """Rename every binder (let, gen, sum, exists) so that no name is bound
    twice and no bound name coincides with a free or reserved name."""
    if fresh is None:
        fresh = supply_for(e)
        fresh.avoid(reserved)
    taken = set(free_vars(e)) | set(free_index(e)) | set(reserved)

    def pick(name):
        if name in taken:
            name = fresh(name)
        taken.add(name)
        return name

    def pred(p, ren):
        if isinstance(p, Exists):
            v = pick(p.var)
            inner = dict(ren)
            inner[p.var] = Idx.var(v)
            from .pred import exists
            return exists(v, p.extent.subst(ren), pred(p.body, inner))
        if isinstance(p, And):
            from .pred import conj
            return conj(pred(p.left, ren), pred(p.right, ren))
        if isinstance(p, Or):
            from .pred import disj
            return disj(pred(p.left, ren), pred(p.right, ren))
        return pred_subst(p, ren)

    def go(t, vren, iren):
        if isinstance(t, Var):
            return vren.get(t.name, t)
        if isinstance(t, Const):
            return t
        if isinstance(t, Add):
            return Add(go(t.left, vren, iren), go(t.right, vren, iren))
        if isinstance(t, Mul):
            return Mul(go(t.left, vren, iren), go(t.right, vren, iren))
        if isinstance(t, BlackBox):
            return BlackBox(t.fn, [go(a, vren, iren) for a in t.args])
        if isinstance(t, PairCons):
            return PairCons(go(t.left, vren, iren), go(t.right, vren, iren))
        if isinstance(t, Proj):
            return Proj(t.side, go(t.body, vren, iren))
        if isinstance(t, Access):
            return Access(go(t.body, vren, iren), t.index.subst(iren))
        if isinstance(t, Indicator):
            return Indicator(pred(t.pred, iren), go(t.body, vren, iren))
        if isinstance(t, (Gen, BigSum)):
            v = pick(t.var)
            inner = dict(iren)
            inner[t.var] = Idx.var(v)
            return type(t)(v, t.extent.subst(iren), go(t.body, vren, inner))
        if isinstance(t, Let):
            rhs = go(t.rhs, vren, iren)
            v = pick(t.var)
            inner = dict(vren)
            inner[t.var] = Var(v)
            ann = None if t.ann is None else type_subst(t.ann, iren)
            return Let(v, ann, rhs, go(t.body, inner, iren))
        raise TypeError(t)

    return go(e, {}, {})
