"""Conversion of gen-pushed, pair-free let blocks into Tensor SSA.

``conv(ctx, p, e)`` binds a name whose value is ``gen ctx. [p] e``; the
mask ``p`` is threaded into every primitive it produces.  Addition masks
each operand with its guard so that the primitive addition costs exactly
what the source addition did.
"""
from ..lang_core import (Var, Const, Add, Mul, BlackBox, Proj, Gen, BigSum,
                         Access, Indicator, Idx, TRUE, conj, disj, exists, eq,
                         pred_subst, alpha_unique, supply_for, dims, proj_type,
                         PairCons)
from ..errors import NotNormalized
from .passes import validate_normal_form, let_spine
from .ssa import (SSAProgram, InputRef, ConstGen, AddGen, MapGen, Contract,
                  ivar, gvar, svar)


def guard_pred(e):
    """The cost model's liveness guard of ``e`` as a predicate."""
    if isinstance(e, Indicator):
        return conj(e.pred, guard_pred(e.body))
    if isinstance(e, BigSum):
        return exists(e.var, e.extent, guard_pred(e.body))
    if isinstance(e, Add):
        return disj(guard_pred(e.left), guard_pred(e.right))
    return TRUE


def strip_indicators(e):
    while isinstance(e, Indicator):
        e = e.body
    return e


def binding_prefix(names):
    """``X`` unless some input name could collide with ``X<k>``."""
    for prefix in ("X", "T", "Y", "Z"):
        if not any(n.startswith(prefix) and n[len(prefix):].isdigit() for n in names):
            return prefix
    return "X_"


class _Converter:
    """``namer`` supplies binding names (default ``<prefix><k>``); ``shapes``
    declares bindings that already exist outside this converter."""

    def __init__(self, inputs, cse=True, namer=None, shapes=None):
        self.inputs = inputs
        self.bindings = []
        self.shapes = dict(shapes or {})
        self.memo = {}
        self.cse = cse
        self.prefix = binding_prefix(inputs)
        self.namer = namer or (lambda: f"{self.prefix}{len(self.bindings)}")
        self.env = {x: x for x in self.shapes}
        self.fresh = None

    def emit(self, rhs):
        if self.cse:
            hit = self.memo.get(rhs)
            if hit is not None:
                return hit
        name = self.namer()
        self.bindings.append((name, rhs))
        self.shapes[name] = (rhs.out if isinstance(rhs, Contract)
                             else self._input_dims(rhs) if isinstance(rhs, InputRef)
                             else rhs.dims)
        self.memo[rhs] = name
        return name

    def _input_dims(self, ref):
        t = self.inputs[ref.var]
        for k in ref.path:
            t = proj_type(t, k)
        return tuple(dims(t)[0])

    # ---- helpers ---- #

    @staticmethod
    def _rename(p, ctx, names):
        return pred_subst(p, {v: Idx.var(names(k)) for k, (v, _) in enumerate(ctx)})

    def _select(self, ctx, p, name, index):
        """``gen ctx. [p] name[index..]`` as a unary contraction."""
        shape = self.shapes[name]
        r = len(index)
        if (p is TRUE and r == len(ctx) and all(
                index[k] == Idx.var(ctx[k][0]) and ctx[k][1] == shape[k] for k in range(r))):
            return name
        mapping = {v: Idx.var(gvar(k)) for k, (v, _) in enumerate(ctx)}
        pred = pred_subst(p, mapping)
        for k, a in enumerate(index):
            pred = conj(pred, eq(Idx.var(svar(k)), a.subst(mapping)))
        return self.emit(Contract(tuple(n for _, n in ctx), tuple(shape), pred,
                                  ((name, tuple(range(r))),)))

    def _operand(self, e):
        """Split an access chain into (binding name, [index...])."""
        index = []
        while isinstance(e, Access):
            index.append(e.index)
            e = e.body
        index.reverse()
        path = []
        base = e
        while isinstance(base, Proj):
            path.append(base.side)
            base = base.body
        if not isinstance(base, Var):
            raise NotNormalized(f"unexpected operand {type(e).__name__}")
        if base.name in self.env and not path:
            return self.env[base.name], index
        if base.name not in self.inputs:
            raise NotNormalized(f"unknown variable {base.name}")
        return self.emit(InputRef(base.name, tuple(reversed(path)))), index

    # ---- the conversion ---- #

    def conv(self, ctx, p, e):
        if isinstance(e, Gen):
            return self.conv(ctx + [(e.var, e.extent)], p, e.body)
        if isinstance(e, Indicator):
            return self.conv(ctx, conj(p, e.pred), e.body)
        out = tuple(n for _, n in ctx)
        if isinstance(e, Const):
            x = self.emit(ConstGen(out, e.value))
            if p is TRUE:
                return x
            return self._select(ctx, p, x, [Idx.var(v) for v, _ in ctx])
        if isinstance(e, (Var, Proj, Access)):
            name, index = self._operand(e)
            shape = self.shapes[name]
            if len(index) < len(shape):
                # partial access: eta-expand over the remaining dimensions
                extra = [(self.fresh("j"), n) for n in shape[len(index):]]
                full = e
                for v, _ in extra:
                    full = Access(full, Idx.var(v))
                return self.conv(ctx + extra, p, full)
            return self._select(ctx, p, name, index)
        if isinstance(e, Add):
            ga, gb = guard_pred(e.left), guard_pred(e.right)
            pa, pb = conj(p, ga), conj(p, gb)
            xa = self.conv(ctx, pa, strip_indicators(e.left))
            xb = self.conv(ctx, pb, strip_indicators(e.right))
            return self.emit(AddGen(out, self._rename(pa, ctx, ivar), xa,
                                    self._rename(pb, ctx, ivar), xb))
        if isinstance(e, Mul):
            xa = self.conv(ctx, p, e.left)
            xb = self.conv(ctx, p, e.right)
            r = len(ctx)
            mapping = {v: Idx.var(gvar(k)) for k, (v, _) in enumerate(ctx)}
            pred = pred_subst(p, mapping)
            for k in range(r):
                pred = conj(pred, eq(Idx.var(gvar(k)), Idx.var(svar(k))),
                            eq(Idx.var(gvar(k)), Idx.var(svar(r + k))))
            return self.emit(Contract(out, out + out, pred,
                                      ((xa, tuple(range(r))), (xb, tuple(range(r, 2 * r))))))
        if isinstance(e, BlackBox):
            args = tuple(self.conv(ctx, p, a) for a in e.args)
            return self.emit(MapGen(out, self._rename(p, ctx, ivar), e.fn, args))
        if isinstance(e, BigSum):
            inner = []
            body = e
            while isinstance(body, BigSum):
                inner.append((body.var, body.extent))
                body = body.body
            x = self.conv(ctx + inner, p, body)
            full = ctx + inner
            r = len(ctx)
            gmap = {v: Idx.var(gvar(k)) for k, (v, _) in enumerate(ctx)}
            smap = {v: Idx.var(svar(k)) for k, (v, _) in enumerate(full)}
            pred = conj(pred_subst(p, gmap), pred_subst(guard_pred(body), smap))
            for k in range(r):
                pred = conj(pred, eq(Idx.var(gvar(k)), Idx.var(svar(k))))
            return self.emit(Contract(out, tuple(n for _, n in full), pred,
                                      ((x, tuple(range(len(full)))),)))
        raise NotNormalized(f"unexpected {type(e).__name__} in SSA conversion")


def to_ssa(e, input_types, sizes=(), relations=None, cse=True):
    """Convert a let-lifted, pair-free, gen-pushed term to Tensor SSA."""
    ok, why = validate_normal_form(e, "gen-outer")
    if not ok:
        raise NotNormalized(why)
    e = alpha_unique(e, reserved=_reserved(e))
    conv = _Converter(dict(input_types), cse=cse)
    conv.fresh = supply_for(e)
    conv.fresh.avoid(_reserved(e))
    spine, body = let_spine(e)
    for x, _, rhs in spine:
        conv.env[x] = conv.conv([], TRUE, rhs)

    def out(t):
        if isinstance(t, PairCons):
            return (out(t.left), out(t.right))
        return conv.conv([], TRUE, t)
    output = out(body)
    prog = SSAProgram(input_types, conv.bindings, output, sizes, relations)
    from .simplify import tidy
    return tidy(prog, cse=cse)


def _reserved(e):
    """Canonical SSA index names must never be captured by source binders."""
    import re
    from ..lang_core import all_names
    names = all_names(e)
    out = set()
    for n in names:
        if re.fullmatch(r"[igse]\d+", n):
            out.add(n)
    return out | {f"{c}{k}" for c in "igse" for k in range(64)}
