"""Adjoint (reverse) derivative of Tensor SSA by inner-product rewriting.

The state is a block of ordinary lets (primal and adjoint bindings), a
block of pending differential lets ``dX = D[[rhs]]`` and a sum of
predicated inner products ``<L, dX>_p``.  Starting from ``<dy, D[[e]]>``
the driver processes differential lets last-bound-first: contributions to
one differential are regrouped into a single guarded addition, then the
rule for the binding's primitive form moves the work from the derivative
term into new adjoint bindings.  When no differential lets remain every
inner product names an input differential, and the left-hand sides are
gathered into the gradient.

Left-hand sides are always binding names (cost 0).  ``masked`` records
that the left value is already zero outside the product's predicate, so
no selection is needed when it becomes an output.
"""
from dataclasses import dataclass, replace as _dc_replace

from ..lang_core import (Var, Const, Add, Mul, Idx, TRUE, PairT, REAL, tensor,
                         conj, disj, eq, exists_many, pred_subst, access, bigsum,
                         lets, proj_chain, Indicator, NameSupply, dims, proj_type)
from ..errors import NonLinearSeed
from ..normalize.ssa import (SSAProgram, InputRef, ConstGen, AddGen, MapGen,
                             Contract, ivar, gvar, svar, output_names)
from ..normalize.convert import _Converter, binding_prefix, _reserved
from ..normalize.simplify import tidy, simplify_ssa, tidy_pred, elementwise_extents, \
    contract_extents
from .forward import DiffEnv, forward_deriv
from .registry import DEFAULT


@dataclass(frozen=True)
class InnerProduct:
    """``<lhs, D[[target]]>_pred`` over arrays of extents ``dims``.

    ``target`` is ``("d", X)`` for a pending differential or
    ``("in", x, path)`` for (a leaf of) an input differential."""
    lhs: str
    target: tuple
    right: object
    dims: tuple
    pred: object = TRUE
    masked: bool = True

    # views used by the extended cost model
    @property
    def left(self):
        return Var(self.lhs)

    @property
    def type(self):
        return tensor(self.dims)

    @property
    def index(self):
        return [ivar(k) for k in range(len(self.dims))]

    def needs_mask(self):
        return not self.masked and self.pred is not TRUE


class AdjointState:
    """One point of the rewrite: lets, differential lets, inner products."""

    def __init__(self, primal, adjoint, mlets, products, derivs):
        self.primal = list(primal)
        self.adjoint = list(adjoint)
        self.mlets = list(mlets)            # [(dX, X)]
        self.products = list(products)
        self.derivs = derivs                # X -> D[[rhs X]]

    @property
    def bindings(self):
        return self.primal + self.adjoint

    @property
    def lets(self):
        return [(x, rhs.to_expr()) for x, rhs in self.bindings]

    def pending_derivatives(self):
        return [(dx, self.derivs[x]) for dx, x in self.mlets]

    def copy(self):
        return AdjointState(self.primal, self.adjoint, self.mlets, self.products, self.derivs)


def desugar_inner(state):
    """The state as a core expression: lets, then differential lets, then
    the sum of inner products (``0`` when there are none)."""
    binds = [(x, e) for x, e in state.lets]
    binds += state.pending_derivatives()
    terms = []
    for ip in state.products:
        ix = [Idx.var(v) for v in ip.index]
        body = Mul(access(ip.left, *ix), access(ip.right, *ix))
        if ip.pred is not TRUE:
            body = Indicator(ip.pred, body)
        terms.append(bigsum(list(zip(ip.index, ip.dims)), body))
    out = terms[0] if terms else Const(0)
    for t in terms[1:]:
        out = Add(out, t)
    return lets(binds, out)


# ---- the driver ---- #

def _leaves(t, path=()):
    """(path, type) for every non-pair leaf of ``t``, left to right."""
    if isinstance(t, PairT):
        return _leaves(t.left, path + (0,)) + _leaves(t.right, path + (1,))
    return [(path, t)]


def _output_leaves(out, path=()):
    if isinstance(out, str):
        return [(path, out)]
    return _output_leaves(out[0], path + (0,)) + _output_leaves(out[1], path + (1,))


class _Adjoint:
    def __init__(self, prog, d, seed, registry, trace):
        self.prog = prog
        self.d = d
        self.registry = registry
        self.trace = trace
        taken = set(prog.inputs) | {x for x, _ in prog.bindings} | set(d.mapping.values())
        self.seed = seed = seed or seed_name(prog, d)
        taken.add(seed)
        self.taken = taken
        self.prefix = binding_prefix(set(prog.inputs) | {seed})
        self.counter = len(prog.bindings)
        self.shapes = dict(prog.shapes())
        self.fresh = NameSupply(taken)
        self.fresh.avoid(_reserved(Const(0)))

        # activity: bindings that depend on a differentiated input
        self.active = set()
        for x, rhs in prog.bindings:
            if isinstance(rhs, InputRef):
                live = rhs.var in d.mapping
            else:
                live = any(r in self.active for r in rhs.refs())
            if live:
                self.active.add(x)
        self.dname = {x: self.fresh("d" + x) for x, _ in prog.bindings if x in self.active}
        sigma = dict(d.mapping)
        sigma.update(self.dname)
        types = dict(prog.inputs)
        types.update({x: prog.binding_type(x) for x, _ in prog.bindings})
        env = DiffEnv(sigma, types)
        derivs = {x: forward_deriv(rhs.to_expr(), env, registry)
                  for x, rhs in prog.bindings if x in self.active}
        mlets = [(self.dname[x], x) for x, _ in prog.bindings if x in self.active]
        self.state = AdjointState(prog.bindings, [], mlets, [], derivs)

    # ---- bookkeeping ---- #

    def name(self):
        while True:
            x = f"{self.prefix}{self.counter}"
            self.counter += 1
            if x not in self.taken:
                self.taken.add(x)
                return x

    def emit(self, rhs):
        x = self.name()
        self.state.adjoint.append((x, rhs))
        self.shapes[x] = (rhs.out if isinstance(rhs, Contract)
                          else self._ref_dims(rhs) if isinstance(rhs, InputRef) else rhs.dims)
        return x

    def _ref_dims(self, ref):
        t = self.inputs[ref.var]
        for k in ref.path:
            t = proj_type(t, k)
        return tuple(dims(t)[0])

    @property
    def inputs(self):
        out = dict(self.prog.inputs)
        out[self.seed] = self.prog.output_type()
        return out

    def record(self, rule):
        if self.trace is not None:
            self.trace.append((rule, self.state.copy()))

    def product(self, lhs, target, dim, pred, masked):
        if target[0] == "d":
            right = Var(self.dname[target[1]])
        else:
            right = proj_chain(self.d[target[1]], target[2])
        pred = tidy_pred(pred, elementwise_extents(dim))
        return InnerProduct(lhs, target, right, tuple(dim), pred, masked)

    # ---- stages ---- #

    def run(self):
        st = self.state
        for path, x in _output_leaves(self.prog.output):
            s = self.emit(InputRef(self.seed, path))
            if x in self.active:
                st.products.append(self.product(s, ("d", x), self.shapes[x], TRUE, True))
        self.record("seed")
        for dx, x in reversed(list(st.mlets)):
            mine = [ip for ip in st.products if ip.target == ("d", x)]
            if not mine:
                st.mlets.remove((dx, x))
                self.record("dead-code")
                continue
            ip = self.regroup(mine)
            st.mlets.remove((dx, x))
            st.products.remove(ip)
            self.apply(self.prog.rhs_of(x), ip)
            self.record(type(self.prog.rhs_of(x)).__name__)
        for ip in st.products:
            if ip.target[0] != "in":
                raise NonLinearSeed(f"inner product against {ip.target} left over")
        return self.finish()

    def regroup(self, mine):
        st = self.state
        while len(mine) > 1:
            a, b = mine[0], mine[1]
            x = self.emit(AddGen(a.dims, a.pred, a.lhs, b.pred, b.lhs))
            new = _dc_replace(a, lhs=x, pred=tidy_pred(disj(a.pred, b.pred),
                                                       elementwise_extents(a.dims)),
                              masked=True)
            st.products = [ip for ip in st.products if ip is not a and ip is not b] + [new]
            mine = [new] + mine[2:]
            self.record("regroup")
        return mine[0]

    def apply(self, rhs, ip):
        st = self.state
        if isinstance(rhs, InputRef):
            if rhs.var in self.d:
                st.products.append(self.product(ip.lhs, ("in", rhs.var, rhs.path),
                                                ip.dims, ip.pred, ip.masked))
        elif isinstance(rhs, ConstGen):
            pass
        elif isinstance(rhs, AddGen):
            for pk, a in ((rhs.pred0, rhs.arg0), (rhs.pred1, rhs.arg1)):
                if a in self.active:
                    st.products.append(self.product(ip.lhs, ("d", a), rhs.dims,
                                                    conj(ip.pred, pk),
                                                    ip.masked and pk is TRUE))
        elif isinstance(rhs, MapGen):
            self.map_rule(rhs, ip)
        elif isinstance(rhs, Contract):
            self.contract_rule(rhs, ip)
        else:
            raise NonLinearSeed(f"no adjoint rule for {type(rhs).__name__}")

    def map_rule(self, m, ip):
        prim = self.registry.get(m.fn)
        ix = [Idx.var(ivar(k)) for k in range(len(m.dims))]
        ctx = [(ivar(k), n) for k, n in enumerate(m.dims)]
        p = conj(m.pred, ip.pred)
        for k, a in enumerate(m.args):
            if a not in self.active:
                continue
            body = Mul(prim.partial(k, [access(Var(b), *ix) for b in m.args]),
                       access(Var(ip.lhs), *ix))
            conv = _Converter(self.inputs, cse=False, namer=self.name, shapes=self.shapes)
            conv.fresh = self.fresh
            x = conv.conv(ctx, p, body)
            self.state.adjoint.extend(conv.bindings)
            self.shapes.update(conv.shapes)
            self.state.products.append(self.product(x, ("d", a), m.dims, p, True))

    def contract_rule(self, c, ip):
        r = len(c.out)
        full = conj(c.pred, pred_subst(ip.pred, {ivar(j): Idx.var(gvar(j)) for j in range(r)}))
        for k, (a, pos) in enumerate(c.factors):
            if a not in self.active:
                continue
            # old summed positions of this factor become the generated indices;
            # the old generated indices and every other sum are summed over
            ren, sums, gpos = {}, [], []
            for t, sk in enumerate(pos):
                ren[svar(sk)] = Idx.var(gvar(t))
            for j in range(r):
                gpos.append(len(sums))
                ren[gvar(j)] = Idx.var(svar(len(sums)))
                sums.append(c.out[j])
            snew = {}
            for sk in range(len(c.sums)):
                if sk not in pos:
                    snew[sk] = len(sums)
                    ren[svar(sk)] = Idx.var(svar(len(sums)))
                    sums.append(c.sums[sk])
            factors = [(ip.lhs, tuple(gpos))]
            for j, (b, bpos) in enumerate(c.factors):
                if j != k:
                    factors.append((b, tuple(snew[s] for s in bpos)))
            out = tuple(c.sums[sk] for sk in pos)
            new = Contract(out, tuple(sums), pred_subst(full, ren), tuple(factors))
            new = _dc_replace(new, pred=tidy_pred(new.pred, contract_extents(new)))
            x = self.emit(new)
            binds = [(gvar(j), c.out[j]) for j in range(r)]
            binds += [(svar(sk), c.sums[sk]) for sk in range(len(c.sums)) if sk not in pos]
            p = exists_many(binds, pred_subst(full, {svar(sk): Idx.var(ivar(t))
                                                     for t, sk in enumerate(pos)}))
            self.state.products.append(self.product(x, ("d", a), out, p, True))

    def finish(self):
        st = self.state
        grads = {}
        for x in self.d.mapping:
            if x not in self.prog.inputs:
                continue
            for path, t in _leaves(self.prog.inputs[x]):
                dim = tuple(dims(t)[0])
                mine = [ip for ip in st.products if ip.target == ("in", x, path)]
                if not mine:
                    grads[x, path] = self.emit(ConstGen(dim, 0))
                    continue
                ip = self.regroup(mine)
                if ip.needs_mask():
                    r = len(dim)
                    pred = pred_subst(ip.pred, {ivar(j): Idx.var(gvar(j)) for j in range(r)})
                    pred = conj(pred, *[eq(Idx.var(gvar(j)), Idx.var(svar(j))) for j in range(r)])
                    grads[x, path] = self.emit(Contract(dim, dim, pred, ((ip.lhs, tuple(range(r))),)))
                    self.record("output-mask")
                else:
                    grads[x, path] = ip.lhs
        st.products = []

        def tree(x, t, path=()):
            if isinstance(t, PairT):
                return (tree(x, t.left, path + (0,)), tree(x, t.right, path + (1,)))
            return grads[x, path]
        outs = [tree(x, self.prog.inputs[x]) for x in self.d.mapping if x in self.prog.inputs]
        if not outs:
            raise NonLinearSeed("no differentiated input")
        output = outs[-1]
        for o in reversed(outs[:-1]):
            output = (o, output)
        return SSAProgram(self.inputs, st.bindings, output, self.prog.sizes, self.prog.relations)


def _as_diffenv(prog, d):
    if isinstance(d, DiffEnv):
        return d if d.types else DiffEnv(d.mapping, dict(prog.inputs))
    if isinstance(d, dict):
        return DiffEnv(dict(d), dict(prog.inputs))
    return DiffEnv.for_inputs(list(d), prog.inputs)


def adjoint_deriv(prog, d, seed=None, registry=None, simplify=True, trace=None):
    """``D^T``: an SSA program taking the inputs of ``prog`` plus a seed of
    its output type and returning the gradient for each input in ``d``
    (right-nested pairs when several).

    ``d`` is a DiffEnv, a mapping, or a list of input names.  ``trace``, a
    list, receives ``(rule, AdjointState)`` after every rewrite."""
    d = _as_diffenv(prog, d)
    drv = _Adjoint(prog, d, seed, registry or DEFAULT, trace)
    out = drv.run()
    out = tidy(out)
    if simplify:
        out = simplify_ssa(out)
    return out


def seed_name(prog, d):
    """The seed input name: ``dy`` unless that is taken."""
    d = _as_diffenv(prog, d)
    taken = set(prog.inputs) | {x for x, _ in prog.bindings} | set(d.mapping.values())
    seed, k = "dy", 0
    while seed in taken:
        seed = f"dy_{k}"
        k += 1
    return seed
