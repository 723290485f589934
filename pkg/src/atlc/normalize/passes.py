"""Let-lifting, pair-elimination and gen-pushout, plus their validators.

All three passes are structurally recursive and run bottom-up to a fixed
point in a single traversal.
"""
from ..lang_core import (Var, Const, Add, Mul, BlackBox, PairCons, Proj, Gen,
                         BigSum, Access, Indicator, Let, Idx, PairT, Tensor,
                         conj, is_soa, substitute, alpha_unique, supply_for,
                         children, Typer, lets, pred_free)
from ..errors import NotLetLifted, InputNotSoA, NotPairEliminated


# ---- let lifting ---- #

def let_lift(e):
    """Float every Let to the top: ``let x0 = e0 in ... in body`` with
    let-free right-hand sides and body."""
    e = alpha_unique(e)
    bindings, core = _lift(e)
    return _lets(bindings, core)


def _lift(e):
    """Returns ([(x, ann, rhs)...], core) with let-free rhs and core."""
    if isinstance(e, (Var, Const)):
        return [], e
    if isinstance(e, Let):
        br, cr = _lift(e.rhs)
        bb, cb = _lift(e.body)
        return br + [(e.var, e.ann, cr)] + bb, cb
    if isinstance(e, (Add, Mul, PairCons)):
        ba, ca = _lift(e.left)
        bb, cb = _lift(e.right)
        return ba + bb, type(e)(ca, cb)
    if isinstance(e, BlackBox):
        bs, args = [], []
        for a in e.args:
            b, c = _lift(a)
            bs += b
            args.append(c)
        return bs, BlackBox(e.fn, args)
    if isinstance(e, Proj):
        b, c = _lift(e.body)
        return b, Proj(e.side, c)
    if isinstance(e, Access):
        b, c = _lift(e.body)
        return b, type(e)(c, e.index)
    if isinstance(e, Indicator):
        b, c = _lift(e.body)
        return [(x, ann, Indicator(e.pred, r)) for x, ann, r in b], Indicator(e.pred, c)
    if isinstance(e, (Gen, BigSum)):
        b, c = _lift(e.body)
        if not b:
            return [], type(e)(e.var, e.extent, c)
        i = Idx.var(e.var)
        arrayed, emap = [], {}
        for x, ann, rhs in b:
            rhs = substitute(rhs, emap) if emap else rhs
            arrayed.append((x, None if ann is None else Tensor(e.extent, ann),
                            Gen(e.var, e.extent, rhs)))
            emap[x] = Access(Var(x), i)
        return arrayed, type(e)(e.var, e.extent, substitute(c, emap))
    raise TypeError(e)


def _lets(bindings, body):
    return lets([(x, rhs, ann) for x, ann, rhs in bindings], body)


def let_spine(e):
    """Split a let-lifted term into ([(x, ann, rhs)...], body)."""
    out = []
    while isinstance(e, Let):
        out.append((e.var, e.ann, e.rhs))
        e = e.body
    return out, e


# ---- pair elimination ---- #

class _Leaf:
    __slots__ = ("expr",)

    def __init__(self, expr):
        self.expr = expr


class _Node:
    __slots__ = ("left", "right")

    def __init__(self, left, right):
        self.left, self.right = left, right


def _map_leaves(t, f):
    if isinstance(t, _Leaf):
        return _Leaf(f(t.expr))
    return _Node(_map_leaves(t.left, f), _map_leaves(t.right, f))


def _leaf(t, what):
    if not isinstance(t, _Leaf):
        raise TypeError(f"{what} applied to a pair")
    return t.expr


def _rebuild(t):
    if isinstance(t, _Leaf):
        return t.expr
    return PairCons(_rebuild(t.left), _rebuild(t.right))


def _input_tree(expr, t):
    if isinstance(t, PairT):
        return _Node(_input_tree(Proj(0, expr), t.left), _input_tree(Proj(1, expr), t.right))
    return _Leaf(expr)


def _paths(t, path=()):
    if isinstance(t, _Leaf):
        yield path, t.expr
    else:
        yield from _paths(t.left, path + (0,))
        yield from _paths(t.right, path + (1,))


def pair_elim(e, input_types=None):
    """Destructure every pair-typed intermediate into its scalar/tensor
    components; pairs survive only in output position and projections only
    on inputs."""
    ok, why = validate_normal_form(e, "let-lifted")
    if not ok:
        raise NotLetLifted(why)
    env = {}
    if input_types is not None:
        for x, t in input_types.items():
            if not is_soa(t):
                raise InputNotSoA(f"input {x} : {t} is not in struct-of-arrays form")
            env[x] = _input_tree(Var(x), t)
        out_t = Typer(input_types).typeof(e)
        if not is_soa(out_t):
            raise InputNotSoA(f"output type {out_t} is not in struct-of-arrays form")
    fresh = supply_for(e)
    spine, body = let_spine(e)
    bindings = []
    for x, ann, rhs in spine:
        t = _split(rhs, env)
        if isinstance(t, _Leaf):
            bindings.append((x, ann, t.expr))
            env[x] = _Leaf(Var(x))
            continue
        anns = _split_type(ann) if ann is not None else None
        tree = {}
        for k, (path, leaf) in enumerate(_paths(t)):
            name = fresh(x + "_" + "".join(map(str, path)))
            bindings.append((name, None if anns is None else anns[k], leaf))
            tree[path] = _Leaf(Var(name))
        env[x] = _tree_from_paths(t, tree)
    return _lets(bindings, _rebuild(_split(body, env)))


def _split_type(t):
    """Leaf types of the struct-of-arrays image of ``t``, left to right."""
    if isinstance(t, PairT):
        return _split_type(t.left) + _split_type(t.right)
    if isinstance(t, Tensor):
        return [Tensor(t.size, s) for s in _split_type(t.elem)]
    return [t]


def _tree_from_paths(shape, leaves, path=()):
    if isinstance(shape, _Leaf):
        return leaves[path]
    return _Node(_tree_from_paths(shape.left, leaves, path + (0,)),
                 _tree_from_paths(shape.right, leaves, path + (1,)))


def _split(e, env):
    if isinstance(e, Var):
        return env.get(e.name) or _Leaf(e)
    if isinstance(e, Const):
        return _Leaf(e)
    if isinstance(e, (Add, Mul)):
        return _Leaf(type(e)(_leaf(_split(e.left, env), "arithmetic"),
                             _leaf(_split(e.right, env), "arithmetic")))
    if isinstance(e, BlackBox):
        return _Leaf(BlackBox(e.fn, [_leaf(_split(a, env), e.fn) for a in e.args]))
    if isinstance(e, PairCons):
        return _Node(_split(e.left, env), _split(e.right, env))
    if isinstance(e, Proj):
        t = _split(e.body, env)
        if isinstance(t, _Node):
            return t.left if e.side == 0 else t.right
        return _Leaf(Proj(e.side, t.expr))
    if isinstance(e, BigSum):
        return _Leaf(BigSum(e.var, e.extent, _leaf(_split(e.body, env), "summation")))
    if isinstance(e, Gen):
        return _map_leaves(_split(e.body, env), lambda b: Gen(e.var, e.extent, b))
    if isinstance(e, Access):
        cls = type(e)
        return _map_leaves(_split(e.body, env), lambda b: cls(b, e.index))
    if isinstance(e, Indicator):
        return _map_leaves(_split(e.body, env), lambda b: Indicator(e.pred, b))
    if isinstance(e, Let):
        raise NotLetLifted("nested let in pair elimination")
    raise TypeError(e)


# ---- gen pushout ---- #

def gen_pushout(e):
    """Push every Gen to the outside of its right-hand side: beta-reduce
    accesses into generators, pull indicators inside generators and fuse
    nested indicators."""
    ok, why = validate_normal_form(e, "pair-free")
    if not ok:
        raise NotPairEliminated(why)
    spine, body = let_spine(e)
    fresh = supply_for(e)
    push = _Pushout(fresh).push
    out = [(x, ann, push(rhs)) for x, ann, rhs in spine]
    return _lets(out, _map_output(body, push))


def _map_output(e, f):
    if isinstance(e, PairCons):
        return PairCons(_map_output(e.left, f), _map_output(e.right, f))
    return f(e)


class _Pushout:
    def __init__(self, fresh):
        self.fresh = fresh
        self.memo = {}

    def push(self, e):
        r = self.memo.get(e)
        if r is None:
            r = self._push(e)
            self.memo[e] = r
        return r

    def _push(self, e):
        push = self.push
        if isinstance(e, (Var, Const)):
            return e
        if isinstance(e, (Add, Mul)):
            return type(e)(push(e.left), push(e.right))
        if isinstance(e, BlackBox):
            return BlackBox(e.fn, [push(a) for a in e.args])
        if isinstance(e, Proj):
            return Proj(e.side, push(e.body))
        if isinstance(e, (Gen, BigSum)):
            return type(e)(e.var, e.extent, push(e.body))
        if isinstance(e, Access):
            return self.access(push(e.body), e.index)
        if isinstance(e, Indicator):
            return self.indicator(e.pred, push(e.body))
        raise NotPairEliminated(f"unexpected {type(e).__name__} in gen pushout")

    def access(self, body, index):
        if isinstance(body, Gen):
            # (Gen i. e)[a] ~> e[i := a]; the result is already pushed out
            # except for redexes the substitution may expose
            return self.push(substitute(body.body, None, {body.var: index}, self.fresh))
        if isinstance(body, Indicator):
            return self.indicator(body.pred, self.access(body.body, index))
        return Access(body, index)

    def indicator(self, p, body):
        if isinstance(body, Indicator):
            return self.indicator(conj(p, body.pred), body.body)
        if isinstance(body, Gen):
            var, inner = body.var, body.body
            if var in pred_free(p):
                new = self.fresh(var)
                inner = substitute(inner, None, {var: Idx.var(new)}, self.fresh)
                var = new
            return Gen(var, body.extent, self.indicator(p, inner))
        return Indicator(p, body)


# ---- validators ---- #

FORMS = ("let-lifted", "pair-free", "gen-outer")


def validate_normal_form(e, form):
    """(True, None) if ``e`` is in normal form ``form``, else (False, msg)
    naming the first offending sub-term."""
    from ..frontend.printer import format_expr
    if form not in FORMS:
        raise ValueError(f"unknown normal form {form!r}")
    spine, body = let_spine(e)
    parts = [rhs for _, _, rhs in spine]
    for part in parts + [body]:
        bad = _find(part, lambda t: isinstance(t, Let))
        if bad is not None:
            return False, f"nested let: {_short(format_expr(bad))}"
    if form == "let-lifted":
        return True, None
    let_vars = {x for x, _, _ in spine}
    outputs = _output_leaves(body)
    for part in parts + outputs:
        bad = _find(part, lambda t: isinstance(t, PairCons))
        if bad is not None:
            return False, f"pair outside output position: {_short(format_expr(bad))}"
        bad = _find(part, lambda t: isinstance(t, Proj) and not _input_chain(t, let_vars))
        if bad is not None:
            return False, f"projection of a non-input: {_short(format_expr(bad))}"
    if form == "pair-free":
        return True, None
    for part in parts + outputs:
        bad = _gen_outer_violation(part)
        if bad is not None:
            return False, f"not gen-outer: {_short(format_expr(bad))}"
    return True, None


def _short(s, n=60):
    s = " ".join(s.split())
    return s if len(s) <= n else s[:n - 3] + "..."


def _find(e, bad):
    stack = [e]
    while stack:
        t = stack.pop()
        if bad(t):
            return t
        stack.extend(reversed(children(t)))
    return None


def _output_leaves(e):
    if isinstance(e, PairCons):
        return _output_leaves(e.left) + _output_leaves(e.right)
    return [e]


def _input_chain(e, let_vars):
    while isinstance(e, Proj):
        e = e.body
    return isinstance(e, Var) and e.name not in let_vars


def _is_operand(e):
    """Access chain over a variable or projection chain."""
    while isinstance(e, Access):
        e = e.body
    while isinstance(e, Proj):
        e = e.body
    return isinstance(e, Var)


def _gen_outer_violation(e):
    while isinstance(e, Gen):
        e = e.body
    return _scalar_violation(e)


def _scalar_violation(e):
    if isinstance(e, (Var, Const)):
        return None
    if isinstance(e, (Access, Proj)):
        return None if _is_operand(e) else e
    if isinstance(e, Gen):
        return e
    if isinstance(e, Indicator):
        if isinstance(e.body, Indicator):
            return e
        return _scalar_violation(e.body)
    for c in children(e):
        bad = _scalar_violation(c)
        if bad is not None:
            return bad
    return None
