"""Canonical ordering, CSE and dead-code removal for SSA programs
(``tidy``), and cost non-increasing contraction fusion (``simplify_ssa``).
"""
from ..lang_core import (Idx, TRUE, FALSE, Cmp, And, Or, Exists, Rel, conj,
                         disj, exists, eq, le, lt, in_range, conjuncts,
                         pred_subst, pred_free, ZERO)
from ..frontend.printer import format_pred
from .ssa import (SSAProgram, InputRef, ConstGen, AddGen, MapGen, Contract,
                  gvar, svar, ivar, output_names, map_output)


# ---- predicate hygiene ---- #

def _orient(c):
    """Canonical orientation of an equality."""
    d = c.rhs - c.lhs
    if not d.terms:
        return c
    name, k = min(d.terms)
    if k < 0:
        d, k = d.scale(-1), -k
    if k == 1:
        rest = Idx(tuple(t for t in d.terms if t[0] != name), d.const)
        return Cmp("=", Idx.var(name), rest.scale(-1))
    pos = Idx(tuple(t for t in d.terms if t[1] > 0), max(d.const, 0))
    neg = Idx(tuple((n, -c) for n, c in d.terms if c < 0), max(-d.const, 0))
    return Cmp("=", neg, pos)


def _trivial(c, extents):
    """True when ``c`` holds everywhere in the iteration box ``extents``."""
    if not isinstance(c, Cmp) or c.op == "=":
        return False
    d = c.rhs - c.lhs
    # need d > 0 ("<") or d >= 0 ("<=")
    need = 1 if c.op == "<" else 0
    if not (d.names() & extents.keys()):
        # only sizes, each at least 1
        if all(k > 0 for _, k in d.terms) and sum(k for _, k in d.terms) + d.const >= need:
            return True
    for v, n in extents.items():
        if d.coeff(v) == 1:
            rest = d - Idx.var(v)
            if rest.is_const() and rest.const >= need:
                return True
        if d.coeff(v) == -1:
            rest = d + Idx.var(v) - Idx.coerce(n)
            # v <= n - 1, so d >= rest + 1
            if rest.is_const() and rest.const + 1 >= need:
                return True
    return False


def solve_vars(conjs, targets, allowed):
    """Solve ``targets`` from equality conjuncts in terms of ``allowed``
    names.  Returns (solution dict, used conjunct indices) or None."""
    sol, used = {}, set()
    targets = list(targets)
    progress = True
    while progress and len(sol) < len(targets):
        progress = False
        for k, c in enumerate(conjs):
            if k in used or not isinstance(c, Cmp) or c.op != "=":
                continue
            d = (c.rhs - c.lhs).subst(sol)
            for t in targets:
                if t in sol or d.coeff(t) not in (1, -1):
                    continue
                if all(n == t or n in allowed for n in d.names()):
                    sol[t] = d.solve_for(t)
                    used.add(k)
                    progress = True
                    break
    if len(sol) < len(targets):
        return None
    return sol, used


def tidy_pred(p, extents):
    """Drop conjuncts implied by the iteration box, eliminate existentials
    fixed by an equality, orient equalities and sort conjuncts."""
    out, seen = [], set()
    for c in conjuncts(p):
        if c is FALSE:
            return FALSE
        if isinstance(c, Cmp) and c.op == "=":
            c = _orient(c)
        elif isinstance(c, Exists):
            c = _tidy_exists(c, extents)
        elif isinstance(c, Or):
            c = disj(*dict.fromkeys(tidy_pred(q, extents) for q in _disjuncts(c)))
        if c is TRUE or _trivial(c, extents):
            continue
        if c is FALSE:
            return FALSE
        if isinstance(c, And):
            for cc in conjuncts(c):
                if cc not in seen and not _trivial(cc, extents):
                    seen.add(cc)
                    out.append(cc)
            continue
        if c not in seen:
            seen.add(c)
            out.append(c)
    out = _drop_implied_by_equalities(out, extents)
    out.sort(key=format_pred)
    return conj(*out)


def _disjuncts(p):
    if isinstance(p, Or):
        return _disjuncts(p.left) + _disjuncts(p.right)
    return [p]


def _drop_implied_by_equalities(cs, extents):
    """Drop bounds that become box-trivial once an equality conjunct is
    added to one side (``0 <= m-1-g+s`` under ``t = m-1-g+s``)."""
    eqs = [c.rhs - c.lhs for c in cs if isinstance(c, Cmp) and c.op == "="]
    if not eqs:
        return cs

    def implied(c):
        return isinstance(c, Cmp) and c.op != "=" and any(
            _trivial(Cmp(c.op, c.lhs + d.scale(k), c.rhs), extents)
            for d in eqs for k in (1, -1))
    return [c for c in cs if not implied(c)]


def _tidy_exists(p, extents):
    inner = dict(extents)
    inner[p.var] = p.extent
    body = tidy_pred(p.body, inner)
    cs = conjuncts(body)
    got = solve_vars(cs, [p.var], (_all_names(cs) | frozenset(extents)) - {p.var})
    if got is not None:
        sol, used = got
        f = sol[p.var]
        rest = conj(*[c for k, c in enumerate(cs) if k not in used])
        return tidy_pred(conj(pred_subst(rest, {p.var: f}), in_range(f, p.extent)), extents)
    return exists(p.var, p.extent, body)


def _all_names(cs):
    out = set()
    for c in cs:
        out |= pred_free(c)
    return out


def rename_exists(p, counter=None):
    """Rename existential binders to ``e0, e1, ..`` in depth-first order."""
    counter = [0] if counter is None else counter
    if isinstance(p, Exists):
        new = f"e{counter[0]}"
        counter[0] += 1
        body = pred_subst(p.body, {p.var: Idx.var(new)}) if new != p.var else p.body
        return Exists(new, p.extent, rename_exists(body, counter))
    if isinstance(p, And):
        return conj(rename_exists(p.left, counter), rename_exists(p.right, counter))
    if isinstance(p, Or):
        return disj(rename_exists(p.left, counter), rename_exists(p.right, counter))
    return p


def _extents(names, dims_):
    return {n: d for n, d in zip(names, dims_)}


def contract_extents(c):
    ext = {gvar(k): n for k, n in enumerate(c.out)}
    ext.update({svar(k): n for k, n in enumerate(c.sums)})
    return ext


def elementwise_extents(d):
    return {ivar(k): n for k, n in enumerate(d)}


# ---- canonical right-hand sides ---- #

def _renumber_sums(c, order):
    """Reorder summed variables: ``order`` lists old numbers, new first."""
    mapping = {svar(old): Idx.var(svar(new)) for new, old in enumerate(order)}
    inv = {old: new for new, old in enumerate(order)}
    factors = tuple((f, tuple(inv[k] for k in pos)) for f, pos in c.factors)
    return Contract(c.out, tuple(c.sums[old] for old in order),
                    pred_subst(c.pred, mapping), factors)


def canonical_rhs(rhs, rank):
    """``rank`` maps binding names to their position (for operand order)."""
    if isinstance(rhs, Contract):
        c = rhs
        if len(c.factors) == 2 and rank.get(c.factors[0][0], -1) > rank.get(c.factors[1][0], -1):
            c = Contract(c.out, c.sums, c.pred, (c.factors[1], c.factors[0]))
        order = [k for _, pos in c.factors for k in pos]
        rest = [k for k in range(len(c.sums)) if k not in order]
        c = _renumber_sums(c, order + rest)
        pred = rename_exists(tidy_pred(c.pred, contract_extents(c)))
        return Contract(c.out, c.sums, pred, c.factors)
    if isinstance(rhs, AddGen):
        ext = elementwise_extents(rhs.dims)
        p0 = rename_exists(tidy_pred(rhs.pred0, ext))
        p1 = rename_exists(tidy_pred(rhs.pred1, ext))
        a = (p0, rhs.arg0)
        b = (p1, rhs.arg1)
        if (rank.get(rhs.arg0, -1), format_pred(p0)) > (rank.get(rhs.arg1, -1), format_pred(p1)):
            a, b = b, a
        return AddGen(rhs.dims, a[0], a[1], b[0], b[1])
    if isinstance(rhs, MapGen):
        return MapGen(rhs.dims, rename_exists(tidy_pred(rhs.pred, elementwise_extents(rhs.dims))),
                      rhs.fn, rhs.args)
    return rhs


def _rename_refs(rhs, ren):
    if isinstance(rhs, AddGen):
        return AddGen(rhs.dims, rhs.pred0, ren.get(rhs.arg0, rhs.arg0),
                      rhs.pred1, ren.get(rhs.arg1, rhs.arg1))
    if isinstance(rhs, MapGen):
        return MapGen(rhs.dims, rhs.pred, rhs.fn, tuple(ren.get(a, a) for a in rhs.args))
    if isinstance(rhs, Contract):
        return Contract(rhs.out, rhs.sums, rhs.pred,
                        tuple((ren.get(f, f), pos) for f, pos in rhs.factors))
    return rhs


# ---- tidy: DCE, canonical order, CSE, naming ---- #

def dead_code(prog):
    live = set(output_names(prog.output))
    keep = []
    for x, rhs in reversed(prog.bindings):
        if x in live:
            keep.append((x, rhs))
            live.update(rhs.refs())
    return prog.replace(bindings=tuple(reversed(keep)))


def tidy(prog, cse=True, prefix=None):
    """Dead-code elimination, canonical operand order, CSE and positional
    renaming, iterated to a fixed point."""
    from .convert import binding_prefix
    prefix = prefix or binding_prefix(prog.inputs)
    for _ in range(64):
        prog = dead_code(prog)
        rank = {x: k for k, (x, _) in enumerate(prog.bindings)}
        ren, memo, out = {}, {}, []
        for x, rhs in prog.bindings:
            rhs = canonical_rhs(_rename_refs(rhs, ren), rank)
            if cse and rhs in memo:
                ren[x] = memo[rhs]
                continue
            name = f"{prefix}{len(out)}"
            ren[x] = name
            memo[rhs] = name
            out.append((name, rhs))
        new = prog.replace(bindings=tuple(out), output=map_output(prog.output, ren.get))
        if new == prog:
            return new
        prog = new
    return prog


# ---- simplification ---- #

def _compose(c, slot, inner):
    """Replace factor ``slot`` of contraction ``c`` by the contraction
    ``inner`` it names, summing over ``inner``'s variables as well."""
    f, pos = c.factors[slot]
    off = len(c.sums)
    mapping = {gvar(k): Idx.var(svar(pos[k])) for k in range(len(inner.out))}
    mapping.update({svar(j): Idx.var(svar(off + j)) for j in range(len(inner.sums))})
    q = pred_subst(inner.pred, mapping)
    new_factors = tuple((g, tuple(off + j for j in gpos)) for g, gpos in inner.factors)
    factors = c.factors[:slot] + new_factors + c.factors[slot + 1:]
    return Contract(c.out, c.sums + inner.sums, conj(c.pred, q), factors)


def is_selection(c):
    """Every summed variable is fixed by an equality in the generated ones,
    so each output element reads at most one input element."""
    gs = {gvar(k) for k in range(len(c.out))}
    return c.unary and solve_vars(conjuncts(c.pred), [svar(k) for k in range(len(c.sums))],
                                  gs | _size_names(c)) is not None


def _size_names(c):
    names = set()
    for n in c.out + c.sums:
        names |= Idx.coerce(n).names()
    for n in pred_free(c.pred):
        if not (n[:1] in "gse" and n[1:].isdigit()):
            names.add(n)
    return names


def _outputs_determined(c):
    ss = {svar(k) for k in range(len(c.sums))}
    return solve_vars(conjuncts(c.pred), [gvar(k) for k in range(len(c.out))],
                      ss | _size_names(c)) is not None


def eliminate_sums(c):
    """Remove summed variables that index no factor and are fixed by an
    equality, keeping their range as a predicate."""
    changed = True
    while changed:
        changed = False
        in_factor = {k for _, pos in c.factors for k in pos}
        cs = conjuncts(c.pred)
        for k in range(len(c.sums)):
            if k in in_factor:
                continue
            s = svar(k)
            got = solve_vars(cs, [s], (_all_names(cs) | _size_names(c)) - {s})
            if got is None:
                continue
            sol, used = got
            f = sol[s]
            rest = conj(*[x for j, x in enumerate(cs) if j not in used])
            pred = conj(pred_subst(rest, {s: f}), in_range(f, c.sums[k]))
            c = _drop_sum(Contract(c.out, c.sums, pred, c.factors), k)
            c = Contract(c.out, c.sums, tidy_pred(c.pred, contract_extents(c)), c.factors)
            changed = True
            break
    return c


def _drop_sum(c, k):
    mapping = {svar(j): Idx.var(svar(j - 1)) for j in range(k + 1, len(c.sums))}
    factors = tuple((f, tuple(j - 1 if j > k else j for j in pos)) for f, pos in c.factors)
    return Contract(c.out, c.sums[:k] + c.sums[k + 1:], pred_subst(c.pred, mapping), factors)


def _is_identity(c, shape):
    if not c.unary:
        return False
    f, pos = c.factors[0]
    r = len(c.out)
    if tuple(pos) != tuple(range(r)) or len(c.sums) != r or tuple(c.out) != tuple(shape):
        return False
    want = {_orient(Cmp("=", Idx.var(gvar(k)), Idx.var(svar(k)))) for k in range(r)}
    have = set(conjuncts(tidy_pred(c.pred, contract_extents(c))))
    return have == want


def simplify_ssa(prog, max_rounds=64):
    """Fuse selections and single-use contractions into their consumers,
    eliminate fixed summation indices and drop identity contractions.
    Work cost never increases."""
    prog = tidy(prog)
    for _ in range(max_rounds):
        new = _simplify_round(prog)
        new = tidy(new)
        if new == prog:
            return new
        prog = new
    return prog


def _simplify_round(prog):
    shapes = prog.shapes()
    uses = prog.uses()
    outputs = set(output_names(prog.output))
    rhs_of = dict(prog.bindings)
    ren = {}
    out = []
    for x, rhs in prog.bindings:
        rhs = _rename_refs(rhs, ren)
        if isinstance(rhs, Contract):
            rhs = _simplify_contract(rhs, rhs_of, uses, outputs)
            if rhs.pred is FALSE:
                rhs = ConstGen(rhs.out, 0)
            elif _is_identity(rhs, shapes.get(rhs.factors[0][0], ())):
                ren[x] = rhs.factors[0][0]
                continue
        rhs_of[x] = rhs
        out.append((x, rhs))
    output = map_output(prog.output, lambda o: ren.get(o, o))
    return prog.replace(bindings=tuple(out), output=output)


def _simplify_contract(c, rhs_of, uses, outputs):
    for _ in range(16):
        done = True
        for slot, (f, _) in enumerate(c.factors):
            inner = rhs_of.get(f)
            if not isinstance(inner, Contract):
                continue
            if is_selection(inner) or (c.unary and uses.get(f, 0) == 1 and f not in outputs
                                       and _outputs_determined(c)):
                c = eliminate_sums(_compose(c, slot, inner))
                done = False
                break
        if done:
            break
    return eliminate_sums(c)
