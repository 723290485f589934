"""Cross-checks between independently computed quantities: instrumented
operation counts vs the cost model, and structural comparison of SSA
programs with predicates compared by enumeration."""
import itertools

from ..cost_model import cost
from ..interp import evaluate_counting, compile_pred
from ..normalize.ssa import InputRef, ConstGen, AddGen, MapGen, Contract, output_names
from ..normalize.simplify import contract_extents, elementwise_extents


def instrumented_cost(e, env, types=None, registry=None):
    """(scalar operations counted by the evaluator, cost model value)."""
    _, ops = evaluate_counting(e, env, types=types, registry=registry)
    return ops, cost(e, env)


# ---- structural comparison ---- #

def _pred_table(p, extents, sizes, relations):
    names = sorted(extents)
    spans = [range(extents[n].evaluate(sizes)) for n in names]
    f = compile_pred(p, relations)
    ie = dict(sizes)
    out = []
    for point in itertools.product(*spans):
        ie.update(zip(names, point))
        out.append(bool(f(ie)))
    return out


def _same_pred(p, q, extents, size_samples, relations=None):
    return all(_pred_table(p, extents, s, relations or {})
               == _pred_table(q, extents, s, relations or {}) for s in size_samples)


def ssa_match(a, b, size_samples, input_map=None):
    """True when the live bindings of SSA programs ``a`` and ``b`` form the
    same DAG, up to binding names, input renaming ``input_map`` (a-name ->
    b-name) and predicates equal at every size assignment in
    ``size_samples``."""
    input_map = dict(input_map or {})
    ra = dict(a.bindings)
    rb = dict(b.bindings)
    pairs = {}

    def match(x, y):
        if x in pairs:
            return pairs[x] == y
        pairs[x] = y
        u, v = ra[x], rb[y]
        if type(u) is not type(v):
            return False
        if isinstance(u, InputRef):
            return input_map.get(u.var, u.var) == v.var and u.path == v.path
        if isinstance(u, ConstGen):
            return u.dims == v.dims and u.value == v.value
        if isinstance(u, AddGen):
            ext = elementwise_extents(u.dims)
            if u.dims != v.dims:
                return False
            saved = dict(pairs)
            straight = (_same_pred(u.pred0, v.pred0, ext, size_samples)
                        and _same_pred(u.pred1, v.pred1, ext, size_samples)
                        and match(u.arg0, v.arg0) and match(u.arg1, v.arg1))
            if straight:
                return True
            pairs.clear()
            pairs.update(saved)
            return (_same_pred(u.pred0, v.pred1, ext, size_samples)
                    and _same_pred(u.pred1, v.pred0, ext, size_samples)
                    and match(u.arg0, v.arg1) and match(u.arg1, v.arg0))
        if isinstance(u, MapGen):
            return (u.dims == v.dims and u.fn == v.fn and len(u.args) == len(v.args)
                    and _same_pred(u.pred, v.pred, elementwise_extents(u.dims), size_samples)
                    and all(match(p, q) for p, q in zip(u.args, v.args)))
        if isinstance(u, Contract):
            return _match_contract(u, v, match, size_samples, pairs)
        return False

    oa, ob = output_names(a.output), output_names(b.output)
    return len(oa) == len(ob) and all(match(x, y) for x, y in zip(oa, ob))


def _match_contract(u, v, match, size_samples, pairs):
    """Contractions agree up to a permutation of summed variables."""
    from ..lang_core import Idx, pred_subst
    from ..normalize.ssa import svar
    if u.out != v.out or len(u.sums) != len(v.sums) or len(u.factors) != len(v.factors):
        return False
    ext = contract_extents(v)
    for order in itertools.permutations(range(len(u.factors))):
        for perm in itertools.permutations(range(len(u.sums))):
            if any(u.sums[k] != v.sums[perm[k]] for k in range(len(u.sums))):
                continue
            ok = True
            for fu, k in zip(u.factors, order):
                fv = v.factors[k]
                if tuple(perm[s] for s in fu[1]) != fv[1]:
                    ok = False
                    break
            if not ok:
                continue
            p = pred_subst(u.pred, {svar(k): Idx.var(svar(perm[k])) for k in range(len(u.sums))})
            if not _same_pred(p, v.pred, ext, size_samples):
                continue
            saved = dict(pairs)
            if all(match(fu[0], v.factors[k][0]) for fu, k in zip(u.factors, order)):
                return True
            pairs.clear()
            pairs.update(saved)
    return False
