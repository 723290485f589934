"""
Sparsity keeps gradients cheap
==============================

Small programs where a dense reverse mode would do far too much work.
The cost model counts scalar operations and skips everything behind a
false guard, so a sparse gradient shows up as a small number.
"""
from atlc.ad import DiffEnv, adjoint_deriv
from atlc.cost_model import cost
from atlc.frontend import parse
from atlc.interp import Env
from atlc.normalize import normalize


def adjoint(text, **kw):
    ssa = normalize(parse(text), **kw)
    return ssa, adjoint_deriv(ssa, DiffEnv.for_inputs(list(ssa.inputs), ssa.inputs))


# ---- four traces of diag(x) ---- #

diag = """
size n
input x : [n]real
let A = gen i:n. gen j:n. [i=j]*x[i] in
(sum i:n. A[i, i]) + (sum i:n. A[i, i]) + (sum i:n. A[i, i]) + (sum i:n. A[i, i])
"""
# Without CSE or fusion each trace stays separate; the n*n matrix is never
# touched off its diagonal, so the gradient grows linearly.
ssa, adj = adjoint(diag, simplify=False, cse=False)
print(" N   cost(e)  cost(grad)")
for N in (4, 8, 16, 32, 64):
    env = Env({}, {"n": N})
    print(f"{N:3d} {cost(ssa.to_expr(), env):8d} {cost(adj.to_expr(), env):11d}")

# With fusion the diagonal and the traces collapse into one sum.
ssa, adj = adjoint(diag)
print("\nfused adjoint:")
print(adj.to_text())

# ---- a sum that skips x[1] ---- #

print("\n n  $IO(e)  $IO(adjoint)")
for n in (4, 8, 16, 32):
    text = f"input x : [{n}]real\n" + " + ".join(f"x[{k}]" for k in range(n) if k != 1)
    ssa, adj = adjoint(text)
    env = Env({}, {})
    print(f"{n:2d} {ssa.io_cost(env):7d} {adj.io_cost(env):13d}")

# ---- dead code ---- #

print("\nchain  $IO(adjoint)")
for length in (4, 16, 64):
    text = "input x : real\n" + "".join(f"let z{k} = x in\n" for k in range(length)) + "2*x"
    ssa, adj = adjoint(text)
    print(f"{length:5d} {adj.io_cost(Env({}, {})):13d}")
