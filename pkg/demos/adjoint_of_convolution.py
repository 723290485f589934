"""
The adjoint of a convolution
============================

A one-dimensional convolution, differentiated in reverse mode with respect
to its signal, comes out as a correlation of the output cotangent with the
kernel.  Run with ``python demos/adjoint_of_convolution.py``.
"""
from fractions import Fraction

from atlc.frontend import parse
from atlc.interp import Env
from atlc.oracle import Subject, jacobian_by_probing, check_universal_property

# The source program: n outputs, a kernel of width m, an input of n+m-1.
conv = parse("""
size n, m
input x : [n+m-1]real, c : [m]real
gen i:n. sum j:m. x[i-j+m-1]*c[j]
""")

# Normalized to Tensor SSA, every binding is an input projection or a
# predicated contraction.
s = Subject(conv, wrt=["x"])
print("Tensor SSA:")
print(s.ssa.to_text())

# The adjoint with respect to x, seeded by the cotangent ``dy``.  The single
# equality in the guard pins one of the two sums, so each output entry
# reads m products: the correlation dx[k] = sum_j dy[k+j-m+1] c[j].
print("\nadjoint wrt x:")
print(s.adjoint.to_text())

# At n=3, m=2 and c=(10, 20) the Jacobian is banded; the adjoint probed
# with one-hot cotangents gives its transpose.
env = Env({"x": [Fraction(k) for k in range(4)], "c": [Fraction(10), Fraction(20)]},
          {"n": 3, "m": 2})
J = jacobian_by_probing(s, env, use="forward")
print("\nJacobian:")
for row in J.entries:
    print("  ", [int(v) for v in row])
print("adjoint probe equals its transpose:",
      jacobian_by_probing(s, env, use="adjoint") == J.transpose())

# The defining identity <dy, Df dx> = <D^T f dy, dx>, on random rational data.
rep = check_universal_property(s, trials=100, seed=0)
print(f"\npairing identity: {rep.trials} exact trials, {rep.failures} failures")
