"""
Fitting a kernel with reverse-mode gradients
============================================

The squared error of a convolution against a target, differentiated with
respect to the kernel and used for a few steps of gradient descent.  The
gradient is checked against central differences first.
"""
from atlc.ad import gradient
from atlc.frontend import parse
from atlc.interp import Env, FLOAT, flatten
from atlc.oracle import Subject, finite_diff_gradient

loss = parse("""
size n, m
input x : [n+m-1]real, z : [n]real, w : [m]real
let r = gen i:n. (sum j:m. x[i-j+m-1]*w[j]) - z[i] in
sum i:n. r[i]*r[i]
""")
s = Subject(loss, wrt=["w"])
print("adjoint wrt w:")
print(s.adjoint.to_text())

# A target produced by the kernel (0.5, -1, 2).
n, m = 6, 3
x = [0.3, -1.2, 0.8, 2.0, -0.5, 1.1, 0.4, -0.9]
true_w = [0.5, -1.0, 2.0]
z = [sum(x[i - j + m - 1] * true_w[j] for j in range(m)) for i in range(n)]
sizes = {"n": n, "m": m}

w = [0.0, 0.0, 0.0]
env = Env({"x": x, "z": z, "w": w}, sizes)
g = gradient(s.ssa, s.d, env, FLOAT, adjoint=s.adjoint)
fd = finite_diff_gradient(s, env)
print("\nadjoint gradient:", [round(v, 6) for v in flatten(g)])
print("central diffs:   ", [round(v, 6) for v in flatten(fd)])

for step in range(200):
    env = Env({"x": x, "z": z, "w": w}, sizes)
    g = gradient(s.ssa, s.d, env, FLOAT, adjoint=s.adjoint)
    w = [a - 0.02 * b for a, b in zip(w, g)]
    if step % 50 == 0:
        print(f"step {step:3d}  loss {s.evaluate(env, FLOAT):.6f}")
print("fitted kernel:", [round(v, 4) for v in w])
