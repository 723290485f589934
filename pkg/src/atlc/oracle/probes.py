"""Brute-force derivative oracles: one-hot Jacobian probing, central
differences and the pairing identity <dy, Df dx> = <D^T f dy, dx>."""
from dataclasses import dataclass, field
from fractions import Fraction

from ..lang_core import BlackBox, PairT, all_names, children
from ..interp import (EXACT, FLOAT, evaluate, flatten, unflatten, inner, zero_of,
                      to_mode, Env)
from ..ad import DiffEnv, forward_deriv, adjoint_deriv, seed_name
from ..errors import DimensionTooLarge, NonScalarOutput
from .sampling import rng_for, random_env, random_sizes, random_value

MAX_DIM = 64


# ---- the program under test ---- #

class Subject:
    """A program seen two ways: the source term (for the forward transform
    and finite differences) and its Tensor SSA (for the adjoint)."""

    def __init__(self, program, wrt=None, registry=None):
        from ..frontend import SourceProgram, parse
        from ..frontend.parser import desugar_guards
        from ..normalize import SSAProgram, normalize
        if isinstance(program, str):
            program = parse(program)
        if isinstance(program, SourceProgram):
            self.source = program.with_body(desugar_guards(program))
            self.source.typecheck()
            self.ssa = normalize(program)
            self.expr = self.source.body
        elif isinstance(program, SSAProgram):
            self.source = None
            self.ssa = program
            self.expr = program.to_expr()
        else:
            raise TypeError("expected a source or SSA program")
        self.registry = registry
        self.inputs = dict(self.ssa.inputs)
        self.sizes = tuple(self.ssa.sizes)
        self.relations = dict(self.ssa.relations)
        self.wrt = list(wrt) if wrt else list(self.inputs)
        avoid = all_names(self.expr) | {x for x, _ in self.ssa.bindings}
        self.d = DiffEnv.for_inputs(self.wrt, self.inputs, avoid=avoid)
        self._fwd = None
        self._adj = None

    @property
    def forward(self):
        if self._fwd is None:
            self._fwd = forward_deriv(self.expr, self.d, self.registry)
        return self._fwd

    @property
    def adjoint(self):
        if self._adj is None:
            self._adj = adjoint_deriv(self.ssa, self.d, registry=self.registry)
        return self._adj

    @property
    def seed(self):
        return seed_name(self.ssa, self.d)

    def output_type(self):
        return self.ssa.output_type()

    def wrt_type(self):
        """Type of the gradient: right-nested pairs over ``wrt``."""
        ts = [self.inputs[x] for x in self.wrt]
        t = ts[-1]
        for u in reversed(ts[:-1]):
            t = PairT(u, t)
        return t

    def polynomial(self):
        return not _has_blackbox(self.expr)

    def evaluate(self, env, mode=EXACT):
        return evaluate(self.expr, env, mode, types=self._types(), registry=self.registry)

    def eval_forward(self, env, dxs, mode=EXACT):
        vals = {self.d[x]: v for x, v in zip(self.wrt, dxs)}
        types = self._types()
        types.update({self.d[x]: self.inputs[x] for x in self.wrt})
        return evaluate(self.forward, env.extend(vals), mode, types=types,
                        registry=self.registry)

    def eval_adjoint(self, env, dy, mode=EXACT):
        return self.adjoint.evaluate(env.extend({self.seed: dy}), mode, self.registry)

    def split_gradient(self, g):
        out = []
        for _ in self.wrt[:-1]:
            out.append(g[0])
            g = g[1]
        return out + [g]

    def _types(self):
        return dict(self.inputs)


def _has_blackbox(e):
    if isinstance(e, BlackBox):
        return True
    return any(_has_blackbox(c) for c in children(e))


def _subject(program, wrt=None, registry=None):
    if isinstance(program, Subject):
        return program
    return Subject(program, wrt, registry)


# ---- dense Jacobians ---- #

@dataclass
class DenseJacobian:
    """``entries[r][c]`` = d out_r / d in_c over flattened coordinates."""
    rows: int
    cols: int
    entries: list
    in_type: object = None
    out_type: object = None

    def transpose(self):
        return DenseJacobian(self.cols, self.rows,
                             [[self.entries[r][c] for r in range(self.rows)]
                              for c in range(self.cols)], self.out_type, self.in_type)

    def __eq__(self, other):
        return (isinstance(other, DenseJacobian) and self.rows == other.rows
                and self.cols == other.cols and self.entries == other.entries)

    def max_abs_diff(self, other):
        return max((abs(a - b) for ra, rb in zip(self.entries, other.entries)
                    for a, b in zip(ra, rb)), default=0)


def _one_hot(t, sizes, k, mode):
    flat = flatten(zero_of(t, sizes, mode))
    flat[k] = Fraction(1) if mode == EXACT else 1.0
    return unflatten(flat, t, sizes)


def jacobian_by_probing(program, env, wrt=None, use="forward", mode=EXACT,
                        registry=None, limit=MAX_DIM):
    """Forward: the Jacobian at ``env``, column by column from one-hot
    ``dx``.  Adjoint: the matrix of the adjoint map, column by column from
    one-hot ``dy``; it should be the transpose of the forward one."""
    s = _subject(program, wrt, registry)
    tin, tout = s.wrt_type(), s.output_type()
    sizes = env.sizes
    n_in = len(flatten(zero_of(tin, sizes)))
    n_out = len(flatten(zero_of(tout, sizes)))
    if max(n_in, n_out) > limit:
        raise DimensionTooLarge(f"{n_out}x{n_in} Jacobian exceeds {limit}")
    env = Env({x: to_mode(v, mode) for x, v in env.values.items()}, env.sizes, env.relations)
    if use in ("forward", "fwd"):
        cols = []
        for k in range(n_in):
            dx = s.split_gradient(_one_hot(tin, sizes, k, mode))
            cols.append(flatten(s.eval_forward(env, dx, mode)))
        entries = [[cols[c][r] for c in range(n_in)] for r in range(n_out)]
    elif use in ("adjoint", "adj"):
        # the matrix of D^T: column r is the adjoint of the r-th one-hot seed
        cols = []
        for r in range(n_out):
            g = s.eval_adjoint(env, _one_hot(tout, sizes, r, mode), mode)
            cols.append(flatten(g))
        entries = [[cols[c][r] for c in range(n_out)] for r in range(n_in)]
        return DenseJacobian(n_in, n_out, entries, tout, tin)
    else:
        raise ValueError(f"unknown probing mode {use!r}")
    return DenseJacobian(n_out, n_in, entries, tin, tout)


# ---- central differences ---- #

def finite_diff_gradient(program, env, wrt=None, h=1e-5, registry=None):
    """Componentwise (f(x+h e_k) - f(x-h e_k)) / 2h, shaped like the
    gradient (right-nested pairs when several inputs)."""
    s = _subject(program, wrt, registry)
    from ..lang_core import REAL
    if s.output_type() is not REAL:
        raise NonScalarOutput("finite differences need a scalar output")
    base = {x: to_mode(v, FLOAT) for x, v in env.values.items()}
    tin = s.wrt_type()
    point = [base[x] for x in s.wrt]
    packed = point[-1]
    for v in reversed(point[:-1]):
        packed = (v, packed)
    flat = flatten(packed)
    grad = []
    for k in range(len(flat)):
        vals = []
        for step in (h, -h):
            moved = list(flat)
            moved[k] += step
            parts = s.split_gradient(unflatten(moved, tin, env.sizes))
            e = Env({**base, **dict(zip(s.wrt, parts))}, env.sizes, env.relations)
            vals.append(s.evaluate(e, FLOAT))
        grad.append((vals[0] - vals[1]) / (2 * h))
    return unflatten(grad, tin, env.sizes)


# ---- the pairing identity ---- #

@dataclass
class UniversalReport:
    trials: int
    mode: str
    failures: int = 0
    max_rel_err: float = 0.0
    worst: tuple = field(default=None, repr=False)

    @property
    def passed(self):
        return self.failures == 0


def pairing(s, env, dxs, dy, mode):
    """Both sides of <dy, Df(x)dx> = <D^T f(x)dy, dx>."""
    lhs = inner(dy, s.eval_forward(env, dxs, mode))
    grads = s.split_gradient(s.eval_adjoint(env, dy, mode))
    rhs = sum((inner(g, dx) for g, dx in zip(grads, dxs)), 0)
    return lhs, rhs


def check_universal_property(program, trials=100, seed=None, mode=None, wrt=None,
                             sizes=None, rel=1e-9, registry=None):
    """Random x, dx, dy per trial; exact equality in exact mode, relative
    error at most ``rel`` in float mode (default: exact iff polynomial)."""
    s = _subject(program, wrt, registry)
    mode = mode or (EXACT if s.polynomial() else FLOAT)
    rng = rng_for(seed)
    rep = UniversalReport(trials, mode)
    for _ in range(trials):
        sz = dict(sizes) if sizes else random_sizes(s.sizes, rng)
        env = random_env(s.inputs, sz, rng, mode, s.relations)
        dxs = [random_value(s.inputs[x], sz, rng, mode) for x in s.wrt]
        dy = random_value(s.output_type(), sz, rng, mode)
        lhs, rhs = pairing(s, env, dxs, dy, mode)
        if mode == EXACT:
            err = 0.0 if lhs == rhs else float("inf")
        else:
            err = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300) if lhs != rhs else 0.0
        if err > rep.max_rel_err:
            rep.max_rel_err = err
            rep.worst = (sz, lhs, rhs)
        if (mode == EXACT and lhs != rhs) or (mode != EXACT and err > rel
                                                and abs(lhs - rhs) > 1e-12):
            rep.failures += 1
    return rep
