"""Cost bookkeeping for the adjoint and the scalar gradient."""
from dataclasses import dataclass, field

from ..cost_model import cost, type_size
from ..cost_model.sizes import inner_product_cost
from .adjoint import adjoint_deriv, _as_diffenv, seed_name

# rewrites of the final gathering stage, allowed to spend the input-size slack
OUTPUT_STAGE = ("output-mask",)


@dataclass
class AdjointCostReport:
    io: int                     # $_IO of the source program
    io_adj: int                 # $_IO of its adjoint
    cost: int
    cost_adj: int
    input_size: int             # $(T_I)
    output_size: int            # $(T_O)
    ledger: list = field(default_factory=list)     # [(rule, extended cost)]
    ledger_ok: bool = True

    @property
    def bound_holds(self):
        return self.io_adj <= 4 * self.io

    @property
    def ok(self):
        return self.bound_holds and self.ledger_ok

    def to_json(self):
        return {"io_cost": self.io, "io_cost_adjoint": self.io_adj, "cost": self.cost,
                "cost_adjoint": self.cost_adj, "input_size": self.input_size,
                "output_size": self.output_size, "bound_holds": self.bound_holds,
                "ledger_ok": self.ledger_ok, "ledger": [list(x) for x in self.ledger]}


class _Coster:
    """``cost_extended`` with per-binding memoization."""

    def __init__(self, env):
        self.env = env
        self.memo = {}

    def of(self, rhs):
        c = self.memo.get(rhs)
        if c is None:
            c = self.memo[rhs] = cost(rhs.to_expr(), self.env)
        return c

    def extended(self, state):
        total = sum(self.of(rhs) for _, rhs in state.bindings)
        for dx, de in state.pending_derivatives():
            key = ("d", dx, de)
            c = self.memo.get(key)
            if c is None:
                c = self.memo[key] = cost(de, self.env)
            total += c
        return total + sum(inner_product_cost(ip, self.env) for ip in state.products)


def adjoint_cost_report(prog, d, env=None, registry=None, adjoint=None):
    """Both $_IO costs plus the per-rewrite extended-cost ledger.

    The ledger must never increase across a main-loop rewrite; the output
    stage may add at most two copies of $(T_I) in total."""
    d = _as_diffenv(prog, d)
    trace = []
    adjoint_deriv(prog, d, registry=registry, simplify=False, trace=trace)
    if adjoint is None:
        adjoint = adjoint_deriv(prog, d, registry=registry)
    c = _Coster(env)
    ledger = [(rule, c.extended(st)) for rule, st in trace]
    t_in = sum(type_size(t, env) for t in prog.inputs.values())
    t_out = type_size(prog.output_type(), env)
    ok = True
    slack = 2 * t_in
    for (_, before), (rule, after) in zip(ledger, ledger[1:]):
        if after > before:
            if rule in OUTPUT_STAGE:
                slack -= after - before
                ok = ok and slack >= 0
            else:
                ok = False
    ce = cost(prog.to_expr(), env)
    ca = cost(adjoint.to_expr(), env)
    return AdjointCostReport(ce + t_in + t_out, ca + t_in + t_out, ce, ca, t_in, t_out,
                             ledger, ok)


def adjoint_cost_check(prog, d, env=None, registry=None):
    """``($_IO(e), $_IO(D^T e), bound and ledger hold)``."""
    r = adjoint_cost_report(prog, d, env, registry)
    return r.io, r.io_adj, r.ok


def gradient(prog, d, env, mode=None, registry=None, adjoint=None):
    """The adjoint evaluated at seed 1 (scalar outputs only)."""
    from ..interp import EXACT
    from ..lang_core import REAL
    from ..errors import NonScalarOutput
    from fractions import Fraction
    if prog.output_type() is not REAL:
        raise NonScalarOutput("gradient needs a scalar output")
    d = _as_diffenv(prog, d)
    adj = adjoint or adjoint_deriv(prog, d, registry=registry)
    seed = seed_name(prog, d)
    one = Fraction(1) if (mode or EXACT) == EXACT else 1.0
    return adj.evaluate(env.extend({seed: one}), mode, registry)
