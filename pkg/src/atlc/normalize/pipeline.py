"""The full pass pipeline over a parsed program."""
from ..frontend.parser import desugar_guards
from .passes import let_lift, pair_elim, gen_pushout
from .convert import to_ssa
from .simplify import simplify_ssa

PASSES = ("let-lift", "pair-elim", "gen-pushout", "ssa")


def run_pass(name, e, prog):
    """Apply one pass to the term ``e`` of source program ``prog``."""
    if name == "let-lift":
        return let_lift(e)
    if name == "pair-elim":
        return pair_elim(e, prog.inputs)
    if name == "gen-pushout":
        return gen_pushout(e)
    if name == "ssa":
        return to_ssa(e, prog.inputs, prog.sizes, prog.relations)
    raise ValueError(f"unknown pass {name!r}")


def normalize(prog, simplify=True, cse=True):
    """Source program to Tensor SSA (optionally simplified)."""
    prog = prog.with_body(desugar_guards(prog))
    prog.typecheck()
    e = gen_pushout(pair_elim(let_lift(prog.body), prog.inputs))
    ssa = to_ssa(e, prog.inputs, prog.sizes, prog.relations, cse=cse)
    return simplify_ssa(ssa) if simplify else ssa
