"""Pretty-printer producing text that parses back to the same term."""
from fractions import Fraction

from ..lang_core import (Var, Const, Add, Mul, BlackBox, PairCons, Proj, Gen,
                         BigSum, Access, Indicator, Let, PTrue, PFalse, Cmp, Rel,
                         And, Or, Exists, format_idx)

# precedence levels
BINDER, SUM, PROD, UNARY, POSTFIX = range(5)


def format_const(v):
    v = Fraction(v)
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def format_pred(p, level=0):
    """level 0: any; 1: operand of or; 2: operand of and."""
    if isinstance(p, PTrue):
        return "true"
    if isinstance(p, PFalse):
        return "false"
    if isinstance(p, Cmp):
        return f"{format_idx(p.lhs)}{p.op}{format_idx(p.rhs)}"
    if isinstance(p, Rel):
        return f"{p.name}({', '.join(format_idx(a) for a in p.args)})"
    if isinstance(p, Or):
        s = f"{format_pred(p.left, 1)} or {format_pred(p.right, 2)}"
        return f"({s})" if level >= 2 else s
    if isinstance(p, And):
        s = f"{format_pred(p.left, 2)} and {format_pred(p.right, 3)}"
        return f"({s})" if level >= 3 else s
    if isinstance(p, Exists):
        s = f"exists {p.var}:{format_idx(p.extent)}. {format_pred(p.body)}"
        return f"({s})" if level >= 1 else s
    raise TypeError(p)


def _ends_with_indicator(e):
    while isinstance(e, Mul):
        e = e.right
    return isinstance(e, Indicator)


def _neg_operand(e):
    if isinstance(e, Mul) and isinstance(e.left, Const) and e.left.value == -1:
        return e.right
    return None


def format_expr(e, level=BINDER):
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Const):
        s = format_const(e.value)
        if e.value < 0 and level > PROD:
            return f"({s})"
        return s
    if isinstance(e, (Let, Gen, BigSum)):
        if isinstance(e, Let):
            ann = "" if e.ann is None else f" : {e.ann}"
            s = f"let {e.var}{ann} = {format_expr(e.rhs)} in\n{format_expr(e.body)}"
        else:
            kw = "gen" if isinstance(e, Gen) else "sum"
            s = f"{kw} {e.var}:{format_idx(e.extent)}. {format_expr(e.body)}"
        return s if level == BINDER else f"({s})"
    if isinstance(e, Add):
        left = format_expr(e.left, SUM)
        neg = _neg_operand(e.right)
        if neg is not None:
            s = f"{left} - {format_expr(neg, PROD)}"
        else:
            s = f"{left} + {format_expr(e.right, PROD)}"
        return s if level <= SUM else f"({s})"
    if isinstance(e, Mul):
        left = format_expr(e.left, PROD)
        if _ends_with_indicator(e.left):
            left = f"({left})"
        r = e.right
        right = format_expr(r, PROD) if isinstance(r, Indicator) else format_expr(r, UNARY)
        s = f"{left}*{right}"
        return s if level <= PROD else f"({s})"
    if isinstance(e, Indicator):
        s = f"[{format_pred(e.pred)}]*{format_expr(e.body, PROD)}"
        return s if level <= PROD else f"({s})"
    if isinstance(e, Proj):
        kw = "fst" if e.side == 0 else "snd"
        s = f"{kw} {format_expr(e.body, UNARY)}"
        return s if level <= UNARY else f"({s})"
    if isinstance(e, Access):
        idxs = []
        while isinstance(e, Access):
            idxs.append(format_idx(e.index))
            e = e.body
        base = format_expr(e, POSTFIX)
        return f"{base}[{', '.join(reversed(idxs))}]"
    if isinstance(e, BlackBox):
        return f"{e.fn}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, PairCons):
        return f"({format_expr(e.left)}, {format_expr(e.right)})"
    raise TypeError(e)


def format_program(prog, body=None):
    """Declarations plus body; ``prog`` is a SourceProgram."""
    lines = []
    if prog.sizes:
        lines.append("size " + ", ".join(prog.sizes))
    for r, k in prog.relations.items():
        lines.append(f"relation {r}/{k}")
    for x, t in prog.inputs.items():
        lines.append(f"input {x} : {t}")
    lines.append(format_expr(prog.body if body is None else body))
    return "\n".join(lines) + "\n"


def print_term(t):
    """Text for an expression, SSA program or source program."""
    if hasattr(t, "to_text"):
        return t.to_text()
    if hasattr(t, "inputs") and hasattr(t, "body"):
        return format_program(t)
    return format_expr(t)
