"""Recursive-descent parser for ``.atl`` programs.

A program is a list of declarations followed by one body expression::

    size n, m
    relation R/2
    input x : [n+m-1]real, c : [m]real
    gen i:n. sum j:m. x[i-j+m-1]*c[j]
"""
from dataclasses import dataclass, field
from fractions import Fraction

from .lexer import tokenize
from ..errors import AtlSyntaxError, DuplicateBinding, NonAffineIndex
from ..lang_core import (Idx, TRUE, FALSE, cmp, conj, disj, exists, Rel,
                         REAL, PairT, Tensor, Expr, Var, Const, Add, Mul, BlackBox,
                         PairCons, Proj, Gen, BigSum, Access, Indicator, Let,
                         substitute, in_range, Typer)


class GuardedAccess(Access):
    """Parse-time ``e[a]?``; replaced by ``[0<=a<n]*e[a]`` once typed."""
    __slots__ = ()


@dataclass
class SourceProgram:
    sizes: tuple
    relations: dict
    inputs: dict            # name -> Type, in declaration order
    body: Expr
    positions: dict = field(default_factory=dict, repr=False, compare=False)

    def typer(self, **kw):
        return Typer(self.inputs, index_scope=self.sizes, relations=self.relations,
                     positions=self.positions, **kw)

    def typecheck(self):
        from ..lang_core.types import type_names
        from ..errors import UnboundVariable
        for x, t in self.inputs.items():
            missing = type_names(t) - set(self.sizes)
            if missing:
                raise UnboundVariable(f"input {x} uses undeclared size {sorted(missing)[0]!r}",
                                      self.positions.get(("input", x)))
        return self.typer().typeof(self.body)

    def with_body(self, body):
        return SourceProgram(self.sizes, self.relations, self.inputs, body, self.positions)


def _shift(var, lo, body):
    """Rebase a binder iterating from ``lo`` to iterate from 0."""
    if lo.is_const() and lo.const == 0:
        return body
    return substitute(body, None, {var: Idx.var(var) + lo})


class Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.k = 0
        self.positions = {}

    # ---- token helpers ---- #
    @property
    def tok(self):
        return self.toks[self.k]

    def peek(self, n=1):
        return self.toks[min(self.k + n, len(self.toks) - 1)]

    def at(self, text, kind=None):
        t = self.tok
        return t.text == text and (kind is None or t.kind == kind) and t.kind != "eof"

    def advance(self):
        t = self.tok
        self.k += 1
        return t

    def fail(self, expected, tok=None):
        tok = tok or self.tok
        got = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise AtlSyntaxError(f"expected {expected}, got {got}", tok.pos)

    def expect(self, text):
        if not self.at(text) or self.tok.kind not in ("op", "kw"):
            self.fail(repr(text))
        return self.advance()

    def name(self, what="identifier"):
        if self.tok.kind != "name":
            self.fail(what)
        return self.advance()

    def mark(self, node, tok):
        self.positions.setdefault(node, tok.pos)
        return node

    # ---- program ---- #
    def program(self):
        sizes, relations, inputs = [], {}, {}
        declared = {}

        def declare(tok, kind):
            if tok.text in declared:
                raise DuplicateBinding(
                    f"{tok.text!r} already declared as {declared[tok.text]}", tok.pos)
            declared[tok.text] = kind

        while self.tok.kind == "kw" and self.tok.text in ("size", "relation", "input"):
            kw = self.advance().text
            while True:
                t = self.name(f"{kw} name")
                declare(t, kw)
                if kw == "size":
                    sizes.append(t.text)
                elif kw == "relation":
                    self.expect("/")
                    if self.tok.kind != "num" or not self.tok.text.isdigit():
                        self.fail("relation arity")
                    relations[t.text] = int(self.advance().text)
                else:
                    self.expect(":")
                    inputs[t.text] = self.type_()
                    self.positions[("input", t.text)] = t.pos
                if not self.at(","):
                    break
                self.advance()
        if self.tok.kind == "eof":
            self.fail("a program body")
        body = self.expr()
        if self.tok.kind != "eof":
            self.fail("end of input")
        prog = SourceProgram(tuple(sizes), relations, inputs, body, self.positions)
        if _has_guard(body):
            prog.body = desugar_guards(prog)
        return prog

    def type_(self):
        t = self.tok
        if self.at("real", "kw"):
            self.advance()
            return REAL
        if self.at("["):
            self.advance()
            n = self.idx()
            self.expect("]")
            return Tensor(n, self.type_())
        if self.at("("):
            self.advance()
            a = self.type_()
            self.expect(",")
            b = self.type_()
            self.expect(")")
            return PairT(a, b)
        self.fail("a type", t)

    # ---- expressions ---- #
    def expr(self):
        t = self.tok
        if t.kind == "kw" and t.text in ("let", "gen", "sum"):
            return self.binder()
        return self.additive()

    def binder(self):
        t = self.advance()
        if t.text == "let":
            x = self.name("let-bound name").text
            ann = None
            if self.at(":"):
                self.advance()
                ann = self.type_()
            self.expect("=")
            rhs = self.expr()
            self.expect("in")
            body = self.expr()
            return self.mark(Let(x, ann, rhs, body), t)
        var = self.name("index variable").text
        self.expect(":")
        lo, hi = self.range_()
        self.expect(".")
        body = _shift(var, lo, self.expr())
        cls = Gen if t.text == "gen" else BigSum
        return self.mark(cls(var, hi - lo, body), t)

    def range_(self):
        a = self.idx()
        if self.at(".."):
            self.advance()
            return a, self.idx()
        return Idx.lit(0), a

    def additive(self):
        left = self.product()
        while self.at("+") or self.at("-"):
            t = self.advance()
            right = self.operand(self.product)
            if t.text == "-":
                right = Mul(Const(-1), right)
            left = self.mark(Add(left, right), t)
        return left

    def operand(self, parse):
        """A trailing binder may stand in for an operand; it extends to the end."""
        if self.tok.kind == "kw" and self.tok.text in ("let", "gen", "sum"):
            return self.binder()
        return parse()

    def product(self):
        if self.at("["):
            return self.indicator()
        left = self.unary()
        while self.at("*"):
            t = self.advance()
            if self.at("["):
                return self.mark(Mul(left, self.indicator()), t)
            right = self.operand(self.unary)
            left = self.mark(Mul(left, right), t)
        return left

    def indicator(self):
        t = self.expect("[")
        p = self.pred()
        self.expect("]")
        self.expect("*")
        body = self.operand(self.product)
        return self.mark(Indicator(p, body), t)

    def unary(self):
        t = self.tok
        if self.at("-"):
            self.advance()
            if self.tok.kind == "num":
                c = self.number()
                return self.postfix(self.mark(Const(-c), t))
            return self.mark(Mul(Const(-1), self.unary()), t)
        if t.kind == "kw" and t.text in ("fst", "snd"):
            self.advance()
            return self.mark(Proj(0 if t.text == "fst" else 1, self.unary()), t)
        return self.postfix(self.atom())

    def postfix(self, e):
        while self.at("["):
            t = self.advance()
            idxs = [self.idx()]
            while self.at(","):
                self.advance()
                idxs.append(self.idx())
            self.expect("]")
            guarded = self.at("?")
            if guarded:
                self.advance()
            for a in idxs:
                e = self.mark((GuardedAccess if guarded else Access)(e, a), t)
        return e

    def number(self):
        t = self.advance()
        v = Fraction(t.text)
        if self.at("/") and self.peek().kind == "num":
            self.advance()
            d = Fraction(self.advance().text)
            if d == 0:
                raise AtlSyntaxError("zero denominator", t.pos)
            v = v / d
        return v

    def atom(self):
        t = self.tok
        if t.kind == "num":
            return self.mark(Const(self.number()), t)
        if t.kind == "name":
            self.advance()
            if self.at("("):
                self.advance()
                args = []
                if not self.at(")"):
                    args.append(self.expr())
                    while self.at(","):
                        self.advance()
                        args.append(self.expr())
                self.expect(")")
                return self.mark(BlackBox(t.text, tuple(args)), t)
            return self.mark(Var(t.text), t)
        if self.at("("):
            self.advance()
            a = self.expr()
            if self.at(","):
                self.advance()
                b = self.expr()
                self.expect(")")
                return self.mark(PairCons(a, b), t)
            self.expect(")")
            return a
        self.fail("an expression")

    # ---- indices and predicates ---- #
    def idx(self):
        t = self.tok
        try:
            a = self.iterm()
            while self.at("+") or self.at("-"):
                op = self.advance().text
                b = self.iterm()
                a = a + b if op == "+" else a - b
            return a
        except NonAffineIndex as err:
            raise NonAffineIndex(err.msg, t.pos) from None

    def iterm(self):
        a = self.ifactor()
        while self.at("*"):
            self.advance()
            a = a * self.ifactor()
        return a

    def ifactor(self):
        t = self.tok
        if self.at("-"):
            self.advance()
            return -self.ifactor()
        if t.kind == "num":
            if not t.text.isdigit():
                raise NonAffineIndex(f"index constant {t.text} is not an integer", t.pos)
            self.advance()
            return Idx.lit(int(t.text))
        if t.kind == "name":
            self.advance()
            return Idx.var(t.text)
        if self.at("("):
            self.advance()
            a = self.idx()
            self.expect(")")
            return a
        self.fail("an index expression")

    def pred(self):
        if self.at("exists", "kw"):
            self.advance()
            var = self.name("index variable").text
            self.expect(":")
            lo, hi = self.range_()
            self.expect(".")
            body = self.pred()
            if not (lo.is_const() and lo.const == 0):
                from ..lang_core import pred_subst
                body = pred_subst(body, {var: Idx.var(var) + lo})
            return exists(var, hi - lo, body)
        p = self.pand()
        while self.at("or", "kw"):
            self.advance()
            p = disj(p, self.operand_pred(self.pand))
        return p

    def operand_pred(self, parse):
        if self.at("exists", "kw"):
            return self.pred()
        return parse()

    def pand(self):
        p = self.patom()
        while self.at("and", "kw"):
            self.advance()
            p = conj(p, self.operand_pred(self.patom))
        return p

    def patom(self):
        t = self.tok
        if self.at("true", "kw"):
            self.advance()
            return TRUE
        if self.at("false", "kw"):
            self.advance()
            return FALSE
        if t.kind == "name" and self.peek().text == "(" and self.peek().kind == "op":
            self.advance()
            self.advance()
            args = [self.idx()]
            while self.at(","):
                self.advance()
                args.append(self.idx())
            self.expect(")")
            return Rel(t.text, tuple(args))
        if self.at("("):
            save = self.k
            try:
                return self.comparison()
            except AtlSyntaxError:
                self.k = save
            self.advance()
            p = self.pred()
            self.expect(")")
            return p
        return self.comparison()

    def comparison(self):
        a = self.idx()
        parts = []
        while self.tok.kind == "op" and self.tok.text in ("<", "<=", "=", ">", ">="):
            op = self.advance().text
            b = self.idx()
            if op == ">":
                parts.append(cmp("<", b, a))
            elif op == ">=":
                parts.append(cmp("<=", b, a))
            else:
                parts.append(cmp(op, a, b))
            a = b
        if not parts:
            self.fail("a comparison operator")
        return conj(*parts)


def parse(text):
    """Parse program text into a ``SourceProgram``."""
    return Parser(text).program()


def parse_expr(text):
    """Parse a bare expression (no declarations)."""
    p = Parser(text)
    e = p.expr()
    if p.tok.kind != "eof":
        p.fail("end of input")
    return e


def parse_pred(text):
    p = Parser(text)
    r = p.pred()
    if p.tok.kind != "eof":
        p.fail("end of input")
    return r


def parse_type(text):
    p = Parser(text)
    r = p.type_()
    if p.tok.kind != "eof":
        p.fail("end of input")
    return r


# ---- guarded access ---- #

def _has_guard(e):
    from ..lang_core import children
    if isinstance(e, GuardedAccess):
        return True
    return any(_has_guard(c) for c in children(e))


def desugar_guards(prog):
    """Replace every ``e[a]?`` by ``[0<=a<n]*e[a]`` using the type of ``e``."""
    typer = prog.typer()
    from ..errors import TypeMismatch

    def go(e, env):
        if isinstance(e, GuardedAccess):
            body = go(e.body, env)
            t = typer.typeof(body, env)
            if not isinstance(t, Tensor):
                raise TypeMismatch(f"indexing into non-array type {t}", prog.positions.get(e))
            return Indicator(in_range(e.index, t.size), Access(body, e.index))
        if isinstance(e, Let):
            rhs = go(e.rhs, env)
            inner = dict(env)
            inner[e.var] = typer.typeof(rhs, env)
            return Let(e.var, e.ann, rhs, go(e.body, inner))
        if isinstance(e, (Add, Mul, PairCons)):
            return type(e)(go(e.left, env), go(e.right, env))
        if isinstance(e, BlackBox):
            return BlackBox(e.fn, [go(a, env) for a in e.args])
        if isinstance(e, Proj):
            return Proj(e.side, go(e.body, env))
        if isinstance(e, (Gen, BigSum)):
            return type(e)(e.var, e.extent, go(e.body, env))
        if isinstance(e, Access):
            return Access(go(e.body, env), e.index)
        if isinstance(e, Indicator):
            return Indicator(e.pred, go(e.body, env))
        return e

    typer.index_scope = None
    return go(prog.body, dict(prog.inputs))
