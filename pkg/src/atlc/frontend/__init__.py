"""Concrete ``.atl`` syntax: tokenizer, parser and printer."""
from .lexer import tokenize, Token
from .parser import (parse, parse_expr, parse_pred, parse_type, SourceProgram,
                     GuardedAccess, desugar_guards)
from .printer import format_expr, format_pred, format_const, format_program, print_term


def load(path):
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
