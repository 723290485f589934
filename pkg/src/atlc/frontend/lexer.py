"""Tokenizer for ``.atl`` source text."""
import re
from dataclasses import dataclass

from ..errors import AtlSyntaxError

KEYWORDS = frozenset("""size relation input let in gen sum exists fst snd and or
                        true false real""".split())

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>\.\.|<=|>=|[-+*/<>=()\[\],:.?])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str       # "num", "name", "kw", "op", "eof"
    text: str
    pos: tuple


def tokenize(text):
    out = []
    line, col0, k = 1, 0, 0
    while k < len(text):
        m = _TOKEN.match(text, k)
        if m is None:
            raise AtlSyntaxError(f"unexpected character {text[k]!r}", (line, k - col0 + 1))
        kind = m.lastgroup
        pos = (line, k - col0 + 1)
        if kind == "nl":
            line += 1
            col0 = m.end()
        elif kind == "name":
            word = m.group()
            out.append(Token("kw" if word in KEYWORDS else "name", word, pos))
        elif kind in ("num", "op"):
            out.append(Token(kind, m.group(), pos))
        k = m.end()
    out.append(Token("eof", "", (line, k - col0 + 1)))
    return out
