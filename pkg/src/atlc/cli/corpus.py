"""The fixture corpus shipped at ``corpus/*.atl``.

Each file starts with comment lines; a ``# sizes: n=3, m=2`` line gives
the default size bindings used by the golden files."""
import os
import re
from dataclasses import dataclass
from pathlib import Path

from ..frontend import parse

_SIZES = re.compile(r"^#[ \t]*sizes:[ \t]*(.*)$", re.M)


def corpus_dir():
    env = os.environ.get("ATLC_CORPUS")
    if env:
        return Path(env)
    return Path(__file__).resolve().parents[3] / "corpus"


@dataclass
class Fixture:
    name: str
    path: Path
    text: str
    sizes: dict

    @property
    def program(self):
        return parse(self.text)

    @property
    def golden_path(self):
        return self.path.with_suffix(".golden.json")

    @property
    def description(self):
        first = self.text.splitlines()[0]
        return first.lstrip("# ").strip() if first.startswith("#") else self.name


def parse_sizes(text):
    out = {}
    for part in re.split(r"[,\s]+", text.strip()):
        if part:
            k, v = part.split("=")
            out[k.strip()] = int(v)
    return out


def load_fixture(path):
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    m = _SIZES.search(text)
    return Fixture(path.stem, path, text, parse_sizes(m.group(1)) if m else {})


def load_corpus(directory=None):
    d = Path(directory) if directory else corpus_dir()
    return [load_fixture(p) for p in sorted(d.glob("*.atl"))]
