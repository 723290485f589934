"""Shared lookups for the test modules."""
from functools import lru_cache

from atlc.cli import load_corpus


@lru_cache(maxsize=None)
def corpus():
    return tuple(load_corpus())


def fixture(name):
    for fx in corpus():
        if fx.name == name:
            return fx
    raise KeyError(name)


@lru_cache(maxsize=None)
def subject(name, wrt=None):
    """A cached oracle view of a corpus program (``wrt`` a tuple or None)."""
    from atlc.oracle import Subject
    return Subject(fixture(name).program, list(wrt) if wrt else None)
