"""Random inputs, seeds and relation tables for the oracles."""
import itertools
import random
from fractions import Fraction

from ..lang_core import Real, PairT, Tensor
from ..interp import Env, EXACT

DEFAULT_SEED = 0


def rng_for(seed=None):
    return random.Random(DEFAULT_SEED if seed is None else seed)


def random_scalar(rng, mode=EXACT):
    if mode == EXACT:
        return Fraction(rng.randint(-16, 16), rng.randint(1, 16))
    return rng.uniform(-1.0, 1.0)


def random_value(t, sizes, rng, mode=EXACT):
    if isinstance(t, Real):
        return random_scalar(rng, mode)
    if isinstance(t, PairT):
        return (random_value(t.left, sizes, rng, mode), random_value(t.right, sizes, rng, mode))
    return [random_value(t.elem, sizes, rng, mode) for _ in range(t.size.evaluate(sizes))]


def random_relations(arities, sizes, rng, density=0.4):
    """A table per relation over coordinates below the largest size."""
    bound = max(list(sizes.values()) + [1]) + 1
    out = {}
    for name, k in sorted(arities.items()):
        out[name] = {tup for tup in itertools.product(range(bound), repeat=k)
                     if rng.random() < density}
    return out


def random_env(inputs, sizes, rng, mode=EXACT, relations=None):
    """An Env with random values for every input in ``inputs``."""
    values = {x: random_value(t, sizes, rng, mode) for x, t in inputs.items()}
    rels = random_relations(relations or {}, sizes, rng)
    return Env(values, dict(sizes), rels)


def random_sizes(names, rng, lo=1, hi=4):
    return {n: rng.randint(lo, hi) for n in names}
