"""Affine index expressions.

An ``Idx`` is stored in a canonical linear form: a sorted tuple of
``(name, coefficient)`` pairs with non-zero integer coefficients plus an
integer constant.  Index variables and size variables share the same name
space here; which is which is decided by scope.  Because the form is
canonical, ``i+1`` and ``1+i`` are the same interned node.
"""
from .hashcons import Node
from ..errors import NonAffineIndex, UnboundIndexVariable


class Idx(Node):
    __slots__ = ()
    _fields = ("terms", "const")

    def __new__(cls, terms=(), const=0):
        acc = {}
        for name, k in terms:
            if type(k) is not int:
                raise NonAffineIndex(f"index coefficient {k!r} is not an integer")
            acc[name] = acc.get(name, 0) + k
        if type(const) is not int:
            raise NonAffineIndex(f"index constant {const!r} is not an integer")
        norm = tuple(sorted((n, k) for n, k in acc.items() if k != 0))
        return cls._make(norm, const)

    # -- construction helpers -------------------------------------------------
    @staticmethod
    def var(name):
        return Idx(((name, 1),), 0)

    @staticmethod
    def lit(k):
        return Idx((), k)

    @staticmethod
    def coerce(a):
        if isinstance(a, Idx):
            return a
        if isinstance(a, int) and not isinstance(a, bool):
            return Idx.lit(a)
        if isinstance(a, str):
            return Idx.var(a)
        raise TypeError(f"cannot make an index from {a!r}")

    def __add__(self, other):
        other = Idx.coerce(other)
        return Idx(self.terms + other.terms, self.const + other.const)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-Idx.coerce(other))

    def __rsub__(self, other):
        return Idx.coerce(other) - self

    def scale(self, k):
        return Idx(tuple((n, c * k) for n, c in self.terms), self.const * k)

    def __mul__(self, other):
        if isinstance(other, Idx):
            if other.is_const():
                return self.scale(other.const)
            if self.is_const():
                return other.scale(self.const)
            raise NonAffineIndex("product of two non-constant index terms")
        if isinstance(other, int) and not isinstance(other, bool):
            return self.scale(other)
        raise NonAffineIndex(f"cannot scale an index by {other!r}")

    __rmul__ = __mul__

    # -- queries ----------------------------------------------------------------
    def is_const(self):
        return not self.terms

    def names(self):
        return frozenset(n for n, _ in self.terms)

    def coeff(self, name):
        for n, k in self.terms:
            if n == name:
                return k
        return 0

    def as_var(self):
        """The variable name if this index is exactly one variable, else None."""
        if self.const == 0 and len(self.terms) == 1 and self.terms[0][1] == 1:
            return self.terms[0][0]
        return None

    def subst(self, mapping):
        """Replace names by index expressions (names absent from mapping stay)."""
        if not any(n in mapping for n, _ in self.terms):
            return self
        out = Idx.lit(self.const)
        for n, k in self.terms:
            rep = mapping.get(n)
            out = out + (Idx.var(n).scale(k) if rep is None else Idx.coerce(rep).scale(k))
        return out

    def rename(self, mapping):
        return self.subst({a: Idx.var(b) for a, b in mapping.items()})

    def evaluate(self, env):
        v = self.const
        try:
            for n, k in self.terms:
                v += k * env[n]
        except KeyError as err:
            raise UnboundIndexVariable(f"unbound index variable {err.args[0]!r}") from None
        return v

    def solve_for(self, name):
        """For ``self == 0`` return the index ``name`` equals, if the
        coefficient of ``name`` is +-1; else None."""
        k = self.coeff(name)
        if k not in (1, -1):
            return None
        rest = Idx(tuple(t for t in self.terms if t[0] != name), self.const)
        return rest.scale(-k)

    def __str__(self):
        return format_idx(self)


def format_idx(a):
    parts = []
    for n, k in a.terms:
        if k == 1:
            s = n
        elif k == -1:
            s = "-" + n
        else:
            s = f"{k}*{n}"
        if parts and not s.startswith("-"):
            s = "+" + s
        parts.append(s)
    if a.const or not parts:
        c = str(a.const)
        if parts and a.const > 0:
            c = "+" + c
        parts.append(c)
    return "".join(parts)


ZERO = Idx.lit(0)
