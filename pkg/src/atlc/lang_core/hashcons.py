"""Interned immutable terms.

Every ``Node`` subclass is hash-consed: building a node whose class and
fields match a live node returns the existing object.  Structural equality
is therefore object identity, hashing is O(1), and any dictionary keyed by
terms doubles as a common-subexpression table.
"""
import threading
import weakref


class Node:
    __slots__ = ("_vals", "__weakref__")
    _fields = ()

    _table = weakref.WeakValueDictionary()
    _lock = threading.Lock()

    def __init_subclass__(cls, **kw):
        super().__init_subclass__(**kw)
        for k, name in enumerate(cls.__dict__.get("_fields", ())):
            setattr(cls, name, property(lambda self, k=k: self._vals[k]))

    @classmethod
    def _make(cls, *vals):
        key = (cls, vals)
        with Node._lock:
            node = Node._table.get(key)
            if node is None:
                node = object.__new__(cls)
                object.__setattr__(node, "_vals", vals)
                Node._table[key] = node
        return node

    def __new__(cls, *vals):
        if len(vals) != len(cls._fields):
            raise TypeError(f"{cls.__name__} takes {len(cls._fields)} fields, got {len(vals)}")
        return cls._make(*vals)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __reduce__(self):
        return (type(self), self._vals)

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    def __repr__(self):
        inner = ", ".join(repr(v) for v in self._vals)
        return f"{type(self).__name__}({inner})"

    @property
    def fields(self):
        return self._vals

    def replace(self, **kw):
        vals = [kw.pop(f, v) for f, v in zip(self._fields, self._vals)]
        if kw:
            raise TypeError(f"unknown fields {sorted(kw)}")
        return type(self)(*vals)
