"""Exception hierarchy shared by every stage of the pipeline."""


class AtlError(Exception):
    """Base class.  ``pos`` is an optional (line, column) pair."""

    def __init__(self, msg, pos=None):
        super().__init__(msg)
        self.msg = msg
        self.pos = pos

    def __str__(self):
        if self.pos is None:
            return self.msg
        return f"{self.pos[0]}:{self.pos[1]}: {self.msg}"


# front end
class AtlSyntaxError(AtlError):
    pass


class DuplicateBinding(AtlError):
    pass


# typing
class UnboundVariable(AtlError):
    pass


class TypeMismatch(AtlError):
    pass


class NonAffineIndex(AtlError):
    pass


class ArityMismatch(AtlError):
    pass


# evaluation
class EvalError(AtlError):
    pass


class IndexOutOfBounds(EvalError):
    pass


class UnknownBlackBox(EvalError):
    pass


class MissingRelationTable(EvalError):
    pass


class UnboundIndexVariable(EvalError):
    pass


# passes
class NotNormalized(AtlError):
    pass


class NotLetLifted(NotNormalized):
    pass


class InputNotSoA(NotNormalized):
    pass


class NotPairEliminated(NotNormalized):
    pass


# differentiation / oracle
class UnregisteredBlackBox(AtlError):
    pass


class NonLinearSeed(AtlError):
    pass


class DimensionTooLarge(AtlError):
    pass


class NonScalarOutput(AtlError):
    pass
