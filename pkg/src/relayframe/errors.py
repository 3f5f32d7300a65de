"""Exception hierarchy.

Everything raised deliberately by the package derives from
:class:`RelayFrameError`.  The CLI maps :class:`MathematicalFailure`
subclasses to exit code 2 and every other error to exit code 1.
"""


class RelayFrameError(Exception):
    """Base class for all package errors."""


class MathematicalFailure(RelayFrameError):
    """The input is well formed but fails a mathematical precondition."""


# numerics-core
class AllColumnsDegenerate(RelayFrameError):
    pass


class NotSymmetric(RelayFrameError):
    pass


class NotPositiveDefinite(MathematicalFailure):
    pass


class DimensionMismatch(RelayFrameError):
    pass


class ConvergenceError(RelayFrameError):
    pass


# measure-grid / relay-model
class ValidationError(RelayFrameError):
    """Base for structural validation failures."""


class NonPositiveWeight(ValidationError):
    pass


class DuplicateId(ValidationError):
    pass


class EmptySpace(ValidationError):
    pass


class EmptyInnerSpace(ValidationError):
    pass


class NonOrthonormalBasis(ValidationError):
    pass


class ZeroVector(ValidationError):
    pass


# frame-ops / analysis / duality / perturbation
class IndexMismatch(RelayFrameError):
    pass


class NotAFrame(MathematicalFailure):
    pass


class IncompatibleSystems(RelayFrameError):
    pass


class LocalFrameDeficient(MathematicalFailure):
    pass


class SingularQ(MathematicalFailure):
    pass


class StructureMismatch(RelayFrameError):
    pass


class InvalidConstants(RelayFrameError):
    pass


class MissingTransforms(RelayFrameError):
    pass


class NotInSubspace(RelayFrameError):
    """A coefficient block does not lie in its inner subspace."""


# cli / io
class ParseError(RelayFrameError):
    """Malformed JSON; the message carries line and column."""


class SchemaError(ValidationError):
    """Well-formed JSON that does not follow the system file schema."""
