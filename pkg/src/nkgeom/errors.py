"""Exception hierarchy shared by all modules."""


class GeometryError(Exception):
    """Base class for every error raised by this package."""


class InputError(GeometryError, ValueError):
    """Malformed user input (bad file, bad expression, bad parameter)."""


class EmptySpanError(GeometryError):
    """All vectors handed to orthonormalization were numerically zero."""


class SymmetryError(GeometryError):
    """A matrix expected to be symmetric is not."""


class DimensionError(GeometryError):
    """Operands live in ambient spaces of different dimension."""


class ClosureError(GeometryError):
    """Bracket closure did not stabilize."""


class OrderError(GeometryError):
    """Requested derivative order exceeds the cached maximum."""


class InternalConsistencyError(GeometryError):
    """Equivalent characterizations disagree, which signals a kernel bug."""


class NotASubalgebraError(GeometryError):
    """A subspace of the Lie algebra is not closed under the bracket."""


class MissingFibrationError(GeometryError):
    """The operation needs a vertical/horizontal splitting that is absent."""


class NotTangentError(GeometryError):
    """A vector does not lie in the subspace it is supposed to belong to."""


class NotThreeSymmetricError(GeometryError):
    """The candidate order-three automorphism fails its invariants."""


class UnknownSpaceError(GeometryError, KeyError):
    """Unrecognized model space name."""

    def __str__(self):
        return Exception.__str__(self)


class NotBergerError(GeometryError):
    """Induced curvature of a 3-dimensional subspace is not of Berger type."""


class NotAbelianError(GeometryError):
    """Generators expected to commute do not."""


class ZeroVelocityError(GeometryError):
    """A geodesic was requested with zero initial velocity."""


class UnsupportedBaseError(GeometryError):
    """The requested cone base is outside the supported catalog."""


class SpaceDefinitionError(InputError):
    """A space-definition document violates one of its invariants."""
