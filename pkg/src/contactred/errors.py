"""Exception hierarchy."""


class ContactReductionError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(ContactReductionError, ValueError):
    """Inputs of incompatible dimensions."""


class OffManifoldError(ContactReductionError):
    """A point violates the manifold constraints beyond tolerance."""


class SingularPointError(ContactReductionError):
    """The constraint Jacobian is rank deficient at the point."""


class UnsupportedDimensionError(ContactReductionError):
    """Dimension outside the supported range (e.g. even or > 7 for contact checks)."""


class ReebError(ContactReductionError):
    """The Reeb system is singular or its residual exceeds tolerance."""


class DegenerateLevelError(ContactReductionError):
    """A level set is singular and not clean to second order."""


class NonRegularValueError(DegenerateLevelError):
    """Requested level is not a (clean) regular value of the moment map."""


class DimensionMismatchError(ContactReductionError):
    """Numeric and formula dimensions disagree, or samples disagree on a dimension."""


class PreconditionError(ContactReductionError):
    """An operation was called at a point where its hypotheses fail."""


class NotTorusError(ContactReductionError):
    """Operation requires a torus action with a weight matrix."""


class CatalogError(ContactReductionError):
    """Lie algebra catalog data is malformed."""


class JacobiError(CatalogError):
    """Structure constants violate antisymmetry or the Jacobi identity."""


class ScenarioError(ContactReductionError):
    """Scenario failed a load-time invariant (invariance of the form, tangency, ...)."""


class IntegrationError(ContactReductionError):
    """Flow integration left the manifold beyond re-projection tolerance."""
