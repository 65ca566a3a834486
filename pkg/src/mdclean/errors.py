"""Exception hierarchy for the cleaning engine."""


class MdcError(Exception):
    """Base class for all engine errors."""


class DomainError(MdcError):
    """A value does not belong to the attribute domain it is used with."""


class ContractError(MdcError):
    """An operation was called outside its contract (unknown tid,
    mismatched relations, a witness set that is not merge-closed, ...)."""


class NotApplicableError(MdcError):
    """A single enforcement step was requested on a pair it does not apply to."""


class ChaseBoundError(MdcError):
    """The chase exceeded its polynomial step guard.

    This cannot happen for merge functions satisfying the semilattice
    axioms; seeing it indicates a broken custom domain configuration.
    """


class QueryError(MdcError):
    """Malformed query: unresolvable attribute, schema mismatch, bad syntax."""


class TruncatedEnumerationError(MdcError):
    """Exact bounds were requested but the enumeration hit its limit."""


class ProjectError(MdcError):
    """Project file failed validation.  Carries every error found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
