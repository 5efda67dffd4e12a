"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the domain of an operation (coincident points, off-network, ...)."""


class NotFoundError(LookupError):
    """A search (nice radius, valid connector size) came up empty."""


class IndeterminateError(RuntimeError):
    """A ladder-based limit did not stabilize."""


class UnsupportedError(NotImplementedError):
    """Documented limitation (cyclic networks for paths, >5 Steiner terminals)."""


class MoveUnavailable(LookupError):
    """A solver move has nothing to do at the requested site."""
