"""Exception types shared across the package."""


class GraphError(ValueError):
    """Bad input: loops, unknown vertices, overlapping parts and the like."""


class ModelError(GraphError):
    """A minor model refers to vertices or pattern vertices that do not exist.

    Distinct from a model that is well formed but invalid, which is just False.
    """


class PreconditionError(GraphError):
    """An operation was called outside its stated preconditions."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ResourceLimit(RuntimeError):
    """A configured guard (search budget, depth, pattern ceiling) was hit.

    Raised instead of returning an answer that might be wrong.
    """
