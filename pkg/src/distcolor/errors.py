"""Exception hierarchy shared across the package."""


class GraphFormatError(ValueError):
    """Input graph file could not be parsed."""


class MalformedHeaderError(GraphFormatError):
    pass


class IndexOutOfBoundsError(GraphFormatError):
    pass


class EmptyGraphError(GraphFormatError):
    pass


class PartitionError(ValueError):
    pass


class InvalidColoringError(ValueError):
    """A coloring is incomplete or has monochromatic edges."""


class ConvergenceError(RuntimeError):
    """The conflict-resolution protocol hit its round cap."""


class DeadlockError(RuntimeError):
    """The simulated cluster stopped making progress."""
