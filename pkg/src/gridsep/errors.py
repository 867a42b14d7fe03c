"""Exception types shared across the package."""


class GridsepError(Exception):
    """Base class for all package errors."""


class DimensionTooSmall(GridsepError):
    """Grid dimensions below the 2x2 minimum."""


class NotACycle(GridsepError):
    """Edge set violates the dual-cycle degree/connectivity invariants."""


class InfeasiblePartition(GridsepError):
    """A 2-partition side is empty or disconnected."""


class TooLarge(GridsepError):
    """Instance exceeds the exact-enumeration cap."""


class BudgetExceeded(GridsepError):
    """An enumeration or random-walk budget was exhausted."""


class VertexNotOnLoop(GridsepError):
    """Splice position vertex does not appear on the loop."""


class ErasureMismatch(GridsepError):
    """Walk's loop-erasure does not match the expected directed path."""


class NotInImage(GridsepError):
    """Walk is not the image of the forward mapping for this context."""


class WindowViolation(GridsepError):
    """Mapping context's paths do not fit the declared window."""


class CrossStructurePresent(GridsepError):
    """Operation requires a coloring free of diagonal 2x2 blocks."""


class NotAnIsland(GridsepError):
    """Region passed where an island was required."""


class PatternMismatch(GridsepError):
    """Vertex neighborhood does not match the requested local pattern."""


class NoCandidateFound(GridsepError):
    """Reconnection search exhausted its budget without a valid result."""


class StepFailed(GridsepError):
    """Chain step could not produce a balanced split within the retry budget."""


class GraphParseError(GridsepError):
    """Malformed graph JSON."""


class DisconnectedGraph(GridsepError):
    """Input graph is not connected."""


class EmptyStats(GridsepError):
    """No samples recorded; histogram undefined."""
