"""Exception hierarchy shared across the package."""


class SocDseError(Exception):
    """Base class for all package errors."""


# -- workload files / graphs -------------------------------------------------

class SchemaError(SocDseError):
    """A structured-text document has a malformed or unknown field."""


class CycleError(SocDseError):
    """The task dependency graph contains a cycle."""


class DanglingEdgeError(SocDseError):
    """An edge references a task id that does not exist."""


class EmptyGraphError(SocDseError):
    """An aggregate over tasks was requested on a graph with no tasks."""


class InvalidSpecError(SocDseError):
    """Synthetic workload generator parameters are invalid."""


# -- hardware / database -----------------------------------------------------

class MissingGppEntryError(SocDseError):
    """The IP database has no general-purpose processor entry for a frequency."""


class MissingDatabaseEntryError(SocDseError):
    """A block's knob setting has no matching IP database entry."""


class UnreachableError(SocDseError):
    """No NoC path exists between a processing element and a memory."""


class InvalidDesignError(SocDseError):
    """A design failed validation; carries the violation report."""

    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


# -- simulation ----------------------------------------------------------------

class ZeroRateError(SocDseError):
    """A resource with remaining work received a zero processing rate."""


class NoRunningTaskError(SocDseError):
    """No task is running although unfinished tasks remain (deadlock)."""


class ConservationError(SocDseError):
    """Processed work does not match the workload's declared totals."""


class StepBudgetExceededError(SocDseError):
    """The fixed-timestep reference run exceeded its step budget."""


class SpaceTooLargeError(SocDseError):
    """Exhaustive enumeration would exceed the configured design cap."""


# -- exploration ---------------------------------------------------------------

class AllMetricsMetError(SocDseError):
    """Metric selection was requested although every budget is already met."""


class ExhaustedCandidatesError(SocDseError):
    """Escalation walked past the last rankable task/block candidate."""


class NoApplicableMoveError(SocDseError):
    """Every candidate move for the selected target is infeasible."""


class InfeasibleMoveError(SocDseError):
    """The move cannot be applied to this design (boundary, missing entry, ...)."""


class EmptyTraceError(SocDseError):
    """Trace analytics were requested on an empty exploration trace."""
