"""Exception hierarchy for mcsched."""


class SchedError(Exception):
    """Base class for every error raised by the toolkit."""


class TaskSetError(SchedError, ValueError):
    """A task set violates one of the model invariants."""

    def __init__(self, task_id, message):
        self.task_id = task_id
        super().__init__(f"task {task_id!r}: {message}")


class DuplicateIdError(TaskSetError):
    pass


class MissingPeriodError(TaskSetError):
    pass


class UnexpectedPeriodError(TaskSetError):
    pass


class MissingDeadlineError(TaskSetError):
    pass


class WcetExceedsDeadlineError(TaskSetError):
    pass


class ZeroDurationError(TaskSetError):
    pass


class TickOverflowError(SchedError, OverflowError):
    """Tick arithmetic left the representable range."""


class AperiodicPresentError(SchedError, ValueError):
    def __init__(self, task_id):
        self.task_id = task_id
        super().__init__(f"task {task_id!r} is aperiodic and has no period")


class NotPeriodicError(SchedError, ValueError):
    pass


class DomainError(SchedError, ValueError):
    pass


class DeadlineExceedsPeriodError(SchedError, ValueError):
    """Time-demand analysis only covers tasks with deadline <= period."""


class PartitionError(SchedError, ValueError):
    pass


class UnassignedTaskError(PartitionError):
    def __init__(self, task_id):
        self.task_id = task_id
        super().__init__(f"task {task_id!r} is not assigned to any core")


class UnknownTaskError(PartitionError):
    def __init__(self, task_id):
        self.task_id = task_id
        super().__init__(f"partition names unknown task {task_id!r}")


class CoreIndexOutOfRangeError(PartitionError):
    def __init__(self, task_id, core, core_count):
        self.task_id = task_id
        self.core = core
        super().__init__(
            f"task {task_id!r} assigned to core {core}, valid cores are 0..{core_count - 1}"
        )


class NotSporadicError(SchedError, ValueError):
    pass


class WrongCoreError(SchedError, ValueError):
    pass


class ConfigError(SchedError, ValueError):
    """A simulation configuration is inconsistent."""


class DocumentError(SchedError, ValueError):
    """A JSON document could not be turned into model objects."""

    def __init__(self, message, where=None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)
