"""Exception hierarchy shared by every module."""


class LearnSepError(Exception):
    """Base class for all library errors."""


class InvalidModulusError(LearnSepError, ValueError):
    pass


class NotInvertibleError(LearnSepError, ValueError):
    pass


class DomainError(LearnSepError, ValueError):
    pass


class ParameterRangeError(LearnSepError, ValueError):
    pass


class GenerationTimeoutError(LearnSepError, RuntimeError):
    pass


class NotSemiprimeError(LearnSepError, ValueError):
    pass


class InvalidInstanceError(LearnSepError, ValueError):
    pass


class BudgetExhaustedError(LearnSepError, RuntimeError):
    pass


class EmptyTestSetError(LearnSepError, ValueError):
    pass


class SpecTooLargeError(LearnSepError, ValueError):
    pass


class InconsistencyError(LearnSepError, RuntimeError):
    """Concept answers handed to a reconstruction algorithm contradict each other."""


class InconsistentDataError(LearnSepError, RuntimeError):
    """No hypothesis in the searched class agrees with the training sample."""


class InversionFailure(LearnSepError, RuntimeError):
    pass


class DegenerateSampleError(LearnSepError, ValueError):
    pass


class IllConditionedError(LearnSepError, ValueError):
    pass


class TooLargeError(LearnSepError, ValueError):
    pass


class IncompleteReportError(LearnSepError, ValueError):
    pass
