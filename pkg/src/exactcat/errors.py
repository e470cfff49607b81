class ExactCatError(Exception):
    """Base class for all errors raised by exactcat."""


class IllDefinedMorphism(ExactCatError):
    """A matrix does not send the source relations into the target relation lattice."""


class StructureMismatch(ExactCatError):
    """An exact structure was applied to objects outside its category (e.g. torsion under PureTf)."""


class PreconditionError(ExactCatError, ValueError):
    pass


class ChainComplexError(ExactCatError):
    """Raised when d∘d != 0 or a chain map fails to commute with differentials."""


class StageOverflow(ExactCatError):
    pass


class WindowUnstable(ExactCatError):
    pass


class NotEvaluable(ExactCatError):
    pass


class NotAdapted(ExactCatError):
    pass


class HypothesisFailed(ExactCatError):
    pass


class ParseError(ExactCatError):
    pass


class ValidationError(ExactCatError):
    pass


class TaskError(ExactCatError):
    pass
