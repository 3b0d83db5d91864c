"""Exception types shared across the package."""


class KltraceError(Exception):
    """Base class for all errors raised by this package."""


class AntisymmetryViolation(KltraceError):
    """A relation closure produced x <= y and y <= x for distinct x, y."""


class NotDownClosed(KltraceError):
    """A subset required to be down-closed is not."""


class NotUpClosed(KltraceError):
    """A subset required to be up-closed is not."""


class NotMonotone(KltraceError):
    """A mapping required to be monotone is not."""


class CarrierTooLarge(KltraceError):
    """An enumeration would exceed the configured instance budget."""


class BackendMismatch(KltraceError):
    """Arrows built over different backends were combined."""


class CarrierMismatch(KltraceError):
    """Arrows whose carriers do not line up were combined."""


class FailureShapeUnsupported(KltraceError):
    """Refusal observations cannot be carried by the ordered backend."""


class ClosureViolation(KltraceError):
    """A predicate or relation violates the closure its fibre demands."""


class NotCommuting(KltraceError):
    """A square handed to a checker does not commute on points."""


class DanglingReference(KltraceError):
    """A transition or accepting entry mentions an undeclared name."""


class FailureWithUpgrades(KltraceError):
    """Refusal observations combined with condition upgrades are rejected."""


class UnknownState(KltraceError):
    """A query names a state that is not part of the system."""


class UnknownCondition(KltraceError):
    """A query names a condition that is not part of the system."""


class InfeasibleMass(KltraceError):
    """Supplies and demands of a transport instance do not balance."""


class CtsSyntaxError(KltraceError):
    """A system description file could not be parsed."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
