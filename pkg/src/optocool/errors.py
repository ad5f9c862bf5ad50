"""Exception hierarchy shared by all optocool modules."""


class OptocoolError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(OptocoolError, ValueError):
    """Malformed input: bad keys, bad values, inconsistent sweep description."""


class MissingField(ConfigError):
    pass


class NonPositiveParameter(ConfigError):
    pass


class NumericalError(OptocoolError, ArithmeticError):
    """The requested quantity does not exist for these parameters."""


class UnstableSpring(NumericalError):
    pass


class NegativeTotalDamping(NumericalError):
    pass


class NotCooling(NumericalError):
    pass


class Unstable(NumericalError):
    """Total damping is not positive, so there is no steady state."""


class UnstableSystem(Unstable):
    """The linearized drift matrix has an eigenvalue with non-negative real part."""


class NegativeRate(NumericalError):
    pass


class CutoffTooSmall(NumericalError):
    pass


class QuadratureNotConverged(NumericalError):
    pass


class StepTooLarge(NumericalError):
    pass
