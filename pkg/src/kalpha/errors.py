class KalphaError(Exception):
    """Base class for library errors."""


class InvalidTriplet(KalphaError, ValueError):
    pass


class QuadratureNonConvergence(KalphaError, ArithmeticError):
    pass


class LimitNonConvergence(KalphaError, ArithmeticError):
    pass


class DomainViolation(KalphaError, ValueError):
    pass


class NotInClass(KalphaError, ValueError):
    pass


class InvalidCutoff(KalphaError, ValueError):
    pass
