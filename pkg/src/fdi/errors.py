"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map failures
onto its 1 (config/parse), 2 (I/O), 3 (domain) convention.
"""


class FdiError(Exception):
    exit_code = 3


class ConfigError(FdiError, ValueError):
    exit_code = 1


class ParseError(FdiError, ValueError):
    exit_code = 1


class DomainError(FdiError):
    exit_code = 3


class EmptyTrace(DomainError):
    pass


class ShapeError(DomainError, ValueError):
    pass


class UnknownFault(DomainError, KeyError):
    pass


class NotValid(DomainError):
    pass


class InsufficientCalibration(DomainError):
    pass


class NoActiveWindow(DomainError):
    pass


class DegenerateWindow(DomainError):
    pass


class LogDomainError(DomainError, ValueError):
    pass


class MissingLabel(DomainError):
    pass


class NoTransition(DomainError):
    pass


class EmptyNode(DomainError, ValueError):
    pass


class SingleClass(DomainError):
    pass


class InsufficientData(DomainError):
    pass


class MissingBaseline(DomainError):
    pass


class UnknownNode(DomainError, KeyError):
    pass


class CycleError(DomainError):
    pass


class InvalidProfile(DomainError, ValueError):
    pass
