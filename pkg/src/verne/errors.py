"""Exception hierarchy shared by every solver module."""

from __future__ import annotations


class VerneError(Exception):
    """Base class; the CLI maps subclasses to exit code 1."""


# parameters

class ParseError(VerneError):
    pass


class MissingField(VerneError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name


class InvalidValue(VerneError):
    def __init__(self, name: str, reason: str):
        super().__init__(f"{name}: {reason}")
        self.name = name
        self.reason = reason


# geometry / solvers

class EmptyLocus(VerneError):
    def __init__(self, alpha: float):
        super().__init__(f"no real iso-orientation locus at alpha={alpha!r}")
        self.alpha = alpha


class Unreachable(VerneError):
    pass


class DegenerateTarget(VerneError):
    pass


class DegenerateInput(VerneError):
    pass


class SingularDenominator(VerneError):
    def __init__(self, which: str, value: float):
        super().__init__(f"{which} denominator vanishes ({value:.3e})")
        self.which = which
        self.value = value


class NoAssembly(VerneError):
    pass


class NoFeasibleSolution(VerneError):
    def __init__(self, reports=()):
        super().__init__("every candidate was rejected by the feasibility filter")
        self.reports = list(reports)


class MultipleFeasible(VerneError):
    """More than one candidate passed every check; all of them are attached."""

    def __init__(self, survivors, reports=()):
        super().__init__(f"{len(survivors)} candidates passed every feasibility check")
        self.survivors = list(survivors)
        self.reports = list(reports)


# polynomial kernel

class ZeroPolynomial(VerneError):
    pass


class NonFinite(VerneError):
    pass


class DuplicateNodes(VerneError):
    pass


class IllConditioned(VerneError):
    def __init__(self, cond: float):
        super().__init__(f"interpolation system condition number {cond:.3e}")
        self.cond = cond
