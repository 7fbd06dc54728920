"""Exception types raised across the package."""


class OrbitHomError(Exception):
    """Base class for all package errors."""


class ParseError(OrbitHomError):
    """Malformed edge-list input.

    ``kind`` is ``"self_loop"`` or ``"syntax"``.
    """

    def __init__(self, kind, message, line=None):
        self.kind = kind
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{kind}: {message}{where}")


class InvalidPattern(OrbitHomError):
    pass


class PatternTooLarge(InvalidPattern):
    pass


class InvalidMergeSet(OrbitHomError):
    pass


class NoWidthOneDecomposition(OrbitHomError):
    """The oriented pattern has DAG-treewidth greater than one."""


class DichotomyViolation(OrbitHomError):
    """The pattern is on the conjecturally hard side of the dichotomy."""


class ArithmeticOverflow(OrbitHomError, ArithmeticError):
    pass


class BudgetExceeded(OrbitHomError):
    pass
