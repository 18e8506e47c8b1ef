"""Exception types shared across the package."""


class WfomcError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(WfomcError):
    """Syntax or well-formedness error in an input file.

    Always carries the 1-based source position of the offending token.
    """

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class CapExceededError(WfomcError):
    """A resource cap (atom count, world count) was exceeded."""


class NonTightProgramError(WfomcError):
    """A logic program has a positive dependency cycle.

    ``cycle`` lists the predicate names along one offending loop.
    """

    def __init__(self, cycle: list[str]):
        super().__init__("positive dependency cycle: " + " -> ".join(cycle + cycle[:1]))
        self.cycle = cycle
