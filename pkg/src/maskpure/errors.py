"""Exception types raised across the package."""


class MaskPureError(Exception):
    """Base class for all package errors."""


class EmptyText(MaskPureError, ValueError):
    pass


class LengthMismatch(MaskPureError, ValueError):
    pass


class InvalidPlan(MaskPureError, ValueError):
    pass


class EmptyCorpus(MaskPureError, ValueError):
    pass


class IncompleteLabels(MaskPureError, ValueError):
    pass


class ShapeMismatch(MaskPureError, ValueError):
    pass


class InvalidArgs(MaskPureError, ValueError):
    pass


class EmptyDataset(MaskPureError, ValueError):
    pass


class CorpusFormatError(MaskPureError, ValueError):
    """A corpus file row could not be parsed; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
