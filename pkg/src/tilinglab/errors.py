"""Exception hierarchy shared by every tilinglab module."""


class TilingLabError(Exception):
    """Base class for all library errors."""


class IntraPartEdge(TilingLabError, ValueError):
    pass


class IndexOutOfRange(TilingLabError, IndexError):
    pass


class ShapeMismatch(TilingLabError, ValueError):
    pass


class TargetInSet(TilingLabError, ValueError):
    pass


class ParseError(TilingLabError, ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class AlphaOutOfRange(TilingLabError, ValueError):
    pass


class EtaTooSmall(TilingLabError, ValueError):
    pass


class GenerationFailed(TilingLabError, RuntimeError):
    pass


class SizesExceedPart(TilingLabError, ValueError):
    pass


class PartsNotDisjoint(TilingLabError, ValueError):
    pass


class TooManyLowDegreeVertices(TilingLabError, ValueError):
    pass


class SizeMismatch(TilingLabError, ValueError):
    pass


class BudgetExceeded(TilingLabError, RuntimeError):
    """Search gave up; ``expansions`` is the number of nodes expanded."""

    def __init__(self, expansions: int, reason: str = "node budget"):
        super().__init__(f"{reason} exhausted after {expansions} expansions")
        self.expansions = expansions
        self.reason = reason


class EnumerationTruncated(TilingLabError, RuntimeError):
    pass


class TupleSpaceTooLarge(TilingLabError, ValueError):
    pass


class XiOutOfRange(TilingLabError, ValueError):
    pass


class TOutOfRange(TilingLabError, ValueError):
    pass


class DegenerateData(TilingLabError, ValueError):
    pass


class ConfigError(TilingLabError, ValueError):
    pass
