"""Exception types shared across the package.

DataError subclasses map to CLI exit code 2, everything else to 3.
"""


class RuleGnnError(Exception):
    """Base class for all package-specific errors."""


class DataError(RuleGnnError):
    """Problems with input data (files, fixtures, generation)."""


class ParseError(DataError):
    """Malformed input file; carries file path and line number."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class StructuralError(DataError):
    """Input violates a structural constraint (e.g. edge crossing graphs)."""


class StratificationError(DataError):
    """A class is too small to stratify into the requested fold count."""


class GenerationError(DataError):
    """A synthetic generator could not satisfy its constraints."""


class FixtureError(DataError):
    """A hand-built fixture carries unexpected labels or metadata."""


class ResourceError(DataError):
    """An enumeration exceeded its work budget."""


class ContractError(RuleGnnError):
    """A caller violated an operation's precondition."""


class TrainingDivergedError(RuleGnnError):
    """Loss became non-finite during training."""
