"""Exception hierarchy shared by all engines."""


class TreeBeliefError(Exception):
    """Base class for all library errors."""


class DimensionError(TreeBeliefError):
    """Operands have incompatible shapes or lengths."""


class InconsistentEvidenceError(TreeBeliefError):
    """The posted evidence has zero joint probability."""


class StructureError(TreeBeliefError):
    """Input graph violates a structural requirement (not a tree, cycle, ...)."""


class UsageError(TreeBeliefError):
    """Operation applied to the wrong kind of node (e.g. evidence on a dummy leaf)."""


class ScaleError(TreeBeliefError):
    """Problem instance exceeds a configured size limit."""


class FormatError(TreeBeliefError):
    """Model file is syntactically invalid."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
