"""Exception hierarchy shared across the package."""


class ShapeTweakError(Exception):
    """Base class for all shapetweak errors."""


class ContractViolation(ShapeTweakError, ValueError):
    """An operation was called with arguments that break its preconditions."""


class TrainingError(ShapeTweakError, ValueError):
    """The dataset cannot be used to train a forest."""


class DatasetParseError(ShapeTweakError, ValueError):
    """A dataset file could not be parsed.

    Carries the 1-based line number of the offending row when known.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:"
            if line is not None:
                prefix += f"{line}:"
            prefix += " "
        super().__init__(prefix + message)
