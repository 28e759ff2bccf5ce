"""Exception types shared across the package."""


class PlanragError(Exception):
    """Base class for all package errors."""


class ConfigurationError(PlanragError):
    """Invalid configuration: bad enum value, missing artifact, bad window."""


class ParseError(PlanragError):
    """A file record could not be parsed.

    Carries enough position information to name the offending file, line,
    and field in the message.
    """

    def __init__(self, message: str, *, path: str | None = None,
                 line: int | None = None, field: str | None = None):
        loc = []
        if path is not None:
            loc.append(str(path))
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field '{field}'")
        prefix = ": ".join([", ".join(loc)]) if loc else ""
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.path = path
        self.line = line
        self.field = field


class IndexBuildError(PlanragError):
    """Inverted index construction failed (e.g. duplicate document id)."""


class TrainingError(PlanragError):
    """Ranker training cannot proceed (e.g. no trainable pairs)."""


class ModelFormatError(PlanragError):
    """A saved model file has the wrong version or feature schema."""


class PlannerError(PlanragError):
    """An external planner call failed (network, timeout, bad response)."""


class ReportError(PlanragError):
    """Report aggregation refused (e.g. empty record set, hash mismatch)."""
