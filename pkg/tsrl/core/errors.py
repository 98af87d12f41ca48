class TSRLError(Exception):
    """Base class for every error raised by the tsrl package."""


class ContractViolation(TSRLError):
    """An operation was called with inputs outside its documented contract."""


class RejectedInput(TSRLError):
    """Input data has the wrong shape or a malformed file layout."""


class UndefinedMetric(TSRLError):
    """A metric is undefined for the given labels (e.g. a single class)."""


class ConfigError(TSRLError):
    """The run configuration failed validation."""


class NumericFailure(TSRLError):
    """A loss or gradient went non-finite; the run cannot continue."""

    def __init__(self, message: str, diagnostic: dict | None = None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}

    def __str__(self) -> str:
        base = super().__str__()
        if not self.diagnostic:
            return base
        details = ", ".join(f"{k}={v}" for k, v in sorted(self.diagnostic.items()))
        return f"{base} ({details})"
