"""Exception hierarchy shared across the audit engine."""


class ConsentAuditError(Exception):
    """Base class for all errors raised by this package."""


class MalformedTrace(ConsentAuditError):
    """Trace document is not syntactically valid.

    Carries the byte offset of the offending line so producers can locate
    the corruption in an appended-to file.
    """

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset


class SchemaViolation(ConsentAuditError):
    """A record is missing a required field or has a wrongly-typed field."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class InvariantViolation(ConsentAuditError):
    """A record parsed fine but breaks a semantic rule of the data model."""


class UnparsableDomain(ConsentAuditError):
    """A cookie domain is not a valid host name."""


class UnparsableUrl(ConsentAuditError):
    """A page URL could not be parsed into a host."""


class MixedKeys(ConsentAuditError):
    """Traces passed to a merge do not share (site, region)."""


class EmptyInput(ConsentAuditError):
    """An operation that needs at least one element got none."""


class DecodeError(ConsentAuditError):
    """A consent-state cookie value could not be decoded."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class UnknownCategory(ConsentAuditError):
    """A declaration references a category with no recorded consent choice."""


class ParseFailure(ConsentAuditError):
    """HTML input was too truncated to recover any elements from."""


class DegenerateData(ConsentAuditError):
    """Labeled training data contains a single class."""


class InsufficientData(ConsentAuditError):
    """A statistical test got fewer groups/observations than it requires."""


class MissingBaseline(ConsentAuditError):
    """The configured baseline region is absent from the corpus."""


class SingleRegion(ConsentAuditError):
    """A cross-region analysis got a corpus with fewer than two regions."""


class EmptyEvalSet(ConsentAuditError):
    """recall@k evaluation got zero pages."""


class NoTraces(ConsentAuditError):
    """The trace directory contains no parseable trace files."""
