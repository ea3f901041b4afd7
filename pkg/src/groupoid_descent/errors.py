"""Exception types shared across the package."""


class GroupoidDescentError(Exception):
    """Base class for every error raised by this package."""


class MalformedTable(GroupoidDescentError):
    """A category description refers to ids that do not exist."""


class LawViolation(GroupoidDescentError):
    """A categorical law fails; ``witness`` holds the offending ids."""

    def __init__(self, law: str, witness=None, message: str | None = None):
        self.law = law
        self.witness = witness
        super().__init__(message or f"{law} violated at {witness!r}")


class BudgetExceeded(GroupoidDescentError):
    """An exhaustive search ran past its configured number of candidate checks."""


class FragmentNotClosed(GroupoidDescentError):
    """A (co)limit required by an axiom check is missing from an explicit fragment."""


class ReindexFailure(GroupoidDescentError):
    pass


class NotExact(GroupoidDescentError):
    pass


class NoComponent(GroupoidDescentError):
    pass


class NotJointlySurjective(GroupoidDescentError):
    pass


class CocycleViolation(GroupoidDescentError):
    def __init__(self, message: str, witnesses=()):
        self.witnesses = list(witnesses)
        super().__init__(message)


class GluingEscapesBound(GroupoidDescentError):
    pass


class ParseError(GroupoidDescentError):
    """A scenario file is not valid UTF-8 JSON."""


class ValidationError(GroupoidDescentError):
    """A scenario parses but names unknown fields or inconsistent data."""


class UnknownPreset(ValidationError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)
