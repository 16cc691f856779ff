"""Exception types raised across the package."""


class LoccKitError(Exception):
    """Base class for all locckit errors."""


class DimensionMismatchError(LoccKitError):
    """Two processes or systems cannot be combined because their types differ."""

    def __init__(self, expected, found, context=""):
        self.expected = expected
        self.found = found
        prefix = f"{context}: " if context else ""
        super().__init__(f"{prefix}expected system type {expected}, found {found}")


class ZeroProcessError(LoccKitError):
    """Purity queries are undefined on the zero process (the cone apex)."""


class ChoiValidationError(LoccKitError):
    """A candidate Choi matrix fails Hermiticity or positivity requirements."""


class FamilyValidationError(LoccKitError):
    """A state family violates completeness or orthonormality."""


class EntangledMemberError(LoccKitError):
    """A construction that needs all-product members hit an entangled one."""

    def __init__(self, label, detail=""):
        self.label = label
        suffix = f" ({detail})" if detail else ""
        super().__init__(f"family member {label!r} is entangled{suffix}")


class WireMismatchError(LoccKitError):
    """Classical or quantum wires fail to chain between protocol layers."""

    def __init__(self, message, round_index=None, party=None):
        self.round_index = round_index
        self.party = party
        where = []
        if round_index is not None:
            where.append(f"round {round_index}")
        if party is not None:
            where.append(f"party {party}")
        loc = f" [{', '.join(where)}]" if where else ""
        super().__init__(message + loc)


class ProtocolDirectionError(LoccKitError):
    """A protocol has the wrong shape for the requested evaluation direction."""


class NotNormalisedError(LoccKitError):
    """An operation with probability semantics received an unnormalised input."""


class ScenarioFormatError(LoccKitError):
    """A scenario file fails to parse or violates its declared structure."""

    def __init__(self, message, field=None):
        self.field = field
        prefix = f"{field}: " if field else ""
        super().__init__(prefix + message)


class UnknownProtocolError(LoccKitError):
    """The named protocol does not exist in the scenario."""
