"""Exception and warning types shared across the package."""


class EhrenfestError(Exception):
    """Base class for all package errors."""


class DomainError(EhrenfestError):
    """A phase-space point lies outside a symbol's declared domain."""

    def __init__(self, coordinate, value, bounds):
        self.coordinate = coordinate
        self.value = value
        self.bounds = bounds
        super().__init__(
            f"coordinate {coordinate}={value!r} outside declared domain "
            f"[{bounds[0]!r}, {bounds[1]!r}]"
        )


class CapabilityError(EhrenfestError):
    """The requested operation is not supported by this representation."""


class ConfigurationError(EhrenfestError):
    """Mismatched grids, dimensions or otherwise inconsistent objects."""


class ConfigError(EhrenfestError):
    """Experiment configuration failed validation.

    ``messages`` holds one field-level message per problem.
    """

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


class SingularShellError(EhrenfestError):
    """Energy too close to a critical value of the Hamiltonian."""


class InsufficientDataError(EhrenfestError):
    """Too few usable points for a fit."""


class WindingError(EhrenfestError):
    """Phase is not single-valued on the circle for the given hbar."""

    def __init__(self, defect, hbar):
        self.defect = defect
        self.hbar = hbar
        super().__init__(
            f"phase winding defect {defect:.3e} exceeds tolerance; "
            f"phi(2*pi) - phi(0) must be an integer multiple of 2*pi*hbar "
            f"(hbar={hbar!r})"
        )


class AliasingError(EhrenfestError):
    """Requested lattice mode exceeds the representable range."""


class StabilityWarning(UserWarning):
    """Split-step resolution rule violated; run proceeds but is flagged."""
