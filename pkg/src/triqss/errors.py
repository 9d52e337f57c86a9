"""Exception types shared across the package."""


class ContractError(ValueError):
    """An argument or configuration violates a documented precondition."""


class ResourceLimitError(RuntimeError):
    """A requested object would exceed a configured size limit."""


class DegenerateStateError(RuntimeError):
    """Every projection of a state has vanishing norm.

    This cannot happen for a normalized state and always signals an
    upstream bug (e.g. an unnormalized or zeroed amplitude vector).
    """
