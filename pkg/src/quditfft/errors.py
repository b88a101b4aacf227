"""Exception types that distinguish bad arguments from broken runtime contracts."""


class ContractError(RuntimeError):
    """A runtime invariant was violated (unnormalized state, forbidden trap level)."""


class ConfigurationError(ValueError):
    """A parameter combination cannot produce a trustworthy result (e.g. too few
    integration steps for the requested pulse)."""
