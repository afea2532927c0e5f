"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument violates an operation's precondition."""


class ConstructionError(ValueError):
    """A constellation cannot be built from the given parameters (degenerate geometry)."""


class ConfigurationError(ValueError):
    """A simulation configuration is inconsistent or violates a contract."""


class LoadError(ValueError):
    """A code definition file is malformed or inconsistent."""


class SearchError(RuntimeError):
    """A numerical search failed to bracket or converge on its target."""
