"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of a formula."""


class ConfigError(ValueError):
    """A configuration object or file failed validation."""


class BracketError(ValueError):
    """A root-finding bracket does not straddle a sign change."""
