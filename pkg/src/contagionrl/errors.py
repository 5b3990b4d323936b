"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Raised when a configuration value is out of range or inconsistent."""


class PlacementError(ConfigError):
    """Raised when individual placement constraints cannot be satisfied."""


class TerminalStepError(RuntimeError):
    """Raised when step() is called on an episode that already ended."""
