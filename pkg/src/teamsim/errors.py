"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid model or run configuration; the message names the violated constraint."""
