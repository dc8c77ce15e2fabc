class ConfigError(ValueError):
    """Invalid or unsupported system configuration.

    ``field`` names the offending parameter when there is one.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class NumericError(RuntimeError):
    """A root finder or quadrature failed to converge."""
