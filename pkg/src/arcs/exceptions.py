"""Exception types shared across the package."""


class DegenerateConfigurationError(ValueError):
    """Raised when the input geometry cannot determine a rotation.

    Typical causes: fewer than two correspondences, or all matched source
    points parallel so the cross-covariance is rank deficient.
    """


class ParseError(ValueError):
    """Raised on malformed input files; carries the offending line number."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no
