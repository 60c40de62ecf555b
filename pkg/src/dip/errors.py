"""Exception hierarchy shared by all dip modules."""


class DipError(Exception):
    """Base class for every error raised by this package."""


class DegeneratePose(DipError, ValueError):
    """Elbow and wrist coincide, so the forearm has no direction."""


class DegenerateTriangle(DipError, ValueError):
    pass


class EmptyRegion(DipError):
    """The area of interest does not overlap the image at all."""


class EmptyInput(DipError, ValueError):
    pass


class MalformedHeader(DipError, ValueError):
    pass


class TruncatedData(DipError, ValueError):
    pass


class UnsupportedMaxval(DipError, ValueError):
    pass


class AlreadyGray(DipError, ValueError):
    pass


class EmptyWindow(DipError, ValueError):
    """A histogram window contains no chromatic pixels."""


class TargetLost(DipError):
    """Back-projection density in the tracking window fell below threshold."""


class JoinMismatch(DipError, ValueError):
    pass


class ParseError(DipError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(DipError, ValueError):
    pass
