"""Exception hierarchy shared across the toolkit.

``TrajexError`` covers domain/validation failures (CLI exit code 1),
``TrajexIOError`` covers filesystem/environment failures (CLI exit code 2).
"""


class TrajexError(Exception):
    exit_code = 1


class TrajexIOError(TrajexError):
    exit_code = 2


# geometry
class DegenerateCorrespondence(TrajexError):
    """Correspondence points contain a (near-)collinear triple."""


class SingularSystem(TrajexError):
    """Linear system has no stable solution (pivot/determinant below threshold)."""


class PointAtInfinity(TrajexError):
    """Mapped point lies on the horizon line of the homography (|Z| ~ 0)."""


class WindingMismatch(TrajexError):
    """Source and target quads have opposite orientation."""


# scaling
class NonPositiveRatio(TrajexError):
    """A meters-per-pixel ratio or reference length is not strictly positive."""


class DuplicateFrameIndex(TrajexError):
    """Two ratio measurements refer to the same frame."""


class TooFewPoints(TrajexError):
    """Operation needs at least two trajectory points."""


class EmptyTrajectory(TrajexError):
    """Trajectory has no points."""


# stabilization
class MissingRegistration(TrajexError):
    """A track sample's frame has no registration homography."""

    def __init__(self, frame_index: int):
        super().__init__(f"no registration for frame {frame_index}")
        self.frame_index = frame_index


# annotation store
class ParseError(TrajexError):
    """Project file is not valid JSON."""


class SchemaViolation(TrajexError):
    """Project document violates the schema; message names the field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class MissingFrameDir(TrajexIOError):
    """Project's frame directory does not exist."""


class MissingFrame(TrajexError):
    """Frame numbering has a gap."""

    def __init__(self, frame_index: int):
        super().__init__(f"missing frame {frame_index}")
        self.frame_index = frame_index


class DimensionMismatch(TrajexError):
    """A frame's dimensions differ from the rest of the sequence."""


class EmptyDirectory(TrajexError):
    """Frame directory contains no frame files."""


class IoError(TrajexIOError):
    """Read/write of a project or output file failed."""
