"""Exception hierarchy.

Three branches matter to callers: parse problems (bad input files, exit
code 1 from the CLI), numerical failures (an estimator could not reach a
usable answer, exit code 2) and degenerate data (the inputs admit no
answer at all, exit code 3).
"""

from __future__ import annotations


class PlanegazeError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(PlanegazeError):
    """An input file could not be parsed. Carries file and line when known."""

    def __init__(self, message: str, *, file: str | None = None, line: int | None = None):
        self.file = file
        self.line = line
        loc = ""
        if file is not None:
            loc = f"{file}:{line}: " if line is not None else f"{file}: "
        super().__init__(loc + message)


class NumericalError(PlanegazeError):
    """An iterative or closed-form solver failed on otherwise valid data."""


class DegenerateDataError(PlanegazeError):
    """The input configuration does not determine a solution."""


# --- numerical failures -------------------------------------------------

class IllConditionedError(NumericalError):
    """Constraint system too close to rank-deficient to solve reliably."""


class NoConvergenceError(NumericalError):
    """Refinement diverged. ``best`` holds the best iterate found so far."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class NotInvertibleError(NumericalError):
    """Distortion model could not be inverted at the requested pixel."""


# --- degenerate data ----------------------------------------------------

class DegenerateConfigurationError(DegenerateDataError):
    """Point configuration is rank-deficient (too few or collinear points)."""


class InvalidPoseError(DegenerateDataError):
    """Recovered pose is physically impossible (plane not in front of camera)."""


class BehindCameraError(DegenerateDataError):
    """A point lies behind a camera where projection is undefined."""


class ParallelRaysError(DegenerateDataError):
    """Triangulation rays are parallel; no unique closest point."""


class MissingObservationError(DegenerateDataError):
    """A frame lacks the observation needed in one of the cameras."""


class NoSharedViewsError(DegenerateDataError):
    """Stereo calibration requires at least one view seen by both cameras."""


class UnknownTargetError(DegenerateDataError):
    """Target id not present in the grid configuration."""


class EmptySelectionError(DegenerateDataError):
    """A filter selected no records."""


class DegenerateGeometryError(DegenerateDataError):
    """Geometric query undefined (coincident points, zero-length direction)."""


class FrameMismatchError(DegenerateDataError):
    """A ray or point is expressed in a different frame than required."""


class NoIntersectionError(DegenerateDataError):
    """Ray is parallel to the plane."""


class GazeAwayFromPlaneError(DegenerateDataError):
    """Ray intersects the plane only behind its origin."""


class ResampleExceededError(DegenerateDataError):
    """Scene sampling failed to produce a valid configuration."""
