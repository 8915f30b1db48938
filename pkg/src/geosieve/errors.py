"""Exception types shared across the package."""


class GeosieveError(Exception):
    """Base class for all package errors."""


class ChartDomainError(GeosieveError):
    """A point lies outside the chart domain in a non-periodic direction."""

    def __init__(self, point, lo, hi):
        self.point = tuple(float(c) for c in point)
        super().__init__(
            f"point {self.point} outside chart domain "
            f"[{tuple(float(c) for c in lo)}, {tuple(float(c) for c in hi)}]"
        )


class DegenerateMetricError(GeosieveError):
    """Metric coefficients failed a positivity check."""

    def __init__(self, det, point=None):
        self.det = float(det)
        self.point = None if point is None else tuple(float(c) for c in point)
        where = "" if self.point is None else f" at {self.point}"
        super().__init__(f"metric not positive definite{where} (det={self.det:.6g})")


class ConfigurationError(GeosieveError):
    """Bad parameter set: unknown zoo name, invalid grid, malformed config."""


class DeformationTooLargeError(GeosieveError):
    """A requested deformation scale breaks metric positivity."""

    def __init__(self, s_requested, s_max):
        self.s_requested = float(s_requested)
        self.s_max = float(s_max)
        super().__init__(
            f"deformation scale s={self.s_requested:.6g} destroys positivity; "
            f"largest admissible s is about {self.s_max:.6g}"
        )
