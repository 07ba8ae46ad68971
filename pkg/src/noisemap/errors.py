"""Exception types shared across the package.

Every error carries a stable ``category`` string so the command line
layer can report failures in a machine-readable way.
"""


class NoisemapError(Exception):
    category = "error"


class ConfigurationError(NoisemapError):
    """Bad or missing configuration: unknown palette, absent file, empty search space."""

    category = "configuration"


class InsufficientDataError(NoisemapError):
    """Not enough input rows/points for the requested operation."""

    category = "insufficient-data"


class GeometryError(NoisemapError):
    """Degenerate geometry: collinear control points, singular transform."""

    category = "geometry"


class SchemaError(NoisemapError):
    """Column layout or length mismatch between related tables."""

    category = "schema"


class StateError(NoisemapError):
    """Operation requires a fitted model or otherwise prepared object."""

    category = "state"


class UnseenCategoryError(SchemaError):
    """A categorical value at transform time was never seen during fitting."""

    category = "unseen-category"


class DegenerateGridError(NoisemapError):
    """A dependence grid collapsed to fewer than two distinct points."""

    category = "degenerate-grid"


class DataError(NoisemapError):
    """Values that make the requested statistic undefined (zero targets, zero denominators)."""

    category = "data"
