"""Exception hierarchy shared across the package.

Every error carries a stable ``code`` (its class name) so the HTTP service
and the CLI can report machine-readable reasons.
"""


class GoniometerError(Exception):
    """Base class for all domain errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# --- numeric kernel ---------------------------------------------------------

class NonFinite(GoniometerError):
    """NaN or Inf encountered where finite values are required."""


class DegeneratePatch(GoniometerError):
    """Too few or fully coincident points for a plane fit."""


class DegenerateProjection(GoniometerError):
    """All projected values equal; no two-sided split exists."""


class TooFewPoints(GoniometerError):
    """Fewer than two values supplied to the 1-D split."""


# --- mesh model -------------------------------------------------------------

class ParseError(GoniometerError):
    """Malformed mesh file; message names the line or offset."""


class EmptyMesh(GoniometerError):
    """File contained no vertices."""


class UnsupportedFormat(GoniometerError):
    """Mesh format not recognized."""


class DegenerateGeometry(GoniometerError):
    """Vertex with only zero-area incident triangles and no neighbors."""


class TooFewVertices(GoniometerError):
    """Not enough vertices for the requested k-NN graph."""


# --- patch extraction -------------------------------------------------------

class PatchTooSmall(GoniometerError):
    """Fewer than the minimum number of vertices inside the radius."""


class SeedOutOfRange(GoniometerError):
    """Seed vertex index outside the mesh."""


class SnapTooFar(GoniometerError):
    """Nearest mesh vertex is farther than the patch radius from the point."""


# --- measurement core -------------------------------------------------------

class DegenerateFrame(GoniometerError):
    """Break-curve tangent parallel to the mean normal; no binormal."""


class SideTooSmall(GoniometerError):
    """A segmented side has fewer than three vertices."""


class InvalidParams(GoniometerError):
    """Measurement parameters violate their constraints."""


# --- session / analytics ----------------------------------------------------

class SessionClosed(GoniometerError):
    """Record attempted on a closed session."""


class OutOfRange(GoniometerError):
    """Angle outside [0, 180] degrees."""


class EmptySet(GoniometerError):
    """Summary requested over zero records."""


# --- synthetic shapes -------------------------------------------------------

class InvalidSpec(GoniometerError):
    """Synthetic shape parameters violate their constraints."""
