"""Exception types raised across the simulator.

Everything derives from :class:`HolosimError` so callers (and the CLI) can
catch simulator failures without swallowing unrelated bugs.
"""


class HolosimError(Exception):
    """Base class for all simulator errors."""


# --- field algebra ---------------------------------------------------------

class GridMismatch(HolosimError):
    """Two fields disagree in shape, pitch or wavelength."""


class PlaneMismatch(HolosimError):
    """Two fields live on different axial planes."""


# --- propagation -----------------------------------------------------------

class ZeroDistance(HolosimError):
    """Single-transform Fresnel propagation needs a nonzero distance."""


# --- projector geometry ----------------------------------------------------

class AtFocus(HolosimError):
    """Object at the focal plane: collimated output, no conjugate plane."""


class VirtualImage(HolosimError):
    """Object inside the focal length: the lens forms no real image."""


class DepthTooClose(HolosimError):
    """Requested image depth does not exceed the focal length."""


class ExtentTooLarge(HolosimError):
    """A scene slice is wider than the simulation grid."""


# --- hologram stage --------------------------------------------------------

class TiltAliased(HolosimError):
    """Reference tilt puts the carrier beyond the grid Nyquist frequency."""


class ClampedRegime(HolosimError):
    """Mask transmittance was clamped, so the linear term expansion is invalid."""


class NonUniformReference(HolosimError):
    """Term expansion requires a uniform-magnitude reference wave."""


class WindowOutsideGrid(HolosimError):
    """Viewing window extends beyond the sampled plane."""


# --- metrics ---------------------------------------------------------------

class ZeroVariance(HolosimError):
    """Correlation is undefined for a constant input."""


class CarrierAliased(HolosimError):
    """Order analysis carrier at or beyond the grid Nyquist frequency."""


class EmptyRoi(HolosimError):
    """Region of interest selects no samples."""


# --- file I/O --------------------------------------------------------------

class ParseError(HolosimError):
    """Scene file is syntactically malformed."""


class ValidationError(HolosimError):
    """Scene file parsed but violates an invariant."""


class UnsupportedFormat(HolosimError):
    """Image file is not a binary PGM of a supported bit depth."""


class CorruptHeader(HolosimError):
    """Image file header is unreadable."""


class HeaderMismatch(HolosimError):
    """Field dump header disagrees with the payload."""


class TruncatedPayload(HolosimError):
    """Field dump payload is shorter than the header promises."""
