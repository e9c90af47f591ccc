"""Free-space scalar diffraction between parallel planes.

The workhorse is the angular spectrum method: FFT the field, multiply by the
free-space transfer function, inverse FFT.  The transfer function is unitary
on the propagating band, so energy is conserved there.  Two numerical guards
are applied by default:

* internal zero-padding (factor 2) with a center crop, which suppresses the
  wraparound ghosts of circular convolution, and
* the standard anti-aliasing band limit for sampled transfer functions,
  ``f_limit = 1 / (wavelength * sqrt((2 * distance * df)**2 + 1))`` per axis,
  where ``df`` is the frequency sampling step of the padded grid.

Evanescent components (``fx**2 + fy**2 > 1/wavelength**2``) are always
removed; display distances are far-field, where they are physically
negligible.

A single-transform Fresnel propagator is also provided for long throws.  It
is cheaper and tolerates coarse output sampling but changes the pixel pitch
to ``wavelength * |distance| / (nx * pitch)``, which is recorded on the
output field.

All functions are pure; safe for concurrent use on shared inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.fft as _fft

from .errors import ZeroDistance, GridMismatch
from .field import ComplexField, axis_coordinates

__all__ = [
    "PropagationSpec",
    "angular_spectrum_propagate",
    "back_propagate",
    "fresnel_propagate",
    "AngularSpectrumPlan",
]

# Single-threaded FFTs keep every run bitwise reproducible; parallelism
# belongs at the plane/wavelength level.
_FFT_WORKERS = 1


@dataclass(frozen=True)
class PropagationSpec:
    """Numerical options (and, for file-driven runs, the leg geometry)."""

    method: Literal["angular_spectrum", "fresnel_single_transform"] = "angular_spectrum"
    distance: float = 0.0
    band_limit_enabled: bool = True
    pad_factor: int = 2

    def __post_init__(self) -> None:
        if self.pad_factor not in (1, 2, 4):
            raise ValueError(f"pad_factor must be 1, 2 or 4, got {self.pad_factor}")
        if self.method not in ("angular_spectrum", "fresnel_single_transform"):
            raise ValueError(f"unknown method {self.method!r}")


def _transfer_function(
    ny: int,
    nx: int,
    pitch: float,
    wavelength: float,
    distance: float,
    band_limit: bool,
) -> np.ndarray:
    """Free-space transfer function sampled in FFT order, shape (ny, nx)."""
    fx2 = np.fft.fftfreq(nx, pitch) ** 2
    fy2 = np.fft.fftfreq(ny, pitch) ** 2
    arg = 1.0 / wavelength**2 - fy2[:, None] - fx2[None, :]
    propagating = arg > 0.0
    kz = 2.0 * np.pi * np.sqrt(np.where(propagating, arg, 0.0))
    h = np.exp(1j * distance * kz)
    h[~propagating] = 0.0
    if band_limit:
        # Anti-aliasing limit for the sampled transfer function, per axis.
        dfx = 1.0 / (nx * pitch)
        dfy = 1.0 / (ny * pitch)
        flim_x = 1.0 / (wavelength * np.hypot(2.0 * distance * dfx, 1.0))
        flim_y = 1.0 / (wavelength * np.hypot(2.0 * distance * dfy, 1.0))
        fx = np.fft.fftfreq(nx, pitch)
        fy = np.fft.fftfreq(ny, pitch)
        h[np.abs(fy) > flim_y, :] = 0.0
        h[:, np.abs(fx) > flim_x] = 0.0
    return h


def _pad_centered(samples: np.ndarray, pad_factor: int) -> tuple[np.ndarray, tuple[int, int]]:
    if pad_factor == 1:
        return samples, (0, 0)
    ny, nx = samples.shape
    out = np.zeros((ny * pad_factor, nx * pad_factor), dtype=np.complex128)
    oy = (out.shape[0] - ny) // 2
    ox = (out.shape[1] - nx) // 2
    out[oy : oy + ny, ox : ox + nx] = samples
    return out, (oy, ox)


class AngularSpectrumPlan:
    """Reusable spectrum of one field, for propagating to many distances.

    A depth sweep re-illuminates the same plane dozens of times; computing
    the forward FFT once and applying a fresh transfer function per distance
    halves the transform count.
    """

    def __init__(self, field: ComplexField, spec: PropagationSpec | None = None):
        self._spec = spec or PropagationSpec()
        self._field = field
        padded, offsets = _pad_centered(field.samples, self._spec.pad_factor)
        self._offsets = offsets
        self._padded_shape = padded.shape
        self._spectrum = _fft.fft2(padded, workers=_FFT_WORKERS)

    def at(self, distance: float) -> ComplexField:
        """Field propagated by ``distance`` meters from the source plane."""
        f = self._field
        h = _transfer_function(
            self._padded_shape[0],
            self._padded_shape[1],
            f.pitch,
            f.wavelength,
            distance,
            self._spec.band_limit_enabled,
        )
        out = _fft.ifft2(self._spectrum * h, workers=_FFT_WORKERS)
        oy, ox = self._offsets
        out = out[oy : oy + f.ny, ox : ox + f.nx]
        return f.with_samples(np.ascontiguousarray(out), plane_z=f.plane_z + distance)


def angular_spectrum_propagate(
    field: ComplexField,
    distance: float,
    spec: PropagationSpec | None = None,
) -> ComplexField:
    """Propagate a field by a signed axial distance (meters).

    The output grid matches the input grid; padding is internal and cropped
    away.  Positive distances move toward the viewer side.
    """
    if not np.isfinite(distance):
        raise ValueError("distance must be finite")
    return AngularSpectrumPlan(field, spec).at(distance)


def back_propagate(
    field: ComplexField,
    distance: float,
    spec: PropagationSpec | None = None,
) -> ComplexField:
    """Angular-spectrum propagation by ``-distance``."""
    return angular_spectrum_propagate(field, -distance, spec)


def fresnel_propagate(field: ComplexField, distance: float) -> ComplexField:
    """Single-transform Fresnel propagation over a signed distance.

    Output pitch is ``wavelength * |distance| / (nx * pitch)``.  Paraxial
    validity is the caller's responsibility.  Requires a square grid (the
    output pitch formula would otherwise differ per axis).
    """
    if distance == 0.0:
        raise ZeroDistance("single-transform Fresnel propagation needs distance != 0")
    if field.nx != field.ny:
        raise GridMismatch("single-transform Fresnel propagation requires a square grid")
    if distance < 0.0:
        # K(-z) is the conjugate of K(z), so propagate the conjugate forward.
        fwd = fresnel_propagate(
            field.with_samples(np.conj(field.samples)), -distance
        )
        return ComplexField(
            samples=np.conj(fwd.samples),
            pitch=fwd.pitch,
            wavelength=fwd.wavelength,
            plane_z=field.plane_z + distance,
        )

    n = field.nx
    lam = field.wavelength
    z = distance
    dx1 = field.pitch
    dx2 = lam * z / (n * dx1)

    x1 = axis_coordinates(n, dx1)
    r1sq = x1[None, :] ** 2 + x1[:, None] ** 2
    chirped = field.samples * np.exp(1j * np.pi / (lam * z) * r1sq)

    spectrum = _fft.fftshift(
        _fft.fft2(_fft.ifftshift(chirped), workers=_FFT_WORKERS)
    )

    x2 = axis_coordinates(n, dx2)
    r2sq = x2[None, :] ** 2 + x2[:, None] ** 2
    prefactor = np.exp(2j * np.pi * z / lam) / (1j * lam * z) * dx1**2
    out = prefactor * np.exp(1j * np.pi / (lam * z) * r2sq) * spectrum

    return ComplexField(
        samples=out,
        pitch=dx2,
        wavelength=lam,
        plane_z=field.plane_z + distance,
    )
