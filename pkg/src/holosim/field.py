"""Sampled complex scalar fields and their elementary algebra.

A field is a 2D grid of complex amplitudes with square pixels of physical
``pitch`` (meters), a ``wavelength`` (meters) and an axial coordinate
``plane_z`` (meters).  Axial convention: the screen sits at z = 0, the viewer
side is z > 0 and the projector / virtual-object side is z < 0.

Arrays are indexed ``[row, col]`` = ``[y, x]``; ``nx`` counts columns and
``ny`` rows.  The pixel at index ``n // 2`` sits on the optical axis, so the
physical coordinate of column ``i`` is ``(i - nx // 2) * pitch``.

All values are treated as immutable and every operation is a pure function,
so shared inputs are safe to use from concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field, replace
from typing import Literal

import numpy as np

from .errors import GridMismatch, PlaneMismatch

__all__ = [
    "OpticalSetup",
    "ComplexField",
    "IntensityMap",
    "power",
    "conjugate",
    "combine",
    "intensity",
    "axis_coordinates",
    "grid_coordinates",
    "zero_field",
]


@dataclass(frozen=True)
class OpticalSetup:
    """Grid geometry plus run-wide optical configuration.

    Attributes:
        nx, ny: sample counts (columns, rows).
        pitch: pixel size in meters (square pixels).
        wavelength: active wavelength in meters.
        wavelengths: all wavelengths of a chromatic run; empty means
            monochromatic at ``wavelength``.
        diffuse_phase: give scene slices a seeded random phase (diffuse
            object model) instead of a flat phase.
        coherent_slices: sum slice fields coherently; when False the
            pipeline accumulates per-slice interferograms instead.
        pad_factor: zero-padding factor used by angular-spectrum transport.
        band_limit: apply the anti-aliasing limit to the transfer function.
        view_distance: screen-to-viewer distance used for solid-angle
            reporting (meters).
    """

    nx: int
    ny: int
    pitch: float
    wavelength: float
    wavelengths: tuple[float, ...] = ()
    diffuse_phase: bool = True
    coherent_slices: bool = True
    pad_factor: int = 2
    band_limit: bool = True
    view_distance: float = 1.0

    def __post_init__(self) -> None:
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"grid must be at least 2x2, got {self.nx}x{self.ny}")
        if self.pitch <= 0:
            raise ValueError(f"pitch must be positive, got {self.pitch}")
        if self.wavelength <= 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if any(w <= 0 for w in self.wavelengths):
            raise ValueError("all wavelengths must be positive")
        if self.pad_factor not in (1, 2, 4):
            raise ValueError(f"pad_factor must be 1, 2 or 4, got {self.pad_factor}")
        if self.view_distance <= 0:
            raise ValueError("view_distance must be positive")

    @property
    def all_wavelengths(self) -> tuple[float, ...]:
        return self.wavelengths if self.wavelengths else (self.wavelength,)

    @property
    def width(self) -> float:
        """Physical grid width in meters."""
        return self.nx * self.pitch

    @property
    def height(self) -> float:
        return self.ny * self.pitch

    def with_wavelength(self, wavelength: float) -> "OpticalSetup":
        return replace(self, wavelength=wavelength)


def axis_coordinates(n: int, pitch: float) -> np.ndarray:
    """Centered physical coordinates of one grid axis (meters)."""
    return (np.arange(n) - n // 2) * pitch


def grid_coordinates(setup: OpticalSetup) -> tuple[np.ndarray, np.ndarray]:
    """(X, Y) coordinate arrays of shape (ny, nx), meters."""
    x = axis_coordinates(setup.nx, setup.pitch)
    y = axis_coordinates(setup.ny, setup.pitch)
    return np.meshgrid(x, y)


def _validate_grid(nx: int, ny: int, pitch: float, wavelength: float) -> None:
    if nx < 2 or ny < 2:
        raise ValueError(f"grid must be at least 2x2, got {nx}x{ny}")
    if pitch <= 0:
        raise ValueError(f"pitch must be positive, got {pitch}")
    if wavelength <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")


@dataclass(frozen=True)
class ComplexField:
    """2D complex amplitude grid with physical metadata.

    ``samples`` has shape ``(ny, nx)``; pitch and wavelength are preserved
    by every elementwise operation.
    """

    samples: np.ndarray
    pitch: float
    wavelength: float
    plane_z: float = 0.0

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples, dtype=np.complex128)
        if arr.ndim != 2:
            raise ValueError(f"samples must be 2D, got shape {arr.shape}")
        _validate_grid(arr.shape[1], arr.shape[0], self.pitch, self.wavelength)
        if not np.all(np.isfinite(arr.view(np.float64))):
            raise ValueError("samples contain non-finite values")
        object.__setattr__(self, "samples", arr)

    @property
    def nx(self) -> int:
        return self.samples.shape[1]

    @property
    def ny(self) -> int:
        return self.samples.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.samples.shape

    def with_samples(self, samples: np.ndarray, plane_z: float | None = None) -> "ComplexField":
        """Same grid metadata, new samples (and optionally a new plane)."""
        return ComplexField(
            samples=samples,
            pitch=self.pitch,
            wavelength=self.wavelength,
            plane_z=self.plane_z if plane_z is None else plane_z,
        )


@dataclass(frozen=True)
class IntensityMap:
    """2D real intensity grid with the same metadata as a ComplexField.

    Physical intensities are non-negative; algebraic decompositions (for
    example the cosine cross term of an interferogram expansion) may carry
    signed values and must be constructed with ``signed=True``.
    """

    samples: np.ndarray
    pitch: float
    wavelength: float
    plane_z: float = 0.0
    signed: bool = dc_field(default=False, compare=False)

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"samples must be 2D, got shape {arr.shape}")
        _validate_grid(arr.shape[1], arr.shape[0], self.pitch, self.wavelength)
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples contain non-finite values")
        if not self.signed and np.any(arr < 0):
            raise ValueError("intensity samples must be non-negative")
        object.__setattr__(self, "samples", arr)

    @property
    def nx(self) -> int:
        return self.samples.shape[1]

    @property
    def ny(self) -> int:
        return self.samples.shape[0]


def power(field: ComplexField) -> float:
    """Total energy of the field: sum of |u|^2 times the pixel area."""
    s = field.samples
    return float(np.sum(s.real * s.real + s.imag * s.imag) * field.pitch**2)


def conjugate(field: ComplexField) -> ComplexField:
    """Elementwise complex conjugate; power is unchanged."""
    return field.with_samples(np.conj(field.samples))


def _check_compatible(a: ComplexField, b: ComplexField) -> None:
    if a.shape != b.shape:
        raise GridMismatch(f"shape {a.shape} vs {b.shape}")
    if a.pitch != b.pitch:
        raise GridMismatch(f"pitch {a.pitch} vs {b.pitch}")
    if a.wavelength != b.wavelength:
        raise GridMismatch(f"wavelength {a.wavelength} vs {b.wavelength}")
    if a.plane_z != b.plane_z:
        raise PlaneMismatch(f"plane_z {a.plane_z} vs {b.plane_z}")


def combine(a: ComplexField, b: ComplexField, op: Literal["add", "multiply"]) -> ComplexField:
    """Elementwise sum or product of two fields on the same grid and plane.

    Bitwise commutative: the product is assembled from real-part multiplies
    (numpy's fused complex multiply is not symmetric in its operands).
    """
    _check_compatible(a, b)
    if op == "add":
        out = a.samples + b.samples
    elif op == "multiply":
        ar, ai = a.samples.real, a.samples.imag
        br, bi = b.samples.real, b.samples.imag
        out = (ar * br - ai * bi) + 1j * (ar * bi + ai * br)
    else:
        raise ValueError(f"unknown op {op!r}, expected 'add' or 'multiply'")
    return a.with_samples(out)


def intensity(field: ComplexField) -> IntensityMap:
    """|u|^2 of a field as an intensity map (no radiometric constant)."""
    s = field.samples
    return IntensityMap(
        samples=s.real * s.real + s.imag * s.imag,
        pitch=field.pitch,
        wavelength=field.wavelength,
        plane_z=field.plane_z,
    )


def zero_field(setup: OpticalSetup, plane_z: float = 0.0) -> ComplexField:
    return ComplexField(
        samples=np.zeros((setup.ny, setup.nx), dtype=np.complex128),
        pitch=setup.pitch,
        wavelength=setup.wavelength,
        plane_z=plane_z,
    )
