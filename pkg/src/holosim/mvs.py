"""Micro-volumetric scanning projector model.

The projector is a display chip behind a thin lens.  Oscillating the chip a
fraction of a millimeter around the focal point sweeps the conjugate image
plane across meters of display depth; that conjugate geometry is exposed by
the lens-equation helpers below.  Slice fields are synthesized directly at
their image depths with their magnified extents (ideal-lens image-space
synthesis): the projector argument is purely conjugate-plane geometry, so an
explicit lens phase screen would add cost without adding physics.

A scene is an ordered stack of depth slices.  Each slice becomes a complex
field (amplitude = sqrt(intensity), phase = seeded diffuse randomness or
flat), and the slices are propagated to the screen plane and summed
coherently in slice order, which keeps runs bitwise reproducible.
Inter-slice occlusion is ignored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import map_coordinates

from .errors import AtFocus, VirtualImage, DepthTooClose, ExtentTooLarge, ValidationError
from .field import ComplexField, OpticalSetup, axis_coordinates
from .propagation import PropagationSpec, angular_spectrum_propagate

__all__ = [
    "LensSpec",
    "ScanSpec",
    "SceneSlice",
    "Scene",
    "conjugate_distance",
    "magnification",
    "scan_to_depth",
    "scan_range_for_depth_interval",
    "synthesize_slice_field",
    "compose_object_field",
    "resample_slice_intensity",
    "slice_seed",
]


@dataclass(frozen=True)
class LensSpec:
    """Thin projector lens."""

    focal_length: float
    aperture_diameter: float

    def __post_init__(self) -> None:
        if self.focal_length <= 0:
            raise ValueError("focal_length must be positive")
        if self.aperture_diameter <= 0:
            raise ValueError("aperture_diameter must be positive")


@dataclass(frozen=True)
class ScanSpec:
    """Chip travel range on the object side of the lens."""

    chip_distance_min: float
    chip_distance_max: float

    def __post_init__(self) -> None:
        if not 0 < self.chip_distance_min < self.chip_distance_max:
            raise ValueError("require 0 < chip_distance_min < chip_distance_max")

    def validate_against(self, lens: LensSpec) -> None:
        """Real-image regime: the whole scan stays beyond the focal point."""
        if self.chip_distance_min <= lens.focal_length:
            raise ValidationError(
                "scan range must stay beyond the focal length "
                f"({self.chip_distance_min} <= {lens.focal_length})"
            )


@dataclass(frozen=True)
class SceneSlice:
    """One depth slice: intensity image, axial position, physical width.

    ``depth`` is the plane_z coordinate of the slice (projector side is
    negative).  ``extent`` is the physical width in meters; height follows
    from the image aspect ratio.
    """

    image: np.ndarray
    depth: float
    extent: float

    def __post_init__(self) -> None:
        arr = np.asarray(self.image, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"slice image must be 2D, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("slice image contains non-finite values")
        if np.any(arr < 0):
            raise ValueError("slice intensities must be non-negative")
        if self.extent <= 0:
            raise ValueError("slice extent must be positive")
        object.__setattr__(self, "image", arr)


@dataclass(frozen=True)
class Scene:
    """Ordered stack of depth slices forming the virtual 3D object."""

    name: str
    slices: tuple[SceneSlice, ...]

    def __post_init__(self) -> None:
        if len(self.slices) < 1:
            raise ValueError("scene needs at least one slice")
        depths = [s.depth for s in self.slices]
        if any(b <= a for a, b in zip(depths, depths[1:])):
            raise ValidationError("depths monotonic: slice depths must strictly increase")


def conjugate_distance(lens: LensSpec, object_distance: float) -> float:
    """Image distance conjugate to ``object_distance`` (thin-lens equation)."""
    f = lens.focal_length
    if object_distance == f:
        raise AtFocus("object at the focal plane has no finite conjugate")
    if object_distance < f:
        raise VirtualImage(
            f"object inside the focal length ({object_distance} < {f}) forms no real image"
        )
    return 1.0 / (1.0 / f - 1.0 / object_distance)


def magnification(object_distance: float, image_distance: float) -> float:
    """Signed transverse magnification -di/do (negative: inverted image)."""
    if object_distance <= 0 or image_distance <= 0:
        raise ValueError("distances must be positive")
    return -image_distance / object_distance


def scan_to_depth(lens: LensSpec, chip_distance: float) -> float:
    """Image depth produced by a given chip-to-lens distance.

    Strictly decreasing in chip_distance: pulling the chip toward the focal
    point pushes the image toward infinity.
    """
    return conjugate_distance(lens, chip_distance)


def scan_range_for_depth_interval(lens: LensSpec, z_near: float, z_far: float) -> float:
    """Chip travel needed to sweep the image plane from z_near to z_far.

    Equals ``f**2 * (1/(z_near - f) - 1/(z_far - f))``, which collapses
    meters of display depth into sub-millimeter chip motion near the focus.
    """
    f = lens.focal_length
    if not 0 < z_near <= z_far:
        raise ValueError("require 0 < z_near <= z_far")
    if z_near <= f:
        raise DepthTooClose(f"z_near must exceed the focal length ({z_near} <= {f})")
    return f * f * (1.0 / (z_near - f) - 1.0 / (z_far - f))


def slice_seed(seed: int, index: int) -> int:
    """Deterministic per-slice seed derived from the run seed."""
    child = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return int(child.generate_state(1, np.uint64)[0])


def resample_slice_intensity(slice_: SceneSlice, setup: OpticalSetup) -> np.ndarray:
    """Bilinear resampling of the slice intensity onto the simulation grid."""
    rows, cols = slice_.image.shape
    src_pitch = slice_.extent / cols
    height = src_pitch * rows
    if slice_.extent > setup.width or height > setup.height:
        raise ExtentTooLarge(
            f"slice extent {slice_.extent}x{height} m exceeds grid "
            f"{setup.width}x{setup.height} m"
        )
    x = axis_coordinates(setup.nx, setup.pitch)
    y = axis_coordinates(setup.ny, setup.pitch)
    u = x / src_pitch + (cols - 1) / 2.0
    v = y / src_pitch + (rows - 1) / 2.0
    uu, vv = np.meshgrid(u, v)
    out = map_coordinates(slice_.image, [vv, uu], order=1, mode="constant", cval=0.0)
    # bilinear weights of non-negative samples can round to tiny negatives
    np.clip(out, 0.0, None, out=out)
    return out


def synthesize_slice_field(
    slice_: SceneSlice, setup: OpticalSetup, diffuse_seed: int
) -> ComplexField:
    """Complex field of one slice at its own depth plane.

    Amplitude is sqrt(intensity) resampled onto the grid.  Phase is uniform
    random in [0, 2pi) from ``diffuse_seed`` (diffuse object model) or zero
    when the setup disables diffuse phases.  Identical seed, identical field.
    """
    resampled = resample_slice_intensity(slice_, setup)
    amplitude = np.sqrt(resampled)
    if setup.diffuse_phase:
        rng = np.random.default_rng(diffuse_seed)
        phase = rng.uniform(0.0, 2.0 * np.pi, size=amplitude.shape)
        samples = amplitude * np.exp(1j * phase)
    else:
        samples = amplitude.astype(np.complex128)
    return ComplexField(
        samples=samples,
        pitch=setup.pitch,
        wavelength=setup.wavelength,
        plane_z=slice_.depth,
    )


def compose_object_field(scene: Scene, setup: OpticalSetup, seed: int = 0) -> ComplexField:
    """Coherent object wave at the screen plane (z = 0).

    Each slice field is transported from its depth to the screen and the
    results are summed in slice order.  Linear in amplitude: scaling every
    slice intensity by c**2 scales the field by c (phases are fixed by the
    seed).
    """
    for s in scene.slices:
        if s.depth >= 0:
            raise ValidationError(
                f"slice depth {s.depth} must be on the projector side (z < 0)"
            )
    spec = PropagationSpec(pad_factor=setup.pad_factor, band_limit_enabled=setup.band_limit)
    total = np.zeros((setup.ny, setup.nx), dtype=np.complex128)
    for index, s in enumerate(scene.slices):
        slice_field = synthesize_slice_field(s, setup, slice_seed(seed, index))
        at_screen = angular_spectrum_propagate(slice_field, -s.depth, spec)
        total += at_screen.samples
    return ComplexField(
        samples=total, pitch=setup.pitch, wavelength=setup.wavelength, plane_z=0.0
    )
