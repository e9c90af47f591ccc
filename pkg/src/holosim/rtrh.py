"""Hologram stage: interference, transmission mask, re-illumination.

The object wave from the projector interferes with a known plane reference
wave on the screen; the resulting intensity pattern acts as an amplitude
transmittance.  Re-illuminating that mask with the reference reproduces, up
to constants, three waves: an attenuated reference (zero order), the
conjugate of the object wave (which converges to a real image on the viewer
side) and a copy of the object wave (which keeps diverging, the virtual
image).

With an on-axis reference all three overlap in frequency; a small reference
tilt separates them into disjoint bands, which is what makes the real image
measurable.  Both configurations are supported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import (
    ClampedRegime,
    GridMismatch,
    NonUniformReference,
    PlaneMismatch,
    TiltAliased,
    WindowOutsideGrid,
)
from .field import (
    ComplexField,
    IntensityMap,
    OpticalSetup,
    axis_coordinates,
    grid_coordinates,
)
from .propagation import PropagationSpec, angular_spectrum_propagate

__all__ = [
    "ReferenceSpec",
    "MaskSpec",
    "TransmissionMask",
    "reference_wave",
    "interferogram",
    "expansion_terms",
    "transmission_mask",
    "mask_as_field",
    "reconstruct",
    "term_fields",
    "viewing_window_field",
]

_UNCLAMPED_SLACK = 1e-12


@dataclass(frozen=True)
class ReferenceSpec:
    """Uniform plane reference wave.

    ``amplitude=None`` means "match the object wave RMS amplitude"; the
    pipeline resolves it before any wave is synthesized.  Tilts are plane
    wave angles in radians; the carrier frequency along an axis is
    sin(tilt)/wavelength.
    """

    amplitude: float | None = 1.0
    tilt_x: float = 0.0
    tilt_y: float = 0.0
    phase_offset: float = 0.0

    def __post_init__(self) -> None:
        if self.amplitude is not None and self.amplitude <= 0:
            raise ValueError("reference amplitude must be positive")
        if abs(self.tilt_x) >= math.pi / 2 or abs(self.tilt_y) >= math.pi / 2:
            raise ValueError("tilt angles must satisfy |tilt| < pi/2")

    def resolved(self, amplitude: float) -> "ReferenceSpec":
        return ReferenceSpec(
            amplitude=amplitude,
            tilt_x=self.tilt_x,
            tilt_y=self.tilt_y,
            phase_offset=self.phase_offset,
        )

    @property
    def carrier_x(self) -> float:
        """Carrier spatial frequency along x for a given tilt (1/m per unit wavelength)."""
        return math.sin(self.tilt_x)

    @property
    def carrier_y(self) -> float:
        return math.sin(self.tilt_y)


@dataclass(frozen=True)
class MaskSpec:
    """How an interferogram becomes an amplitude transmittance.

    Linear mode: t = clamp(bias + gain * I, 0, 1).  Binary mode: t = 1 where
    I >= binary_threshold * max(I), else bias.  ``gain=None`` auto-normalizes
    to 1/max(I), the highest diffraction efficiency that stays physical.
    """

    bias: float = 0.0
    gain: float | None = None
    mode: Literal["linear", "binary"] = "linear"
    binary_threshold: float = 0.5

    def __post_init__(self) -> None:
        if self.bias < 0:
            raise ValueError("bias must be non-negative")
        if self.gain is not None and self.gain < 0:
            raise ValueError("gain must be non-negative")
        if self.mode not in ("linear", "binary"):
            raise ValueError(f"unknown mask mode {self.mode!r}")
        if not 0 < self.binary_threshold < 1:
            raise ValueError("binary_threshold must lie strictly between 0 and 1")


@dataclass(frozen=True)
class TransmissionMask:
    """Real amplitude transmittance in [0, 1] on the screen plane."""

    transmittance: np.ndarray
    pitch: float
    wavelength: float
    plane_z: float = 0.0
    preclamp_max: float = 1.0
    bias_used: float = 0.0
    gain_used: float = 1.0
    mode: str = "linear"

    def __post_init__(self) -> None:
        arr = np.asarray(self.transmittance, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"transmittance must be 2D, got shape {arr.shape}")
        if np.any(arr < 0) or np.any(arr > 1):
            raise ValueError("transmittance must lie in [0, 1]")
        if self.plane_z != 0.0:
            raise PlaneMismatch("transmission mask lives on the screen plane z=0")
        object.__setattr__(self, "transmittance", arr)

    @property
    def nx(self) -> int:
        return self.transmittance.shape[1]

    @property
    def ny(self) -> int:
        return self.transmittance.shape[0]


def reference_wave(ref: ReferenceSpec, setup: OpticalSetup) -> ComplexField:
    """Sample the reference plane wave on the screen plane."""
    if ref.amplitude is None:
        raise ValueError("reference amplitude must be resolved before sampling")
    lam = setup.wavelength
    nyquist = 1.0 / (2.0 * setup.pitch)
    for name, tilt in (("tilt_x", ref.tilt_x), ("tilt_y", ref.tilt_y)):
        if abs(math.sin(tilt)) / lam > nyquist:
            raise TiltAliased(
                f"{name}={tilt} puts the carrier at {abs(math.sin(tilt)) / lam:.4g} "
                f"cycles/m beyond the grid Nyquist {nyquist:.4g}"
            )
    xx, yy = grid_coordinates(setup)
    phase = (2.0 * np.pi / lam) * (
        xx * math.sin(ref.tilt_x) + yy * math.sin(ref.tilt_y)
    ) + ref.phase_offset
    return ComplexField(
        samples=ref.amplitude * np.exp(1j * phase),
        pitch=setup.pitch,
        wavelength=lam,
        plane_z=0.0,
    )


def _check_screen_pair(a: ComplexField, b: ComplexField) -> None:
    if a.shape != b.shape or a.pitch != b.pitch or a.wavelength != b.wavelength:
        raise GridMismatch("object and reference must share grid, pitch and wavelength")
    if a.plane_z != b.plane_z:
        raise PlaneMismatch(f"plane_z {a.plane_z} vs {b.plane_z}")
    if a.plane_z != 0.0:
        raise PlaneMismatch("interference happens on the screen plane z=0")


def interferogram(obj: ComplexField, reference: ComplexField) -> IntensityMap:
    """Intensity |O + R|^2 on the screen."""
    _check_screen_pair(obj, reference)
    a = obj.samples + reference.samples
    return IntensityMap(
        samples=a.real * a.real + a.imag * a.imag,
        pitch=obj.pitch,
        wavelength=obj.wavelength,
        plane_z=0.0,
    )


def expansion_terms(
    obj: ComplexField, reference: ComplexField
) -> tuple[IntensityMap, IntensityMap, IntensityMap, IntensityMap]:
    """Decompose the interferogram into |O|^2, |R|^2, the cosine cross term
    and a residual.

    The four maps sum to the interferogram exactly; the cross term
    2*Ar*Ao*cos(phi_r - phi_o) and the (roundoff-level) residual are signed.
    """
    _check_screen_pair(obj, reference)
    o = obj.samples
    r = reference.samples
    total = interferogram(obj, reference).samples
    obj_sq = o.real * o.real + o.imag * o.imag
    ref_sq = r.real * r.real + r.imag * r.imag
    cross = 2.0 * (o * np.conj(r)).real
    residual = total - obj_sq - ref_sq - cross
    meta = dict(pitch=obj.pitch, wavelength=obj.wavelength, plane_z=0.0)
    return (
        IntensityMap(samples=obj_sq, **meta),
        IntensityMap(samples=ref_sq, **meta),
        IntensityMap(samples=cross, signed=True, **meta),
        IntensityMap(samples=residual, signed=True, **meta),
    )


def resolve_gain(intensity: IntensityMap, spec: MaskSpec) -> float:
    """Concrete gain for a mask spec: auto means 1/max(I)."""
    if spec.gain is not None:
        return spec.gain
    peak = float(np.max(intensity.samples))
    return 1.0 / peak if peak > 0 else 1.0


def transmission_mask(intensity: IntensityMap, spec: MaskSpec) -> TransmissionMask:
    """Amplitude transmittance of the screen for a given interferogram."""
    i = intensity.samples
    if spec.mode == "linear":
        gain = resolve_gain(intensity, spec)
        pre = spec.bias + gain * i
    else:
        gain = 0.0
        threshold = spec.binary_threshold * float(np.max(i))
        pre = np.where(i >= threshold, 1.0, spec.bias)
    return TransmissionMask(
        transmittance=np.clip(pre, 0.0, 1.0),
        pitch=intensity.pitch,
        wavelength=intensity.wavelength,
        plane_z=intensity.plane_z,
        preclamp_max=float(np.max(pre)),
        bias_used=spec.bias,
        gain_used=gain,
        mode=spec.mode,
    )


def mask_as_field(mask: TransmissionMask) -> ComplexField:
    """The mask under unit on-axis illumination, as a complex field."""
    return ComplexField(
        samples=mask.transmittance.astype(np.complex128),
        pitch=mask.pitch,
        wavelength=mask.wavelength,
        plane_z=0.0,
    )


def _transmitted_field(mask: TransmissionMask, ref: ReferenceSpec, setup: OpticalSetup) -> ComplexField:
    if (mask.ny, mask.nx) != (setup.ny, setup.nx) or mask.pitch != setup.pitch:
        raise GridMismatch("mask grid does not match the optical setup")
    if mask.wavelength != setup.wavelength:
        raise GridMismatch("mask wavelength does not match the optical setup")
    r = reference_wave(ref, setup)
    return r.with_samples(mask.transmittance * r.samples)


def reconstruct(
    mask: TransmissionMask,
    ref: ReferenceSpec,
    setup: OpticalSetup,
    z_out: float,
) -> ComplexField:
    """Re-illuminate the mask with the reference and propagate to z_out > 0."""
    if z_out <= 0:
        raise ValueError("z_out must be on the viewer side (z > 0)")
    transmitted = _transmitted_field(mask, ref, setup)
    spec = PropagationSpec(pad_factor=setup.pad_factor, band_limit_enabled=setup.band_limit)
    return angular_spectrum_propagate(transmitted, z_out, spec)


def term_fields(
    obj: ComplexField, ref_field: ComplexField, spec: MaskSpec
) -> tuple[ComplexField, ComplexField, ComplexField]:
    """Split the transmitted wave (T + gain*I)*R into its three components.

    Returns (zero order, real-image term, virtual-image term):

        term1 = (T + gain*(|O|^2 + |R|^2)) * R
        term2 = gain * R^2 * conj(O)        -- converges to the real image
        term3 = gain * |R|^2 * O            -- keeps diverging

    For an untilted reference (R real, amplitude Ar) term2 and term3 reduce
    to gain*Ar^2*conj(O) and gain*Ar^2*O.  The sum equals (T + gain*I)*R
    exactly.  Only valid in linear mode, for a uniform-magnitude reference,
    and while the pre-clamp transmittance stays within [0, 1].
    """
    if spec.mode != "linear":
        raise ValueError("term expansion is defined for the linear mask mode only")
    _check_screen_pair(obj, ref_field)
    r = ref_field.samples
    ref_mag = np.abs(r)
    lo, hi = float(ref_mag.min()), float(ref_mag.max())
    if hi == 0 or (hi - lo) > 1e-9 * hi:
        raise NonUniformReference(
            "term expansion requires a uniform-magnitude reference wave"
        )
    o = obj.samples
    total = interferogram(obj, ref_field)
    gain = resolve_gain(total, spec)
    pre_max = spec.bias + gain * float(np.max(total.samples))
    if pre_max > 1.0 + _UNCLAMPED_SLACK:
        raise ClampedRegime(
            f"pre-clamp transmittance reaches {pre_max:.6g} > 1; "
            "the linear term expansion does not hold"
        )
    obj_sq = o.real * o.real + o.imag * o.imag
    ref_sq = r.real * r.real + r.imag * r.imag
    term1 = (spec.bias + gain * (obj_sq + ref_sq)) * r
    term2 = gain * r * r * np.conj(o)
    term3 = gain * ref_sq * o
    return (
        obj.with_samples(term1),
        obj.with_samples(term2),
        obj.with_samples(term3),
    )


def viewing_window_field(
    mask: TransmissionMask,
    ref: ReferenceSpec,
    setup: OpticalSetup,
    center: tuple[float, float],
    size: tuple[float, float],
    z_window: float,
) -> ComplexField:
    """Reconstructed field at z_window, zeroed outside a rectangular window.

    The window is given by its center and size in meters and must lie inside
    the sampled plane.  Samples are kept on the half-open interval
    [c - s/2, c + s/2) per axis, so a zero-size window keeps nothing and a
    window the size of the grid keeps everything.
    """
    cx, cy = center
    w, h = size
    if w < 0 or h < 0:
        raise ValueError("window size must be non-negative")
    x = axis_coordinates(setup.nx, setup.pitch)
    y = axis_coordinates(setup.ny, setup.pitch)
    slack = 1e-9 * setup.pitch
    if (
        cx - w / 2 < x[0] - slack
        or cx + w / 2 > x[0] + setup.width + slack
        or cy - h / 2 < y[0] - slack
        or cy + h / 2 > y[0] + setup.height + slack
    ):
        raise WindowOutsideGrid(
            f"window center={center} size={size} extends beyond the sampled plane"
        )
    recon = reconstruct(mask, ref, setup, z_window)
    keep_x = (x >= cx - w / 2) & (x < cx + w / 2)
    keep_y = (y >= cy - h / 2) & (y < cy + h / 2)
    out = recon.samples * (keep_y[:, None] & keep_x[None, :])
    return recon.with_samples(out)
