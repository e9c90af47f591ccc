"""Reconstruction quality metrics and design-feasibility numbers.

Covers focus localization (exhaustive depth sweep), image fidelity (NCC),
diffraction-order power split, speckle contrast, the viewing solid angle and
the per-term power budget of the transmitted wave.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.fft as _fft

from .errors import CarrierAliased, EmptyRoi, GridMismatch, ZeroVariance
from .field import ComplexField, IntensityMap, OpticalSetup, power
from .propagation import AngularSpectrumPlan, PropagationSpec
from .rtrh import ReferenceSpec, TransmissionMask, _transmitted_field

__all__ = [
    "ReconstructionReport",
    "FocusScan",
    "focus_search",
    "ncc",
    "OrderSpectra",
    "order_spectra",
    "speckle_contrast",
    "solid_angle",
    "solid_angle_small_angle",
    "power_budget",
    "peak_to_mean",
]


@dataclass(frozen=True)
class ReconstructionReport:
    """Summary of one reconstruction run."""

    focus_depth: float
    focus_xy: tuple[float, float]
    peak_intensity: float
    peak_to_mean: float
    ncc: float
    speckle_contrast: float
    power_fractions: dict[str, float] = dc_field(default_factory=dict)
    solid_angle_sr: float = 0.0

    def __post_init__(self) -> None:
        if not math.isnan(self.ncc) and not -1.0 - 1e-9 <= self.ncc <= 1.0 + 1e-9:
            raise ValueError(f"ncc must lie in [-1, 1], got {self.ncc}")
        if self.speckle_contrast < 0:
            raise ValueError("speckle_contrast must be non-negative")
        for name, frac in self.power_fractions.items():
            if not -1e-9 <= frac <= 1.0 + 1e-9:
                raise ValueError(f"power fraction {name}={frac} outside [0, 1]")


@dataclass(frozen=True)
class FocusScan:
    """Result of a depth sweep: best plane plus the full peak curve."""

    z: float
    xy: tuple[float, float]
    peak: float
    peak_to_mean: float
    curve: tuple[tuple[float, float], ...]


def peak_to_mean(intensity: np.ndarray) -> float:
    mean = float(np.mean(intensity))
    if mean == 0.0:
        return 0.0
    return float(np.max(intensity)) / mean


def focus_search(
    mask: TransmissionMask,
    ref: ReferenceSpec,
    setup: OpticalSetup,
    z_range: tuple[float, float],
    steps: int,
    threads: int = 1,
) -> FocusScan:
    """Reconstruct at evenly spaced depths and locate the intensity peak.

    Returns the depth, lateral position and value of the brightest sample
    over the sweep, plus the peak-vs-depth curve.  Planes are independent,
    so they may be evaluated by a thread pool; results are reduced in depth
    order regardless, keeping the outcome identical for any thread count.
    """
    z_lo, z_hi = z_range
    if steps < 2:
        raise ValueError("steps must be at least 2")
    if z_lo <= 0 or z_hi <= 0:
        raise ValueError("depth sweep must stay on the viewer side (z > 0)")
    zs = np.linspace(z_lo, z_hi, steps)
    transmitted = _transmitted_field(mask, ref, setup)
    plan = AngularSpectrumPlan(
        transmitted,
        PropagationSpec(pad_factor=setup.pad_factor, band_limit_enabled=setup.band_limit),
    )

    def evaluate(z: float) -> tuple[float, int, int, float]:
        out = plan.at(z).samples
        intensity = out.real * out.real + out.imag * out.imag
        flat = int(np.argmax(intensity))
        iy, ix = np.unravel_index(flat, intensity.shape)
        return float(intensity[iy, ix]), int(iy), int(ix), float(np.mean(intensity))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(evaluate, zs))
    else:
        results = [evaluate(z) for z in zs]

    best = 0
    for i in range(1, steps):
        if results[i][0] > results[best][0]:
            best = i
    peak, iy, ix, mean = results[best]
    x = (ix - setup.nx // 2) * setup.pitch
    y = (iy - setup.ny // 2) * setup.pitch
    curve = tuple((float(z), r[0]) for z, r in zip(zs, results))
    return FocusScan(
        z=float(zs[best]),
        xy=(x, y),
        peak=peak,
        peak_to_mean=peak / mean if mean > 0 else 0.0,
        curve=curve,
    )


def ncc(reconstructed: IntensityMap, ground_truth: np.ndarray) -> float:
    """Mean-subtracted normalized cross-correlation, in [-1, 1]."""
    a = reconstructed.samples
    b = np.asarray(ground_truth, dtype=np.float64)
    if a.shape != b.shape:
        raise GridMismatch(f"shape {a.shape} vs {b.shape}")
    da = a - a.mean()
    db = b - b.mean()
    na = float(np.sqrt(np.sum(da * da)))
    nb = float(np.sqrt(np.sum(db * db)))
    if na == 0.0 or nb == 0.0:
        raise ZeroVariance("correlation is undefined for a constant input")
    return float(np.sum(da * db) / (na * nb))


@dataclass(frozen=True)
class OrderSpectra:
    """Power split of a plane field among diffraction orders -1, 0, +1.

    ``fractions[k]`` is the share of total spectral power inside the band of
    order k (bands are carrier/2 wide around k*carrier along the chosen
    axis); ``remainder`` is the share outside all three bands.  ``centers``
    holds the power centroid frequency of the +/-1 bands.
    """

    fractions: dict[int, float]
    remainder: float
    centers: dict[int, float]


def order_spectra(
    plane_field: ComplexField, carrier: float, axis: str = "x"
) -> OrderSpectra:
    """Partition the spectrum of a field into orders around a known carrier."""
    if carrier <= 0:
        raise ValueError("carrier must be positive")
    nyquist = 1.0 / (2.0 * plane_field.pitch)
    if carrier >= nyquist:
        raise CarrierAliased(
            f"carrier {carrier:.6g} cycles/m at or beyond grid Nyquist {nyquist:.6g}"
        )
    if axis not in ("x", "y"):
        raise ValueError("axis must be 'x' or 'y'")

    spectrum = _fft.fft2(plane_field.samples, workers=1)
    pw = spectrum.real * spectrum.real + spectrum.imag * spectrum.imag
    n = plane_field.nx if axis == "x" else plane_field.ny
    freqs = np.fft.fftfreq(n, plane_field.pitch)
    f_axis = freqs[None, :] if axis == "x" else freqs[:, None]
    f_axis = np.broadcast_to(f_axis, pw.shape)

    total = float(np.sum(pw))
    if total == 0.0:
        zero = {k: 0.0 for k in (-1, 0, 1)}
        return OrderSpectra(fractions=zero, remainder=0.0, centers={-1: 0.0, 1: 0.0})

    fractions: dict[int, float] = {}
    centers: dict[int, float] = {}
    half = carrier / 2.0
    for k in (-1, 0, 1):
        lo, hi = k * carrier - half, k * carrier + half
        band = (f_axis >= lo) & (f_axis < hi)
        band_power = float(np.sum(pw[band]))
        fractions[k] = band_power / total
        if k != 0:
            centers[k] = (
                float(np.sum((pw * f_axis)[band]) / band_power) if band_power > 0 else 0.0
            )
    remainder = 1.0 - sum(fractions.values())
    return OrderSpectra(fractions=fractions, remainder=max(remainder, 0.0), centers=centers)


def speckle_contrast(intensity: IntensityMap, roi: np.ndarray | None = None) -> float:
    """Standard deviation over mean of intensity inside the ROI.

    ``roi`` is a boolean mask of the same shape, or None for the full map.
    Invariant under positive rescaling of the intensity; ~1 for fully
    developed speckle.
    """
    samples = intensity.samples
    if roi is None:
        values = samples.ravel()
    else:
        roi = np.asarray(roi, dtype=bool)
        if roi.shape != samples.shape:
            raise EmptyRoi(f"roi shape {roi.shape} does not match map {samples.shape}")
        values = samples[roi]
    if values.size == 0:
        raise EmptyRoi("roi selects no samples")
    mean = float(np.mean(values))
    if mean == 0.0:
        return 0.0
    return float(np.std(values) / mean)


def solid_angle(screen_width: float, screen_height: float, distance: float) -> float:
    """Solid angle of a centered rectangle seen from distance d (steradians).

    Exact rectangular-pyramid formula
    ``4*arcsin(sin(arctan(w/2d)) * sin(arctan(h/2d)))``; reduces to the
    small-angle estimate w*h/d**2 for distant screens.
    """
    if distance <= 0:
        raise ValueError("distance must be positive")
    if screen_width < 0 or screen_height < 0:
        raise ValueError("screen dimensions must be non-negative")
    sa = math.sin(math.atan(0.5 * screen_width / distance))
    sb = math.sin(math.atan(0.5 * screen_height / distance))
    return 4.0 * math.asin(sa * sb)


def solid_angle_small_angle(screen_width: float, screen_height: float, distance: float) -> float:
    """Small-angle estimate: screen area over squared distance."""
    if distance <= 0:
        raise ValueError("distance must be positive")
    return screen_width * screen_height / distance**2


def power_budget(
    terms: tuple[ComplexField, ComplexField, ComplexField],
) -> dict[str, float]:
    """Power fraction of each transmitted-wave component.

    Keyed ``attenuated_reference`` (zero order), ``real_image`` (conjugate
    term) and ``virtual_image``; fractions sum to 1 by construction.
    """
    names = ("attenuated_reference", "real_image", "virtual_image")
    powers = [power(t) for t in terms]
    total = sum(powers)
    if total == 0.0:
        return {name: 0.0 for name in names}
    return {name: p / total for name, p in zip(names, powers)}
