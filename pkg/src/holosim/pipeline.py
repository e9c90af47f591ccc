"""End-to-end runs: synthesis, interference, masking, reconstruction, metrics.

These functions back the command-line interface but are equally usable from
scripts and tests.  Every run is a deterministic function of (scene config,
options, seed): wavelengths are processed in order, slice sums and depth
sweeps reduce in a fixed order, and the thread count never changes results,
only wall time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from pathlib import Path

from .errors import ClampedRegime, EmptyRoi, HolosimError, ZeroVariance
from .field import ComplexField, IntensityMap, OpticalSetup, intensity, power
from .metrics import (
    FocusScan,
    ReconstructionReport,
    focus_search,
    ncc,
    order_spectra,
    power_budget,
    solid_angle,
    solid_angle_small_angle,
    speckle_contrast,
)
from .mvs import (
    LensSpec,
    compose_object_field,
    conjugate_distance,
    magnification,
    resample_slice_intensity,
    scan_range_for_depth_interval,
    slice_seed,
    synthesize_slice_field,
)
from .propagation import (
    AngularSpectrumPlan,
    PropagationSpec,
    angular_spectrum_propagate,
)
from .rtrh import (
    MaskSpec,
    ReferenceSpec,
    TransmissionMask,
    interferogram,
    mask_as_field,
    reconstruct,
    reference_wave,
    term_fields,
    transmission_mask,
    viewing_window_field,
)
from .scene_io import SceneConfig, write_field, write_intensity_image, write_report

__all__ = [
    "StageFailure",
    "SimulationResult",
    "run_simulation",
    "run_sweep",
    "run_mvs_design",
    "run_propagate",
    "default_sweep_range",
]

SCAN_FEASIBILITY_BAR = 0.01  # one centimeter of chip travel


class StageFailure(HolosimError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class SimulationResult:
    wavelength: float
    report: ReconstructionReport
    scan: FocusScan
    report_path: Path


def default_sweep_range(config: SceneConfig) -> tuple[float, float]:
    """Default reconstruction sweep: half to one-and-a-half of the mirrored
    slice depths."""
    z_images = [-s.depth for s in config.scene.slices]
    return 0.5 * min(z_images), 1.5 * max(z_images)


@dataclass(frozen=True)
class _Hologram:
    """Intermediate products shared by simulate and sweep."""

    object_field: ComplexField | None  # None in per-slice-incoherent mode
    slice_fields: tuple[ComplexField, ...]
    reference: ReferenceSpec
    reference_field: ComplexField
    pattern: IntensityMap
    mask: TransmissionMask


def _rms_amplitude(fields: tuple[ComplexField, ...]) -> float:
    total = 0.0
    count = 0
    for f in fields:
        s = f.samples
        total += float(np.sum(s.real * s.real + s.imag * s.imag))
        count += s.size
    rms = math.sqrt(total / count) if count else 0.0
    return rms if rms > 0 else 1.0


def _build_hologram(config: SceneConfig, setup: OpticalSetup, seed: int) -> _Hologram:
    scene = config.scene
    prop = PropagationSpec(pad_factor=setup.pad_factor, band_limit_enabled=setup.band_limit)

    if setup.coherent_slices:
        obj = compose_object_field(scene, setup, seed)
        at_screen: tuple[ComplexField, ...] = (obj,)
    else:
        obj = None
        fields = []
        for index, s in enumerate(scene.slices):
            if s.depth >= 0:
                raise HolosimError(f"slice depth {s.depth} must be negative")
            f = synthesize_slice_field(s, setup, slice_seed(seed, index))
            fields.append(angular_spectrum_propagate(f, -s.depth, prop))
        at_screen = tuple(fields)

    ref = config.reference
    if ref.amplitude is None:
        ref = ref.resolved(_rms_amplitude(at_screen))
    ref_field = reference_wave(ref, setup)

    if obj is not None:
        pattern = interferogram(obj, ref_field)
    else:
        # Time-sequential slices: exposures accumulate as intensities.
        acc = np.zeros((setup.ny, setup.nx))
        for f in at_screen:
            acc += interferogram(f, ref_field).samples
        pattern = IntensityMap(
            samples=acc, pitch=setup.pitch, wavelength=setup.wavelength, plane_z=0.0
        )

    mask = transmission_mask(pattern, config.mask)
    return _Hologram(
        object_field=obj,
        slice_fields=at_screen,
        reference=ref,
        reference_field=ref_field,
        pattern=pattern,
        mask=mask,
    )


def _wavelength_suffix(index: int, wavelength: float, count: int) -> str:
    if count == 1:
        return ""
    return f"_w{index}_{round(wavelength * 1e9)}nm"


def _dominant_carrier(ref: ReferenceSpec, wavelength: float) -> tuple[float, str] | None:
    cx = abs(math.sin(ref.tilt_x)) / wavelength
    cy = abs(math.sin(ref.tilt_y)) / wavelength
    if cx == 0.0 and cy == 0.0:
        return None
    return (cx, "x") if cx >= cy else (cy, "y")


def run_simulation(
    config: SceneConfig,
    out_dir: str | Path,
    seed: int = 0,
    z_sweep: tuple[float, float] | None = None,
    steps: int = 41,
    dump_fields: bool = False,
    threads: int = 1,
    wavelengths: tuple[float, ...] | None = None,
    window: tuple[float, float, float, float] | None = None,
    verbose: bool = False,
) -> list[SimulationResult]:
    """Full pipeline for every wavelength of the scene.

    Writes, per wavelength: interferogram and mask images, reconstruction
    and per-term images at the located focus depth, a report CSV, and field
    dumps when requested.  For multi-wavelength runs the first three
    wavelengths (longest first) are additionally written as the channels of
    a false-color preview.  Returns one result per wavelength.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lams = wavelengths if wavelengths is not None else config.setup.all_wavelengths
    try:
        results: list[SimulationResult] = []
        previews: list[tuple[float, np.ndarray]] = []
        for index, lam in enumerate(lams):
            suffix = _wavelength_suffix(index, lam, len(lams))
            if verbose:
                print(f"[simulate] wavelength {lam:g} m -> '*{suffix}' artifacts")
            result, recon_intensity = _simulate_one(
                config,
                config.setup.with_wavelength(lam),
                out,
                suffix,
                seed,
                z_sweep,
                steps,
                dump_fields,
                threads,
                window,
                verbose,
            )
            results.append(result)
            previews.append((lam, recon_intensity))

        if len(previews) >= 2:
            _write_false_color(previews, config.setup, out)
        return results
    except BaseException:
        (out / "FAILED").write_text("run did not complete; artifacts are partial\n")
        raise


def _simulate_one(
    config: SceneConfig,
    setup: OpticalSetup,
    out: Path,
    suffix: str,
    seed: int,
    z_sweep: tuple[float, float] | None,
    steps: int,
    dump_fields: bool,
    threads: int,
    window: tuple[float, float, float, float] | None,
    verbose: bool,
) -> tuple[SimulationResult, np.ndarray]:
    try:
        holo = _build_hologram(config, setup, seed)
    except Exception as exc:
        raise StageFailure("hologram-formation", exc) from exc

    zmin, zmax = z_sweep if z_sweep is not None else default_sweep_range(config)
    try:
        scan = focus_search(holo.mask, holo.reference, setup, (zmin, zmax), steps, threads)
        recon = reconstruct(holo.mask, holo.reference, setup, scan.z)
    except Exception as exc:
        raise StageFailure("reconstruction", exc) from exc
    recon_intensity = intensity(recon)
    if verbose:
        print(
            f"[simulate] focus at z={scan.z:g} m, xy={scan.xy}, "
            f"peak/mean={scan.peak_to_mean:.3g}"
        )

    try:
        report, terms = _measure(
            config, setup, holo, scan, recon, recon_intensity, window
        )
    except Exception as exc:
        raise StageFailure("metrics", exc) from exc

    try:
        write_intensity_image(holo.pattern, out / f"interferogram{suffix}.pgm", "linear")
        mask_map = IntensityMap(
            samples=holo.mask.transmittance,
            pitch=setup.pitch,
            wavelength=setup.wavelength,
            plane_z=0.0,
        )
        write_intensity_image(mask_map, out / f"mask{suffix}.pgm", "linear")
        write_intensity_image(recon_intensity, out / f"reconstruction{suffix}.pgm", "log")
        if terms is not None:
            term_names = ("zero_order", "real_image", "virtual_image")
            for name, term in zip(term_names, terms):
                at_focus = angular_spectrum_propagate(
                    term,
                    scan.z,
                    PropagationSpec(
                        pad_factor=setup.pad_factor, band_limit_enabled=setup.band_limit
                    ),
                )
                write_intensity_image(
                    intensity(at_focus), out / f"term_{name}{suffix}.pgm", "log"
                )
        report_path = out / f"report{suffix}.csv"
        write_report(report, report_path, extra=_provenance(config, setup, seed, zmin, zmax, steps))
        if dump_fields:
            if holo.object_field is not None:
                write_field(holo.object_field, out / f"object{suffix}.field")
            write_field(recon, out / f"reconstruction{suffix}.field")
    except Exception as exc:
        raise StageFailure("artifacts", exc) from exc

    result = SimulationResult(
        wavelength=setup.wavelength,
        report=report,
        scan=scan,
        report_path=report_path,
    )
    return result, recon_intensity.samples


def _measure(
    config: SceneConfig,
    setup: OpticalSetup,
    holo: _Hologram,
    scan: FocusScan,
    recon: ComplexField,
    recon_intensity: IntensityMap,
    window: tuple[float, float, float, float] | None,
) -> tuple[ReconstructionReport, tuple[ComplexField, ...] | None]:
    # Ground truth: the slice whose mirrored depth is closest to the focus.
    depths = [-s.depth for s in config.scene.slices]
    nearest = min(range(len(depths)), key=lambda i: abs(depths[i] - scan.z))
    truth = resample_slice_intensity(config.scene.slices[nearest], setup)

    try:
        score = ncc(recon_intensity, truth)
    except ZeroVariance:
        score = float("nan")

    support = truth > 1e-6 * float(np.max(truth)) if float(np.max(truth)) > 0 else None
    try:
        contrast = speckle_contrast(recon_intensity, support)
    except EmptyRoi:
        contrast = 0.0

    fractions: dict[str, float] = {}
    terms: tuple[ComplexField, ...] | None = None
    if holo.object_field is not None and config.mask.mode == "linear":
        resolved = replace(config.mask, gain=holo.mask.gain_used)
        try:
            terms = term_fields(holo.object_field, holo.reference_field, resolved)
            fractions.update(power_budget(terms))  # type: ignore[arg-type]
        except ClampedRegime:
            terms = None

    carrier = _dominant_carrier(holo.reference, setup.wavelength)
    if carrier is not None:
        orders = order_spectra(mask_as_field(holo.mask), carrier[0], carrier[1])
        fractions["order_m1"] = orders.fractions[-1]
        fractions["order_0"] = orders.fractions[0]
        fractions["order_p1"] = orders.fractions[1]

    if window is not None:
        cx, cy, w, h = window
        captured = viewing_window_field(
            holo.mask, holo.reference, setup, (cx, cy), (w, h), scan.z
        )
        total = power(recon)
        fractions["window_capture"] = power(captured) / total if total > 0 else 0.0

    report = ReconstructionReport(
        focus_depth=scan.z,
        focus_xy=scan.xy,
        peak_intensity=scan.peak,
        peak_to_mean=scan.peak_to_mean,
        ncc=score,
        speckle_contrast=contrast,
        power_fractions=fractions,
        solid_angle_sr=solid_angle(setup.width, setup.height, setup.view_distance),
    )
    return report, terms


def _provenance(
    config: SceneConfig,
    setup: OpticalSetup,
    seed: int,
    zmin: float,
    zmax: float,
    steps: int,
) -> dict[str, object]:
    """Run context echoed into each report.  Thread counts and paths are
    deliberately excluded so identical runs produce identical files."""
    return {
        "scene": config.scene.name,
        "nx": setup.nx,
        "ny": setup.ny,
        "pitch": repr(setup.pitch),
        "wavelength": repr(setup.wavelength),
        "seed": seed,
        "zmin": repr(zmin),
        "zmax": repr(zmax),
        "steps": steps,
        "diffuse": setup.diffuse_phase,
        "coherent_slices": setup.coherent_slices,
        "mask_mode": config.mask.mode,
    }


def _write_false_color(
    previews: list[tuple[float, np.ndarray]], setup: OpticalSetup, out: Path
) -> None:
    """Map up to three wavelengths (longest first) onto R/G/B channel PGMs."""
    chosen = sorted(previews, key=lambda p: -p[0])[:3]
    joint_peak = max(float(np.max(arr)) for _, arr in chosen)
    for channel, (lam, arr) in zip(("r", "g", "b"), chosen):
        scaled = arr if joint_peak == 0 else arr / joint_peak
        write_intensity_image(
            IntensityMap(
                samples=scaled, pitch=setup.pitch, wavelength=lam, plane_z=0.0
            ),
            out / f"preview_{channel}.pgm",
            "linear",
        )


def run_sweep(
    config: SceneConfig,
    out_dir: str | Path,
    z_sweep: tuple[float, float],
    steps: int,
    seed: int = 0,
    threads: int = 1,
) -> tuple[FocusScan, list[tuple[int, float, float, float]]]:
    """Depth sweep at the primary wavelength.

    Writes ``curve.csv`` (peak intensity versus depth) and ``ncc.csv`` (per
    slice: reconstruction at the mirrored slice depth correlated against the
    slice image).  Returns the scan and the NCC table rows.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    setup = config.setup.with_wavelength(config.setup.all_wavelengths[0])
    try:
        holo = _build_hologram(config, setup, seed)
    except Exception as exc:
        raise StageFailure("hologram-formation", exc) from exc

    try:
        scan = focus_search(holo.mask, holo.reference, setup, z_sweep, steps, threads)
    except Exception as exc:
        raise StageFailure("depth-sweep", exc) from exc

    rows: list[tuple[int, float, float, float]] = []
    try:
        for index, s in enumerate(config.scene.slices):
            z_recon = -s.depth
            recon = reconstruct(holo.mask, holo.reference, setup, z_recon)
            truth = resample_slice_intensity(s, setup)
            try:
                score = ncc(intensity(recon), truth)
            except ZeroVariance:
                score = float("nan")
            rows.append((index, s.depth, z_recon, score))
    except Exception as exc:
        raise StageFailure("per-slice-ncc", exc) from exc

    curve_text = "z,peak\n" + "\n".join(f"{z!r},{p!r}" for z, p in scan.curve) + "\n"
    (out / "curve.csv").write_text(curve_text, encoding="ascii", newline="\n")
    ncc_text = "slice,depth,z_reconstructed,ncc\n" + "\n".join(
        f"{i},{d!r},{z!r},{s!r}" for i, d, z, s in rows
    ) + "\n"
    (out / "ncc.csv").write_text(ncc_text, encoding="ascii", newline="\n")
    return scan, rows


def run_mvs_design(
    focal_length: float,
    z_near: float,
    z_far: float,
    screen: tuple[float, float],
    watch_distance: float,
    out_dir: str | Path | None = None,
) -> dict[str, object]:
    """Feasibility numbers for a projector design.

    Reports the chip travel needed to cover [z_near, z_far], whether it
    clears the one-centimeter feasibility bar, the endpoint magnifications
    and the viewing solid angle.  Optionally writes ``design.csv``.
    """
    lens = LensSpec(focal_length=focal_length, aperture_diameter=focal_length)
    scan_range = scan_range_for_depth_interval(lens, z_near, z_far)
    mag_near = magnification(conjugate_distance(lens, z_near), z_near)
    mag_far = magnification(conjugate_distance(lens, z_far), z_far)
    w, h = screen
    exact = solid_angle(w, h, watch_distance)
    estimate = solid_angle_small_angle(w, h, watch_distance)
    design: dict[str, object] = {
        "focal_length": focal_length,
        "z_near": z_near,
        "z_far": z_far,
        "scan_range_m": scan_range,
        "scan_feasible": "PASS" if scan_range < SCAN_FEASIBILITY_BAR else "FAIL",
        "magnification_near": mag_near,
        "magnification_far": mag_far,
        "screen_width": w,
        "screen_height": h,
        "watch_distance": watch_distance,
        "solid_angle_sr": exact,
        "solid_angle_small_angle_sr": estimate,
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        text = "key,value\n" + "\n".join(
            f"{k},{v!r}" if isinstance(v, float) else f"{k},{v}"
            for k, v in design.items()
        ) + "\n"
        (out / "design.csv").write_text(text, encoding="ascii", newline="\n")
    return design


def run_propagate(
    field: ComplexField,
    distance: float,
    method: str,
    out_dir: str | Path,
    pad_factor: int = 2,
    band_limit: bool = True,
) -> ComplexField:
    """Propagate a dumped field and write the result (dump + intensity image)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if method == "as":
        spec = PropagationSpec(pad_factor=pad_factor, band_limit_enabled=band_limit)
        moved = angular_spectrum_propagate(field, distance, spec)
    elif method == "fresnel":
        from .propagation import fresnel_propagate

        moved = fresnel_propagate(field, distance)
    else:
        raise ValueError(f"unknown propagation method {method!r}")
    write_field(moved, out / "propagated.field")
    write_intensity_image(intensity(moved), out / "propagated.pgm", "linear")
    return moved
