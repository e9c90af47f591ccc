"""File formats: scene descriptions, PGM images, field dumps, report CSVs.

Formats are deliberately minimal (see docs/formats.md for the exact
grammars):

* scene files: flat ``key = value`` lines under ``[section]`` headers;
* slice images: binary PGM (P5), 8- or 16-bit;
* field dumps: a short ASCII header followed by little-endian complex128
  samples, bit-exact on round trip;
* reports: two-column ``key,value`` CSV with a fixed row order.

Writers are deterministic functions of their inputs; never write to the
same path from two workers at once.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import (
    CorruptHeader,
    HeaderMismatch,
    ParseError,
    TruncatedPayload,
    UnsupportedFormat,
    ValidationError,
)
from .field import ComplexField, IntensityMap, OpticalSetup
from .metrics import ReconstructionReport
from .mvs import LensSpec, ScanSpec, Scene, SceneSlice
from .rtrh import MaskSpec, ReferenceSpec

__all__ = [
    "SceneConfig",
    "load_scene",
    "load_scene_config",
    "write_scene_config",
    "read_slice_image",
    "write_field",
    "read_field",
    "write_intensity_image",
    "write_report",
    "read_report",
]

_FIELD_MAGIC = "HOLOSIMFIELD 1"

# 1.5 degrees: a safe default carrier for the default 8 um pitch.
DEFAULT_TILT_X = math.radians(1.5)

_GRID_DEFAULTS = {"nx": 1024, "ny": 1024, "pitch": 8e-6}
_DEFAULT_WAVELENGTH = 5.32e-7


# ---------------------------------------------------------------------------
# PGM images
# ---------------------------------------------------------------------------

def _read_pgm_tokens(stream: io.BufferedReader, count: int) -> list[bytes]:
    """Read whitespace-separated header tokens, honoring '#' comments."""
    tokens: list[bytes] = []
    current = b""
    while len(tokens) < count:
        ch = stream.read(1)
        if ch == b"":
            raise CorruptHeader("unexpected end of file in PGM header")
        if ch == b"#":
            while ch not in (b"\n", b""):
                ch = stream.read(1)
            continue
        if ch.isspace():
            if current:
                tokens.append(current)
                current = b""
            continue
        current += ch
    return tokens


def read_slice_image(path: str | Path) -> np.ndarray:
    """Load a binary PGM (P5) as floats in [0, 1], scaled by its maxval."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(2)
        if magic != b"P5":
            raise UnsupportedFormat(
                f"{path}: expected binary PGM magic 'P5', got {magic!r}"
            )
        try:
            width_b, height_b, maxval_b = _read_pgm_tokens(fh, 3)
            width, height, maxval = int(width_b), int(height_b), int(maxval_b)
        except ValueError as exc:
            raise CorruptHeader(f"{path}: non-numeric PGM header field") from exc
        if width < 1 or height < 1:
            raise CorruptHeader(f"{path}: invalid dimensions {width}x{height}")
        if not 0 < maxval < 65536:
            raise UnsupportedFormat(f"{path}: unsupported maxval {maxval}")
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        payload = fh.read(width * height * dtype.itemsize)
        if len(payload) < width * height * dtype.itemsize:
            raise CorruptHeader(f"{path}: truncated pixel data")
        raw = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return raw.astype(np.float64) / maxval


def write_intensity_image(
    intensity: IntensityMap, path: str | Path, scaling: str = "linear"
) -> None:
    """Write an intensity map as 16-bit binary PGM.

    ``linear`` maps max(I) to 65535; ``log`` compresses dynamic range with
    ``log(1 + I/eps)``, eps = 1e-12 * max(I).  An all-zero map writes an
    all-zero image.
    """
    if scaling not in ("linear", "log"):
        raise ValueError(f"unknown scaling {scaling!r}")
    data = intensity.samples
    peak = float(np.max(data)) if data.size else 0.0
    if peak <= 0.0:
        values = np.zeros(data.shape, dtype=">u2")
    elif scaling == "linear":
        values = np.round(65535.0 * data / peak).astype(">u2")
    else:
        eps = 1e-12 * peak
        values = np.round(
            65535.0 * np.log1p(data / eps) / np.log1p(peak / eps)
        ).astype(">u2")
    header = f"P5\n{data.shape[1]} {data.shape[0]}\n65535\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(values.tobytes())


# ---------------------------------------------------------------------------
# Field dumps
# ---------------------------------------------------------------------------

def write_field(field: ComplexField, path: str | Path) -> None:
    """Dump a field bit-exactly: ASCII header, then little-endian complex128."""
    header_lines = [
        _FIELD_MAGIC,
        f"nx {field.nx}",
        f"ny {field.ny}",
        f"pitch {field.pitch!r}",
        f"wavelength {field.wavelength!r}",
        f"plane_z {field.plane_z!r}",
        "endian little",
        "data",
    ]
    with open(path, "wb") as fh:
        fh.write(("\n".join(header_lines) + "\n").encode("ascii"))
        fh.write(np.ascontiguousarray(field.samples, dtype="<c16").tobytes())


def read_field(path: str | Path) -> ComplexField:
    """Read a field dump written by :func:`write_field`."""
    path = Path(path)
    with open(path, "rb") as fh:
        blob = fh.read()
    sep = blob.find(b"data\n")
    if sep < 0:
        raise HeaderMismatch(f"{path}: missing 'data' delimiter")
    header_text = blob[:sep].decode("ascii", errors="replace")
    payload = blob[sep + len(b"data\n"):]

    lines = header_text.splitlines()
    if not lines or lines[0] != _FIELD_MAGIC:
        raise HeaderMismatch(f"{path}: bad magic line {lines[:1]!r}")
    entries: dict[str, str] = {}
    for line in lines[1:]:
        if not line.strip():
            continue
        key, _, value = line.partition(" ")
        entries[key] = value
    try:
        nx = int(entries["nx"])
        ny = int(entries["ny"])
        pitch = float(entries["pitch"])
        wavelength = float(entries["wavelength"])
        plane_z = float(entries["plane_z"])
        endian = entries["endian"]
    except (KeyError, ValueError) as exc:
        raise HeaderMismatch(f"{path}: bad or missing header entry ({exc})") from exc
    if endian != "little":
        raise HeaderMismatch(f"{path}: unsupported endianness {endian!r}")
    if nx < 2 or ny < 2 or pitch <= 0 or wavelength <= 0:
        raise HeaderMismatch(f"{path}: non-physical header values")

    expected = nx * ny * 16
    if len(payload) < expected:
        raise TruncatedPayload(
            f"{path}: payload holds {len(payload)} bytes, header promises {expected}"
        )
    if len(payload) > expected:
        raise HeaderMismatch(
            f"{path}: payload holds {len(payload)} bytes, header promises {expected}"
        )
    samples = np.frombuffer(payload, dtype="<c16").reshape(ny, nx)
    return ComplexField(
        samples=samples.astype(np.complex128),
        pitch=pitch,
        wavelength=wavelength,
        plane_z=plane_z,
    )


# ---------------------------------------------------------------------------
# Scene files
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SceneConfig:
    """Fully validated scene file contents."""

    scene: Scene
    setup: OpticalSetup
    reference: ReferenceSpec
    mask: MaskSpec
    lens: LensSpec | None = None
    scan: ScanSpec | None = None
    slice_sources: tuple[str, ...] = ()


def _parse_bool(value: str, where: str) -> bool:
    low = value.strip().lower()
    if low in ("true", "on", "yes", "1"):
        return True
    if low in ("false", "off", "no", "0"):
        return False
    raise ValidationError(f"{where}: expected a boolean, got {value!r}")


def _parse_float(value: str, where: str) -> float:
    try:
        return float(value)
    except ValueError as exc:
        raise ValidationError(f"{where}: expected a number, got {value!r}") from exc


def _parse_int(value: str, where: str) -> int:
    try:
        return int(value)
    except ValueError as exc:
        raise ValidationError(f"{where}: expected an integer, got {value!r}") from exc


def _tokenize(path: Path) -> list[tuple[int, str, str, str]]:
    """Yield (line_number, section, key, value) for every key line."""
    entries: list[tuple[int, str, str, str]] = []
    section = ""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: cannot read scene file ({exc})") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise ParseError(f"{path}:{lineno}: malformed section header {raw!r}")
            section = line[1:-1].strip().lower()
            entries.append((lineno, section, "__section__", ""))
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        if not section:
            raise ParseError(f"{path}:{lineno}: key outside any [section]")
        key, _, value = line.partition("=")
        entries.append((lineno, section, key.strip().lower(), value.strip()))
    return entries


_KNOWN_KEYS = {
    "scene": {"name"},
    "grid": {"nx", "ny", "pitch"},
    "light": {"wavelengths", "diffuse", "coherent_slices", "pad_factor", "band_limit"},
    "slice": {"image", "depth", "extent"},
    "reference": {"amplitude", "tilt_x", "tilt_y", "phase_offset"},
    "mask": {"mode", "bias", "gain", "binary_threshold"},
    "lens": {"focal_length", "aperture"},
    "scan": {"chip_min", "chip_max"},
    "view": {"distance"},
}


def load_scene_config(path: str | Path) -> SceneConfig:
    """Parse and validate a scene file; defaults fill omitted optional keys."""
    path = Path(path)
    entries = _tokenize(path)

    sections: dict[str, dict[str, str]] = {}
    slices_raw: list[dict[str, str]] = []
    current_slice: dict[str, str] | None = None
    for lineno, section, key, value in entries:
        if section not in _KNOWN_KEYS:
            raise ParseError(f"{path}:{lineno}: unknown section [{section}]")
        if key == "__section__":
            if section == "slice":
                current_slice = {}
                slices_raw.append(current_slice)
            continue
        if key not in _KNOWN_KEYS[section]:
            raise ParseError(f"{path}:{lineno}: unknown key {key!r} in [{section}]")
        if section == "slice":
            if current_slice is None:  # pragma: no cover - guarded by tokenizer
                raise ParseError(f"{path}:{lineno}: slice key outside [slice]")
            current_slice[key] = value
        else:
            sections.setdefault(section, {})[key] = value

    name = sections.get("scene", {}).get("name", path.stem)

    grid = sections.get("grid", {})
    nx = _parse_int(grid.get("nx", str(_GRID_DEFAULTS["nx"])), "grid.nx")
    ny = _parse_int(grid.get("ny", str(_GRID_DEFAULTS["ny"])), "grid.ny")
    pitch = _parse_float(grid.get("pitch", repr(_GRID_DEFAULTS["pitch"])), "grid.pitch")

    light = sections.get("light", {})
    wl_text = light.get("wavelengths", repr(_DEFAULT_WAVELENGTH))
    wavelengths = tuple(
        _parse_float(tok, "light.wavelengths") for tok in wl_text.replace(",", " ").split()
    )
    if not wavelengths:
        raise ValidationError("light.wavelengths: at least one wavelength required")
    if any(w <= 0 for w in wavelengths):
        raise ValidationError("light.wavelengths: all wavelengths must be positive")
    diffuse = _parse_bool(light.get("diffuse", "true"), "light.diffuse")
    coherent = _parse_bool(light.get("coherent_slices", "true"), "light.coherent_slices")
    pad_factor = _parse_int(light.get("pad_factor", "2"), "light.pad_factor")
    band_limit = _parse_bool(light.get("band_limit", "true"), "light.band_limit")

    view = sections.get("view", {})
    view_distance = _parse_float(view.get("distance", "1.0"), "view.distance")

    try:
        setup = OpticalSetup(
            nx=nx,
            ny=ny,
            pitch=pitch,
            wavelength=wavelengths[0],
            wavelengths=wavelengths,
            diffuse_phase=diffuse,
            coherent_slices=coherent,
            pad_factor=pad_factor,
            band_limit=band_limit,
            view_distance=view_distance,
        )
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from exc

    if not slices_raw:
        raise ValidationError(f"{path}: at least one [slice] section required")
    slices: list[SceneSlice] = []
    sources: list[str] = []
    for i, raw in enumerate(slices_raw):
        where = f"slice {i}"
        for required in ("image", "depth", "extent"):
            if required not in raw:
                raise ValidationError(f"{path}: {where} is missing {required!r}")
        image_path = raw["image"]
        resolved = Path(image_path)
        if not resolved.is_absolute():
            resolved = path.parent / resolved
        try:
            image = read_slice_image(resolved)
        except OSError as exc:
            raise ValidationError(f"{path}: {where}: cannot read image ({exc})") from exc
        depth = _parse_float(raw["depth"], f"{where}.depth")
        extent = _parse_float(raw["extent"], f"{where}.extent")
        try:
            slices.append(SceneSlice(image=image, depth=depth, extent=extent))
        except ValueError as exc:
            raise ValidationError(f"{path}: {where}: {exc}") from exc
        sources.append(image_path)

    try:
        scene = Scene(name=name, slices=tuple(slices))
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from exc

    ref_raw = sections.get("reference", {})
    amp_text = ref_raw.get("amplitude", "auto").strip().lower()
    amplitude = None if amp_text == "auto" else _parse_float(amp_text, "reference.amplitude")
    tilt_x = _parse_float(ref_raw.get("tilt_x", repr(DEFAULT_TILT_X)), "reference.tilt_x")
    tilt_y = _parse_float(ref_raw.get("tilt_y", "0.0"), "reference.tilt_y")
    phase_offset = _parse_float(ref_raw.get("phase_offset", "0.0"), "reference.phase_offset")
    try:
        reference = ReferenceSpec(
            amplitude=amplitude, tilt_x=tilt_x, tilt_y=tilt_y, phase_offset=phase_offset
        )
    except ValueError as exc:
        raise ValidationError(f"{path}: reference: {exc}") from exc

    mask_raw = sections.get("mask", {})
    gain_text = mask_raw.get("gain", "auto").strip().lower()
    gain = None if gain_text == "auto" else _parse_float(gain_text, "mask.gain")
    try:
        mask = MaskSpec(
            bias=_parse_float(mask_raw.get("bias", "0.0"), "mask.bias"),
            gain=gain,
            mode=mask_raw.get("mode", "linear"),  # type: ignore[arg-type]
            binary_threshold=_parse_float(
                mask_raw.get("binary_threshold", "0.5"), "mask.binary_threshold"
            ),
        )
    except ValueError as exc:
        raise ValidationError(f"{path}: mask: {exc}") from exc

    lens = None
    if "lens" in sections:
        lens_raw = sections["lens"]
        try:
            lens = LensSpec(
                focal_length=_parse_float(
                    lens_raw.get("focal_length", "0"), "lens.focal_length"
                ),
                aperture_diameter=_parse_float(lens_raw.get("aperture", "0"), "lens.aperture"),
            )
        except ValueError as exc:
            raise ValidationError(f"{path}: lens: {exc}") from exc

    scan = None
    if "scan" in sections:
        scan_raw = sections["scan"]
        try:
            scan = ScanSpec(
                chip_distance_min=_parse_float(scan_raw.get("chip_min", "0"), "scan.chip_min"),
                chip_distance_max=_parse_float(scan_raw.get("chip_max", "0"), "scan.chip_max"),
            )
        except ValueError as exc:
            raise ValidationError(f"{path}: scan: {exc}") from exc
        if lens is not None:
            scan.validate_against(lens)

    return SceneConfig(
        scene=scene,
        setup=setup,
        reference=reference,
        mask=mask,
        lens=lens,
        scan=scan,
        slice_sources=tuple(sources),
    )


def load_scene(path: str | Path) -> tuple[Scene, OpticalSetup, ReferenceSpec, MaskSpec]:
    """Scene-file essentials as a tuple; see load_scene_config for the rest."""
    config = load_scene_config(path)
    return config.scene, config.setup, config.reference, config.mask


def write_scene_config(config: SceneConfig, path: str | Path) -> None:
    """Write a scene file that parses back to the same configuration.

    Slice image paths are taken from ``slice_sources`` and are not rewritten,
    so they must stay valid relative to the new file location.
    """
    if len(config.slice_sources) != len(config.scene.slices):
        raise ValueError("slice_sources must name one image per slice")
    setup = config.setup
    lines = [
        "[scene]",
        f"name = {config.scene.name}",
        "",
        "[grid]",
        f"nx = {setup.nx}",
        f"ny = {setup.ny}",
        f"pitch = {setup.pitch!r}",
        "",
        "[light]",
        "wavelengths = " + " ".join(repr(w) for w in setup.all_wavelengths),
        f"diffuse = {'true' if setup.diffuse_phase else 'false'}",
        f"coherent_slices = {'true' if setup.coherent_slices else 'false'}",
        f"pad_factor = {setup.pad_factor}",
        f"band_limit = {'true' if setup.band_limit else 'false'}",
        "",
        "[view]",
        f"distance = {setup.view_distance!r}",
    ]
    for source, slc in zip(config.slice_sources, config.scene.slices):
        lines += [
            "",
            "[slice]",
            f"image = {source}",
            f"depth = {slc.depth!r}",
            f"extent = {slc.extent!r}",
        ]
    ref = config.reference
    lines += [
        "",
        "[reference]",
        "amplitude = " + ("auto" if ref.amplitude is None else repr(ref.amplitude)),
        f"tilt_x = {ref.tilt_x!r}",
        f"tilt_y = {ref.tilt_y!r}",
        f"phase_offset = {ref.phase_offset!r}",
        "",
        "[mask]",
        f"mode = {config.mask.mode}",
        f"bias = {config.mask.bias!r}",
        "gain = " + ("auto" if config.mask.gain is None else repr(config.mask.gain)),
        f"binary_threshold = {config.mask.binary_threshold!r}",
    ]
    if config.lens is not None:
        lines += [
            "",
            "[lens]",
            f"focal_length = {config.lens.focal_length!r}",
            f"aperture = {config.lens.aperture_diameter!r}",
        ]
    if config.scan is not None:
        lines += [
            "",
            "[scan]",
            f"chip_min = {config.scan.chip_distance_min!r}",
            f"chip_max = {config.scan.chip_distance_max!r}",
        ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Report CSV
# ---------------------------------------------------------------------------

def write_report(
    report: ReconstructionReport,
    path: str | Path,
    extra: dict[str, object] | None = None,
) -> None:
    """Write a report as a flat key,value CSV with a fixed row order.

    ``extra`` rows (run provenance: grid, wavelength, seed, ...) are written
    after the metric rows under a ``run.`` prefix, sorted by key.
    """
    rows: list[tuple[str, str]] = [
        ("focus_depth", repr(report.focus_depth)),
        ("focus_x", repr(report.focus_xy[0])),
        ("focus_y", repr(report.focus_xy[1])),
        ("peak_intensity", repr(report.peak_intensity)),
        ("peak_to_mean", repr(report.peak_to_mean)),
        ("ncc", repr(report.ncc)),
        ("speckle_contrast", repr(report.speckle_contrast)),
        ("solid_angle_sr", repr(report.solid_angle_sr)),
    ]
    for name in sorted(report.power_fractions):
        rows.append((f"power_fraction.{name}", repr(report.power_fractions[name])))
    for key in sorted(extra or {}):
        rows.append((f"run.{key}", str((extra or {})[key])))
    text = "key,value\n" + "\n".join(f"{k},{v}" for k, v in rows) + "\n"
    Path(path).write_text(text, encoding="ascii", newline="\n")


def read_report(path: str | Path) -> tuple[ReconstructionReport, dict[str, str]]:
    """Parse a report CSV back into a report plus its run context rows."""
    path = Path(path)
    lines = path.read_text(encoding="ascii").splitlines()
    if not lines or lines[0] != "key,value":
        raise ParseError(f"{path}: missing 'key,value' header row")
    values: dict[str, str] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        key, sep, value = line.partition(",")
        if not sep:
            raise ParseError(f"{path}:{lineno}: expected 'key,value', got {line!r}")
        values[key] = value
    try:
        fractions = {
            key.split(".", 1)[1]: float(val)
            for key, val in values.items()
            if key.startswith("power_fraction.")
        }
        report = ReconstructionReport(
            focus_depth=float(values["focus_depth"]),
            focus_xy=(float(values["focus_x"]), float(values["focus_y"])),
            peak_intensity=float(values["peak_intensity"]),
            peak_to_mean=float(values["peak_to_mean"]),
            ncc=float(values["ncc"]),
            speckle_contrast=float(values["speckle_contrast"]),
            power_fractions=fractions,
            solid_angle_sr=float(values["solid_angle_sr"]),
        )
    except (KeyError, ValueError) as exc:
        raise ParseError(f"{path}: bad or missing report row ({exc})") from exc
    extras = {
        key[len("run."):]: val for key, val in values.items() if key.startswith("run.")
    }
    return report, extras
