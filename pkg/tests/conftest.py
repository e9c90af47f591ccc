from pathlib import Path

import numpy as np
import pytest

from holosim import OpticalSetup


def write_pgm8(path: Path, values: np.ndarray) -> None:
    data = np.clip(np.round(np.asarray(values) * 255), 0, 255).astype("u1")
    header = f"P5\n{data.shape[1]} {data.shape[0]}\n255\n".encode("ascii")
    path.write_bytes(header + data.tobytes())


def write_pgm16(path: Path, raw: np.ndarray) -> None:
    data = np.asarray(raw).astype(">u2")
    header = f"P5\n{data.shape[1]} {data.shape[0]}\n65535\n".encode("ascii")
    path.write_bytes(header + data.tobytes())


@pytest.fixture
def small_setup() -> OpticalSetup:
    return OpticalSetup(nx=64, ny=64, pitch=8e-6, wavelength=5.32e-7)


def make_point_scene(
    directory: Path,
    *,
    nx: int = 128,
    pitch: float = 8e-6,
    depth: float = -0.05,
    diffuse: bool = False,
    tilt_x: float = 0.0,
    name: str = "tiny-point",
) -> Path:
    """Write a minimal single-point scene plus its image into ``directory``."""
    img = np.zeros((3, 3))
    img[1, 1] = 1.0
    write_pgm8(directory / "pt.pgm", img)
    scene = directory / "scene.scene"
    scene.write_text(
        "\n".join(
            [
                "[scene]",
                f"name = {name}",
                "[grid]",
                f"nx = {nx}",
                f"ny = {nx}",
                f"pitch = {pitch!r}",
                "[light]",
                "wavelengths = 5.32e-07",
                f"diffuse = {'true' if diffuse else 'false'}",
                "[slice]",
                "image = pt.pgm",
                f"depth = {depth!r}",
                f"extent = {3 * pitch!r}",
                "[reference]",
                "amplitude = auto",
                f"tilt_x = {tilt_x!r}",
                "tilt_y = 0.0",
                "phase_offset = 0.0",
                "[mask]",
                "mode = linear",
                "bias = 0.0",
                "gain = auto",
            ]
        )
        + "\n"
    )
    return scene
