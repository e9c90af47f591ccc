"""Regenerate the slice images bundled with the example scenes.

Run from the repository root: ``python3 scenes/make_assets.py``
"""

from pathlib import Path

import numpy as np

HERE = Path(__file__).parent


def write_pgm8(path: Path, values: np.ndarray) -> None:
    data = np.clip(np.round(values * 255), 0, 255).astype("u1")
    header = f"P5\n{data.shape[1]} {data.shape[0]}\n255\n".encode("ascii")
    path.write_bytes(header + data.tobytes())


def main() -> None:
    point = np.zeros((3, 3))
    point[1, 1] = 1.0
    write_pgm8(HERE / "point.pgm", point)

    near = np.zeros((65, 65))
    near[32, 44] = 1.0
    write_pgm8(HERE / "point_near.pgm", near)

    far = np.zeros((65, 65))
    far[32, 20] = 1.0
    write_pgm8(HERE / "point_far.pgm", far)

    write_pgm8(HERE / "patch.pgm", np.ones((64, 64)))

    yy, xx = np.mgrid[-32:33, -32:33]
    r = np.hypot(xx, yy)
    ring = ((r > 18) & (r < 24)).astype(float)
    write_pgm8(HERE / "ring.pgm", ring)


if __name__ == "__main__":
    main()
