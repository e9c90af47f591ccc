"""Depth-scan amplification of the projector.

A cellphone-camera-sized lens (f = 5 mm) needs only a quarter millimeter of
chip travel to sweep its conjugate image plane from 0.1 m out to 5 m: the
lens equation amplifies micro-motion near the focal point into meters of
display depth.  This script tabulates that mapping and the viewing solid
angle of a 1 m^2 screen watched from 1 m.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from holosim import (
    LensSpec,
    conjugate_distance,
    scan_range_for_depth_interval,
    scan_to_depth,
    solid_angle,
    solid_angle_small_angle,
)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

lens = LensSpec(focal_length=5e-3, aperture_diameter=5e-3)

print("chip distance -> image depth (f = 5 mm)")
for depth in (0.1, 0.2, 0.5, 1.0, 2.0, 5.0):
    chip = conjugate_distance(lens, depth)  # lens equation is symmetric
    print(f"  chip at {chip * 1e3:.4f} mm -> image at {depth:7.2f} m")

travel = scan_range_for_depth_interval(lens, 0.1, 5.0)
print(f"\nchip travel to cover 0.1 m .. 5 m: {travel * 1e3:.4f} mm "
      f"({'well under' if travel < 0.01 else 'over'} the 1 cm feasibility bar)")

omega = solid_angle(1.0, 1.0, 1.0)
print(f"viewing solid angle of a 1 m x 1 m screen at 1 m: {omega:.4f} sr "
      f"(small-angle estimate {solid_angle_small_angle(1.0, 1.0, 1.0):.1f} sr)")

chips = np.linspace(5.005e-3, 5.30e-3, 400)
depths = [scan_to_depth(lens, c) for c in chips]
fig, ax = plt.subplots(figsize=(6, 4))
ax.plot((chips - lens.focal_length) * 1e3, depths)
ax.set_xlabel("chip offset past focal point (mm)")
ax.set_ylabel("image depth (m)")
ax.set_yscale("log")
ax.set_title("sub-millimeter chip scan covers meters of depth")
ax.grid(True, which="both", alpha=0.3)
fig.tight_layout()
fig.savefig(OUT / "scan_amplification.png", dpi=120)
print(f"\nwrote {OUT / 'scan_amplification.png'}")
