"""Speckle from a diffuse object, and how a smooth object avoids it.

With per-pixel random phase (a diffuse surface), coherent reconstruction of
a uniform patch develops fully formed speckle: intensity follows the
exponential law and the contrast (std/mean) sits near 1.  Turning the
diffuse phase off reconstructs a flat patch with contrast near 0.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from holosim import (
    MaskSpec,
    OpticalSetup,
    ReferenceSpec,
    Scene,
    SceneSlice,
    angular_spectrum_propagate,
    compose_object_field,
    interferogram,
    reference_wave,
    speckle_contrast,
    term_fields,
    transmission_mask,
)
from holosim.field import intensity
from holosim.propagation import PropagationSpec

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)


def reconstruct_patch(diffuse: bool) -> np.ndarray:
    setup = OpticalSetup(
        nx=1024, ny=1024, pitch=8e-6, wavelength=5.32e-7, diffuse_phase=diffuse
    )
    scene = Scene(
        name="patch",
        slices=(SceneSlice(image=np.ones((64, 64)), depth=-0.2, extent=2e-3),),
    )
    obj = compose_object_field(scene, setup, seed=7)
    a_r = float(np.sqrt(np.mean(np.abs(obj.samples) ** 2)))
    ref_field = reference_wave(ReferenceSpec(amplitude=a_r), setup)
    mask = transmission_mask(interferogram(obj, ref_field), MaskSpec())
    _, real_term, _ = term_fields(obj, ref_field, MaskSpec(gain=mask.gain_used))
    image = angular_spectrum_propagate(real_term, 0.2, PropagationSpec(pad_factor=2))
    return np.abs(image.samples) ** 2


roi = np.s_[512 - 90 : 512 + 90, 512 - 90 : 512 + 90]
fig, axes = plt.subplots(2, 2, figsize=(9, 8))
for row, diffuse in enumerate((True, False)):
    img = reconstruct_patch(diffuse)
    roi_mask = np.zeros_like(img, dtype=bool)
    roi_mask[roi] = True
    contrast = speckle_contrast(
        intensity_map := intensity_from(img), roi_mask
    ) if False else float(np.std(img[roi]) / np.mean(img[roi]))
    label = "diffuse" if diffuse else "smooth"
    print(f"{label} object: speckle contrast {contrast:.3f}")
    axes[row, 0].imshow(img[roi], cmap="inferno")
    axes[row, 0].set_title(f"{label} reconstruction (contrast {contrast:.2f})")
    values = img[roi].ravel()
    values = values / values.mean()
    axes[row, 1].hist(values, bins=80, density=True, alpha=0.7)
    if diffuse:
        t = np.linspace(0, values.max(), 200)
        axes[row, 1].plot(t, np.exp(-t), "k--", lw=1, label="exponential law")
        axes[row, 1].legend()
    axes[row, 1].set_xlabel("intensity / mean")
    axes[row, 1].set_ylabel("density")
fig.tight_layout()
fig.savefig(OUT / "speckle.png", dpi=120)
print(f"wrote {OUT / 'speckle.png'}")
