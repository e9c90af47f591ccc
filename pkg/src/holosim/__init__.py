"""holosim: scalar-diffraction model of a scanned volumetric projector whose
divergent 3D image is converted into a viewable converged real image by a
live transmission-hologram screen."""

from .errors import HolosimError
from .field import (
    ComplexField,
    IntensityMap,
    OpticalSetup,
    combine,
    conjugate,
    intensity,
    power,
    zero_field,
)
from .propagation import (
    AngularSpectrumPlan,
    PropagationSpec,
    angular_spectrum_propagate,
    back_propagate,
    fresnel_propagate,
)
from .mvs import (
    LensSpec,
    ScanSpec,
    Scene,
    SceneSlice,
    compose_object_field,
    conjugate_distance,
    magnification,
    resample_slice_intensity,
    scan_range_for_depth_interval,
    scan_to_depth,
    synthesize_slice_field,
)
from .rtrh import (
    MaskSpec,
    ReferenceSpec,
    TransmissionMask,
    expansion_terms,
    interferogram,
    mask_as_field,
    reconstruct,
    reference_wave,
    term_fields,
    transmission_mask,
    viewing_window_field,
)
from .metrics import (
    FocusScan,
    OrderSpectra,
    ReconstructionReport,
    focus_search,
    ncc,
    order_spectra,
    power_budget,
    solid_angle,
    solid_angle_small_angle,
    speckle_contrast,
)
from .scene_io import (
    SceneConfig,
    load_scene,
    load_scene_config,
    read_field,
    read_report,
    read_slice_image,
    write_field,
    write_intensity_image,
    write_report,
    write_scene_config,
)
from .pipeline import (
    SimulationResult,
    StageFailure,
    run_mvs_design,
    run_propagate,
    run_simulation,
    run_sweep,
)

__version__ = "0.1.0"
