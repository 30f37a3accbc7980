"""Aperiodic Delone sets: generation, patch statistics and diffraction."""

__version__ = "0.1.0"

from .pointset import (  # noqa: E402
    DegenerateSampleError,
    DeloneParams,
    DifferenceSet,
    PointSet,
    Region,
    delone_params,
    delone_to_seq,
    difference_set,
    fibonacci_word,
    meyer_diagnostic,
    random_tiling,
    seq_to_delone,
)
from .windows import BallWindow, Box, Interval, Polygon, Window, window_fourier  # noqa: E402
from .cps import (  # noqa: E402
    CutProjectScheme,
    FourierModule,
    SchemeError,
    builtin,
    cps_new,
    fourier_module,
    model_set_points,
    star_map,
)
from .patches import (  # noqa: E402
    NOT_REPETITIVE,
    Patch,
    PatchCensus,
    entropy_estimate,
    patch_at,
    patch_census,
    patch_frequency,
    repetitivity_radius,
)

__all__ = [
    "__version__",
    "BallWindow",
    "Box",
    "Interval",
    "Polygon",
    "Window",
    "window_fourier",
    "DegenerateSampleError",
    "DeloneParams",
    "DifferenceSet",
    "PointSet",
    "Region",
    "delone_params",
    "delone_to_seq",
    "difference_set",
    "fibonacci_word",
    "meyer_diagnostic",
    "random_tiling",
    "seq_to_delone",
    "CutProjectScheme",
    "FourierModule",
    "SchemeError",
    "builtin",
    "cps_new",
    "fourier_module",
    "model_set_points",
    "star_map",
    "NOT_REPETITIVE",
    "Patch",
    "PatchCensus",
    "entropy_estimate",
    "patch_at",
    "patch_census",
    "patch_frequency",
    "repetitivity_radius",
]
