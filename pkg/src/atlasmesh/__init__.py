"""Atlas-of-parametrizations surface remesher.

Splits a triangulated surface into disk-topology patches, flattens each
one-to-one onto the unit disk with mean value coordinates (or cotangent
weights), and rebuilds a finite-element-ready mesh patch by patch in the
parameter plane.
"""

from .mesh import (
    Adjacency,
    MeshError,
    TopologyInfo,
    Triangulation,
    ValidationReport,
    euler_check,
    validate,
)
from .param import ParamOptions, Parametrization, parametrize
from .pipeline import AtlasResult, PipelineOptions, build_atlas, remesh_model
from .quality import QualityReport, patch_quality
from .verify import convergence_study

__all__ = [
    "Adjacency",
    "AtlasResult",
    "MeshError",
    "ParamOptions",
    "Parametrization",
    "PipelineOptions",
    "QualityReport",
    "TopologyInfo",
    "Triangulation",
    "ValidationReport",
    "build_atlas",
    "convergence_study",
    "euler_check",
    "parametrize",
    "patch_quality",
    "remesh_model",
    "validate",
]

__version__ = "0.1.0"
