"""torsionlab: torsion functions of planar convex domains and their concavity.

Core layers:

- geometry: convex domains, embedded-boundary grids, level-set extraction
- closed_forms: exact torsion functions (ball, ellipsoid, equilateral triangle)
- solver: Shortley-Weller finite differences for the torsion problem
- fields: bicubic jets over grid fields, radial restrictions
- concavity: power-concavity certification, property (A), boundary diagnostics
- harmonic: circular-harmonic decomposition about the maximum
- service / cli: HTTP API and its thin command-line client
"""

from .closed_forms import (
    SmoothField,
    ball_torsion,
    ellipsoid_torsion,
    triangle_torsion,
)
from .concavity import (
    ConcavityReport,
    boundary_gradient_stats,
    concavity_exponent,
    excess_laplacian_power,
    is_power_concave,
    level_set_bound_check,
    local_property_A_check,
    property_A_check,
)
from .fields import GridInterpolant, eval_jet, interpolant, radial_jet
from .geometry import (
    ConvexPolygon,
    Disk,
    Ellipse,
    GridMask,
    SampledLevelSet,
    build_grid,
    domain_from_json,
    marching_level_set,
    polygon_metrics,
)
from .harmonic import (
    HarmonicDecomposition,
    decompose,
    harmonicity_check,
    leading_term_fit,
    radial_sign_quantity,
)
from .presets import build_field, preset_domain
from .solver import (
    GridField,
    SolveResult,
    rayleigh_quotient,
    solve_torsion,
    torsional_rigidity,
)

__version__ = "0.1.0"

__all__ = [
    "SmoothField",
    "ball_torsion",
    "ellipsoid_torsion",
    "triangle_torsion",
    "ConcavityReport",
    "boundary_gradient_stats",
    "concavity_exponent",
    "excess_laplacian_power",
    "is_power_concave",
    "level_set_bound_check",
    "local_property_A_check",
    "property_A_check",
    "GridInterpolant",
    "eval_jet",
    "interpolant",
    "radial_jet",
    "ConvexPolygon",
    "Disk",
    "Ellipse",
    "GridMask",
    "SampledLevelSet",
    "build_grid",
    "domain_from_json",
    "marching_level_set",
    "polygon_metrics",
    "HarmonicDecomposition",
    "decompose",
    "harmonicity_check",
    "leading_term_fit",
    "radial_sign_quantity",
    "build_field",
    "preset_domain",
    "GridField",
    "SolveResult",
    "rayleigh_quotient",
    "solve_torsion",
    "torsional_rigidity",
    "__version__",
]
