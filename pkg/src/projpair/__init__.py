"""Projection pairs over parametrized curve families.

Numerical tools for single projections along parallel and fan ray families,
pairwise range conditions and their kernels, a separability test showing the
exponential fan-fan family admits no such condition, and a CGNE experiment
driving a discrete two-vertex system toward data no image can produce.
"""

__version__ = "0.1.0"

from .errors import (
    AccuracyError,
    ConfigurationError,
    DegenerateKernelError,
    DivergenceError,
    DomainError,
    EvaluationError,
    ParallelRaysError,
    ProjPairError,
    ResolutionError,
    SingularPointError,
)
from .geometry import (
    ATTENUATION_MU,
    HALF_FAN_ANGLE,
    REFERENCE_VERTEX_1,
    REFERENCE_VERTEX_2,
    AdmissibilityReport,
    CurveFamily,
    FanGeometry,
    ImageDomain,
    PairGeometry,
    ParGeometry,
    check_fan_admissible,
    check_pair_admissible,
    cross2,
    direction,
    fan_inverse,
    fan_jacobian_inv,
    fan_point,
    fanfan_X,
    fanfan_tau,
    lift_angle,
    pair_from_text,
    pair_orientation,
    pair_to_text,
    par_inverse,
    par_point,
    parfan_X,
    perp,
    reference_domain,
    reference_pair,
    reference_view_ranges,
    view_range,
)
from .phantom import (
    SUPPORT_HALF_ANGLE,
    Bump,
    Phantom,
    TargetData,
    bump_eval,
    inconceivable_g2,
    mollifier_unit_mass,
    phantom_l2_norm,
    phantom_mass,
    random_phantom,
    reference_target,
)
from .projector import QuadratureSpec, continuity_bound_check, project_ray, project_values, project_view
from .discrete import (
    DetectorGrid,
    ImageGrid,
    PairOperator,
    ProjectionData,
    adjoint,
    forward,
    rasterize,
    read_image,
    read_projection_csv,
    reference_grids,
    reference_operator,
    write_image,
    write_pgm,
    write_projection_csv,
)
from .consistency import (
    KernelPair,
    SeparabilityReport,
    eval_G,
    expo_lhs_log,
    expo_surface,
    kernel_condition_residual,
    kernel_lhs_log,
    known_kernels,
    pprc_residual,
    pprc_sides,
    pv_hilbert_residual,
    sample_intersections,
    separability_test,
)
from .solver import CgneState, cgne_solve, predicted_residual_floor
