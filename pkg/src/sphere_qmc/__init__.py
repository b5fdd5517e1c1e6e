"""sphere_qmc: explicit uniformly distributed point sets on the 2-sphere and
tools to quantify their uniformity.

Constructions: digital (0, m, 2)-nets and (0, 2)-sequence prefixes in prime
bases, Fibonacci lattices, and seeded uniform random points, lifted to the
sphere by the cylindrical equal-area map.  Uniformity is measured by the
exact L2 cap discrepancy (sum-of-distances identity), point-centered cap
sweeps, a small-N exact cap-discrepancy oracle, planar isotropic-discrepancy
lower bounds, and the closed-form upper bounds they are sandwiched by.
"""

from .errors import (
    DegenerateCapError,
    InternalError,
    InvalidInputError,
    NumericalInconsistencyError,
    SingularDomainError,
    SizeLimitError,
    SphereQMCError,
    UnsupportedError,
)
from .points import (
    PointSet,
    Provenance,
    SphericalCap,
    cap_area_fraction,
    cap_contains,
    lambert_inverse,
    lambert_map,
    random_square_points,
    read_csv,
    read_json,
    write_csv,
    write_json,
)
from .generators import (
    DigitalNetSpec,
    digital_net,
    digital_sequence_prefix,
    fibonacci,
    fibonacci_generating_vectors,
    fibonacci_lattice,
    is_net,
    min_distance,
)
from .discrepancy import (
    DiscrepancyReport,
    cap_bound_from_iso,
    empirical_cap_discrepancy,
    exact_cap_discrepancy,
    iso_bound_fibonacci,
    iso_bound_net,
    iso_bound_sequence,
    l2_cap_discrepancy,
    local_cap_discrepancy,
    sum_of_distances,
)
from .isotropic import (
    ConvexTestSet,
    halfplane_area,
    halfplane_discrepancy,
    hull_subset_lower_bound,
    isotropic_report,
)
from .levelcurve import (
    CapPreimageProblem,
    CurvatureCubic,
    LevelCurveTrace,
    critical_tau,
    cubic_root_in_unit_interval,
    curvature_along_level,
    curvature_cubic,
    extremal_x,
    level_function,
    level_gradient,
    level_hessian,
    signed_curvature,
    sturm_sign_changes,
    trace_level_curve,
)

__version__ = "0.1.0"
