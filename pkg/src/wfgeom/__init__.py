"""Distance-only geometry engine.

Everything is driven by a world function sigma(P, Q) — half the squared
distance between two points.  The package evaluates kernels, audits
distance axioms, builds implicit objects (segments, spheres, ellipsoids,
cylinders, sections) as point sets, probes the multivariance of vector
equality, and checks the four conditions for a geometry to be proper
Euclidean of some dimension.
"""

from .kernel import (
    AxiomCheck,
    AxiomReport,
    GeometryError,
    GeometrySpec,
    InapplicablePointError,
    IntervalClass,
    IntervalKind,
    Kind,
    audit_metric_axioms,
    audit_world_function_axioms,
    classify_interval,
    default_tol,
    deformed_minkowski,
    euclidean,
    minkowski,
    sigma,
    tabulated,
)
from .vectors import (
    GramMatrix,
    PointPairVector,
    VectorLength,
    equivalence_residual,
    gram_determinant,
    gram_matrix,
    is_equivalent,
    is_linearly_dependent,
    length,
    pair_scalar_product,
    scalar_product,
    vec,
)
from .sampling import BudgetError, Region
from .objects import (
    EmptyCloudError,
    ImplicitObject,
    ObjectKind,
    PointCloud,
    SectionResult,
    cloud_diameter,
    cylinder,
    ellipsoid,
    hausdorff_distance,
    predicate_residual,
    residual_batch,
    sample_object,
    section,
    section_of_segment,
    segment,
    sphere,
)
from .multivariance import (
    Cardinality,
    EquivalenceSolutionSet,
    IntransitivityWitness,
    find_intransitivity_witness,
    solve_equivalence,
)
from .euclideaness import (
    EuclideanessConfig,
    EuclideanessReport,
    MetricTensor,
    build_metric_tensor,
    check_continuity,
    check_linear_structure,
    check_positivity,
    covariant_coordinates,
    detect_dimension,
    full_report,
    jacobi_eigenvalues,
)

__version__ = "0.1.0"
