"""hyperroll: holonomy and warped-product structure of rolling manifolds.

A chart-based Riemannian manifold rolls without slipping or twisting on a
constant-curvature model space.  The controllability of that control system
is governed by the holonomy of a metric connection on TM + R; this package
computes that holonomy numerically, classifies its reducibility, simulates
the rolling itself, and verifies the warped-product decomposition that
reducibility forces on the metric.
"""

__version__ = "0.1.0"

from .lorentz import (
    AlgebraElement,
    BilinearForm,
    SubspaceBasis,
    algebra_membership,
    bracket,
    classify_pair,
    form_eval,
    invariant_subspaces,
    lie_closure,
)
from .manifolds import (
    Flat,
    Interval,
    ManifoldSpec,
    PerturbedFlat,
    SpaceFormChart,
    WarpedProduct,
    chart_path,
    christoffel,
    flat_space,
    geodesic,
    hyperbolic_space,
    jacobi_check,
    lc_transport,
    sinh_cosh_warp,
    polar_cosh_warp,
    metric_at,
    perturbed_flat,
    rectangle_loop,
    riemann,
    sphere_space,
    exp_warp,
    graph_cosh_warp,
)
from .connection import (
    ExtendedVector,
    curvature_vs_holonomy,
    h_matrix,
    nabla_ext,
    rolling_curvature,
    transport_ext,
    transport_ext_matrix,
)
from .holonomy import (
    HolonomyReport,
    SamplingConfig,
    ambrose_singer_generators,
    classify,
    holonomy_algebra,
    loop_transport,
)
from .rolling import (
    RollingState,
    aligned_state,
    holonomy_correspondence,
    initial_state,
    mu_action,
    roll_along,
    rolling_loop_element,
)
from .decomposition import (
    DistributionField,
    InvariantSubspaceField,
    SplitSection,
    curvature_annihilation,
    frobenius_check,
    lightlike_structure,
    n1_detector,
    recover_warp,
    second_fundamental_form,
    spherical_check,
)
