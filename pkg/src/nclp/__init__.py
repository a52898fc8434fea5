"""Non-commutative measure theory and L_p spaces on finite-dimensional von Neumann algebras."""

from .algebra import (
    AlgebraSpec,
    Element,
    SpectralData,
    element_arithmetic,
    functional_calculus,
    is_positive,
    join,
    meet,
    mv_equivalent,
    operator_norm,
    polar_decomposition,
    projection_lattice,
    spectral_decomposition,
    trace,
)
from .functionals import (
    INF,
    FunctionalSpec,
    WeightDomains,
    balanced_weight,
    dominated_bound_check,
    functional_eval,
    functional_norm,
    functional_polar,
    trace_eval,
    weight_domains,
)
from .gns import (
    CentralizerData,
    GnsData,
    ModularData,
    centralizer,
    gns_construct,
    kms_check,
    modular_data,
    modular_flow,
)
from .lp import LpValue, dual_norm_witness, duality_pairing, holder_bound, lp_norm, trace_norm_bound_check
from .measure import (
    DNeighborhood,
    adjoint_symmetry_check,
    d_arithmetic_check,
    d_membership,
    minimal_epsilon,
    tau_density_profile,
)
from .radon_nikodym import (
    commutant_rn,
    flow_commutation_check,
    pt_rn,
    sakai_rn,
    weight_from_density,
)
from .regularize import gaussian_regularization

__version__ = "0.1.0"
