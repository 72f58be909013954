"""normlab: a numerical laboratory for ball Banach function-space norms,
Muckenhoupt weights, the maximal operator, and the nonlocal functionals that
recover the gradient norm (fractional-limit and level-set forms)."""

from .grid import (
    DomainMask,
    Grid,
    SampledField,
    TestFunctionSpec,
    auto_box,
    gradient_fd,
    gradient_magnitude,
    make_grid,
    parse_function,
    sample,
    truncate,
)
from .spaces import (
    BesovBourgainMorrey,
    DyadicSystem,
    HerzGlobal,
    HerzLocal,
    HerzWeight,
    Lebesgue,
    Lorentz,
    MixedNorm,
    Morrey,
    Orlicz,
    OrliczFunction,
    OrliczSlice,
    SpaceSpec,
    VariableLebesgue,
    WeightedLebesgue,
    associate_norm_empirical,
    convexify,
    decreasing_rearrangement,
    dyadic_cover,
    dyadic_cubes,
    herz_global_norm,
    herz_local_norm,
    lorentz_norm,
    luxemburg_norm,
    mixed_norm,
    mo_indices,
    morrey_norm,
    norm,
    orlicz_slice_norm,
    parse_space,
    restriction_norm,
    variable_lebesgue_norm,
    weighted_lebesgue_norm,
    zero_extend,
)
from .weights import (
    CubeFamily,
    Weight,
    dual_weight,
    estimate_maximal_opnorm,
    explicit_weight,
    hl_maximal,
    muckenhoupt_constant,
    power_weight,
    rubio_de_francia,
    weighted_norm_duality_bound,
)
from .functionals import (
    BsvyParams,
    FunctionalReport,
    GagliardoParams,
    KernelPolicy,
    bbm_constant,
    bbm_limit_extrapolate,
    bbm_scaled_value,
    bsvy_functional,
    bsvy_inner,
    bsvy_sup,
    gagliardo_seminorm,
    sobolev_norm,
    weak_holder_check,
    weak_product_quasinorm,
    weighted_mu_measure,
)
from .domains import DomainSpec, EpsilonCertificate, epsilon_falsifier, mask, parse_domain

__version__ = "0.1.0"
