"""finslerlab: a numerical laboratory for singular (alpha, beta)-metrics.

Computes spray coefficients two independent ways, classifies metrics as
Douglas / projectively flat by residual tests, fits the structural
characterization conditions, and constructs the explicit example families
for end-to-end validation.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    DomainError,
    FinslerLabError,
    GeometryError,
    PreconditionError,
)
from .jets import (
    Jet2,
    SmoothField,
    TwoArgField,
    jet_eval,
    jet_point,
    mixed_xy_derivatives,
)
from .riemann import (
    Box,
    CovariantPackage,
    MetricField,
    OneFormField,
    christoffel,
    conformal_metric,
    constant_form,
    covariant_package,
    euclidean_metric,
    finsler_field,
    spray_alpha,
)
from .alphabeta import (
    AlphaBetaMetric,
    KropinaPlus,
    MKropina,
    PhiFamily,
    PowerSeries,
    SprayInvariants,
    SqrtMixed,
    SqrtPure,
    metric_value,
    phi_jet,
    spray_full,
    spray_generic,
    spray_invariants,
)
from .classify import (
    CONDITION_TAGS,
    ClassificationReport,
    ConditionReport,
    ProbeSet,
    check_condition,
    douglas_residual,
    douglas_residual_direct,
    fit_tensor_ansatz,
    flag_curvature_projective,
    hamel_residual,
    hamel_residual_direct,
    make_probe_set,
    projective_factor,
    sphere_probes,
    verdict_of,
)
from .constructions import (
    EtaProfile,
    UField,
    conformal_form_on_space_form,
    conformal_pair_from_u,
    deform,
    eta_affine_x1,
    eta_constant,
    eta_exp_x1,
    eta_one_plus_norm2,
    example_ufield,
    generic_nonclosed_form,
    inverse_deform,
    local_structure_flag_curvature,
    local_structure_metric,
    local_structure_projective_factor,
    pde_residual,
    planted_tau,
    space_form,
    space_form_unit_length,
)
