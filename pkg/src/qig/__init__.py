from .algebra import (
    BlockMatrix,
    HermitianElement,
    MatrixAlgebra,
    PositiveFunctional,
    SelfAdjointFunctional,
    diagonal_element,
    diagonal_state,
    eig_herm,
    mat_exp,
    mat_fn,
    mat_log,
    mat_pow,
    pairing,
    schatten_norm,
)
from .channels import (
    Channel,
    SufficiencyReport,
    adjoint_apply,
    apply,
    petz_dual,
    recovery,
    recovery_channel,
    sufficiency_report,
    transport_family,
)
from .config import DEFAULT_OPTIONS, SolverOptions, load_profile, resolve_options
from .entropy import (
    F_rho,
    StepFunction,
    donald_residual,
    kosaki_lower_bound,
    relative_entropy,
    renyi_f,
)
from .errors import ConvergenceError, DomainError, QigError, QigValidationError, QigWarning
from .kosaki import embed, lp_duality_gap, lp_norm
from .manifold import (
    Chart,
    ExponentialFamily,
    canonical_divergence,
    chart_forward,
    chart_inverse,
    pythagorean_residual,
    transition,
)
from .orlicz import exp_norm, log_norm, luxemburg_norm, phi, psi_inf, psi_sup
from .perturbation import (
    PerturbationResult,
    c_gradient,
    chain_rule_residual,
    perturb,
    perturbed_entropy_residual,
    perturbed_vector_series,
)

__all__ = [
    "BlockMatrix",
    "Channel",
    "Chart",
    "ConvergenceError",
    "DEFAULT_OPTIONS",
    "DomainError",
    "ExponentialFamily",
    "F_rho",
    "HermitianElement",
    "MatrixAlgebra",
    "PerturbationResult",
    "PositiveFunctional",
    "QigError",
    "QigValidationError",
    "QigWarning",
    "SelfAdjointFunctional",
    "SolverOptions",
    "StepFunction",
    "SufficiencyReport",
    "adjoint_apply",
    "apply",
    "c_gradient",
    "canonical_divergence",
    "chain_rule_residual",
    "chart_forward",
    "chart_inverse",
    "diagonal_element",
    "diagonal_state",
    "donald_residual",
    "eig_herm",
    "embed",
    "exp_norm",
    "kosaki_lower_bound",
    "load_profile",
    "log_norm",
    "lp_duality_gap",
    "lp_norm",
    "luxemburg_norm",
    "mat_exp",
    "mat_fn",
    "mat_log",
    "mat_pow",
    "pairing",
    "perturb",
    "perturbed_entropy_residual",
    "perturbed_vector_series",
    "petz_dual",
    "phi",
    "psi_inf",
    "psi_sup",
    "pythagorean_residual",
    "recovery",
    "recovery_channel",
    "relative_entropy",
    "renyi_f",
    "resolve_options",
    "schatten_norm",
    "sufficiency_report",
    "transition",
    "transport_family",
]
