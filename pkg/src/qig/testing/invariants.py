"""Seeded identity checks run by the property suite.

Every check draws its own instance from ``rng`` and returns a nonnegative
residual; one-sided inequalities report only the size of the violation.
"""

from __future__ import annotations

import math

import numpy as np

from qig.algebra import diagonal_element, diagonal_state
from qig.channels import (
    exp_norm_adjoint_residual,
    f_monotonicity_residual,
    log_norm_contraction_residual,
    lp_contraction_residual,
    petz_double_dual_residual,
    recovery_roundtrip_residual,
    restrict_to_support,
    sufficiency_report,
    transport_family,
)
from qig.config import SolverOptions
from qig.entropy import (
    F_rho,
    StepFunction,
    classical_kl,
    donald_residual,
    kosaki_lower_bound,
    relative_entropy,
    renyi_f,
)
from qig.kosaki import embedding_chain, lp_duality_gap
from qig.manifold import (
    atlas_residual,
    canonical_divergence,
    divergence_entropy_form,
    orthogonal_triple,
    pythagorean_residual,
    transition_residual,
)
from qig.orlicz import commutative_phi, f_biconjugate, phi, psi_inf, psi_sup
from qig.perturbation import (
    chain_rule_residual,
    gradient_mismatch,
    perturbed,
    perturbed_entropy_residual,
    perturbed_vector_series,
)
from qig.testing.constructions import SUFFICIENCY_CASES, sufficiency_case
from qig.testing.registry import register
from qig.testing.sampling import (
    diagonal_values,
    random_algebra,
    random_breakpoints,
    random_channel,
    random_functional,
    random_hermitian,
    random_state,
    random_step_values,
    split_state,
)

RENYI_GRID = (1.001, 1.01, 1.1, 1.5, 2.0)
LP_GRID = (1.0, 1.5, 2.0, 4.0, math.inf)
CHAIN_GRID = (1.5, 2.0, 4.0, 8.0)
GRADIENT_DIRECTIONS = 20
YOUNG_PROBES = 10

SUFFICIENT = ("identity", "partial_trace", "embedding")
ORDERED_CASES = tuple(SUFFICIENCY_CASES)


def _violation(value: float) -> float:
    return max(0.0, value)


def _state_pair(rng: np.random.Generator, dim: int):
    algebra = random_algebra(rng, dim)
    return algebra, random_state(rng, algebra), random_state(rng, algebra)


def _channel_instance(rng: np.random.Generator, dim: int):
    source = random_algebra(rng, dim)
    target = random_algebra(rng, int(rng.integers(1, dim + 1)))
    return random_channel(rng, source, target), random_state(rng, source)


# entropy -------------------------------------------------------------------------


@register("donald", threshold=1e-9)
def donald(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    algebra = random_algebra(rng, dim)
    parts = split_state(rng, algebra, int(rng.integers(2, 4)))
    return donald_residual(parts, random_state(rng, algebra))


@register("kosaki_lower_bound", threshold=1e-9)
def kosaki_bound(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    algebra, omega, rho = _state_pair(rng, dim)
    n = int(rng.integers(1, 5))
    count = int(rng.integers(1, 6))
    step = StepFunction(n, random_breakpoints(rng, n, count), tuple(random_step_values(rng, algebra, count)))
    return _violation(kosaki_lower_bound(omega, rho, step) - relative_entropy(omega, rho))


@register("renyi_monotonicity", threshold=1e-10)
def renyi_monotonicity(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    _, omega, rho = _state_pair(rng, dim)
    values = [renyi_f(omega, rho, alpha) for alpha in RENYI_GRID]
    return _violation(max(a - b for a, b in zip(values, values[1:])))


@register("renyi_limit", threshold=1e-2)
def renyi_limit(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    _, omega, rho = _state_pair(rng, dim)
    return abs(renyi_f(omega, rho, RENYI_GRID[0]) - relative_entropy(omega, rho) / omega.trace)


@register("commutative_reduction", threshold=1e-12)
def commutative_reduction(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    w = diagonal_values(rng, dim)
    r = diagonal_values(rng, dim)
    a = rng.uniform(-1.0, 1.0, size=dim)
    omega, rho = diagonal_state(w), diagonal_state(r)
    return max(
        abs(phi(rho, diagonal_element(a)) - commutative_phi(r, a)),
        abs(relative_entropy(omega, rho) - classical_kl(w, r)),
    )


# perturbation --------------------------------------------------------------------


@register("perturbed_entropy", threshold=1e-9)
def perturbed_entropy(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    algebra, omega, rho = _state_pair(rng, dim)
    return perturbed_entropy_residual(omega, rho, random_hermitian(rng, algebra))


@register("chain_rule", threshold=1e-9)
def chain_rule(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    algebra = random_algebra(rng, dim)
    rho = random_state(rng, algebra)
    return chain_rule_residual(rho, random_hermitian(rng, algebra), random_hermitian(rng, algebra))


@register("gradient_check", threshold=1e-6, max_trials=50)
def gradient_check(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    algebra = random_algebra(rng, dim)
    rho = random_state(rng, algebra)
    h = random_hermitian(rng, algebra)
    return max(
        gradient_mismatch(rho, h, random_hermitian(rng, algebra), options.fd_step)
        for _ in range(GRADIENT_DIRECTIONS)
    )


@register("series_oracle", threshold=1e-4, max_dim=4, max_trials=20)
def series_oracle(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    algebra = random_algebra(rng, dim)
    rho = random_state(rng, algebra)
    a = random_hermitian(rng, algebra, scale=0.5)
    return perturbed_vector_series(rho, a, options.series_order, options.series_nodes).residual


# orlicz ----------------------------------------------------------------------------


@register("fenchel_young", threshold=1e-8)
def fenchel_young(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    algebra = random_algebra(rng, dim)
    rho = random_state(rng, algebra)
    psi = random_functional(rng, algebra, scale=0.5)
    value = psi_sup(rho, psi, options=options).psi_value
    worst = -math.inf
    for _ in range(YOUNG_PROBES):
        a = random_hermitian(rng, algebra, scale=float(rng.uniform(0.1, 3.0)))
        worst = max(worst, psi(a) - phi(rho, a) - value)
    return _violation(worst)


@register("conjugate_duality", threshold=1e-4, max_dim=3, max_trials=50)
def conjugate_duality(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    algebra = random_algebra(rng, dim)
    rho = random_state(rng, algebra)
    psi = random_functional(rng, algebra, scale=0.5)
    return abs(psi_sup(rho, psi, options=options).psi_value - psi_inf(rho, psi, options=options).psi_value)


@register("biconjugation", threshold=1e-6, max_dim=3, max_trials=50)
def biconjugation(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    _, omega, rho = _state_pair(rng, dim)
    return abs(f_biconjugate(rho, omega, options).value - F_rho(omega, rho))


# kosaki ----------------------------------------------------------------------------


@register("lp_duality_gap", threshold=1e-8)
def duality_gap(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    algebra = random_algebra(rng, dim)
    rho = random_state(rng, algebra)
    return lp_duality_gap(random_functional(rng, algebra), rho, float(rng.uniform(1.2, 4.0)))


@register("embedding_chain", threshold=1e-10)
def chain(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    algebra = random_algebra(rng, dim)
    rho = random_state(rng, algebra)
    return _violation(embedding_chain(random_hermitian(rng, algebra), rho, CHAIN_GRID).violation)


# channels ---------------------------------------------------------------------------


@register("f_monotonicity", threshold=1e-10)
def f_monotonicity(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    channel, rho = _channel_instance(rng, dim)
    omega = random_state(rng, channel.source)
    return _violation(-f_monotonicity_residual(channel, rho, omega))


@register("lp_contraction", threshold=1e-8)
def lp_contraction(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    channel, rho = _channel_instance(rng, dim)
    h = random_functional(rng, channel.source)
    return _violation(max(lp_contraction_residual(channel, rho, h, p) for p in LP_GRID))


@register("log_norm_contraction", threshold=1e-6, max_dim=3)
def log_norm_contraction(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    channel, rho = _channel_instance(rng, dim)
    psi = random_functional(rng, channel.source, scale=0.5)
    return _violation(log_norm_contraction_residual(channel, rho, psi, options))


@register("exp_norm_adjoint_contraction", threshold=1e-6, max_dim=3, max_trials=50)
def exp_norm_adjoint(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    channel, rho = _channel_instance(rng, dim)
    target = restrict_to_support(channel, rho, warn=False).channel.target
    return _violation(exp_norm_adjoint_residual(channel, rho, random_hermitian(rng, target), options))


@register("petz_double_dual", threshold=1e-9)
def petz_double_dual(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    channel, rho = _channel_instance(rng, dim)
    target = restrict_to_support(channel, rho, warn=False).channel.target
    return petz_double_dual_residual(channel, rho, random_hermitian(rng, target))


@register("petz_recovery_roundtrip", threshold=1e-8)
def petz_recovery_roundtrip(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    """T_rho(T(rho)) = rho for random channels; T_rho(T(rho^h)) = rho^h on sufficient families."""
    if rng.random() < 0.5:
        channel, rho = _channel_instance(rng, dim)
        return recovery_roundtrip_residual(channel, rho, rho)
    case = sufficiency_case(SUFFICIENT[int(rng.integers(len(SUFFICIENT)))], rng, dim)
    worst = max(recovery_roundtrip_residual(case.channel, case.rho, perturbed(case.rho, h)) for h in case.family)
    transported = transport_family(case.channel, case.rho, case.family, options, with_norms=False)
    return max(worst, *(t.transport_residual for t in transported))


@register("sufficiency_equivalence", threshold=1e-8)
def sufficiency_equivalence(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    """Residuals on sufficient constructions; 0 or 1 on insufficient ones by whether every flag is false."""
    case = sufficiency_case(ORDERED_CASES[int(rng.integers(len(ORDERED_CASES)))], rng, dim)
    reports = [sufficiency_report(case.channel, case.rho, h, options) for h in case.family]
    if case.sufficient:
        return max(r.max_residual for r in reports)
    return 0.0 if not any(any(r.flags().values()) for r in reports) else 1.0


# manifold ----------------------------------------------------------------------------


@register("divergence_forms", threshold=1e-9)
def divergence_forms(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    algebra = random_algebra(rng, dim)
    rho = random_state(rng, algebra)
    h, k = random_hermitian(rng, algebra), random_hermitian(rng, algebra)
    bregman = canonical_divergence(rho, h, k)
    return max(abs(bregman - divergence_entropy_form(rho, h, k)), _violation(-bregman))


@register("pythagorean", threshold=1e-9)
def pythagorean(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    """Generic triples use the cross-term form; orthogonal triples the plain three-point identity."""
    algebra = random_algebra(rng, dim)
    rho = random_state(rng, algebra)
    h, k, l = (random_hermitian(rng, algebra) for _ in range(3))
    if rng.random() < 0.5:
        return pythagorean_residual(rho, h, k, l)
    h = orthogonal_triple(rho, k, l, h)
    return abs(
        canonical_divergence(rho, h, k) + canonical_divergence(rho, k, l) - canonical_divergence(rho, h, l)
    )


@register("atlas_consistency", threshold=1e-9)
def atlas_consistency(rng: np.random.Generator, dim: int, options: SolverOptions) -> float:
    algebra = random_algebra(rng, dim)
    rho1, rho2, rho3 = (random_state(rng, algebra) for _ in range(3))
    h = random_hermitian(rng, algebra)
    return max(atlas_residual(rho1, rho2, rho3, h), transition_residual(rho1, rho2, h))
