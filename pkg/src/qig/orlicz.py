"""The Young pair (Phi_rho, Psi_rho) and their Luxemburg norms."""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Callable, Literal

import numpy as np

from .algebra import (
    BlockMatrix,
    HermitianElement,
    PositiveFunctional,
    SelfAdjointFunctional,
    frobenius_distance,
    mat_log,
    operator_norm,
    pairing,
    spectral_split,
)
from .config import DEFAULT_OPTIONS, SolverOptions
from .entropy import F_rho
from .errors import QigValidationError
from .perturbation import c_functional, perturbed
from .solvers import AscentResult, BisectionResult, maximize_concave, minimize_convex, minkowski_scale


@dataclass(frozen=True)
class YoungEvaluation:
    value: float
    argument_kind: Literal["element", "functional"]

    def __post_init__(self):
        if not self.value >= 0:
            raise QigValidationError(f"Young values are >= 0, got {self.value}", field="value")


@dataclass(frozen=True)
class DualNormCertificate:
    """Value of Psi_rho(psi) with the sup-form maximizer and an inf-form decomposition.

    ``gap`` is the distance between the two forms evaluated at the returned
    pair, so a small gap certifies the value from both sides.
    """

    psi_value: float
    maximizer_a: HermitianElement
    decomposition: tuple[SelfAdjointFunctional, PositiveFunctional]
    gap: float
    iterations: int
    gradient_norm: float
    stop_reason: str


def phi(rho: PositiveFunctional, a: HermitianElement) -> float:
    """Phi_rho(a) = (C_rho(a) + C_rho(-a))/2 - rho(1)."""
    value = 0.5 * (c_functional(rho, a) + c_functional(rho, -a)) - rho.trace
    return max(value, 0.0)


def _is_zero(x: BlockMatrix) -> bool:
    return all(not np.any(b) for b in x.blocks)


def _faithful(x: BlockMatrix) -> PositiveFunctional | None:
    if x.min_eigenvalue <= 0:
        return None
    return PositiveFunctional._trusted(x.algebra, x.blocks)


def _inf_form(
    rho: PositiveFunctional, plus: SelfAdjointFunctional, minus: SelfAdjointFunctional
) -> float:
    return 0.5 * (F_rho(plus, rho) + F_rho(minus, rho)) + rho.trace


def psi_sup(
    rho: PositiveFunctional,
    psi: SelfAdjointFunctional,
    tol: float | None = None,
    options: SolverOptions = DEFAULT_OPTIONS,
    *,
    warm_start: HermitianElement | None = None,
) -> DualNormCertificate:
    """Psi_rho(psi) = sup_a psi(a) - Phi_rho(a) by gradient ascent."""
    rho.algebra.require_same(psi.algebra, "rho and psi")
    rho.require_faithful()
    if tol is not None:
        options = options.with_overrides(tol=tol)

    def objective(a: HermitianElement) -> float:
        return pairing(a, psi) - phi(rho, a)

    def gradient(a: HermitianElement) -> HermitianElement:
        return (psi - (perturbed(rho, a) - perturbed(rho, -a)) * 0.5).as_element()

    start = warm_start if warm_start is not None else rho.algebra.zeros(HermitianElement)
    result = maximize_concave(objective, gradient, start, options, label="psi_sup")
    a = result.point
    minus = perturbed(rho, -a)
    plus = psi * 2.0 + minus
    gap = abs(result.value - _inf_form(rho, plus, minus))
    return DualNormCertificate(
        psi_value=result.value,
        maximizer_a=a,
        decomposition=(_faithful(plus) or plus, minus),
        gap=gap,
        iterations=result.iterations,
        gradient_norm=result.gradient_norm,
        stop_reason=result.stop_reason,
    )


def psi_inf(
    rho: PositiveFunctional,
    psi: SelfAdjointFunctional,
    tol: float | None = None,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> DualNormCertificate:
    """Psi_rho(psi) = inf over 2 psi = omega_+ - omega_- of (F(omega_+) + F(omega_-))/2 + rho(1).

    Descends over omega_- with omega_+ = 2 psi + omega_-. Iterates stay
    faithful: trial points leaving the positive cone are backtracked.
    """
    rho.algebra.require_same(psi.algebra, "rho and psi")
    rho.require_faithful()
    if tol is not None:
        options = options.with_overrides(tol=tol)
    log_rho = mat_log(rho)
    twice = psi * 2.0

    def feasible(minus: SelfAdjointFunctional) -> bool:
        return _faithful(minus) is not None and _faithful(twice + minus) is not None

    def objective(minus: SelfAdjointFunctional) -> float:
        return _inf_form(rho, twice + minus, minus)

    def gradient(minus: SelfAdjointFunctional) -> SelfAdjointFunctional:
        plus = twice + minus
        g = (mat_log(plus) - log_rho) + (mat_log(minus) - log_rho)
        return (g * 0.5).as_functional()

    _, neg = spectral_split(psi)
    start = SelfAdjointFunctional._trusted(rho.algebra, (neg * 2.0 + rho).blocks)
    result = minimize_convex(objective, gradient, start, options, feasible=feasible, label="psi_inf")
    minus = _faithful(result.point)
    plus = _faithful(twice + result.point)
    a = ((mat_log(plus) - mat_log(minus)) * 0.5)
    sup_value = pairing(a, psi) - phi(rho, a)
    return DualNormCertificate(
        psi_value=result.value,
        maximizer_a=a,
        decomposition=(plus, minus),
        gap=abs(result.value - sup_value),
        iterations=result.iterations,
        gradient_norm=result.gradient_norm,
        stop_reason=result.stop_reason,
    )


def psi_value(rho: PositiveFunctional, psi: SelfAdjointFunctional, options: SolverOptions = DEFAULT_OPTIONS) -> float:
    return psi_sup(rho, psi, options=options).psi_value


def young_value(rho: PositiveFunctional, x: BlockMatrix, options: SolverOptions = DEFAULT_OPTIONS) -> YoungEvaluation:
    """Phi_rho on elements, Psi_rho on functionals."""
    if isinstance(x, SelfAdjointFunctional):
        return YoungEvaluation(max(psi_value(rho, x, options), 0.0), "functional")
    if isinstance(x, HermitianElement):
        return YoungEvaluation(phi(rho, x), "element")
    raise QigValidationError(f"cannot evaluate a Young function on {type(x).__name__}", field="x")


def luxemburg_scale(
    young: Callable[[BlockMatrix], float],
    x: BlockMatrix,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> BisectionResult:
    """Bisection for inf{lam > 0 : young(x/lam) <= 1}.

    x is divided by its operator norm first and the scale multiplied back, so
    the bracket never depends on the magnitude of x.
    """
    if _is_zero(x):
        return BisectionResult(0.0, 0.0, 0)
    size = operator_norm(x)
    unit = x * (1.0 / size)
    found = minkowski_scale(lambda lam: young(unit * (1.0 / lam)), options)
    return BisectionResult(found.scale * size, found.level, found.iterations)


def luxemburg_norm(
    young: Callable[[BlockMatrix], float],
    x: BlockMatrix,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> float:
    """inf{lam > 0 : young(x/lam) <= 1}."""
    return luxemburg_scale(young, x, options).scale


def exp_norm_bisection(
    rho: PositiveFunctional, a: HermitianElement, options: SolverOptions = DEFAULT_OPTIONS
) -> BisectionResult:
    rho.require_faithful()
    return luxemburg_scale(lambda y: phi(rho, y), a, options)


def exp_norm(rho: PositiveFunctional, a: HermitianElement, options: SolverOptions = DEFAULT_OPTIONS) -> float:
    return exp_norm_bisection(rho, a, options).scale


def log_norm_bisection(
    rho: PositiveFunctional, psi: SelfAdjointFunctional, options: SolverOptions = DEFAULT_OPTIONS
) -> BisectionResult:
    rho.require_faithful()
    rho.algebra.require_same(psi.algebra, "rho and psi")
    last: list[HermitianElement] = []

    def young(y: SelfAdjointFunctional) -> float:
        cert = psi_sup(rho, y, options=options, warm_start=last[-1] if last else None)
        last[:] = [cert.maximizer_a]
        return cert.psi_value

    return luxemburg_scale(young, psi, options)


def log_norm(rho: PositiveFunctional, psi: SelfAdjointFunctional, options: SolverOptions = DEFAULT_OPTIONS) -> float:
    return log_norm_bisection(rho, psi, options).scale


def young_gap(
    rho: PositiveFunctional,
    a: HermitianElement,
    psi: SelfAdjointFunctional,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> float:
    """Phi_rho(a) + Psi_rho(psi) - psi(a); nonnegative up to solver tolerance."""
    return phi(rho, a) + psi_value(rho, psi, options) - pairing(a, psi)


def f_biconjugate(
    rho: PositiveFunctional,
    omega: PositiveFunctional,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> AscentResult[HermitianElement]:
    """sup_a omega(a) - C_rho(a); equals F_rho(omega) for faithful omega."""
    rho.require_faithful()
    omega.algebra.require_same(rho.algebra, "omega and rho")
    return maximize_concave(
        lambda a: pairing(a, omega) - c_functional(rho, a),
        lambda a: (omega - perturbed(rho, a)).as_element(),
        rho.algebra.zeros(HermitianElement),
        options,
        label="f_biconjugate",
    )


@dataclass(frozen=True)
class UnitBallCertificate:
    log_norm: float
    decomposition: tuple[PositiveFunctional, PositiveFunctional]
    f_sum: float
    bound: float

    @property
    def inside(self) -> bool:
        return self.log_norm <= 1.0

    @property
    def decomposition_holds(self) -> bool:
        return self.f_sum <= self.bound + 1e-6


def unit_ball_certificate(
    rho: PositiveFunctional, psi: SelfAdjointFunctional, options: SolverOptions = DEFAULT_OPTIONS
) -> UnitBallCertificate:
    """||psi||_log <= 1 iff some 2 psi = omega_+ - omega_- has F(omega_+) + F(omega_-) <= 2 - 2 rho(1)."""
    cert = psi_inf(rho, psi, options=options)
    plus, minus = cert.decomposition
    return UnitBallCertificate(
        log_norm=log_norm(rho, psi, options),
        decomposition=cert.decomposition,
        f_sum=F_rho(plus, rho) + F_rho(minus, rho),
        bound=2.0 - 2.0 * rho.trace,
    )


@dataclass(frozen=True)
class DualNormProbe:
    dual_estimate: float
    log_norm: float

    @property
    def ratio(self) -> float:
        return self.dual_estimate / self.log_norm if self.log_norm > 0 else math.nan


def dual_norm_probe(
    rho: PositiveFunctional, psi: SelfAdjointFunctional, options: SolverOptions = DEFAULT_OPTIONS
) -> DualNormProbe:
    """Lower estimate of sup{psi(a) : ||a||_exp <= 1} from a few normalized probes."""
    probes = [psi.as_element(), psi_sup(rho, psi, options=options).maximizer_a]
    plus, minus = spectral_split(psi)
    probes.append(mat_log(plus + rho) - mat_log(minus + rho))
    best = 0.0
    for a in probes:
        scale = exp_norm(rho, a, options)
        if scale > 0:
            best = max(best, abs(pairing(a, psi)) / scale)
    return DualNormProbe(best, log_norm(rho, psi, options))


def commutative_phi(rho_diag, a_diag) -> float:
    """Sum rho_i (cosh a_i - 1)."""
    r = np.asarray(rho_diag, dtype=float)
    a = np.asarray(a_diag, dtype=float)
    return float(np.sum(r * (np.cosh(a) - 1.0)))


def commutative_psi(rho_diag, psi_diag) -> float:
    """Sum rho_i psi*(psi_i/rho_i) with psi*(u) = u arcsinh(u) - sqrt(1 + u^2) + 1."""
    r = np.asarray(rho_diag, dtype=float)
    u = np.asarray(psi_diag, dtype=float) / r
    return float(np.sum(r * (u * np.arcsinh(u) - np.sqrt(1.0 + u * u) + 1.0)))


def decomposition_residual(cert: DualNormCertificate, psi: SelfAdjointFunctional) -> float:
    """||omega_+ - omega_- - 2 psi||_F."""
    plus, minus = cert.decomposition
    return frobenius_distance(plus - minus, psi * 2.0)
