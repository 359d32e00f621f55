from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence
import warnings

import numpy as np

from .algebra import (
    HermitianElement,
    PositiveFunctional,
    SelfAdjointFunctional,
    mat_log,
    operator_norm,
    pairing,
    trace_distance,
)
from .config import DEFAULT_OPTIONS, SolverOptions
from .entropy import relative_entropy
from .errors import QigValidationError, QigWarning
from .orlicz import exp_norm
from .perturbation import c_functional, perturb, perturbed, recover_perturbation


@dataclass(frozen=True, eq=False)
class Chart:
    """Exponential chart at a faithful base point; points are rho^h."""

    base: PositiveFunctional
    radius: float = 1.0

    def __post_init__(self):
        self.base.require_faithful("chart base")
        if not self.radius > 0:
            raise QigValidationError(f"radius must be > 0, got {self.radius}", field="radius")


def chart_forward(
    chart: Chart,
    h: HermitianElement,
    options: SolverOptions = DEFAULT_OPTIONS,
    *,
    check_domain: bool = True,
) -> PositiveFunctional:
    if check_domain:
        norm = exp_norm(chart.base, h, options)
        if norm >= chart.radius:
            warnings.warn(
                f"chart coordinate has exp-norm {norm:.6g} >= radius {chart.radius}",
                QigWarning,
                stacklevel=2,
            )
    return perturbed(chart.base, h)


def chart_inverse(chart: Chart, sigma: PositiveFunctional) -> HermitianElement:
    return recover_perturbation(chart.base, sigma)


def chart_identity_residual(chart: Chart, sigma: PositiveFunctional, omega: PositiveFunctional) -> float:
    """|omega(h) - (S(omega||rho) - S(omega||sigma))| for h = chart_inverse(sigma)."""
    h = chart_inverse(chart, sigma)
    return abs(
        pairing(h, omega) - (relative_entropy(omega, chart.base) - relative_entropy(omega, sigma))
    )


def transition(rho1: PositiveFunctional, rho2: PositiveFunctional, h1: HermitianElement) -> HermitianElement:
    """Coordinates in the chart at rho2 of the point with coordinates h1 at rho1."""
    rho1.require_faithful("rho1")
    rho2.require_faithful("rho2")
    return h1 + (mat_log(rho1) - mat_log(rho2))


def transition_residual(rho1: PositiveFunctional, rho2: PositiveFunctional, h1: HermitianElement) -> float:
    """||rho2^{transition(h1)} - rho1^{h1}||_1."""
    return trace_distance(perturbed(rho2, transition(rho1, rho2, h1)), perturbed(rho1, h1))


def atlas_residual(
    rho1: PositiveFunctional, rho2: PositiveFunctional, rho3: PositiveFunctional, h: HermitianElement
) -> float:
    """||t_23(t_12(h)) - t_13(h)||_inf."""
    stepped = transition(rho2, rho3, transition(rho1, rho2, h))
    return operator_norm(stepped - transition(rho1, rho3, h))


@dataclass(frozen=True, eq=False)
class ExponentialFamily:
    base: PositiveFunctional
    generators: tuple[HermitianElement, ...]

    def __post_init__(self):
        self.base.require_faithful("family base")
        gens = tuple(self.generators)
        for i, g in enumerate(gens):
            if g.algebra != self.base.algebra:
                raise QigValidationError("generator algebra differs from the base", field=f"generators[{i}]")
        object.__setattr__(self, "generators", gens)

    def _combine(self, coefficients: Sequence[float]) -> HermitianElement:
        coefficients = np.asarray(coefficients, dtype=float)
        if coefficients.shape != (len(self.generators),):
            raise QigValidationError(
                f"expected {len(self.generators)} coefficients, got {coefficients.shape}",
                field="coefficients",
            )
        h = self.base.algebra.zeros(HermitianElement)
        for c, g in zip(coefficients, self.generators):
            h = h + g * float(c)
        return h

    def member(self, coefficients: Sequence[float]) -> PositiveFunctional:
        return perturbed(self.base, self._combine(coefficients))

    def mean_parameters(self, coefficients: Sequence[float]) -> np.ndarray:
        """rho^h(g_i) for each generator."""
        point = self.member(coefficients)
        return np.array([pairing(g, point) for g in self.generators])

    def natural_parameters(self, sigma: PositiveFunctional) -> tuple[np.ndarray, float]:
        """Least-squares coordinates of log sigma - log rho in the generator span, and the misfit."""
        h = recover_perturbation(self.base, sigma)
        if not self.generators:
            return np.zeros(0), float(np.sqrt(pairing(h, h)))
        design = np.stack([_real_vector(g) for g in self.generators], axis=1)
        target = _real_vector(h)
        coefficients, *_ = np.linalg.lstsq(design, target, rcond=None)
        residual = float(np.linalg.norm(design @ coefficients - target))
        return coefficients, residual

    def contains(self, sigma: PositiveFunctional, tol: float = 1e-9) -> bool:
        return self.natural_parameters(sigma)[1] < tol


def _real_vector(x: HermitianElement) -> np.ndarray:
    flat = np.concatenate([b.ravel() for b in x.blocks])
    return np.concatenate([flat.real, flat.imag])


def canonical_divergence(rho: PositiveFunctional, h: HermitianElement, k: HermitianElement) -> float:
    """D_rho(h||k) = C_rho(h) - C_rho(k) - rho^k(h - k)."""
    at_k = perturb(rho, k)
    return c_functional(rho, h) - at_k.c_value - pairing(h - k, at_k.perturbed)


def divergence_entropy_form(rho: PositiveFunctional, h: HermitianElement, k: HermitianElement) -> float:
    """S(rho^k||rho^h) - (rho^k - rho^h)(1)."""
    at_h = perturbed(rho, h)
    at_k = perturbed(rho, k)
    return relative_entropy(at_k, at_h) - (at_k.trace - at_h.trace)


def divergence_gradient(rho: PositiveFunctional, h: HermitianElement, k: HermitianElement) -> SelfAdjointFunctional:
    """Derivative of D_rho(.||k) at h: rho^h - rho^k."""
    return perturbed(rho, h) - perturbed(rho, k)


def pythagorean_residual(
    rho: PositiveFunctional, h: HermitianElement, k: HermitianElement, l: HermitianElement
) -> float:
    """|D(h||k) + D(k||l) - D(h||l) - (rho^k - rho^l)(k - h)|."""
    lhs = canonical_divergence(rho, h, k) + canonical_divergence(rho, k, l)
    cross = pairing(k - h, perturbed(rho, k) - perturbed(rho, l))
    return abs(lhs - canonical_divergence(rho, h, l) - cross)


def orthogonal_triple(
    rho: PositiveFunctional, k: HermitianElement, l: HermitianElement, direction: HermitianElement
) -> HermitianElement:
    """h with (rho^k - rho^l)(k - h) = 0, obtained by projecting ``direction`` off rho^k - rho^l."""
    delta = (perturbed(rho, k) - perturbed(rho, l)).as_element()
    weight = pairing(delta, delta)
    if weight == 0:
        return k - direction
    projected = direction - delta * (pairing(direction, delta) / weight)
    return k - projected
