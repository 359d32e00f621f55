"""Perturbed functionals rho^h = exp(log rho + h) and the functional C_rho(h) = rho^h(1)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BarycentricInterpolator
from scipy.special import roots_legendre

from .algebra import (
    BlockMatrix,
    HermitianElement,
    PositiveFunctional,
    frobenius_distance,
    mat_exp,
    mat_log,
    pairing,
    trace_distance,
)
from .config import DEFAULT_OPTIONS
from .entropy import relative_entropy
from .errors import QigValidationError

MAX_SERIES_ORDER = 6


@dataclass(frozen=True)
class PerturbationResult:
    perturbed: PositiveFunctional
    c_value: float


def perturb(rho: PositiveFunctional, h: HermitianElement) -> PerturbationResult:
    rho.algebra.require_same(h.algebra, "rho and h")
    rho.require_faithful()
    perturbed = mat_exp(mat_log(rho) + h)
    return PerturbationResult(perturbed, perturbed.trace)


def perturbed(rho: PositiveFunctional, h: HermitianElement) -> PositiveFunctional:
    return perturb(rho, h).perturbed


def c_functional(rho: PositiveFunctional, h: HermitianElement) -> float:
    return perturb(rho, h).c_value


def c_gradient(rho: PositiveFunctional, h: HermitianElement) -> PositiveFunctional:
    """Derivative of C_rho at h, as a functional: b -> rho^h(b)."""
    return perturb(rho, h).perturbed


def recover_perturbation(rho: PositiveFunctional, sigma: PositiveFunctional) -> HermitianElement:
    """The unique h with rho^h = sigma, for faithful rho and sigma."""
    rho.algebra.require_same(sigma.algebra, "rho and sigma")
    rho.require_faithful()
    sigma.require_faithful("sigma")
    return mat_log(sigma) - mat_log(rho)


def perturbed_entropy_residual(
    omega: PositiveFunctional, rho: PositiveFunctional, h: HermitianElement
) -> float:
    """|omega(h) + S(omega||rho^h) - S(omega||rho)|."""
    shifted = perturbed(rho, h)
    return abs(pairing(h, omega) + relative_entropy(omega, shifted) - relative_entropy(omega, rho))


def chain_rule_residual(rho: PositiveFunctional, h: HermitianElement, k: HermitianElement) -> float:
    """max(||rho^{h+k} - (rho^h)^k||_1, |C_rho(h+k) - C_{rho^h}(k)|)."""
    joint = perturb(rho, h + k)
    stepped = perturb(perturbed(rho, h), k)
    return max(
        trace_distance(joint.perturbed, stepped.perturbed),
        abs(joint.c_value - stepped.c_value),
    )


def subgradient_gap(rho: PositiveFunctional, a: HermitianElement, b: HermitianElement) -> float:
    """C_rho(a) - C_rho(b) - rho^b(a - b); nonnegative by convexity."""
    at_b = perturb(rho, b)
    return c_functional(rho, a) - at_b.c_value - pairing(a - b, at_b.perturbed)


def gradient_mismatch(
    rho: PositiveFunctional,
    h: HermitianElement,
    direction: HermitianElement,
    eps: float = DEFAULT_OPTIONS.fd_step,
) -> float:
    """Central difference of C_rho along ``direction`` against rho^h(direction)."""
    step = direction * eps
    fd = (c_functional(rho, h + step) - c_functional(rho, h - step)) / (2.0 * eps)
    return abs(fd - pairing(direction, c_gradient(rho, h)))


@dataclass(frozen=True)
class SeriesResult:
    vector: BlockMatrix
    term_norms: tuple[float, ...]
    residual: float
    order: int
    nodes: int


def _block_powers(vals: np.ndarray, vecs: np.ndarray, s: np.ndarray) -> np.ndarray:
    """rho^s for each s in a flat array, shape (len(s), d, d)."""
    scaled = vals[None, :] ** s[:, None]
    return np.einsum("ij,sj,kj->sik", vecs, scaled, vecs.conj())


def _block_series(
    vals: np.ndarray, vecs: np.ndarray, a: np.ndarray, order: int, nodes: int
) -> list[np.ndarray]:
    d = a.shape[0]
    x, w = roots_legendre(nodes)
    u = (x + 1.0) / 2.0
    w = w / 2.0
    grid = u / 2.0  # Gauss points on [0, 1/2]

    terms = [_block_powers(vals, vecs, np.array([0.5]))[0]]
    if order == 0:
        return terms

    level = _block_powers(vals, vecs, grid)  # U_0 on the grid
    right_final = _block_powers(vals, vecs, 0.5 - grid)
    # outer index q (grid point s_q), inner index r (unit node v_r)
    inner = np.outer(grid, u)
    right_inner = _block_powers(vals, vecs, (grid[:, None] * (1.0 - u[None, :])).ravel()).reshape(
        nodes, nodes, d, d
    )
    for n in range(1, order + 1):
        # U_n(1/2) = int_0^{1/2} U_{n-1}(t) a rho^{1/2 - t} dt
        terms.append(np.einsum("r,rij,jk,rkl->il", w * 0.5, level, a, right_final))
        if n == order:
            break
        if n == 1:
            previous = _block_powers(vals, vecs, inner.ravel()).reshape(nodes, nodes, d, d)
        else:
            stacked = np.concatenate([level.real, level.imag], axis=1).reshape(nodes, -1)
            interp = BarycentricInterpolator(grid, stacked)
            flat = interp(inner.ravel()).reshape(nodes * nodes, 2 * d, d)
            previous = (flat[:, :d, :] + 1j * flat[:, d:, :]).reshape(nodes, nodes, d, d)
        # U_n(s_q) = s_q int_0^1 U_{n-1}(s_q v) a rho^{s_q (1 - v)} dv
        level = np.einsum("q,r,qrij,jk,qrkl->qil", grid, w, previous, a, right_inner)
    return terms


def perturbed_vector_series(
    rho: PositiveFunctional,
    a: HermitianElement,
    order: int = DEFAULT_OPTIONS.series_order,
    nodes: int = DEFAULT_OPTIONS.series_nodes,
) -> SeriesResult:
    """Truncated expansional series for (rho^a)^{1/2}.

    The n-th term is the n-fold time-ordered integral over 1/2 > t_1 > ... > t_n > 0,
    computed by the recursion U_n(s) = int_0^s U_{n-1}(t) a rho^{s-t} dt with
    U_0(s) = rho^s. Each level is tabulated on a Gauss-Legendre grid over [0, 1/2]
    and interpolated barycentrically inside the next level's integrals.
    ``residual`` is the Hilbert-Schmidt distance to exp((log rho + a)/2).
    """
    if not 0 <= order <= MAX_SERIES_ORDER:
        raise QigValidationError(
            f"series order must lie in 0..{MAX_SERIES_ORDER}, got {order}", field="order"
        )
    if nodes < 1:
        raise QigValidationError(f"nodes must be >= 1, got {nodes}", field="nodes")
    rho.algebra.require_same(a.algebra, "rho and a")
    rho.require_faithful()

    spec = rho.clipped_spectrum
    per_block = [
        _block_series(vals, vecs, a_block, order, nodes)
        for vals, vecs, a_block in zip(spec.eigenvalues, spec.eigenvectors, a.blocks)
    ]
    vector_blocks = [sum(terms[1:], terms[0]) for terms in per_block]
    term_norms = tuple(
        float(np.sqrt(sum(np.linalg.norm(terms[n]) ** 2 for terms in per_block)))
        for n in range(order + 1)
    )
    vector = BlockMatrix._trusted(rho.algebra, vector_blocks)
    target = mat_exp((mat_log(rho) + a) * 0.5)
    return SeriesResult(
        vector=vector,
        term_norms=term_norms,
        residual=frobenius_distance(vector, target),
        order=order,
        nodes=nodes,
    )
