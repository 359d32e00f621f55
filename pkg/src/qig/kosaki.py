"""Kosaki L_p(M, rho) norms through the symmetric embedding k -> rho^{1/2q} k rho^{1/2q}."""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Sequence

import numpy as np
from scipy import linalg

from .algebra import (
    BlockMatrix,
    HermitianElement,
    PositiveFunctional,
    SelfAdjointFunctional,
    mat_pow,
    operator_norm,
    sandwich,
    schatten_norm,
)
from .config import DEFAULT_OPTIONS, SolverOptions
from .errors import QigValidationError
from .orlicz import exp_norm, log_norm


def _check_p(p: float) -> float:
    p = float(p)
    if not p >= 1:
        raise QigValidationError(f"p must lie in [1, inf], got {p}", field="p")
    return p


def conjugate_exponent(p: float) -> float:
    p = _check_p(p)
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _half_weight(p: float) -> float:
    """1/2q for 1/p + 1/q = 1."""
    return (1.0 - 1.0 / p) / 2.0


def _kind_for(x: BlockMatrix, functional: bool) -> type[BlockMatrix]:
    if isinstance(x, (HermitianElement, SelfAdjointFunctional)):
        return SelfAdjointFunctional if functional else HermitianElement
    return BlockMatrix


def pull_back(h: BlockMatrix, rho: PositiveFunctional, p: float) -> BlockMatrix:
    """rho^{-1/2q} h rho^{-1/2q}, the L_p(M) preimage of h."""
    p = _check_p(p)
    rho.algebra.require_same(h.algebra, "h and rho")
    s = _half_weight(p)
    if s == 0:
        return h
    return sandwich(mat_pow(rho, -s), h, _kind_for(h, functional=False))


def lp_norm(h: BlockMatrix, rho: PositiveFunctional, p: float) -> float:
    """||h||_{p,rho} = ||rho^{-1/2q} h rho^{-1/2q}||_p."""
    p = _check_p(p)
    rho.require_faithful()
    return schatten_norm(pull_back(h, rho, p), p)


def embed(a: BlockMatrix, rho: PositiveFunctional, p: float = math.inf) -> BlockMatrix:
    """i_{p,rho}(a) = rho^{1/2q} a rho^{1/2q}; p = inf gives rho^{1/2} a rho^{1/2}."""
    p = _check_p(p)
    rho.algebra.require_same(a.algebra, "a and rho")
    rho.require_faithful()
    s = _half_weight(p)
    kind = _kind_for(a, functional=True)
    if s == 0:
        return kind._trusted(a.algebra, a.blocks)
    return sandwich(mat_pow(rho, s), a, kind)


def lp_pairing(h: BlockMatrix, g: BlockMatrix, rho: PositiveFunctional, p: float) -> float:
    """<h, g> for h in L_p(M, rho) and g in L_q(M, rho): Re Tr[k l] of the preimages."""
    q = conjugate_exponent(p)
    k = pull_back(h, rho, p)
    l = pull_back(g, rho, q)
    return float(sum(np.einsum("ij,ji->", x, y).real for x, y in zip(k.blocks, l.blocks)))


def lp_duality_gap(h: BlockMatrix, rho: PositiveFunctional, p: float) -> float:
    """|(||h||_{p,rho}) - <h, g>| for the norming functional g built from the polar decomposition."""
    p = _check_p(p)
    if p == 1 or math.isinf(p):
        raise QigValidationError("the duality gap needs 1 < p < inf", field="p")
    q = conjugate_exponent(p)
    norm = lp_norm(h, rho, p)
    if norm == 0:
        return 0.0
    k = pull_back(h, rho, p)
    maximizer = []
    for block in k.blocks:
        u, sv, vh = linalg.svd(block)
        maximizer.append(vh.conj().T @ np.diag(sv ** (p - 1.0)) @ u.conj().T)
    l = BlockMatrix._trusted(rho.algebra, maximizer)
    g = embed(l, rho, q)
    g = g * (1.0 / lp_norm(g, rho, q))
    return abs(norm - lp_pairing(h, g, rho, p))


@dataclass(frozen=True)
class EmbeddingChain:
    exponents: tuple[float, ...]
    norms: tuple[float, ...]
    operator_norm: float
    trace_norm: float

    @property
    def violation(self) -> float:
        """Largest breach of ||.||_1 <= ||.||_{p} <= ||.||_{p'} <= ||a|| for p <= p'; <= 0 when the chain holds."""
        worst = -math.inf
        ordered = [self.trace_norm, *self.norms, self.operator_norm]
        for lo, hi in zip(ordered, ordered[1:]):
            worst = max(worst, lo - hi)
        return worst


def embedding_chain(a: HermitianElement, rho: PositiveFunctional, ps: Sequence[float]) -> EmbeddingChain:
    """Norms of i_{inf,rho}(a) along increasing p, bracketed by ||.||_1 and ||a||_inf."""
    exponents = tuple(sorted(_check_p(p) for p in ps))
    image = embed(a, rho, math.inf)
    return EmbeddingChain(
        exponents=exponents,
        norms=tuple(lp_norm(image, rho, p) for p in exponents),
        operator_norm=operator_norm(a),
        trace_norm=schatten_norm(image, 1),
    )


def exp_embedding_ratio(
    rho: PositiveFunctional, a: HermitianElement, p: float, options: SolverOptions = DEFAULT_OPTIONS
) -> float:
    """||i_{inf,rho}(a)||_{p,rho} / ||a||_{exp,rho}."""
    denom = exp_norm(rho, a, options)
    return lp_norm(embed(a, rho, math.inf), rho, p) / denom if denom > 0 else 0.0


def log_embedding_ratio(
    rho: PositiveFunctional, k: SelfAdjointFunctional, q: float, options: SolverOptions = DEFAULT_OPTIONS
) -> float:
    """||k||_{log,rho} / ||k||_{q,rho}."""
    denom = lp_norm(k, rho, q)
    return log_norm(rho, k, options) / denom if denom > 0 else 0.0
