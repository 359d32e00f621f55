"""Trace-preserving completely positive maps between block algebras.

A channel is stored through dense Kraus operators K (target_dim x source_dim);
its action is T(h) = P_N(sum K h K^*) with P_N the pinching onto the target
blocks, and T*(a) = P_M(sum K^* a K).
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass, field
import math
from typing import Sequence
import warnings

import numpy as np

from .algebra import (
    PSD_TOL,
    BlockMatrix,
    HermitianElement,
    MatrixAlgebra,
    PositiveFunctional,
    SelfAdjointFunctional,
    from_dense,
    mat_pow,
    mat_sqrt,
    operator_norm,
    pairing,
    sandwich,
    support_isometries,
    to_dense,
    trace_distance,
)
from .config import DEFAULT_OPTIONS, SolverOptions
from .entropy import F_rho, relative_entropy
from .errors import DomainError, QigValidationError, QigWarning
from .kosaki import lp_norm
from .orlicz import exp_norm, log_norm
from .perturbation import perturbed

TRACE_PRESERVING_TOL = 1e-10


def _image_kind(x: BlockMatrix) -> type[BlockMatrix]:
    return type(x) if isinstance(x, (HermitianElement, SelfAdjointFunctional)) else BlockMatrix


@dataclass(frozen=True, eq=False)
class Channel:
    source: MatrixAlgebra
    target: MatrixAlgebra
    kraus: tuple[np.ndarray, ...]
    check: InitVar[bool] = True

    def __post_init__(self, check: bool):
        shape = (self.target.dim, self.source.dim)
        ops = []
        for i, k in enumerate(self.kraus):
            arr = np.array(k, dtype=np.complex128)
            if arr.shape != shape:
                raise QigValidationError(
                    f"Kraus operator {i} has shape {arr.shape}, expected {shape}", field=f"kraus[{i}]"
                )
            arr.setflags(write=False)
            ops.append(arr)
        if not ops:
            raise QigValidationError("a channel needs at least one Kraus operator", field="kraus")
        object.__setattr__(self, "kraus", tuple(ops))
        if check:
            defect = self.trace_preservation_defect()
            if defect > TRACE_PRESERVING_TOL:
                raise QigValidationError(
                    f"channel is not trace preserving (defect {defect:.3e})", field="kraus"
                )

    def trace_preservation_defect(self) -> float:
        """max |P_M(sum K^* K) - 1| entrywise."""
        total = sum(k.conj().T @ k for k in self.kraus)
        pinched = to_dense(from_dense(self.source, total))
        return float(np.abs(pinched - np.eye(self.source.dim)).max())

    def apply(self, h: BlockMatrix) -> BlockMatrix:
        self.source.require_same(h.algebra, "channel source and input")
        dense = to_dense(h)
        out = sum(k @ dense @ k.conj().T for k in self.kraus)
        return from_dense(self.target, out, _image_kind(h))

    __call__ = apply

    def adjoint_apply(self, a: BlockMatrix) -> BlockMatrix:
        self.target.require_same(a.algebra, "channel target and input")
        dense = to_dense(a)
        out = sum(k.conj().T @ dense @ k for k in self.kraus)
        kind = HermitianElement if isinstance(a, (HermitianElement, SelfAdjointFunctional)) else BlockMatrix
        return from_dense(self.source, out, kind)


def apply(T: Channel, h: BlockMatrix) -> BlockMatrix:
    return T.apply(h)


def adjoint_apply(T: Channel, a: BlockMatrix) -> BlockMatrix:
    return T.adjoint_apply(a)


def adjointness_residual(T: Channel, h: BlockMatrix, a: BlockMatrix) -> float:
    """|Tr[T(h) a] - Tr[h T*(a)]|."""
    return abs(pairing(a, T.apply(h)) - pairing(T.adjoint_apply(a), h))


# constructors ----------------------------------------------------------------


def identity_channel(algebra: MatrixAlgebra) -> Channel:
    return Channel(algebra, algebra, (np.eye(algebra.dim),))


def unitary_channel(algebra: MatrixAlgebra, unitary: np.ndarray) -> Channel:
    """h -> U h U^*; U should be block diagonal for an automorphism of the algebra."""
    return Channel(algebra, algebra, (np.asarray(unitary),))


def partial_trace_channel(d_keep: int, d_traced: int) -> Channel:
    """Tr_2 : M_{d_keep} ⊗ M_{d_traced} -> M_{d_keep}."""
    eye = np.eye(d_keep)
    ops = tuple(np.kron(eye, np.eye(d_traced)[j : j + 1, :]) for j in range(d_traced))
    return Channel(MatrixAlgebra.full(d_keep * d_traced), MatrixAlgebra.full(d_keep), ops)


def embedding_channel(algebra: MatrixAlgebra, extra: int) -> Channel:
    """sigma -> sigma ⊕ 0 into one full block of size dim + extra."""
    if extra < 1:
        raise QigValidationError("extra dimension must be >= 1", field="extra")
    k = np.zeros((algebra.dim + extra, algebra.dim))
    k[: algebra.dim, :] = np.eye(algebra.dim)
    return Channel(algebra, MatrixAlgebra.full(algebra.dim + extra), (k,))


def depolarizing_channel(d: int, p: float = 1.0) -> Channel:
    """h -> (1 - p) h + p Tr(h) 1/d on M_d; p = 1 is the completely depolarizing map."""
    if not 0.0 <= p <= 1.0:
        raise QigValidationError(f"depolarizing weight must lie in [0, 1], got {p}", field="p")
    ops = []
    if p < 1.0:
        ops.append(math.sqrt(1.0 - p) * np.eye(d))
    basis = np.eye(d)
    for i in range(d):
        for j in range(d):
            ops.append(math.sqrt(p / d) * np.outer(basis[i], basis[j]))
    return Channel(MatrixAlgebra.full(d), MatrixAlgebra.full(d), tuple(ops))


def measurement_channel(d: int) -> Channel:
    """Computational-basis measurement M_d -> diagonal algebra of d one-by-one blocks."""
    basis = np.eye(d)
    ops = tuple(np.outer(basis[i], basis[i]) for i in range(d))
    return Channel(MatrixAlgebra.full(d), MatrixAlgebra.diagonal(d), ops)


# support restriction -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RestrictedChannel:
    """T compressed to the support of T(rho); ``isometry`` maps the new target into the old."""

    channel: Channel
    original_target: MatrixAlgebra
    isometry: np.ndarray
    restricted: bool

    def compress(self, x: BlockMatrix) -> BlockMatrix:
        """W^* x W for x on the original target."""
        self.original_target.require_same(x.algebra, "compressed element")
        if not self.restricted:
            return x
        out = self.isometry.conj().T @ to_dense(x) @ self.isometry
        return from_dense(self.channel.target, out, _image_kind(x))

    def lift(self, x: BlockMatrix) -> BlockMatrix:
        """W x W^* back on the original target."""
        if not self.restricted:
            return x
        out = self.isometry @ to_dense(x) @ self.isometry.conj().T
        return from_dense(self.original_target, out, _image_kind(x))


def restrict_to_support(
    T: Channel, rho: PositiveFunctional, tol: float = PSD_TOL, *, warn: bool = True
) -> RestrictedChannel:
    image = T.apply(rho)
    if image.min_eigenvalue > tol * image.spectral_norm:
        return RestrictedChannel(T, T.target, np.eye(T.target.dim), restricted=False)
    isometries = support_isometries(image, tol)
    kept = [w for w in isometries if w.shape[1] > 0]
    if not kept:
        raise DomainError("T(rho) vanishes", value=0.0)
    off = T.target.offsets()
    columns = []
    for i, w in enumerate(isometries):
        if w.shape[1] == 0:
            continue
        col = np.zeros((T.target.dim, w.shape[1]), dtype=np.complex128)
        col[off[i] : off[i + 1], :] = w
        columns.append(col)
    isometry = np.hstack(columns)
    new_target = MatrixAlgebra(tuple(w.shape[1] for w in kept))
    if warn:
        warnings.warn(
            f"T(rho) is singular; target restricted from {T.target.block_dims} to {new_target.block_dims}",
            QigWarning,
            stacklevel=2,
        )
    ops = tuple(isometry.conj().T @ k for k in T.kraus)
    return RestrictedChannel(Channel(T.source, new_target, ops), T.target, isometry, restricted=True)


def _prepare(T: Channel, rho: PositiveFunctional, restrict: bool, *, warn: bool = False) -> RestrictedChannel:
    rho.require_faithful()
    if restrict:
        return restrict_to_support(T, rho, warn=warn)
    image = T.apply(rho)
    if not image.min_eigenvalue > PSD_TOL * image.spectral_norm:
        raise DomainError("T(rho) is not faithful and support restriction is disabled", value=image.min_eigenvalue)
    return RestrictedChannel(T, T.target, np.eye(T.target.dim), restricted=False)


# Petz duals ---------------------------------------------------------------------


def _petz_dual(T: Channel, rho: PositiveFunctional, a: BlockMatrix) -> HermitianElement:
    image = T.apply(rho)
    inner = T.apply(sandwich(mat_sqrt(rho), a, SelfAdjointFunctional))
    return sandwich(mat_pow(image, -0.5), inner, HermitianElement)


def petz_dual(T: Channel, rho: PositiveFunctional, a: HermitianElement, *, restrict: bool = True) -> HermitianElement:
    """T*_rho(a) = T(rho)^{-1/2} T(rho^{1/2} a rho^{1/2}) T(rho)^{-1/2}.

    When T(rho) is singular the result lives on the compressed target
    e N e, e = s(T(rho)), where it is unital; a QigWarning records the
    restriction. ``RestrictedChannel.lift`` embeds it back if needed.
    """
    prepared = _prepare(T, rho, restrict, warn=True)
    return _petz_dual(prepared.channel, rho, a)


def _recovery(T: Channel, rho: PositiveFunctional, sigma: BlockMatrix) -> BlockMatrix:
    image = T.apply(rho)
    inner = T.adjoint_apply(sandwich(mat_pow(image, -0.5), sigma, _image_kind(sigma)))
    kind = PositiveFunctional if isinstance(sigma, PositiveFunctional) else SelfAdjointFunctional
    return sandwich(mat_sqrt(rho), inner, kind)


def recovery(
    T: Channel, rho: PositiveFunctional, sigma: SelfAdjointFunctional, *, restrict: bool = True
) -> SelfAdjointFunctional:
    """Petz recovery T_rho(sigma) = rho^{1/2} T*(T(rho)^{-1/2} sigma T(rho)^{-1/2}) rho^{1/2}."""
    prepared = _prepare(T, rho, restrict)
    return _recovery(prepared.channel, rho, prepared.compress(sigma))


def recovery_channel(T: Channel, rho: PositiveFunctional) -> Channel:
    """T_rho as a channel from the (restricted) target back to the source."""
    prepared = _prepare(T, rho, True)
    channel = prepared.channel
    image = to_dense(mat_pow(channel.apply(rho), -0.5))
    root = to_dense(mat_sqrt(rho))
    ops = tuple(root @ k.conj().T @ image for k in channel.kraus)
    return Channel(channel.target, channel.source, ops)


def petz_double_dual_residual(T: Channel, rho: PositiveFunctional, b: HermitianElement) -> float:
    """||(T_rho)*_{T(rho)}(b) - T*(b)||_inf for b on the restricted target."""
    prepared = _prepare(T, rho, True)
    channel = prepared.channel
    back = recovery_channel(T, rho)
    image = channel.apply(rho)
    dual = _petz_dual(back, image, b)
    return operator_norm(dual - channel.adjoint_apply(b))


def recovery_roundtrip_residual(T: Channel, rho: PositiveFunctional, omega: PositiveFunctional) -> float:
    """||T_rho(T(omega)) - omega||_1."""
    return trace_distance(recovery(T, rho, T.apply(omega)), omega)


# monotonicity and contraction -------------------------------------------------------


def f_monotonicity_residual(T: Channel, rho: PositiveFunctional, omega: PositiveFunctional) -> float:
    """F_rho(omega) - F_{T(rho)}(T(omega)); nonnegative by data processing."""
    prepared = _prepare(T, rho, True)
    channel = prepared.channel
    return F_rho(omega, rho) - F_rho(channel.apply(omega), channel.apply(rho))


def lp_contraction_residual(T: Channel, rho: PositiveFunctional, h: BlockMatrix, p: float) -> float:
    """||T(h)||_{p,T(rho)} - ||h||_{p,rho}; <= 0 for a contraction."""
    channel = _prepare(T, rho, True).channel
    return lp_norm(channel.apply(h), channel.apply(rho), p) - lp_norm(h, rho, p)


def log_norm_contraction_residual(
    T: Channel, rho: PositiveFunctional, psi: SelfAdjointFunctional, options: SolverOptions = DEFAULT_OPTIONS
) -> float:
    """||T(psi)||_{log,T(rho)} - ||psi||_{log,rho}."""
    channel = _prepare(T, rho, True).channel
    return log_norm(channel.apply(rho), channel.apply(psi), options) - log_norm(rho, psi, options)


def exp_norm_adjoint_residual(
    T: Channel, rho: PositiveFunctional, b: HermitianElement, options: SolverOptions = DEFAULT_OPTIONS
) -> float:
    """||T*(b)||_{exp,rho} - ||b||_{exp,T(rho)} for b on the restricted target."""
    channel = _prepare(T, rho, True).channel
    return exp_norm(rho, channel.adjoint_apply(b), options) - exp_norm(channel.apply(rho), b, options)


# sufficiency ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    flag: bool
    residual: float


@dataclass(frozen=True)
class SufficiencyReport:
    entropy_preserved: Certificate
    transport: Certificate
    fixed_point_h: Certificate
    recovery_exact: Certificate
    transported_h0: HermitianElement
    restricted: bool = False
    certificates: tuple[str, ...] = field(
        default=("entropy_preserved", "transport", "fixed_point_h", "recovery_exact"), repr=False
    )

    def flags(self) -> dict[str, bool]:
        return {name: getattr(self, name).flag for name in self.certificates}

    @property
    def consistent(self) -> bool:
        return len(set(self.flags().values())) == 1

    @property
    def sufficient(self) -> bool:
        return all(self.flags().values())

    @property
    def max_residual(self) -> float:
        return max(getattr(self, name).residual for name in self.certificates)


def sufficiency_report(
    T: Channel, rho: PositiveFunctional, h: HermitianElement, options: SolverOptions = DEFAULT_OPTIONS
) -> SufficiencyReport:
    """Check sufficiency of T for {rho, rho^h} through four equivalent certificates."""
    prepared = _prepare(T, rho, True)
    channel = prepared.channel
    tol = options.sufficiency_tol

    shifted = perturbed(rho, h)
    image = channel.apply(rho)
    shifted_image = channel.apply(shifted)
    h0 = _petz_dual(channel, rho, h)

    entropy = abs(relative_entropy(shifted_image, image) - relative_entropy(shifted, rho))
    transport = trace_distance(shifted_image, perturbed(image, h0))
    fixed_point = operator_norm(channel.adjoint_apply(h0) - h)
    recovered = _recovery(channel, rho, shifted_image)
    recovery_gap = trace_distance(recovered, shifted)

    return SufficiencyReport(
        entropy_preserved=Certificate(entropy < tol, entropy),
        transport=Certificate(transport < tol, transport),
        fixed_point_h=Certificate(fixed_point < tol, fixed_point),
        recovery_exact=Certificate(recovery_gap < tol, recovery_gap),
        transported_h0=h0,
        restricted=prepared.restricted,
    )


@dataclass(frozen=True)
class TransportedElement:
    element: HermitianElement
    transported: HermitianElement
    transport_residual: float
    norm_residual: float

    @property
    def sufficient(self) -> bool:
        return self.transport_residual < DEFAULT_OPTIONS.sufficiency_tol


def transport_family(
    T: Channel,
    rho: PositiveFunctional,
    family: Sequence[HermitianElement],
    options: SolverOptions = DEFAULT_OPTIONS,
    *,
    with_norms: bool = True,
) -> list[TransportedElement]:
    """Map each h to T*_rho(h), reporting ||T(rho^h) - T(rho)^{h0}||_1 and the exp-norm change."""
    channel = _prepare(T, rho, True).channel
    image = channel.apply(rho)
    out = []
    for h in family:
        h0 = _petz_dual(channel, rho, h)
        residual = trace_distance(channel.apply(perturbed(rho, h)), perturbed(image, h0))
        norm_residual = (
            abs(exp_norm(rho, h, options) - exp_norm(image, h0, options)) if with_norms else math.nan
        )
        out.append(TransportedElement(h, h0, residual, norm_residual))
    return out
