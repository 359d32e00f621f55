"""Block-diagonal matrix algebras, functional calculus and the trace pairing.

An algebra is a direct sum of full matrix blocks. Elements of the algebra
(observables) are ``HermitianElement`` values; normal functionals are stored
through their density matrices as ``SelfAdjointFunctional`` and
``PositiveFunctional``. All values are immutable.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass, field
from functools import cached_property
from numbers import Number
from typing import Callable, Sequence

import numpy as np
from scipy import linalg

from .errors import DomainError, QigValidationError

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-12

SpectralGuard = Callable[[np.ndarray], np.ndarray]


def positive(values: np.ndarray) -> np.ndarray:
    return values > 0


def nonnegative(values: np.ndarray) -> np.ndarray:
    return values >= 0


@dataclass(frozen=True)
class MatrixAlgebra:
    block_dims: tuple[int, ...]

    def __post_init__(self):
        try:
            dims = tuple(int(d) for d in self.block_dims)
        except (TypeError, ValueError) as exc:
            raise QigValidationError(
                f"block_dims must be integers, got {self.block_dims!r}", field="block_dims"
            ) from exc
        if not dims:
            raise QigValidationError("an algebra needs at least one block", field="block_dims")
        for i, d in enumerate(dims):
            if d < 1:
                raise QigValidationError(
                    f"block dimension must be >= 1, got {d}", field=f"block_dims[{i}]"
                )
        object.__setattr__(self, "block_dims", dims)

    @classmethod
    def full(cls, n: int) -> MatrixAlgebra:
        return cls((n,))

    @classmethod
    def diagonal(cls, n: int) -> MatrixAlgebra:
        return cls((1,) * n)

    @property
    def dim(self) -> int:
        return sum(self.block_dims)

    @property
    def is_commutative(self) -> bool:
        return all(d == 1 for d in self.block_dims)

    def offsets(self) -> list[int]:
        out = [0]
        for d in self.block_dims:
            out.append(out[-1] + d)
        return out

    def identity(self) -> HermitianElement:
        return HermitianElement(self, tuple(np.eye(d) for d in self.block_dims))

    def unit_density(self) -> PositiveFunctional:
        """The trace functional, i.e. the density matrix of ones on the diagonal."""
        return PositiveFunctional(self, tuple(np.eye(d) for d in self.block_dims))

    def zeros(self, kind: type[BlockMatrix] | None = None) -> BlockMatrix:
        kind = kind or HermitianElement
        return kind(self, tuple(np.zeros((d, d)) for d in self.block_dims))

    def require_same(self, other: MatrixAlgebra, what: str = "operands") -> None:
        if self != other:
            raise QigValidationError(
                f"{what} live on different algebras: {self.block_dims} vs {other.block_dims}",
                field="algebra",
            )


@dataclass(frozen=True, eq=False)
class BlockMatrix:
    """A general (not necessarily Hermitian) element of a block algebra."""

    algebra: MatrixAlgebra
    blocks: tuple[np.ndarray, ...]
    check: InitVar[bool] = True
    asymmetry: float = field(init=False, default=0.0, repr=False)

    def __post_init__(self, check: bool):
        if not isinstance(self.algebra, MatrixAlgebra):
            raise QigValidationError("algebra must be a MatrixAlgebra", field="algebra")
        dims = self.algebra.block_dims
        raw = list(self.blocks)
        if len(raw) != len(dims):
            raise QigValidationError(
                f"expected {len(dims)} blocks, got {len(raw)}", field="blocks"
            )
        blocks = []
        for i, (b, n) in enumerate(zip(raw, dims)):
            arr = np.array(b, dtype=np.complex128)
            if arr.shape != (n, n):
                raise QigValidationError(
                    f"block {i} has shape {arr.shape}, expected {(n, n)}",
                    field=f"blocks[{i}]",
                )
            if not np.all(np.isfinite(arr)):
                raise QigValidationError(f"block {i} has non-finite entries", field=f"blocks[{i}]")
            blocks.append(arr)
        blocks = self._normalize(blocks, check)
        for b in blocks:
            b.setflags(write=False)
        object.__setattr__(self, "blocks", tuple(blocks))

    def _normalize(self, blocks: list[np.ndarray], check: bool) -> list[np.ndarray]:
        return blocks

    @classmethod
    def _trusted(cls, algebra: MatrixAlgebra, blocks: Sequence[np.ndarray]):
        return cls(algebra, tuple(blocks), check=False)

    # arithmetic -----------------------------------------------------------

    def _sum_kind(self, other: BlockMatrix, subtract: bool) -> type[BlockMatrix] | None:
        a, b = type(self), type(other)
        if a is BlockMatrix or b is BlockMatrix:
            return BlockMatrix
        if a is HermitianElement and b is HermitianElement:
            return HermitianElement
        if issubclass(a, SelfAdjointFunctional) and issubclass(b, SelfAdjointFunctional):
            if a is PositiveFunctional and b is PositiveFunctional and not subtract:
                return PositiveFunctional
            return SelfAdjointFunctional
        return None

    def _combine(self, other, subtract: bool):
        if not isinstance(other, BlockMatrix):
            return NotImplemented
        kind = self._sum_kind(other, subtract)
        if kind is None:
            return NotImplemented
        self.algebra.require_same(other.algebra)
        sign = -1.0 if subtract else 1.0
        return kind._trusted(
            self.algebra, [x + sign * y for x, y in zip(self.blocks, other.blocks)]
        )

    def __add__(self, other):
        return self._combine(other, subtract=False)

    def __sub__(self, other):
        return self._combine(other, subtract=True)

    def _scaled_kind(self, c: complex) -> type[BlockMatrix]:
        if complex(c).imag != 0:
            return BlockMatrix
        kind = type(self)
        if kind is PositiveFunctional and complex(c).real < 0:
            return SelfAdjointFunctional
        return kind

    def __mul__(self, c):
        if not isinstance(c, Number):
            return NotImplemented
        kind = self._scaled_kind(c)
        if kind is not BlockMatrix:
            c = float(complex(c).real)
        return kind._trusted(self.algebra, [c * b for b in self.blocks])

    __rmul__ = __mul__

    def __truediv__(self, c):
        if not isinstance(c, Number):
            return NotImplemented
        return self * (1.0 / c)

    def __neg__(self):
        return self * -1.0

    def __matmul__(self, other):
        if not isinstance(other, BlockMatrix):
            return NotImplemented
        self.algebra.require_same(other.algebra)
        return BlockMatrix._trusted(self.algebra, [x @ y for x, y in zip(self.blocks, other.blocks)])

    def dagger(self) -> BlockMatrix:
        return type(self)._trusted(self.algebra, [b.conj().T for b in self.blocks])

    def tr(self) -> complex:
        return complex(sum(np.trace(b) for b in self.blocks))

    def allclose(self, other: BlockMatrix, atol: float = 1e-10) -> bool:
        return self.algebra == other.algebra and frobenius_distance(self, other) <= atol

    def __repr__(self) -> str:
        return f"{type(self).__name__}(block_dims={self.algebra.block_dims})"


class _HermitianMixin(BlockMatrix):
    def _normalize(self, blocks: list[np.ndarray], check: bool) -> list[np.ndarray]:
        worst = 0.0
        out = []
        for i, b in enumerate(blocks):
            scale = float(np.linalg.norm(b))
            dev = float(np.linalg.norm(b - b.conj().T))
            rel = dev / scale if scale > 0 else 0.0
            if check and rel > HERMITIAN_TOL:
                raise QigValidationError(
                    f"block {i} is not Hermitian (relative deviation {rel:.3e})",
                    field=f"blocks[{i}]",
                )
            worst = max(worst, rel)
            out.append((b + b.conj().T) / 2)
        object.__setattr__(self, "asymmetry", worst)
        return out

    @cached_property
    def spectrum(self) -> Spectrum:
        values = []
        vectors = []
        for b in self.blocks:
            lam, vec = linalg.eigh(b)
            values.append(lam)
            vectors.append(vec)
        return Spectrum(tuple(values), tuple(vectors))

    @property
    def min_eigenvalue(self) -> float:
        return float(min(lam.min() for lam in self.spectrum.eigenvalues))

    @property
    def max_eigenvalue(self) -> float:
        return float(max(lam.max() for lam in self.spectrum.eigenvalues))

    @property
    def spectral_norm(self) -> float:
        return float(max(np.abs(lam).max() for lam in self.spectrum.eigenvalues))


class HermitianElement(_HermitianMixin):
    """A self-adjoint element a of the algebra (observable or perturbation)."""

    def as_functional(self) -> SelfAdjointFunctional:
        return SelfAdjointFunctional._trusted(self.algebra, self.blocks)


class SelfAdjointFunctional(_HermitianMixin):
    """A self-adjoint normal functional, stored as its density matrix."""

    def __call__(self, a: HermitianElement) -> float:
        return pairing(a, self)

    def as_element(self) -> HermitianElement:
        return HermitianElement._trusted(self.algebra, self.blocks)

    @property
    def total(self) -> float:
        """psi(1)."""
        return float(sum(np.trace(b).real for b in self.blocks))


class PositiveFunctional(SelfAdjointFunctional):
    """A positive normal functional; ``trace`` caches omega(1)."""

    trace: float

    def _normalize(self, blocks: list[np.ndarray], check: bool) -> list[np.ndarray]:
        blocks = super()._normalize(blocks, check)
        if check:
            spectra = [linalg.eigvalsh(b) for b in blocks]
            norm = max(float(np.abs(lam).max()) for lam in spectra)
            for i, lam in enumerate(spectra):
                low = float(lam.min())
                if low < -PSD_TOL * norm:
                    raise QigValidationError(
                        f"block {i} is not positive semidefinite (eigenvalue {low:.3e})",
                        field=f"blocks[{i}]",
                    )
        object.__setattr__(self, "trace", float(sum(np.trace(b).real for b in blocks)))
        return blocks

    @cached_property
    def clipped_spectrum(self) -> Spectrum:
        """Spectrum with rounding-level negative eigenvalues set to zero."""
        spec = self.spectrum
        norm = self.spectral_norm
        values = tuple(
            np.where((lam < 0) & (lam >= -PSD_TOL * norm), 0.0, lam) for lam in spec.eigenvalues
        )
        return Spectrum(values, spec.eigenvectors)

    def faithful(self) -> bool:
        return min(lam.min() for lam in self.clipped_spectrum.eigenvalues) > 0

    def require_faithful(self, what: str = "rho") -> None:
        if not self.faithful():
            low = min(float(lam.min()) for lam in self.clipped_spectrum.eigenvalues)
            raise DomainError(f"{what} is not faithful (minimum eigenvalue {low:.3e})", value=low)

    def normalized(self) -> PositiveFunctional:
        if self.trace <= 0:
            raise DomainError("cannot normalize the zero functional", value=self.trace)
        return self * (1.0 / self.trace)


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: tuple[np.ndarray, ...]
    eigenvectors: tuple[np.ndarray, ...]

    def reconstruct(self) -> list[np.ndarray]:
        return [u @ (lam[:, None] * u.conj().T) for lam, u in zip(self.eigenvalues, self.eigenvectors)]

    def flat(self) -> np.ndarray:
        return np.concatenate(self.eigenvalues)


def _as_hermitian(x: BlockMatrix) -> _HermitianMixin:
    if isinstance(x, _HermitianMixin):
        return x
    return HermitianElement(x.algebra, x.blocks)


def eig_herm(x: BlockMatrix) -> Spectrum:
    """Blockwise eigendecomposition; non-Hermitian input raises a validation error."""
    return _as_hermitian(x).spectrum


def mat_fn(
    x: BlockMatrix,
    f: Callable[[np.ndarray], np.ndarray],
    domain_guard: SpectralGuard | None = None,
    *,
    kind: type[BlockMatrix] | None = None,
    name: str = "f",
):
    """Apply a scalar function to a Hermitian block matrix through its spectrum.

    PSD inputs have rounding-level negative eigenvalues clipped to zero first.
    The result keeps the kind of ``x`` unless ``kind`` is given; a
    ``PositiveFunctional`` whose image has negative values becomes a
    ``SelfAdjointFunctional``.
    """
    x = _as_hermitian(x)
    spec = x.clipped_spectrum if isinstance(x, PositiveFunctional) else x.spectrum
    images = []
    for lam in spec.eigenvalues:
        if domain_guard is not None:
            bad = ~np.asarray(domain_guard(lam), dtype=bool)
            if bad.any():
                value = float(lam[bad][0])
                raise DomainError(f"eigenvalue {value:.6g} outside the domain of {name}", value=value)
        with np.errstate(divide="ignore", invalid="ignore"):
            images.append(np.asarray(f(lam), dtype=np.float64))
    if kind is None:
        kind = type(x)
        if kind is PositiveFunctional and min(v.min() for v in images) < 0:
            kind = SelfAdjointFunctional
    blocks = [u @ (v[:, None] * u.conj().T) for v, u in zip(images, spec.eigenvectors)]
    return kind._trusted(x.algebra, blocks)


def mat_log(x: BlockMatrix) -> HermitianElement:
    return mat_fn(x, np.log, positive, kind=HermitianElement, name="log")


def mat_exp(x: BlockMatrix) -> PositiveFunctional:
    return mat_fn(x, np.exp, kind=PositiveFunctional, name="exp")


def mat_pow(x: BlockMatrix, s: float, *, kind: type[BlockMatrix] | None = None):
    guard = positive if s < 0 else nonnegative
    return mat_fn(x, lambda lam: np.power(lam, s), guard, kind=kind, name=f"t^{s:g}")


def mat_sqrt(x: BlockMatrix, *, kind: type[BlockMatrix] | None = None):
    return mat_pow(x, 0.5, kind=kind)


def sandwich(outer: BlockMatrix, inner: BlockMatrix, kind: type[BlockMatrix] = BlockMatrix):
    """outer · inner · outer for Hermitian ``outer``."""
    outer.algebra.require_same(inner.algebra)
    blocks = [o @ i @ o for o, i in zip(outer.blocks, inner.blocks)]
    return kind._trusted(outer.algebra, blocks)


def pairing(a: BlockMatrix, psi: BlockMatrix) -> float:
    """The duality psi(a) = Re Tr[psi a]."""
    a.algebra.require_same(psi.algebra, "pairing arguments")
    return float(sum(np.einsum("ij,ji->", p, x).real for p, x in zip(psi.blocks, a.blocks)))


def singular_values(x: BlockMatrix) -> np.ndarray:
    return np.concatenate([linalg.svdvals(b) for b in x.blocks])


def schatten_norm(x: BlockMatrix, p: float) -> float:
    p = float(p)
    if not p >= 1:
        raise QigValidationError(f"Schatten exponent must be >= 1, got {p}", field="p")
    s = singular_values(x)
    if s.size == 0 or s.max() == 0:
        return 0.0
    if np.isinf(p):
        return float(s.max())
    top = s.max()
    return float(top * np.sum((s / top) ** p) ** (1.0 / p))


def operator_norm(x: BlockMatrix) -> float:
    return schatten_norm(x, np.inf)


def trace_distance(x: BlockMatrix, y: BlockMatrix) -> float:
    x.algebra.require_same(y.algebra)
    return schatten_norm(BlockMatrix._trusted(x.algebra, [a - b for a, b in zip(x.blocks, y.blocks)]), 1)


def frobenius_distance(x: BlockMatrix, y: BlockMatrix) -> float:
    x.algebra.require_same(y.algebra)
    return float(np.sqrt(sum(np.linalg.norm(a - b) ** 2 for a, b in zip(x.blocks, y.blocks))))


def spectral_split(psi: SelfAdjointFunctional) -> tuple[PositiveFunctional, PositiveFunctional]:
    """Jordan decomposition psi = psi_plus - psi_minus with orthogonal supports."""
    plus = mat_fn(psi, lambda lam: np.maximum(lam, 0.0), kind=PositiveFunctional)
    minus = mat_fn(psi, lambda lam: np.maximum(-lam, 0.0), kind=PositiveFunctional)
    return plus, minus


def support_isometries(x: BlockMatrix, tol: float = PSD_TOL) -> tuple[np.ndarray, ...]:
    """Per block, an isometry onto the span of eigenvectors above tol·‖x‖."""
    x = _as_hermitian(x)
    norm = x.spectral_norm
    out = []
    for lam, u in zip(x.spectrum.eigenvalues, x.spectrum.eigenvectors):
        out.append(u[:, lam > tol * norm])
    return tuple(out)


def support_projection(x: BlockMatrix, tol: float = PSD_TOL) -> HermitianElement:
    blocks = [w @ w.conj().T for w in support_isometries(x, tol)]
    return HermitianElement._trusted(x.algebra, blocks)


def as_positive(x: BlockMatrix) -> PositiveFunctional:
    """Validate ``x`` as a positive functional."""
    if isinstance(x, PositiveFunctional):
        return x
    return PositiveFunctional(x.algebra, x.blocks)


def to_dense(x: BlockMatrix) -> np.ndarray:
    return linalg.block_diag(*x.blocks)


def from_dense(algebra: MatrixAlgebra, matrix: np.ndarray, kind: type[BlockMatrix] = BlockMatrix):
    """Pinch a dense matrix onto the block-diagonal structure of ``algebra``."""
    matrix = np.asarray(matrix)
    if matrix.shape != (algebra.dim, algebra.dim):
        raise QigValidationError(
            f"dense matrix has shape {matrix.shape}, expected {(algebra.dim, algebra.dim)}",
            field="matrix",
        )
    off = algebra.offsets()
    blocks = [matrix[off[i] : off[i + 1], off[i] : off[i + 1]] for i in range(len(off) - 1)]
    return kind._trusted(algebra, blocks)


def hermitian(algebra: MatrixAlgebra, blocks: Sequence) -> HermitianElement:
    return HermitianElement(algebra, tuple(blocks))


def diagonal_state(values: Sequence[float]) -> PositiveFunctional:
    """A functional on the commutative algebra of len(values) one-by-one blocks."""
    algebra = MatrixAlgebra.diagonal(len(values))
    return PositiveFunctional(algebra, tuple(np.array([[v]]) for v in values))


def diagonal_element(values: Sequence[float]) -> HermitianElement:
    algebra = MatrixAlgebra.diagonal(len(values))
    return HermitianElement(algebra, tuple(np.array([[v]]) for v in values))
