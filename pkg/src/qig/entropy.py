from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Iterable, Sequence

import numpy as np
from scipy import linalg

from .algebra import (
    PSD_TOL,
    BlockMatrix,
    PositiveFunctional,
    SelfAdjointFunctional,
    as_positive,
    pairing,
)
from .errors import QigValidationError


def _same_blocks(x: BlockMatrix, y: BlockMatrix) -> bool:
    return x is y or all(np.array_equal(a, b) for a, b in zip(x.blocks, y.blocks))


def relative_entropy(
    omega: PositiveFunctional, rho: PositiveFunctional, *, support_tol: float = PSD_TOL
) -> float:
    """S(omega||rho) = Tr omega (log omega - log rho), or +inf off the support of rho."""
    omega = as_positive(omega)
    rho = as_positive(rho)
    omega.algebra.require_same(rho.algebra, "omega and rho")
    if omega.trace == 0 or _same_blocks(omega, rho):
        return 0.0

    w_spec = omega.clipped_spectrum
    r_spec = rho.clipped_spectrum
    w_cut = support_tol * omega.spectral_norm
    r_cut = support_tol * rho.spectral_norm

    leak = 0.0
    cross = 0.0
    self_term = 0.0
    for w_block, w_vals, r_vals, r_vecs in zip(
        omega.blocks, w_spec.eigenvalues, r_spec.eigenvalues, r_spec.eigenvectors
    ):
        # diagonal of omega in the eigenbasis of rho
        weights = np.einsum("ji,jk,ki->i", r_vecs.conj(), w_block, r_vecs).real
        kernel = r_vals <= r_cut
        leak += float(weights[kernel].sum())
        cross += float(np.dot(weights[~kernel], np.log(r_vals[~kernel])))
        kept = w_vals[w_vals > w_cut]
        self_term += float(np.dot(kept, np.log(kept)))

    if leak > support_tol * omega.spectral_norm:
        return math.inf
    return self_term - cross


def F_rho(omega: SelfAdjointFunctional, rho: PositiveFunctional) -> float:
    """F_rho(omega) = S(omega||rho) - omega(1); +inf for non-positive omega."""
    rho = as_positive(rho)
    if not rho.faithful():
        raise QigValidationError("F_rho needs a faithful rho", field="rho")
    if not isinstance(omega, PositiveFunctional):
        if omega.min_eigenvalue < -PSD_TOL * omega.spectral_norm:
            return math.inf
        omega = PositiveFunctional._trusted(omega.algebra, omega.blocks)
    return relative_entropy(omega, rho) - omega.trace


def f_lower_bound(omega: PositiveFunctional, rho: PositiveFunctional) -> float:
    """omega(1)(log(omega(1)/rho(1)) - 1), the sharp lower bound of F_rho(omega)."""
    w = omega.trace
    if w == 0:
        return 0.0
    return w * (math.log(w / rho.trace) - 1.0)


def donald_residual(omega_parts: Sequence[PositiveFunctional], rho: PositiveFunctional) -> float:
    if not omega_parts:
        raise QigValidationError("at least one part is required", field="omega_parts")
    omega = omega_parts[0]
    for part in omega_parts[1:]:
        omega = omega + part
    lhs = relative_entropy(omega, rho) + sum(relative_entropy(w, omega) for w in omega_parts)
    rhs = sum(relative_entropy(w, rho) for w in omega_parts)
    if not (math.isfinite(lhs) and math.isfinite(rhs)):
        return 0.0 if lhs == rhs else math.inf
    return abs(lhs - rhs)


@dataclass(frozen=True, eq=False)
class StepFunction:
    """x(t) on (1/n, inf): values[j] on (t_j, t_{j+1}], the identity past the last breakpoint."""

    n: int
    breakpoints: tuple[float, ...]
    values: tuple[BlockMatrix, ...]
    tail_value: BlockMatrix | None = field(default=None)

    def __post_init__(self):
        if self.n < 1:
            raise QigValidationError(f"n must be >= 1, got {self.n}", field="n")
        t = np.asarray(self.breakpoints, dtype=float)
        if t.size == 0:
            raise QigValidationError("at least one breakpoint is required", field="breakpoints")
        if not math.isclose(t[0], 1.0 / self.n, rel_tol=1e-12):
            raise QigValidationError(
                f"first breakpoint must be 1/n = {1.0 / self.n}, got {t[0]}", field="breakpoints[0]"
            )
        if np.any(np.diff(t) <= 0):
            raise QigValidationError("breakpoints must be strictly increasing", field="breakpoints")
        if len(self.values) != t.size - 1:
            raise QigValidationError(
                f"{t.size - 1} interval values expected, got {len(self.values)}", field="values"
            )
        algebras = {v.algebra for v in self.values}
        if len(algebras) > 1:
            raise QigValidationError("step values live on different algebras", field="values")
        if self.tail_value is not None:
            eye = self.tail_value.algebra.identity()
            if any(not np.allclose(a, b, atol=1e-12) for a, b in zip(self.tail_value.blocks, eye.blocks)):
                raise QigValidationError("the tail value must be the identity", field="tail_value")
        object.__setattr__(self, "breakpoints", tuple(float(v) for v in t))
        object.__setattr__(self, "values", tuple(self.values))

    @classmethod
    def constant_one(cls, n: int = 1) -> "StepFunction":
        return cls(n, (1.0 / n,), ())


def kosaki_lower_bound(omega: PositiveFunctional, rho: PositiveFunctional, s: StepFunction) -> float:
    """Evaluate the variational bracket for one step function; never exceeds S(omega||rho)."""
    omega.algebra.require_same(rho.algebra, "omega and rho")
    for i, x in enumerate(s.values):
        if x.algebra != rho.algebra:
            raise QigValidationError("step value algebra differs from rho", field=f"values[{i}]")
    eye = rho.algebra.identity()
    t = s.breakpoints
    total = omega.trace * math.log(s.n)
    for j, x in enumerate(s.values):
        lo, hi = t[j], t[j + 1]
        y = eye - x
        y_cost = pairing(y.dagger() @ y, omega)
        x_cost = pairing(x @ x.dagger(), rho)
        total -= y_cost * math.log(hi / lo) + x_cost * (1.0 / lo - 1.0 / hi)
    total -= rho.trace / t[-1]
    return total


def optimal_step_value(omega: PositiveFunctional, rho: PositiveFunctional, t: float) -> BlockMatrix:
    """Minimizer of omega(y*y) + rho(xx*)/t with y = 1 - x: solves (rho/t) x + x omega = omega."""
    blocks = [
        linalg.solve_sylvester(r / t, w, w) for r, w in zip(rho.blocks, omega.blocks)
    ]
    return BlockMatrix._trusted(rho.algebra, blocks)


def geometric_step_function(
    omega: PositiveFunctional,
    rho: PositiveFunctional,
    n: int,
    per_decade: int = 16,
    decades: int = 12,
) -> StepFunction:
    """Step function on a geometric grid from 1/n, valued at pointwise minimizers.

    Each cell takes the minimizer at its geometric midpoint. The resulting
    bound approaches S(omega||rho) as n, per_decade and decades grow.
    """
    if per_decade < 1 or decades < 1:
        raise QigValidationError("per_decade and decades must be >= 1", field="per_decade")
    rho.require_faithful()
    m = per_decade * decades
    t = np.logspace(0.0, float(decades), m + 1) / n
    t[0] = 1.0 / n
    values = tuple(optimal_step_value(omega, rho, math.sqrt(t[j] * t[j + 1])) for j in range(m))
    return StepFunction(n, tuple(t), values)


def kosaki_supremum(
    omega: PositiveFunctional, rho: PositiveFunctional, family: Iterable[StepFunction]
) -> float:
    best = -math.inf
    for s in family:
        best = max(best, kosaki_lower_bound(omega, rho, s))
    return best


def renyi_f(omega: PositiveFunctional, rho: PositiveFunctional, alpha: float) -> float:
    """(1/(alpha-1)) log(||h_omega||_{alpha,rho}^alpha / omega(1)); increases to S/omega(1) as alpha -> 1."""
    from .kosaki import lp_norm

    alpha = float(alpha)
    if not alpha > 1:
        raise QigValidationError(f"alpha must be > 1, got {alpha}", field="alpha")
    if omega.trace <= 0:
        raise QigValidationError("omega must be nonzero", field="omega")
    if math.isinf(alpha):
        raise QigValidationError("alpha must be finite", field="alpha")
    norm = lp_norm(omega, rho, alpha)
    return (alpha * math.log(norm) - math.log(omega.trace)) / (alpha - 1.0)


def classical_kl(omega: Sequence[float], rho: Sequence[float]) -> float:
    """Sum omega_i (log omega_i - log rho_i) for nonnegative vectors."""
    w = np.asarray(omega, dtype=float)
    r = np.asarray(rho, dtype=float)
    if np.any((w > 0) & (r == 0)):
        return math.inf
    mask = w > 0
    return float(np.sum(w[mask] * (np.log(w[mask]) - np.log(r[mask]))))

