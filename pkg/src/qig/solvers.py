"""First-order ascent/descent with Barzilai-Borwein steps, and Minkowski bisection."""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Callable, Generic, TypeVar
import warnings

from .algebra import BlockMatrix, pairing
from .config import DEFAULT_OPTIONS, SolverOptions
from .errors import ConvergenceError, QigValidationError, QigWarning

V = TypeVar("V", bound=BlockMatrix)

MAX_HALVINGS = 60


@dataclass(frozen=True)
class AscentResult(Generic[V]):
    point: V
    value: float
    gradient_norm: float
    iterations: int
    stop_reason: str


def _norm(g: BlockMatrix) -> float:
    return math.sqrt(max(pairing(g, g), 0.0))


def maximize_concave(
    objective: Callable[[V], float],
    gradient: Callable[[V], V],
    x0: V,
    options: SolverOptions = DEFAULT_OPTIONS,
    *,
    feasible: Callable[[V], bool] | None = None,
    label: str = "ascent",
) -> AscentResult[V]:
    """Gradient ascent with a Barzilai-Borwein trial step and Armijo backtracking.

    Stops when the gradient norm drops below ``options.tol`` or the objective
    changes by less than ``options.stall_tol``. Trial points rejected by
    ``feasible`` or with a non-finite objective are backtracked.
    """
    x = x0
    f = objective(x)
    if not math.isfinite(f):
        raise QigValidationError(f"{label}: objective is not finite at the starting point", field="x0")
    g = gradient(x)
    gn = _norm(g)
    step = 1.0
    prev_x: V | None = None
    prev_g: V | None = None

    for it in range(options.max_iter):
        if gn < options.tol:
            return AscentResult(x, f, gn, it, "gradient")
        if prev_x is not None:
            s = x - prev_x
            y = g - prev_g
            sy = pairing(s, y)
            if sy != 0:
                step = pairing(s, s) / abs(sy)
            else:
                step *= 2.0

        t = step
        accepted = False
        for _ in range(MAX_HALVINGS):
            candidate = x + g * t
            if feasible is None or feasible(candidate):
                fc = objective(candidate)
                if math.isfinite(fc) and fc >= f + options.armijo * t * gn * gn:
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            return _stalled(x, f, gn, it, options, label)

        prev_x, prev_g = x, g
        change = fc - f
        x, f = candidate, fc
        g = gradient(x)
        gn = _norm(g)
        if abs(change) < options.stall_tol:
            if gn < options.tol:
                return AscentResult(x, f, gn, it + 1, "gradient")
            return _stalled(x, f, gn, it + 1, options, label)

    raise ConvergenceError(
        f"{label}: no convergence after {options.max_iter} iterations (gradient norm {gn:.3e})",
        best_value=f,
        gradient_norm=gn,
        iterations=options.max_iter,
    )


def _stalled(x, f: float, gn: float, it: int, options: SolverOptions, label: str) -> AscentResult:
    if gn > math.sqrt(options.tol):
        warnings.warn(
            f"{label} stalled with gradient norm {gn:.3e} after {it} iterations",
            QigWarning,
            stacklevel=3,
        )
    return AscentResult(x, f, gn, it, "stall")


def minimize_convex(
    objective: Callable[[V], float],
    gradient: Callable[[V], V],
    x0: V,
    options: SolverOptions = DEFAULT_OPTIONS,
    *,
    feasible: Callable[[V], bool] | None = None,
    label: str = "descent",
) -> AscentResult[V]:
    result = maximize_concave(
        lambda x: -objective(x),
        lambda x: -gradient(x),
        x0,
        options,
        feasible=feasible,
        label=label,
    )
    return AscentResult(
        result.point, -result.value, result.gradient_norm, result.iterations, result.stop_reason
    )


@dataclass(frozen=True)
class BisectionResult:
    scale: float
    level: float
    iterations: int


def minkowski_scale(
    level_at: Callable[[float], float],
    options: SolverOptions = DEFAULT_OPTIONS,
) -> BisectionResult:
    """Smallest lam > 0 with level_at(lam) <= 1, for level_at nonincreasing in lam.

    Brackets by doubling or halving from lam = 1, then bisects to relative
    ``options.bisection_tol``. +inf levels count as above 1. A bracket that
    leaves [1/bracket_cap, bracket_cap] raises instead of returning the cap.
    """

    def below(lam: float) -> tuple[bool, float]:
        value = level_at(lam)
        return (not math.isnan(value)) and value <= 1.0, value

    lam = 1.0
    ok, value = below(lam)
    iterations = 1
    if ok:
        hi, hi_value = lam, value
        while True:
            lam *= 0.5
            if lam < 1.0 / options.bracket_cap:
                raise ConvergenceError(
                    "Young function stays below 1 for every scale above the bracket floor",
                    best_value=hi,
                    iterations=iterations,
                )
            ok, value = below(lam)
            iterations += 1
            if not ok:
                lo = lam
                break
            hi, hi_value = lam, value
    else:
        lo = lam
        while True:
            lam *= 2.0
            if lam > options.bracket_cap:
                raise QigValidationError(
                    "Young function stays above 1 for every scale below the bracket cap",
                    field="x",
                )
            ok, value = below(lam)
            iterations += 1
            if ok:
                hi, hi_value = lam, value
                break
            lo = lam

    for _ in range(options.bisection_max_iter):
        if hi - lo <= options.bisection_tol * hi:
            break
        mid = 0.5 * (lo + hi)
        ok, value = below(mid)
        iterations += 1
        if ok:
            hi, hi_value = mid, value
        else:
            lo = mid
    return BisectionResult(hi, hi_value, iterations)
