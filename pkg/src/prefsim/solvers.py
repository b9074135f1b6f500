"""Scalar solvers: sign bisection, golden-section minimization, gradient descent.

All three are deliberately small and deterministic.  The fitting routines
lean on sign bisection of analytic derivatives (scale-invariant, so it is
immune to losses that are nearly flat in value); golden section serves
callers with only function values; gradient descent exists as an independent
cross-check of the specialized paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import NumericError

__all__ = [
    "ScalarMinResult",
    "bisect_root",
    "bisect_rising_sign",
    "expand_to_sign_change",
    "minimize_scalar_convex",
    "gradient_descent_scalar",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ScalarMinResult:
    argmin: float
    value: float
    converged: bool
    minimizer_exists: bool


def bisect_root(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    tol: float,
    max_iter: int = 200,
) -> tuple[float, bool]:
    """Root of a function with fn(lo) < 0 < fn(hi), by bisection.

    The caller guarantees the sign change; monotonicity is not required for
    convergence to *a* root.  Returns (root, converged).
    """
    f_lo = fn(lo)
    f_hi = fn(hi)
    if math.isnan(f_lo) or math.isnan(f_hi):
        raise NumericError("bisection endpoint evaluated to NaN")
    if f_lo > 0.0 or f_hi < 0.0:
        raise NumericError(f"no sign change on bracket: f({lo})={f_lo}, f({hi})={f_hi}")
    for _ in range(max_iter):
        if hi - lo <= tol:
            return 0.5 * (lo + hi), True
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if math.isnan(f_mid):
            raise NumericError("bisection midpoint evaluated to NaN")
        if f_mid < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), hi - lo <= tol


def bisect_rising_sign(
    deriv: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    tol: float,
    max_iter: int = 200,
) -> tuple[float, bool]:
    """Leftmost point where a one-sided derivative turns nonnegative.

    Maintains deriv(lo) < 0 <= deriv(hi), so for a convex objective with a
    right-derivative convention at kinks the limit is the leftmost minimizer.
    """
    if not deriv(lo) < 0.0:
        raise NumericError("lower endpoint must have negative derivative")
    if not deriv(hi) >= 0.0:
        raise NumericError("upper endpoint must have nonnegative derivative")
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if deriv(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return hi, hi - lo <= tol


def expand_to_sign_change(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    limit_lo: float,
    limit_hi: float,
    grow: float = 2.0,
) -> tuple[float, float] | None:
    """Grow [lo, hi] geometrically until fn(lo) < 0 <= fn(hi); None if never."""
    center = 0.5 * (lo + hi)
    while fn(lo) >= 0.0:
        if lo <= limit_lo:
            return None
        lo = max(limit_lo, center - (center - lo) * grow)
    while fn(hi) < 0.0:
        if hi >= limit_hi:
            return None
        hi = min(limit_hi, center + (hi - center) * grow)
    return lo, hi


def minimize_scalar_convex(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    tol: float = 1e-10,
    max_iter: int = 500,
    expand_limit: float = 1e12,
) -> ScalarMinResult:
    """Golden-section minimum of a convex function on an expandable bracket.

    If the minimum keeps sitting on a bracket edge, the bracket doubles until
    its half-width reaches ``expand_limit``; still-at-the-edge after that is
    reported as nonexistence (infimum not attained).  Flat minima return some
    point of the flat region, as golden section does.
    """
    if hi <= lo:
        raise NumericError("bracket must satisfy lo < hi")

    def checked(x: float) -> float:
        v = fn(x)
        if math.isnan(v):
            raise NumericError(f"objective evaluated to NaN at {x}")
        return v

    # Expansion phase: a convex function has an interior minimum on [lo, hi]
    # once some interior point is strictly below both endpoints.
    for _ in range(200):
        probe_lo = lo + (1.0 - _GOLDEN) * (hi - lo)
        probe_hi = lo + _GOLDEN * (hi - lo)
        f_lo, f_hi = checked(lo), checked(hi)
        f_probe_lo, f_probe_hi = checked(probe_lo), checked(probe_hi)
        interior = min(f_probe_lo, f_probe_hi)
        if interior < f_lo and interior < f_hi:
            break
        if f_lo == f_hi == f_probe_lo == f_probe_hi:
            # Constant across the bracket: for a convex function that plateau
            # is the bottom, so its midpoint is a genuine minimizer.
            mid = 0.5 * (lo + hi)
            return ScalarMinResult(mid, f_lo, True, True)
        width = hi - lo
        if f_lo < f_hi:
            lo -= width
        else:
            hi += width
        if max(abs(lo), abs(hi)) > expand_limit:
            edge = lo if f_lo < f_hi else hi
            return ScalarMinResult(edge, min(f_lo, f_hi), False, False)

    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = checked(x1), checked(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = checked(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = checked(x2)
    argmin = 0.5 * (a + b)
    return ScalarMinResult(argmin, checked(argmin), b - a <= tol, True)


def gradient_descent_scalar(
    fn: Callable[[float], float],
    grad: Callable[[float], float],
    x0: float,
    *,
    step0: float = 1.0,
    tol: float = 1e-12,
    max_iter: int = 50000,
) -> tuple[float, float, bool]:
    """Plain descent with Armijo backtracking; the generic cross-check route.

    Works on convex piecewise-smooth objectives too: near a kink the accepted
    step shrinks until iterates pin the kink.  Returns the best point seen.
    """
    x = x0
    fx = fn(x)
    best_x, best_f = x, fx
    step = step0
    for _ in range(max_iter):
        g = grad(x)
        if not math.isfinite(g) or not math.isfinite(fx):
            raise NumericError("gradient descent hit a non-finite value")
        if abs(g) * max(step, 1e-16) < tol:
            return best_x, best_f, True
        trial_step = step
        accepted = False
        while trial_step * abs(g) > 1e-18:
            cand = x - trial_step * g
            f_cand = fn(cand)
            if f_cand <= fx - 1e-4 * trial_step * g * g:
                x, fx = cand, f_cand
                step = trial_step * 1.3
                accepted = True
                break
            trial_step *= 0.5
        if not accepted:
            # No acceptable step: x is a (sub)gradient-stationary point.
            return best_x, best_f, True
        if fx < best_f:
            best_x, best_f = x, fx
    return best_x, best_f, False
