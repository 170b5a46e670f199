"""Finite superpositions of exponentials approximating potential kernels.

Substituting ``x = exp(-a t)`` in ``1/s = int_0^inf exp(-s x) dx`` gives
``1/s = a int exp(-a t) exp(-s e^{-a t}) dt``; the trapezoid rule on the
integer grid ``t = i`` yields

    1/s ~ sum_{i=-m}^{M} a lambda_i exp(-lambda_i s),   lambda_i = e^{-i a}.

Truncating at ``i = -m`` drops the fast-decaying large rates, which hurts
small ``s``; truncating at ``i = M`` drops the small rates, which hurts
*large* ``s``.  So a window ``[-m, M]`` is accurate on a band of ``s``
roughly ``[ln(1/tol) e^{-m a}, tol e^{M a}]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class ApproximationError(RuntimeError):
    """Requested accuracy not reached within the term budget."""


@dataclass(frozen=True)
class ExpSuperposition:
    """``psi(s) ~ sum_i c_i exp(-lambda_i s)``."""

    coeffs: tuple[complex, ...] = ()
    rates: tuple[complex, ...] = ()

    def __post_init__(self):
        if len(self.coeffs) != len(self.rates):
            raise ValueError("coeffs and rates differ in length")
        if len(set(self.rates)) != len(self.rates):
            raise ValueError("rates must be distinct")

    def __len__(self) -> int:
        return len(self.rates)

    def terms(self) -> list[tuple[complex, complex]]:
        return list(zip(self.coeffs, self.rates))

    def __call__(self, s):
        return evaluate(self, s)

    def combine(self, other: "ExpSuperposition") -> "ExpSuperposition":
        """Sum of two superpositions; coefficients of shared rates are merged."""
        acc: dict = {}
        for c, lam in self.terms() + other.terms():
            acc[lam] = acc.get(lam, 0) + c
        return ExpSuperposition(tuple(acc.values()), tuple(acc.keys()))

    __add__ = combine


EMPTY = ExpSuperposition()


def evaluate(sup: ExpSuperposition, s):
    """``sum_i c_i exp(-lambda_i s)``, vectorised over ``s``."""
    s_arr = np.asarray(s)
    if len(sup) == 0:
        return np.zeros_like(s_arr, dtype=float) if s_arr.ndim else 0.0
    c = np.asarray(sup.coeffs)
    lam = np.asarray(sup.rates)
    out = np.exp(-np.multiply.outer(s_arr, lam)) @ c
    if np.iscomplexobj(out) and np.all(np.imag(out) == 0):
        out = out.real
    return out if s_arr.ndim else out.item()


def reciprocal_superposition(a: float = 0.5, m: int = 2, M: int = 60) -> ExpSuperposition:
    """Trapezoid quadrature of ``1/s`` with rates ``e^{-ia}``, ``i = -m..M``."""
    if a <= 0:
        raise ValueError("a must be positive")
    if m < 0 or M < 0:
        raise ValueError("m and M must be non-negative")
    idx = np.arange(-m, M + 1)
    lam = np.exp(-idx * a)
    return ExpSuperposition(tuple(float(v) for v in a * lam), tuple(float(v) for v in lam))


def reciprocal_square_superposition(a: float = 0.5, m: int = 2, M: int = 60) -> ExpSuperposition:
    """Same construction for ``1/s^2 = int_0^inf x exp(-s x) dx``: weights ``a lambda_i^2``."""
    if a <= 0:
        raise ValueError("a must be positive")
    idx = np.arange(-m, M + 1)
    lam = np.exp(-idx * a)
    return ExpSuperposition(tuple(float(v) for v in a * lam * lam), tuple(float(v) for v in lam))


KERNELS: dict[str, Callable] = {
    "reciprocal": (lambda s: 1.0 / s, reciprocal_superposition),
    "reciprocal_square": (lambda s: 1.0 / (s * s), reciprocal_square_superposition),
}


def relative_error_sweep(sup: ExpSuperposition, lo: float, hi: float, points: int = 200,
                         exact: Callable = lambda s: 1.0 / s):
    """Rows ``(s, approx, exact, rel_err)`` on a log-spaced grid over ``[lo, hi]``."""
    s = np.geomspace(lo, hi, points)
    approx = np.asarray(evaluate(sup, s))
    ex = exact(s)
    rel = np.abs(approx - ex) / np.abs(ex)
    return s, approx, ex, rel


def nominal_window(j_max: float, L: float, a: float = 0.5) -> tuple[int, int]:
    """``m = ceil(j_max/a)``, ``M = ceil(L/a)``: a=1/2, j_max=1, L=30 gives (2, 60)."""
    return math.ceil(j_max / a - 1e-12), math.ceil(L / a - 1e-12)


def window_for_region(lo: float, hi: float, a: float = 0.5, tol: float = 1e-6) -> tuple[int, int]:
    """Smallest window whose truncation error stays below ``tol`` on ``[lo, hi]``.

    Dropping rates ``lambda < e^{-Ma}`` costs about ``lambda s`` relative
    error at large s; dropping rates above ``e^{ma}`` costs about
    ``exp(-e^{ma} s)`` at small s.  One extra index on each side absorbs
    the trapezoid constants; the step ``a`` itself must be small enough that
    the discretisation error (about ``2 exp(-2 pi^2 / a)``) is below ``tol``.
    """
    if not 0 < lo <= hi:
        raise ValueError("need 0 < lo <= hi")
    T = math.log(1.0 / tol)
    m = max(0, math.ceil((math.log(T) - math.log(lo)) / a) + 1)
    M = max(0, math.ceil((math.log(hi) - math.log(tol)) / a) + 1)
    return m, M


def shifted(a: float, m: int, M: int, k: int = 1) -> ExpSuperposition:
    """Window shifted by ``k`` indices: ``[-m-k, M-k]``."""
    return reciprocal_superposition(a, m + k, M - k)


@dataclass(frozen=True)
class RegionLadder:
    """Nested regions ``R_i = [e^{-i}, e^{j_max}]`` for ``i = 1..L``."""

    L: int
    j_max: float = 1.0

    def region(self, i: int) -> tuple[float, float]:
        if not 1 <= i <= self.L:
            raise IndexError(f"region index {i} outside 1..{self.L}")
        return math.exp(-i), math.exp(self.j_max)

    def regions(self) -> list[tuple[float, float]]:
        return [self.region(i) for i in range(1, self.L + 1)]

    def window(self, a: float = 0.5) -> tuple[int, int]:
        return nominal_window(self.j_max, self.L, a)


def ladder_for_iterations(iter_count: int, j_max: float = 1.0, base: int = 4) -> RegionLadder:
    """Ladder depth grows with the iteration count: ``L = base + iter_count``."""
    if iter_count < 0:
        raise ValueError("iter_count must be non-negative")
    return RegionLadder(base + iter_count, j_max)


def distributive_sum(sup: ExpSuperposition, slacks: Sequence[float]) -> complex:
    """``sum_i c_i sum_s exp(-lambda_i s)``: the superposed kernel summed over a slack set."""
    s = np.asarray(slacks, dtype=float)
    total = 0.0
    for c, lam in sup.terms():
        total += c * np.exp(-lam * s).sum()
    return total


# --- two-dimensional superposition -----------------------------------------------

@dataclass
class Superposition2D:
    """``sum_k c_k exp(-(mu_k u + lambda_k v))`` on a rectangle."""

    coeffs: np.ndarray
    mu: np.ndarray
    lam: np.ndarray
    max_rel_error: float = 0.0
    extra: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.coeffs)

    def terms(self) -> list[tuple[float, float, float]]:
        return [(float(c), float(m), float(l)) for c, m, l in zip(self.coeffs, self.mu, self.lam)]

    def __call__(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        e = np.exp(-(np.multiply.outer(u, self.mu) + np.multiply.outer(v, self.lam)))
        return e @ self.coeffs


def _kernel2d(kernel, c: float):
    if kernel == "reciprocal":
        return lambda u, v: 1.0 / (c - u * u + v * v)
    if kernel == "constant":
        return lambda u, v: np.ones(np.broadcast(u, v).shape)
    if callable(kernel):
        return lambda u, v: kernel(c - u * u + v * v)
    raise ValueError(f"unknown kernel {kernel!r}")


def superposition_2d(kernel, c: float, region: tuple[float, float, float, float],
                     tol: float = 1e-3, max_terms: int = 400, grid: int = 41) -> Superposition2D:
    """Fit ``psi(c - u^2 + v^2)`` on ``region = (u0, u1, v0, v1)`` by exponentials.

    Rates are a tensor grid ``mu_i, lambda_j`` spread over ``[0, K-1] /
    width``; coefficients come from least squares on a ``grid x grid``
    sample of the rectangle.  ``K`` grows until the interior relative
    error is below ``tol``; :class:`ApproximationError` if ``K*K`` would
    exceed ``max_terms`` first.  ``kernel`` is ``"reciprocal"``,
    ``"constant"`` or a callable ``psi(s)``.
    """
    u0, u1, v0, v1 = region
    if min(u0, v0) < 0:
        raise ValueError("region must lie in the quarter-plane u, v >= 0")
    if u1 <= u0 or v1 <= v0:
        return Superposition2D(np.zeros(0), np.zeros(0), np.zeros(0))
    f = _kernel2d(kernel, c)
    uu, vv = np.meshgrid(np.linspace(u0, u1, grid), np.linspace(v0, v1, grid), indexing="ij")
    target = f(uu, vv).ravel()
    if not np.all(np.isfinite(target)) or np.any(target == 0):
        raise ValueError("kernel must be finite and nonzero on the region")
    # interior check points sit between the fitting nodes
    h = 0.5 / (grid - 1)
    cu, cv = np.meshgrid(np.linspace(u0 + h * (u1 - u0), u1 - h * (u1 - u0), grid - 1),
                         np.linspace(v0 + h * (v1 - v0), v1 - h * (v1 - v0), grid - 1), indexing="ij")
    check = f(cu, cv)
    best = None
    K = 1
    while K * K <= max_terms:
        mu_axis = np.arange(K) / (u1 - u0)
        lam_axis = np.arange(K) / (v1 - v0)
        mu, lam = (g.ravel() for g in np.meshgrid(mu_axis, lam_axis, indexing="ij"))
        # shift exponents to the rectangle corner to keep the design matrix well scaled
        design = np.exp(-(np.multiply.outer(uu.ravel() - u0, mu) + np.multiply.outer(vv.ravel() - v0, lam)))
        if K == 1:
            coef = np.array([target.mean()])  # least squares against a constant column
        else:
            coef, *_ = np.linalg.lstsq(design, target, rcond=None)
        coef = coef * np.exp(mu * u0 + lam * v0)
        sup = Superposition2D(coef, mu, lam)
        err = float(np.max(np.abs(sup(cu, cv) - check) / np.abs(check)))
        sup.max_rel_error = err
        sup.extra["K"] = K
        if best is None or err < best.max_rel_error:
            best = sup
        if err <= tol:
            return sup
        K += 1
    raise ApproximationError(
        f"best interior relative error {best.max_rel_error:.3e} > {tol:g} within {max_terms} terms")


__all__ = [
    "ExpSuperposition", "EMPTY", "evaluate", "reciprocal_superposition",
    "reciprocal_square_superposition", "relative_error_sweep", "nominal_window", "window_for_region",
    "shifted", "RegionLadder", "ladder_for_iterations", "distributive_sum", "superposition_2d",
    "Superposition2D", "ApproximationError", "KERNELS",
]
