"""Special functions and normalization constants for regularly varying tails.

The asymptotics of renewal partial sums with tail index ``beta`` are
normalized by ``Gamma(1-beta) * Gamma(1+beta)`` and by a slowly varying
factor ``m(n)`` (the tail's slowly varying part for ``beta < 1``, its
harmonic partial sum at ``beta = 1``).  This module provides those
constants, a small closed family of slowly varying models, and empirical
checks of slow variation and of de Haan-type increment bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "gamma",
    "karamata_constant",
    "harmonic_sum",
    "expansion_order",
    "SlowlyVarying",
    "DeHaanPair",
    "Norming",
]

# Strictly-positive slack for "(j+1)*beta - j > 0" comparisons: exponents that
# vanish only through float rounding (e.g. beta = 2/3) must not count.
_EXPONENT_TOL = 1e-12


def gamma(x: float) -> float:
    """Gamma function for real non-pole arguments.

    Relative error is at machine level on [0.05, 50].  Poles at the
    non-positive integers raise :class:`DomainError`.
    """
    if x <= 0 and float(x).is_integer():
        raise DomainError(f"gamma pole at non-positive integer x={x}")
    try:
        return math.gamma(x)
    except (ValueError, OverflowError) as exc:  # pragma: no cover - guarded above
        raise DomainError(f"gamma undefined at x={x}") from exc


def karamata_constant(beta: float) -> float:
    """Normalization ``Gamma(1-beta) * Gamma(1+beta)`` on [0, 1].

    The endpoint values are 1 by convention (both limits are finite only
    through the convention; the reflection formula gives
    ``pi*beta/sin(pi*beta)`` in the interior).
    """
    if not 0.0 <= beta <= 1.0:
        raise DomainError(f"beta={beta} outside [0, 1]")
    if beta == 0.0 or beta == 1.0:
        return 1.0
    return gamma(1.0 - beta) * gamma(1.0 + beta)


def harmonic_sum(ell: Callable[[np.ndarray], np.ndarray], n: int) -> float:
    """Partial sum ``sum_{j=1}^{n} ell(j)/j`` (the beta=1 normalization)."""
    if n < 1:
        raise DomainError(f"n={n} must be >= 1")
    j = np.arange(1, n + 1, dtype=float)
    return float(np.sum(np.asarray(ell(j), dtype=float) / j))


def expansion_order(beta: float) -> int:
    """Largest j >= 0 with (j+1)*beta - j > 0; the expansion has j+1 terms.

    Equals 0 for beta <= 1/2 and grows like beta/(1-beta) as beta -> 1.
    """
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta={beta} outside (0, 1)")
    j = 0
    while (j + 2) * beta - (j + 1) > _EXPONENT_TOL:
        j += 1
    return j


@dataclass(frozen=True)
class SlowlyVarying:
    """A closed family of slowly varying models on ``x >= 2``.

    kind:
        ``"constant"``  -- ell(x) = c
        ``"log_power"`` -- ell(x) = c * log(x)**p  (p = -1 gives c/log)
        ``"tabulated"`` -- linear interpolation of (log x, value) knots,
        extended by the boundary values.
    """

    kind: str = "constant"
    c: float = 1.0
    p: float = 0.0
    knots_x: tuple = ()
    knots_val: tuple = ()

    def __post_init__(self):
        if self.kind not in ("constant", "log_power", "tabulated"):
            raise DomainError(f"unknown slowly varying kind {self.kind!r}")
        if self.kind in ("constant", "log_power") and self.c <= 0:
            raise DomainError("scale c must be positive")
        if self.kind == "tabulated":
            x = np.asarray(self.knots_x, dtype=float)
            v = np.asarray(self.knots_val, dtype=float)
            if x.size < 2 or x.size != v.size:
                raise DomainError("tabulated model needs matching knot arrays")
            if np.any(np.diff(x) <= 0) or np.any(v <= 0):
                raise DomainError("knots must be increasing with positive values")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            out = np.full_like(x, self.c)
        elif self.kind == "log_power":
            out = self.c * np.log(x) ** self.p
        else:
            out = np.interp(np.log(x), np.log(np.asarray(self.knots_x, float)),
                            np.asarray(self.knots_val, float))
        return out if out.ndim else float(out)

    def slow_variation_report(
        self,
        lambdas: Sequence[float] = (0.5, 2.0, 4.0),
        xs: Sequence[float] = (1e2, 1e3, 1e4, 1e5, 1e6, 1e7),
    ) -> dict:
        """Sampled check that ell(lam*x)/ell(x) -> 1 as x grows.

        Returns the per-lambda ratio deviations at the largest x and the
        worst deviation over the whole sample grid.
        """
        xs = np.asarray(xs, dtype=float)
        worst = 0.0
        at_largest = {}
        for lam in lambdas:
            ratios = np.asarray(self(lam * xs)) / np.asarray(self(xs))
            worst = max(worst, float(np.max(np.abs(ratios - 1.0))))
            at_largest[lam] = float(abs(ratios[-1] - 1.0))
        return {"worst_deviation": worst, "deviation_at_largest_x": at_largest}


@dataclass(frozen=True)
class DeHaanPair:
    """A slowly varying ``ell`` with auxiliary ``ell_hat`` dominating its increments.

    Membership in the increment class is checked empirically: the report
    carries the smallest C with ``|ell(a*x) - ell(x)| <= C * ell_hat(x)``
    over the sampled (a, x) grid.
    """

    ell: SlowlyVarying
    ell_hat: SlowlyVarying

    def increment_report(
        self,
        alphas: Sequence[float] = (0.5, 1.0, 2.0, 4.0),
        xs: Sequence[float] = (1e2, 1e3, 1e4, 1e5, 1e6, 1e7),
    ) -> dict:
        xs = np.asarray(xs, dtype=float)
        c_fit = 0.0
        for a in alphas:
            incr = np.abs(np.asarray(self.ell(a * xs)) - np.asarray(self.ell(xs)))
            c_fit = max(c_fit, float(np.max(incr / np.asarray(self.ell_hat(xs)))))
        return {"C": c_fit, "alphas": tuple(alphas), "x_range": (float(xs[0]), float(xs[-1]))}


@dataclass(frozen=True)
class Norming:
    """Tail index, its Karamata constant and the norming function m(n)."""

    beta: float
    ell: SlowlyVarying = field(default_factory=SlowlyVarying)

    @property
    def constant(self) -> float:
        return karamata_constant(self.beta)

    def m(self, n) -> float:
        """m(n): ell(n) for beta < 1, the harmonic partial sum at beta = 1."""
        if self.beta < 1.0:
            return self.ell(n)
        return harmonic_sum(self.ell, int(n))

    def return_sequence(self, n) -> float:
        """Darling-Kac norming a_n = n**beta / (m(n) * constant)."""
        return float(n) ** self.beta / (self.m(n) * self.constant)
