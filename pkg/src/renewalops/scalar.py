"""Scalar renewal sequences with heavy-tailed lifetimes.

For i.i.d. positive integer lifetimes with probabilities f_j, the renewal
sequence is u_0 = 1, u_n = sum_{j=1}^n f_j u_{n-j}.  With regularly varying
tails sum_{j>n} f_j = ell(n) n**-beta, Karamata's Tauberian theorem gives
the first-order law

    U_n = sum_{j<=n} u_j ~ n**beta / (Gamma(1-beta) Gamma(1+beta) m(n)),

and when the tail has the form c(n**-beta + H(n)) with H = O(n**-2beta) and
beta > 1/2, the complex Tauberian kernel method upgrades this to a full
expansion with exponents (j+1)beta - j and coefficients built from powers
of a single second-order constant:

    c Gamma(1-beta) U_n = sum_j d_j n**((j+1)beta - j) + O(n**eps),
    d_j = c_H**j / Gamma((j+1)beta - (j-1)),

where c_H = -Gamma(1-beta)**-1 * integral of [x]**-beta - x**-beta + H([x])
over (0, infinity).  This module computes the sequences (quadratic
reference recursion plus an FFT divide-and-conquer path), the constant
c_H, the expansion, and residual diagnostics for both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .diagnostics import SlopeFit, slope_fit
from .errors import DomainError, NumericalError
from .specfun import Norming, expansion_order, gamma

__all__ = [
    "ReturnDistribution",
    "ScalarRenewal",
    "AsymptoticExpansion",
    "renewal_sequence",
    "karamata_first_order",
    "second_order_constant",
    "SecondOrderConstant",
    "residual_diagnostics",
]

_FFT_BASE = 1024
_PATH_AGREEMENT = 1e-10


@dataclass
class ReturnDistribution:
    """Lifetime probabilities f_j (index j, f[0] = 0) plus an analytic tail.

    ``tail`` evaluates sum_{j>n} f_j; beyond the stored probabilities the
    analytic tail carries the remaining mass, so stored mass plus tail(N)
    must equal 1.
    """

    f: np.ndarray
    tail: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=float)
        if self.f.ndim != 1 or len(self.f) < 2:
            raise DomainError("need probabilities indexed 0..N with N >= 1")
        if self.f[0] != 0.0:
            raise DomainError("lifetimes are positive: f[0] must be 0")
        if np.any(self.f < -1e-15):
            raise DomainError("negative lifetime probability")
        total = self.f.sum() + self.tail_mass()
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"total mass {total} != 1")

    @property
    def n_stored(self) -> int:
        return len(self.f) - 1

    def tail_mass(self) -> float:
        if self.tail is None:
            return 0.0
        return float(np.atleast_1d(self.tail(np.array([self.n_stored])))[0])

    def tail_values(self, n) -> np.ndarray:
        """sum_{j>n} f_j from the stored probabilities and the analytic tail."""
        n = np.atleast_1d(np.asarray(n, dtype=int))
        stored = np.concatenate([[self.f.sum()], self.f.sum() - np.cumsum(self.f[1:])])
        out = np.empty(len(n), dtype=float)
        inside = n <= self.n_stored
        out[inside] = stored[n[inside]] + self.tail_mass()
        if np.any(~inside):
            if self.tail is None:
                out[~inside] = 0.0
            else:
                out[~inside] = self.tail(n[~inside])
        return out

    @classmethod
    def from_power_tail(cls, beta: float, n_max: int, c: float = 1.0) -> "ReturnDistribution":
        """Tails exactly c * n**-beta for n >= 1 (requires c <= 1)."""
        if not 0.0 < beta <= 1.0 or not 0.0 < c <= 1.0:
            raise DomainError("need beta in (0, 1] and c in (0, 1]")
        n = np.arange(0, n_max + 1, dtype=float)
        tails = np.ones(n_max + 1)
        tails[1:] = c * n[1:] ** (-beta)
        f = np.zeros(n_max + 1)
        f[1:] = tails[:-1] - tails[1:]
        return cls(f, tail=lambda m: c * np.asarray(m, dtype=float) ** (-beta))

    @classmethod
    def from_log_tail(cls, n_max: int, offset: float = math.e**2) -> "ReturnDistribution":
        """Slowly varying tails 1/log(n + offset), the beta = 0 regime."""
        n = np.arange(0, n_max + 1, dtype=float)
        tails = np.minimum(1.0, 1.0 / np.log(n + offset))
        f = np.zeros(n_max + 1)
        f[1:] = tails[:-1] - tails[1:]
        return cls(f, tail=lambda m: 1.0 / np.log(np.asarray(m, dtype=float) + offset))


@dataclass
class ScalarRenewal:
    """Renewal sequence and its partial sums."""

    u: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)

    @property
    def n_max(self) -> int:
        return len(self.u) - 1

    @property
    def partial_sums(self) -> np.ndarray:
        if not hasattr(self, "_cum"):
            self._cum = np.cumsum(self.u)
        return self._cum

    def U(self, n) -> np.ndarray:
        return self.partial_sums[np.asarray(n, dtype=int)]


def _renewal_direct(f: np.ndarray, n_max: int) -> np.ndarray:
    u = np.zeros(n_max + 1)
    u[0] = 1.0
    jmax = len(f) - 1
    for n in range(1, n_max + 1):
        j = min(n, jmax)
        u[n] = np.dot(f[1: j + 1], u[n - 1:: -1][: j])
    return u


def _renewal_fft(f: np.ndarray, n_max: int) -> np.ndarray:
    """Divide and conquer: past blocks convolved by FFT, O(n log^2 n)."""
    u = np.zeros(n_max + 1)
    u[0] = 1.0
    f = np.asarray(f, dtype=float)
    jmax = len(f) - 1

    def base(lo: int, hi: int):
        for n in range(max(lo, 1), hi):
            j0 = min(n - lo, jmax)
            if j0 >= 1:
                u[n] += np.dot(f[1: j0 + 1], u[n - j0: n][::-1])

    def solve(lo: int, hi: int):
        if hi - lo <= _FFT_BASE:
            base(lo, hi)
            return
        mid = (lo + hi) // 2
        solve(lo, mid)
        lf = min(hi - lo, jmax + 1)
        size = 1 << int(np.ceil(np.log2(max(lf + (mid - lo), hi - lo))))
        fa = np.fft.rfft(f[:lf], size)
        ua = np.fft.rfft(u[lo:mid], size)
        conv = np.fft.irfft(fa * ua, size)
        u[mid:hi] += conv[mid - lo: hi - lo]
        solve(mid, hi)

    solve(0, n_max + 1)
    return u


def renewal_sequence(
    dist: ReturnDistribution, n_max: int, method: str = "auto", check: bool = False
) -> ScalarRenewal:
    """Renewal sequence to n_max.

    ``method`` is "direct" (quadratic reference), "fft" (divide and
    conquer), or "auto".  With ``check`` both paths run and must agree to
    1e-10.
    """
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    if n_max > dist.n_stored and dist.tail_mass() > 1e-12:
        raise DomainError(
            f"probabilities stored to {dist.n_stored} but n_max={n_max} needs more"
        )
    f = dist.f
    if method == "auto":
        method = "fft" if n_max > 4 * _FFT_BASE else "direct"
    if method == "direct":
        u = _renewal_direct(f, n_max)
    elif method == "fft":
        u = _renewal_fft(f, n_max)
    else:
        raise DomainError(f"unknown method {method!r}")
    if check:
        other = _renewal_direct(f, n_max) if method == "fft" else _renewal_fft(f, n_max)
        err = float(np.max(np.abs(u - other)))
        if err > _PATH_AGREEMENT:
            raise NumericalError(f"renewal paths disagree by {err:.3e}")
    return ScalarRenewal(u)


def karamata_first_order(norming: Norming, n) -> np.ndarray:
    """First-order partial-sum law n**beta / (constant * m(n))."""
    n = np.atleast_1d(np.asarray(n, dtype=float))
    return np.array([norming.return_sequence(x) for x in n])


@dataclass(frozen=True)
class SecondOrderConstant:
    """Value of the second-order tail constant with its cutoff uncertainty."""

    value: float
    error_bar: float
    cutoff: int


def second_order_constant(
    beta: float,
    c: float = 1.0,
    H: Callable[[np.ndarray], np.ndarray] | None = None,
    cutoff: int = 10**6,
) -> SecondOrderConstant:
    """The constant driving second and higher order renewal asymptotics.

    Computes -Gamma(1-beta)**-1 times the integral of
    [x]**-beta - x**-beta + H([x]) over (0, infinity), where the tail of
    the lifetime distribution is c(n**-beta + H(n)) and on [0, 1) the
    integrand is 1/c - x**-beta (total lifetime mass below 1).  Requires
    beta > 1/2 so the H-part converges absolutely under H = O(n**-2beta).

    The staircase-minus-power part is summed to ``cutoff`` with Richardson
    extrapolation in cutoff**-beta; the H tail beyond the cutoff is bounded
    by |H(cutoff)| * cutoff / (2 beta - 1) and folded into the error bar.
    """
    if not 0.5 < beta < 1.0:
        raise DomainError("second-order constant needs beta in (1/2, 1)")
    if c <= 0:
        raise DomainError("c must be positive")

    def staircase(x_hi: int) -> float:
        n = np.arange(1, x_hi + 1, dtype=float)
        steps = n ** (-beta) - ((n + 1) ** (1 - beta) - n ** (1 - beta)) / (1 - beta)
        return float(steps.sum())

    s_half = staircase(cutoff // 2)
    s_full = staircase(cutoff)
    r = 2.0 ** (-beta)
    extrap = s_full + (s_full - s_half) * r / (1.0 - r)
    # leading error of the extrapolated tail is one power of 1/cutoff down
    richardson_err = abs(extrap - s_full) / cutoff ** (1 - beta) + abs(s_full - s_half) / cutoff
    h_tail = 0.0
    if H is not None:
        n = np.arange(1, cutoff + 1, dtype=float)
        extrap += float(np.sum(np.asarray(H(n), dtype=float)))
        h_last = abs(float(np.atleast_1d(H(np.array([float(cutoff)])))[0]))
        h_tail = h_last * cutoff / (2 * beta - 1)
    integral = (1.0 / c - 1.0 / (1.0 - beta)) + extrap
    g1 = gamma(1.0 - beta)
    return SecondOrderConstant(
        value=-integral / g1,
        error_bar=(richardson_err + h_tail) / g1,
        cutoff=cutoff,
    )


@dataclass
class AsymptoticExpansion:
    """Higher-order partial-sum expansion sum_j d_j n**((j+1)beta - j).

    ``coefficients`` are the d_j; the scalar partial-sum prediction divides
    through by c * Gamma(1-beta).  The number of terms is maximal: every
    retained exponent is positive.
    """

    beta: float
    c: float
    c_h: float
    coefficients: np.ndarray = field(init=False)
    exponents: np.ndarray = field(init=False)

    def __post_init__(self):
        k = expansion_order(self.beta)
        j = np.arange(k + 1)
        self.exponents = (j + 1) * self.beta - j
        self.coefficients = np.array(
            [self.c_h**jj / gamma((jj + 1) * self.beta - (jj - 1)) for jj in j]
        )

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def eval_raw(self, n, n_terms: int | None = None) -> np.ndarray:
        """sum_j d_j n**((j+1)beta - j) over the first ``n_terms`` terms."""
        n = np.atleast_1d(np.asarray(n, dtype=float))
        k = len(self.coefficients) if n_terms is None else n_terms
        out = np.zeros_like(n)
        for d, e in zip(self.coefficients[:k], self.exponents[:k]):
            out += d * n**e
        return out

    def partial_sum_prediction(self, n, n_terms: int | None = None) -> np.ndarray:
        """Predicted U_n, i.e. the raw expansion over c * Gamma(1-beta)."""
        return self.eval_raw(n, n_terms) / (self.c * gamma(1.0 - self.beta))


def residual_diagnostics(
    seq: ScalarRenewal,
    expansion: AsymptoticExpansion,
    n_lo: int = 10**3,
    n_hi: int | None = None,
    points_per_decade: int = 8,
    n_terms: int | None = None,
) -> dict:
    """Residuals U_n minus the expansion prediction, with a slope fit.

    Rows are log-spaced over [n_lo, n_hi]; the returned dict carries the
    sampled n, residuals, and the fitted log-log slope with its ~95%
    halfwidth.
    """
    if seq.n_max < 10**3:
        raise DomainError("need the sequence to at least n = 1000")
    n_hi = seq.n_max if n_hi is None else n_hi
    count = max(4, int(points_per_decade * np.log10(n_hi / n_lo)) + 1)
    ns = np.unique(np.round(np.logspace(np.log10(n_lo), np.log10(n_hi), count)).astype(int))
    resid = seq.U(ns) - expansion.partial_sum_prediction(ns, n_terms)
    fit = slope_fit(ns, resid)
    return {"n": ns, "residual": resid, "fit": fit}
