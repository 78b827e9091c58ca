"""Stochastic model of AG cost for conventional SLM at the Nyquist rate.

Samples of an ``N``-point block are modelled as i.i.d. complex Gaussian with
unit mean power, so each normalized sample power is ``Exp(1)`` and a block's
PAPR is the maximum of ``N`` of them.  ``A_u`` is the number of samples of
candidate ``u`` produced before it stops.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .ifft import log2_exact
from .schemes import ConfigError

__all__ = [
    "GammaLaw",
    "AuDistribution",
    "IntegrationError",
    "gamma_law",
    "conditional_pmf",
    "conditional_pmf_table",
    "running_min_cdf",
    "running_min_papr_pdf",
    "pmf_au",
    "k_curve",
    "expected_ag_cost",
    "papr_ccdf",
]

#: Tail mass beyond the upper integration limit.
TAIL = 1e-8


class IntegrationError(ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""


def gamma_law(gamma):
    """Probability that one normalized sample power stays below ``gamma``."""
    return -np.expm1(-np.asarray(gamma, dtype=float))


@dataclass(frozen=True)
class GammaLaw:
    N: int
    gamma: float

    @property
    def value(self) -> float:
        return float(gamma_law(self.gamma))

    @property
    def block_cdf(self) -> float:
        """``P(PAPR <= gamma)`` for one block of ``N`` samples."""
        return self.value**self.N


def conditional_pmf(a: int, gamma: float, N: int) -> float:
    """``P(A = a | running minimum gamma)``: geometric, censored at ``N``."""
    if not 1 <= a <= N:
        raise ValueError(f"a must lie in [1, {N}], got {a}")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    G = float(gamma_law(gamma))
    if a == N:
        return G ** (N - 1)
    return G ** (a - 1) * (1.0 - G)


def conditional_pmf_table(gamma: float, N: int) -> np.ndarray:
    """``conditional_pmf(a, gamma, N)`` for ``a = 1..N`` at once."""
    G = float(gamma_law(gamma))
    p = G ** np.arange(N, dtype=float)
    p[:-1] *= 1.0 - G
    return p


def running_min_cdf(gamma, u_minus_1: int, N: int):
    """CDF of the smallest PAPR among ``u_minus_1`` independent blocks."""
    G = gamma_law(gamma)
    return -np.expm1(u_minus_1 * np.log1p(-(G**N)))


def running_min_papr_pdf(gamma, u_minus_1: int, N: int):
    """Density of the smallest PAPR among ``u_minus_1`` independent blocks."""
    if u_minus_1 < 1:
        raise ValueError("need at least one earlier candidate")
    gamma = np.asarray(gamma, dtype=float)
    G = gamma_law(gamma)
    return u_minus_1 * (1.0 - G**N) ** (u_minus_1 - 1) * N * G ** (N - 1) * np.exp(-gamma)


def _upper_limit(u_minus_1: int, N: int, tail: float = TAIL) -> float:
    # solve (1 - G**N)**(u-1) = tail for gamma
    log_G = np.log1p(-(tail ** (1.0 / u_minus_1))) / N
    return float(-np.log(-np.expm1(log_G)))


@dataclass(frozen=True)
class AuDistribution:
    """pmf of ``A_u`` over ``a = 1..N``; ``pmf[a - 1]`` is ``P(A_u = a)``."""

    u: int
    N: int
    pmf: np.ndarray
    truncated_mass: float
    error: float

    @property
    def mean(self) -> float:
        return float(np.arange(1, self.N + 1) @ self.pmf)


@lru_cache(maxsize=256)
def pmf_au(u: int, N: int, tol: float = 1e-10) -> AuDistribution:
    """Mix the conditional pmf over the running-minimum density on ``[1, inf)``.

    The mass of the running minimum below 1 (a PAPR can never be below 1) is
    dropped and the pmf renormalized; the dropped mass is reported.
    """
    if u < 2:
        raise ValueError("A_u is defined for u >= 2")
    log2_exact(N)
    hi = _upper_limit(u - 1, N)

    def f(g):
        return conditional_pmf_table(g, N) * running_min_papr_pdf(g, u - 1, N)

    # the density sits near log(N); tell the integrator where
    mode = np.log(N)
    pts = [p for p in (mode - 2.0, mode, mode + 2.0) if 1.0 < p < hi]
    res, err, info = integrate.quad_vec(f, 1.0, hi, epsabs=tol, epsrel=0.0, points=pts, full_output=True)
    if not info.success:
        raise IntegrationError(f"pmf of A_{u} (N={N}) did not converge: {info.message}, error {err:.3g}")
    total = float(res.sum())
    low = float(running_min_cdf(1.0, u - 1, N))
    captured = float(running_min_cdf(hi, u - 1, N)) - low
    if abs(total - captured) > 1e-6:
        raise IntegrationError(f"pmf of A_{u} (N={N}) sums to {total}, expected {captured}")
    pmf = res / total
    pmf.setflags(write=False)
    return AuDistribution(u, N, pmf, low, float(err))


@lru_cache(maxsize=None)
def k_curve(N: int) -> np.ndarray:
    """``K(a)`` in c-points for ``a = 1..N``."""
    n = log2_exact(N)
    a = np.arange(1, N + 1)
    K = np.zeros(N, dtype=np.int64)
    for k in range(n):
        K += (1 + (a - 1) // (1 << k)) << k
    K.setflags(write=False)
    return K


def expected_ag_cost(U: int, N: int, L: int = 1, tol: float = 1e-10) -> float:
    """Expected AG cost of conventional SLM in units of one full IFFT.

    The model assumes independent Gaussian samples, which only holds at the
    Nyquist rate, so ``L`` must be 1.
    """
    if L != 1:
        raise ConfigError("the analytic model holds only without oversampling (L = 1)")
    if U < 1:
        raise ValueError("U must be >= 1")
    n = log2_exact(N)
    if U == 1:
        return 1.0
    K = k_curve(N)
    extra = sum(float(K @ pmf_au(u, N, tol).pmf) for u in range(2, U + 1))
    return 1.0 + extra / (N * n)


def papr_ccdf(gamma, N: int, U: int = 1):
    """``P(PAPR > gamma)`` of the best of ``U`` independent ``N``-sample blocks."""
    G = gamma_law(gamma)
    return np.exp(U * np.log1p(-(G**N)))
