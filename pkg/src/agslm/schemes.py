"""Selected-mapping schemes with and without adaptive generation (AG).

Every scheme keeps a running threshold and selects the first candidate with
the smallest PAPR.  The AG form produces candidate samples one at a time and
abandons a candidate as soon as one sample's normalized power reaches the
threshold, which can never change the selection.  Both forms of a scheme run
through the same compiled kernel, so selected samples agree bit for bit.

Candidate 1 is always the unrotated block.  Costs are counted in c-points
(conventional, Lim, Baxley) or complex additions (Wang).
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from numba import njit

from .ifft import _bit_reversal, _complete, _emit, _peak_power, _reset, log2_exact, twiddles
from .ofdm import (
    PHASES,
    SignalSequence,
    SymbolSequence,
    _raw_words,
    occupied_bins,
    phase_codes,
    to_db,
)
from .report import UNIT_ADDITIONS, UNIT_T, ComplexityReport

__all__ = [
    "ConfigError",
    "Scheme",
    "SlmConfig",
    "SlmResult",
    "GammaState",
    "ConversionKernel",
    "wang_kernels",
    "lim_block_phases",
    "lim_equivalent_phase",
    "run_slm",
    "slm_conventional",
    "slm_conventional_ag",
    "slm_lim",
    "slm_lim_ag",
    "slm_wang",
    "slm_wang_ag",
    "slm_baxley",
    "slm_baxley_ag",
    "WANG_U",
]

WANG_U = (4, 8, 12)


class ConfigError(ValueError):
    pass


class Scheme(str, Enum):
    CONVENTIONAL = "conventional"
    LIM = "lim"
    WANG = "wang"
    BAXLEY = "baxley"


@dataclass(frozen=True)
class SlmConfig:
    """One SLM setup.  ``n_data`` subcarriers, ``oversampling`` times oversampled."""

    n_data: int
    oversampling: int = 4
    U: int = 8
    scheme: Scheme = Scheme.CONVENTIONAL
    ag: bool = False
    r: int = 5
    gamma0_db: float | None = None
    seed: int = 0
    #: Power that Baxley's threshold is measured against: ``"ensemble"`` is the
    #: expected block power (an absolute amplifier level), ``"block"`` the
    #: block's own mean power.
    saturation_reference: str = "ensemble"

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        for name in ("n_data", "oversampling"):
            v = getattr(self, name)
            if v < 1 or v & (v - 1):
                raise ConfigError(f"{name} must be a power of two, got {v}")
        if self.U < 1:
            raise ConfigError(f"U must be >= 1, got {self.U}")
        if self.scheme is Scheme.WANG:
            if self.U not in WANG_U:
                raise ConfigError(f"Wang's scheme supports U in {WANG_U}, got {self.U}")
            if self.N < 4:
                raise ConfigError("Wang's scheme needs at least 4 samples")
        if self.scheme is Scheme.LIM and not 1 <= self.r <= self.n:
            raise ConfigError(f"r must lie in [1, {self.n}], got {self.r}")
        if self.scheme is Scheme.BAXLEY:
            if self.gamma0_db is None or not self.gamma0_db > 0:
                raise ConfigError("Baxley's scheme needs gamma0_db > 0")
        if self.saturation_reference not in ("ensemble", "block"):
            raise ConfigError(f"unknown saturation reference {self.saturation_reference!r}")

    @property
    def N(self) -> int:
        return self.n_data * self.oversampling

    @property
    def n(self) -> int:
        return log2_exact(self.N)

    @property
    def unit(self) -> str:
        return UNIT_ADDITIONS if self.scheme is Scheme.WANG else UNIT_T

    @property
    def scale(self) -> int:
        return 1 if self.scheme is Scheme.WANG else self.N * self.n

    @property
    def gamma0(self) -> float:
        return float(10.0 ** (self.gamma0_db / 10.0))

    def replace(self, **changes) -> "SlmConfig":
        return dataclasses.replace(self, **changes)

    def label(self) -> str:
        extra = {Scheme.LIM: f" r={self.r}", Scheme.BAXLEY: f" g0={self.gamma0_db}dB"}.get(self.scheme, "")
        return f"{self.scheme.value}{'+AG' if self.ag else ''} N={self.n_data} L={self.oversampling} U={self.U}{extra}"


@dataclass
class GammaState:
    """Running minimum PAPR and the candidate that achieved it."""

    gamma: float = float("inf")
    best_u: int = 0

    def offer(self, u: int, value: float) -> bool:
        if value < self.gamma:
            self.gamma, self.best_u = value, u
            return True
        return False


@dataclass(frozen=True)
class SlmResult:
    selected_u: int
    selected_signal: SignalSequence
    papr: float
    cost: ComplexityReport
    produced: np.ndarray
    gamma_trace: np.ndarray
    reference_power: float
    fallback: bool = False

    @property
    def papr_db(self) -> float:
        return float(to_db(self.papr))


# -- candidate constructions ----------------------------------------------------

@dataclass(frozen=True)
class ConversionKernel:
    """Four-tap circular kernel at offsets ``0, N/4, N/2, 3N/4``.

    Its frequency response is 4-periodic, ``P(k) = response4[k % 4]``, with
    ``response4[i] = sum_m taps[m] * (-1j)**(i*m)``.
    """

    taps: np.ndarray
    u: int

    def __post_init__(self):
        t = np.asarray(self.taps, dtype=np.complex128).ravel()
        if t.size != 4:
            raise ValueError("a conversion kernel has exactly 4 taps")
        object.__setattr__(self, "taps", t)
        if not np.allclose(np.abs(self.response4), 1.0, rtol=0.0, atol=1e-9):
            raise ValueError(f"kernel {self.u} is not unitary: |P| = {np.abs(self.response4)}")

    @property
    def response4(self) -> np.ndarray:
        i = np.arange(4)
        return (self.taps[None, :] * (-1j) ** np.outer(i, i)).sum(axis=1)

    def response(self, N: int) -> np.ndarray:
        return self.response4[np.arange(N) % 4]

    def offsets(self, N: int) -> np.ndarray:
        return np.arange(4) * (N // 4)

    def apply(self, x1: np.ndarray) -> np.ndarray:
        x1 = np.asarray(x1)
        return sum(c * np.roll(x1, o) for c, o in zip(self.taps, self.offsets(x1.size)))


def _taps_from_response(d: np.ndarray) -> np.ndarray:
    i = np.arange(4)
    return (d[..., None, :] * (1j) ** np.outer(i, i)).sum(axis=-1) / 4.0


def wang_kernels(U: int, seed) -> list[ConversionKernel]:
    """Kernels for candidates ``2..U``; each has four i.i.d. uniform response phases."""
    if U < 2:
        return []
    words = _raw_words(seed, 4 * (U - 1)).reshape(U - 1, 4)
    theta = (words >> np.uint64(11)).astype(np.float64) * 2.0**-53
    taps = _taps_from_response(np.exp(2j * np.pi * theta))
    return [ConversionKernel(t, u) for u, t in enumerate(taps, start=2)]


def lim_block_phases(U: int, r: int, seed) -> np.ndarray:
    """Stage rotations for candidates ``2..U``: one ``{1, j, -1, -j}`` factor per block."""
    return PHASES[phase_codes(U, 1 << r, seed)]


def lim_equivalent_phase(block_phases: np.ndarray, N: int) -> np.ndarray:
    """Frequency-domain phase vector equivalent to rotating the stage outputs by block.

    Block ``b`` holds the subcarriers with ``k mod 2**r == bitrev_r(b)``.
    """
    bp = np.asarray(block_phases)
    r = log2_exact(bp.size)
    P = bp[_bit_reversal(bp.size)][np.arange(N) % (1 << r)]
    if not np.allclose(np.abs(P), 1.0, rtol=0.0, atol=1e-12):
        raise ValueError("intermediate-stage rotation is not unit magnitude")
    return P


# -- compiled kernels ------------------------------------------------------------

_PH = np.array(PHASES)


@njit(cache=True)
def _load_input(row, X, src, codes, u):
    for i in range(row.shape[0]):
        d = src[i]
        if d < 0:
            row[i] = 0.0
        elif u == 0:
            row[i] = X[d]
        else:
            row[i] = X[d] * _PH[codes[u - 1, d]]


@njit(cache=True)
def _scan(nodes, done, s_lo, order, ref, threshold, tw):
    """Emit outputs lazily until one reaches ``threshold``; ``(cost, a, hit)``."""
    n = nodes.shape[0] - 1
    N = nodes.shape[1]
    cost = 0
    for p in range(N):
        m = order[p]
        cost += _emit(nodes, done, m, s_lo, tw)
        x = nodes[n, m]
        if (x.real * x.real + x.imag * x.imag) / ref >= threshold:
            return cost, p + 1, True
    return cost, N, False


@njit(cache=True)
def _transform(X, src, n, tw):
    N = src.shape[0]
    nodes = np.empty((n + 1, N), np.complex128)
    done = np.zeros((n + 1, N), np.bool_)
    codes = np.zeros((0, 1), np.uint8)
    _load_input(nodes[0], X, src, codes, 0)
    _reset(done, 0)
    _complete(nodes, done, 0, n, tw)
    return nodes[n].copy()


@njit(cache=True)
def _conventional_kernel(X, src, codes, ref, ag, order, tw, n):
    N = src.shape[0]
    U = codes.shape[0] + 1
    nodes = np.empty((n + 1, N), np.complex128)
    done = np.zeros((n + 1, N), np.bool_)
    best = np.zeros(N, np.complex128)
    cost = np.zeros(U, np.int64)
    produced = np.zeros(U, np.int64)
    hit = np.zeros(U, np.bool_)
    gamma_after = np.empty(U)
    best_after = np.empty(U, np.int64)
    gamma = np.inf
    best_u = 0
    for u in range(U):
        _load_input(nodes[0], X, src, codes, u)
        _reset(done, 0)
        if ag and u > 0:
            k, a, h = _scan(nodes, done, 0, order, ref, gamma, tw)
            cost[u] = k
            produced[u] = a
            hit[u] = h
            if not h:
                gamma = _peak_power(nodes[n]) / ref
                best_u = u
                best[:] = nodes[n]
        else:
            cost[u] = _complete(nodes, done, 0, n, tw)
            produced[u] = N
            p = _peak_power(nodes[n]) / ref
            if p < gamma:
                gamma = p
                best_u = u
                best[:] = nodes[n]
        gamma_after[u] = gamma
        best_after[u] = best_u
    return best_u, best, cost, 0, produced, hit, gamma_after, best_after


@njit(cache=True)
def _lim_kernel(X, src, codes, ref, ag, order, tw, n, r):
    N = src.shape[0]
    U = codes.shape[0] + 1
    s_lo = n - r
    blocks = N >> s_lo
    common = np.empty((n + 1, N), np.complex128)
    cdone = np.zeros((n + 1, N), np.bool_)
    _load_input(common[0], X, src, codes[:, :0], 0)
    _reset(cdone, 0)
    common_cost = _complete(common, cdone, 0, s_lo, tw)
    nodes = np.empty((n + 1, N), np.complex128)
    done = np.zeros((n + 1, N), np.bool_)
    best = np.zeros(N, np.complex128)
    cost = np.zeros(U, np.int64)
    produced = np.zeros(U, np.int64)
    hit = np.zeros(U, np.bool_)
    gamma_after = np.empty(U)
    best_after = np.empty(U, np.int64)
    gamma = np.inf
    best_u = 0
    for u in range(U):
        row = nodes[s_lo]
        base = common[s_lo]
        if u == 0:
            row[:] = base
        else:
            for pos in range(N):
                row[pos] = base[pos] * _PH[codes[u - 1, pos & (blocks - 1)]]
        _reset(done, s_lo)
        if ag and u > 0:
            k, a, h = _scan(nodes, done, s_lo, order, ref, gamma, tw)
            cost[u] = k
            produced[u] = a
            hit[u] = h
            if not h:
                gamma = _peak_power(nodes[n]) / ref
                best_u = u
                best[:] = nodes[n]
        else:
            cost[u] = _complete(nodes, done, s_lo, n, tw)
            produced[u] = N
            p = _peak_power(nodes[n]) / ref
            if p < gamma:
                gamma = p
                best_u = u
                best[:] = nodes[n]
        gamma_after[u] = gamma
        best_after[u] = best_u
    return best_u, best, cost, common_cost, produced, hit, gamma_after, best_after


@njit(cache=True)
def _wang_kernel(x1, taps, ref, ag, order):
    N = x1.shape[0]
    U = taps.shape[0] + 1
    q = N >> 2
    mask = N - 1
    cand = np.empty(N, np.complex128)
    best = x1.copy()
    cost = np.zeros(U, np.int64)
    produced = np.zeros(U, np.int64)
    hit = np.zeros(U, np.bool_)
    gamma_after = np.empty(U)
    best_after = np.empty(U, np.int64)
    gamma = _peak_power(x1) / ref
    best_u = 0
    produced[0] = N
    gamma_after[0] = gamma
    best_after[0] = 0
    for u in range(1, U):
        c0 = taps[u - 1, 0]
        c1 = taps[u - 1, 1]
        c2 = taps[u - 1, 2]
        c3 = taps[u - 1, 3]
        a = 0
        h = False
        for p in range(N):
            i = order[p]
            v = c0 * x1[i] + c1 * x1[(i - q) & mask] + c2 * x1[(i - 2 * q) & mask] + c3 * x1[(i - 3 * q) & mask]
            cand[i] = v
            a += 1
            if ag and (v.real * v.real + v.imag * v.imag) / ref >= gamma:
                h = True
                break
        cost[u] = 3 * a
        produced[u] = a
        hit[u] = h
        if not h:
            p = _peak_power(cand) / ref
            if p < gamma:
                gamma = p
                best_u = u
                best[:] = cand
        gamma_after[u] = gamma
        best_after[u] = best_u
    return best_u, best, cost, 0, produced, hit, gamma_after, best_after


@njit(cache=True)
def _baxley_kernel(X, src, codes, ref, gamma0, ag, order, tw, n):
    N = src.shape[0]
    U = codes.shape[0] + 1
    slots = U if ag else 1
    nodes = np.empty((slots, n + 1, N), np.complex128)
    done = np.zeros((slots, n + 1, N), np.bool_)
    best = np.zeros(N, np.complex128)
    cost = np.zeros(U, np.int64)
    produced = np.zeros(U, np.int64)
    hit = np.zeros(U, np.bool_)
    gamma_after = np.full(U, np.inf)
    best_after = np.zeros(U, np.int64)
    best_p = np.inf
    best_u = 0
    for u in range(U):
        g = nodes[u] if ag else nodes[0]
        d = done[u] if ag else done[0]
        _load_input(g[0], X, src, codes, u)
        _reset(d, 0)
        if ag:
            k, a, h = _scan(g, d, 0, order, ref, gamma0, tw)
            cost[u] = k
            produced[u] = a
            hit[u] = h
            if not h:
                best[:] = g[n]
                p = _peak_power(g[n]) / ref
                gamma_after[u] = p
                best_after[u] = u
                return u, best, cost[: u + 1], 0, produced[: u + 1], hit[: u + 1], gamma_after[: u + 1], best_after[: u + 1], False
        else:
            cost[u] = _complete(g, d, 0, n, tw)
            produced[u] = N
            p = _peak_power(g[n]) / ref
            if p < best_p:
                best_p = p
                best_u = u
                best[:] = g[n]
            gamma_after[u] = best_p
            best_after[u] = best_u
            if p < gamma0:
                return u, best, cost[: u + 1], 0, produced[: u + 1], hit[: u + 1], gamma_after[: u + 1], best_after[: u + 1], False
    if ag:
        # nothing qualified: finish the partial graphs and take the minimum
        for u in range(U):
            cost[u] += _complete(nodes[u], done[u], 0, n, tw)
            p = _peak_power(nodes[u, n]) / ref
            if p < best_p:
                best_p = p
                best_u = u
            gamma_after[u] = best_p
            best_after[u] = best_u
        best[:] = nodes[best_u, n]
    return best_u, best, cost, 0, produced, hit, gamma_after, best_after, True


# -- Python-level runners --------------------------------------------------------

class _Outcome(NamedTuple):
    best: int
    signal: np.ndarray
    cost: np.ndarray
    common_cost: int
    produced: np.ndarray
    hit: np.ndarray
    gamma_after: np.ndarray
    best_after: np.ndarray
    fallback: bool
    reference_power: float

    @property
    def total(self) -> int:
        return int(self.common_cost + self.cost.sum())


@lru_cache(maxsize=None)
def _input_map(n_data: int, L: int) -> np.ndarray:
    """Data-symbol index feeding each bit-reversed input slot (-1 for a zero bin)."""
    N = n_data * L
    data_of_bin = np.full(N, -1, dtype=np.int64)
    data_of_bin[occupied_bins(n_data, L)] = np.arange(n_data)
    src = data_of_bin[_bit_reversal(N)]
    src.setflags(write=False)
    return src


def _energy(X: np.ndarray) -> float:
    return float(np.sum(X.real * X.real + X.imag * X.imag))


def _data_symbols(X, cfg: SlmConfig) -> np.ndarray:
    if isinstance(X, SymbolSequence):
        if X.oversampling != 1:
            raise ValueError("pass data-rate symbols; oversampling comes from the config")
        X = X.symbols
    X = np.ascontiguousarray(X, dtype=np.complex128)
    if X.size != cfg.n_data:
        raise ValueError(f"expected {cfg.n_data} symbols, got {X.size}")
    return X


def original_signal(X, cfg: SlmConfig) -> SignalSequence:
    """Candidate 1: the oversampled IFFT of the unrotated block."""
    X = _data_symbols(X, cfg)
    return SignalSequence(_transform(X, _input_map(cfg.n_data, cfg.oversampling), cfg.n, twiddles(cfg.N)))


def _run_trial(cfg: SlmConfig, X: np.ndarray, phase_seed, x1: np.ndarray | None = None) -> _Outcome:
    """Run one block through ``cfg``.  ``X`` holds the data-rate symbols."""
    N, n = cfg.N, cfg.n
    order = _bit_reversal(N)
    src = _input_map(cfg.n_data, cfg.oversampling)
    tw = twiddles(N)
    if cfg.scheme is Scheme.WANG:
        if x1 is None:
            x1 = _transform(X, src, n, tw)
        ref = float(np.mean(x1.real * x1.real + x1.imag * x1.imag))
        taps = np.array([k.taps for k in wang_kernels(cfg.U, phase_seed)]).reshape(cfg.U - 1, 4)
        out = _wang_kernel(x1, taps, ref, cfg.ag, order)
        return _Outcome(*out, False, ref)
    ref = _energy(X)
    if not ref > 0:
        raise ValueError("PAPR undefined for a zero-power block")
    if cfg.scheme is Scheme.LIM:
        codes = phase_codes(cfg.U, 1 << cfg.r, phase_seed)
        out = _lim_kernel(X, src, codes, ref, cfg.ag, order, tw, n, cfg.r)
        return _Outcome(*out, False, ref)
    codes = phase_codes(cfg.U, cfg.n_data, phase_seed)
    if cfg.scheme is Scheme.CONVENTIONAL:
        out = _conventional_kernel(X, src, codes, ref, cfg.ag, order, tw, n)
        return _Outcome(*out, False, ref)
    # 16-QAM has unit mean power, so the expected block power is n_data
    sat = float(cfg.n_data) if cfg.saturation_reference == "ensemble" else ref
    out = list(_baxley_kernel(X, src, codes, sat, cfg.gamma0, cfg.ag, order, tw, n))
    out[6] = out[6] * (sat / ref)
    return _Outcome(*out, ref)


def _result(cfg: SlmConfig, o: _Outcome, trial: int = 0) -> SlmResult:
    aborted = np.zeros(cfg.U, dtype=np.int64)
    aborted[: o.hit.size] = o.hit
    report = ComplexityReport.single(cfg.unit, cfg.scale, o.total, o.produced, aborted, trial, N=cfg.N)
    sig = SignalSequence(o.signal, o.best + 1)
    return SlmResult(
        selected_u=o.best + 1,
        selected_signal=sig,
        papr=float(np.max(sig.powers)) / o.reference_power,
        cost=report,
        produced=o.produced.copy(),
        gamma_trace=o.gamma_after.copy(),
        reference_power=o.reference_power,
        fallback=bool(o.fallback),
    )


def run_slm(X, cfg: SlmConfig) -> SlmResult:
    """Run the scheme and form named by ``cfg`` on one symbol block.

    Wang's scheme also accepts the original time-domain signal in place of
    the symbols.
    """
    if cfg.scheme is Scheme.WANG and isinstance(X, SignalSequence):
        if len(X) != cfg.N:
            raise ValueError(f"expected {cfg.N} samples, got {len(X)}")
        x1 = np.ascontiguousarray(X.samples)
        return _result(cfg, _run_trial(cfg, None, cfg.seed, x1))
    return _result(cfg, _run_trial(cfg, _data_symbols(X, cfg), cfg.seed))


def _form(cfg: SlmConfig, scheme: Scheme, ag: bool) -> SlmConfig:
    if cfg.scheme is not scheme:
        raise ConfigError(f"config is for {cfg.scheme.value}, not {scheme.value}")
    return cfg if cfg.ag == ag else cfg.replace(ag=ag)


def slm_conventional(X, cfg: SlmConfig) -> SlmResult:
    return run_slm(X, _form(cfg, Scheme.CONVENTIONAL, False))


def slm_conventional_ag(X, cfg: SlmConfig) -> SlmResult:
    return run_slm(X, _form(cfg, Scheme.CONVENTIONAL, True))


def slm_lim(X, cfg: SlmConfig) -> SlmResult:
    return run_slm(X, _form(cfg, Scheme.LIM, False))


def slm_lim_ag(X, cfg: SlmConfig) -> SlmResult:
    return run_slm(X, _form(cfg, Scheme.LIM, True))


def slm_wang(x1, cfg: SlmConfig) -> SlmResult:
    return run_slm(x1, _form(cfg, Scheme.WANG, False))


def slm_wang_ag(x1, cfg: SlmConfig) -> SlmResult:
    return run_slm(x1, _form(cfg, Scheme.WANG, True))


def slm_baxley(X, cfg: SlmConfig) -> SlmResult:
    return run_slm(X, _form(cfg, Scheme.BAXLEY, False))


def slm_baxley_ag(X, cfg: SlmConfig) -> SlmResult:
    return run_slm(X, _form(cfg, Scheme.BAXLEY, True))
