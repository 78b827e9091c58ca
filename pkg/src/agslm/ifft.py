"""Radix-2 decimation-in-time IFFT with lazy, metered evaluation.

The butterfly graph has ``n + 1`` rows: row 0 is the input spectrum in
bit-reversed order, row ``s`` the outputs of stage ``s``, row ``n`` the time
samples in natural order.  Each node of rows ``1..n`` is one c-point, so a
full transform costs ``N * log2(N)``.

Output ``m`` depends, at stage ``s``, on exactly the nodes whose index is
congruent to ``m`` modulo ``2**s``; such a residue class depends only on the
class ``m mod 2**(s - 1)`` one stage down.  The graph is evaluated one class
at a time, so the memo table needs one flag per ``(stage, class)``.  Row
``s`` is stored class-major: class ``c`` occupies the contiguous slice
``[c * N/2**s, (c + 1) * N/2**s)``, and node ``i`` sits at
``(i mod 2**s) * N/2**s + i // 2**s``.  Rows 0 and ``n`` are therefore in
plain index order.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from .ofdm import SignalSequence, SymbolSequence

__all__ = [
    "log2_exact",
    "twiddles",
    "generation_order",
    "k_of_a",
    "k_of_a_partial",
    "CPointMeter",
    "ButterflyGraph",
    "full_ifft",
    "CommonStage",
    "stage_split_ifft",
]


def log2_exact(N: int) -> int:
    N = int(N)
    if N < 1 or N & (N - 1):
        raise ValueError(f"length must be a power of two, got {N}")
    return N.bit_length() - 1


@lru_cache(maxsize=None)
def twiddles(N: int) -> np.ndarray:
    """``exp(+2j*pi*k/N)`` for ``k < N/2``; shared, read-only."""
    log2_exact(N)
    tw = np.exp(2j * np.pi * np.arange(max(N // 2, 1)) / N)
    tw.setflags(write=False)
    return tw


@lru_cache(maxsize=None)
def _layout(N: int, s: int) -> np.ndarray:
    """Storage position of node ``i`` in row ``s``."""
    log2_exact(N)
    i = np.arange(N)
    pos = (i & ((1 << s) - 1)) * (N >> s) + (i >> s)
    pos.setflags(write=False)
    return pos


def to_layout(values: np.ndarray, s: int) -> np.ndarray:
    out = np.empty_like(values)
    out[_layout(values.size, s)] = values
    return out


def from_layout(row: np.ndarray, s: int) -> np.ndarray:
    return row[_layout(row.size, s)]


@lru_cache(maxsize=None)
def _bit_reversal(N: int) -> np.ndarray:
    n = log2_exact(N)
    idx = np.arange(N)
    rev = np.zeros(N, dtype=np.int64)
    for b in range(n):
        rev |= ((idx >> b) & 1) << (n - 1 - b)
    rev.setflags(write=False)
    return rev


def generation_order(N: int) -> np.ndarray:
    """Output visitation order ``0, N/2, N/4, 3N/4, ...`` (bit reversal of ``0..N-1``)."""
    return _bit_reversal(N).copy()


def k_of_a_partial(a: int, N: int, stages: int) -> int:
    """c-points needed for the first ``a`` outputs using only the last ``stages`` stages."""
    n = log2_exact(N)
    if not 1 <= a <= N:
        raise ValueError(f"a must lie in [1, {N}], got {a}")
    if not 0 <= stages <= n:
        raise ValueError(f"stages must lie in [0, {n}], got {stages}")
    return sum((1 + (a - 1) // (1 << k)) << k for k in range(stages))


def k_of_a(a: int, N: int) -> int:
    """Closed-form cost, in c-points, of emitting the first ``a`` outputs."""
    return k_of_a_partial(a, N, log2_exact(N))


# -- compiled kernels ---------------------------------------------------------

@njit(cache=True, inline="always")
def _fill_class(nodes, s, c, tw):
    N = nodes.shape[1]
    half = 1 << (s - 1)
    width = N >> s
    parent = c & (half - 1)
    src = parent * 2 * width
    dst = c * width
    w = tw[parent * width]
    if c >= half:
        w = -w
    for j in range(width):
        nodes[s, dst + j] = nodes[s - 1, src + 2 * j] + w * nodes[s - 1, src + 2 * j + 1]
    return width


@njit(cache=True)
def _emit(nodes, done, m, s_lo, tw):
    """Compute the missing ancestors of output ``m`` above stage ``s_lo``."""
    # Known ancestors of m form a prefix of the stages, so search from the top.
    n = nodes.shape[0] - 1
    s = n
    while s > s_lo and not done[s, m & ((1 << s) - 1)]:
        s -= 1
    added = 0
    for t in range(s + 1, n + 1):
        c = m & ((1 << t) - 1)
        added += _fill_class(nodes, t, c, tw)
        done[t, c] = True
    return added


@njit(cache=True)
def _complete(nodes, done, s_lo, s_hi, tw):
    """Compute every missing class of stages ``s_lo + 1 .. s_hi``."""
    added = 0
    for s in range(s_lo + 1, s_hi + 1):
        for c in range(1 << s):
            if not done[s, c]:
                added += _fill_class(nodes, s, c, tw)
                done[s, c] = True
    return added


@njit(cache=True)
def _reset(done, s_lo):
    n = done.shape[0] - 1
    for s in range(n + 1):
        width = 1 << s
        flag = s <= s_lo
        for c in range(width):
            done[s, c] = flag


@njit(cache=True)
def _peak_power(row):
    peak = 0.0
    for i in range(row.shape[0]):
        x = row[i]
        p = x.real * x.real + x.imag * x.imag
        if p > peak:
            peak = p
    return peak


# -- Python-level API ---------------------------------------------------------

@dataclass
class CPointMeter:
    """Running count of computed c-points for an ``N``-point transform."""

    N: int
    count: int = 0

    def add(self, k: int) -> None:
        if k < 0:
            raise ValueError("c-point count cannot decrease")
        self.count += int(k)

    @property
    def in_T(self) -> float:
        """Cost in units of one full transform."""
        n = log2_exact(self.N)
        return self.count / (self.N * n) if n else 0.0


class ButterflyGraph:
    """Memoized butterfly graph that emits outputs one at a time.

    Outputs come out in bit-reversed order.  Each call to :meth:`next_output`
    computes only the nodes its output needs that are not already known, and
    reports how many that was.  ``first_stage > 0`` starts from given
    intermediate values (the rows below it are treated as free).
    """

    def __init__(self, X, *, first_stage: int = 0, stage_values=None, meter: CPointMeter | None = None):
        if stage_values is None:
            spec = X.symbols if isinstance(X, SymbolSequence) else np.asarray(X, dtype=np.complex128)
            N = spec.size
            n = log2_exact(N)
            if first_stage:
                raise ValueError("first_stage requires stage_values")
            row = spec[_bit_reversal(N)]
        else:
            vals = np.asarray(stage_values, dtype=np.complex128)
            N = vals.size
            n = log2_exact(N)
            if not 0 <= first_stage <= n:
                raise ValueError(f"first_stage must lie in [0, {n}]")
            row = to_layout(vals, first_stage)
        self.N, self.n, self.first_stage = N, n, first_stage
        self.nodes = np.zeros((n + 1, N), dtype=np.complex128)
        self.nodes[first_stage] = row
        self._done = np.zeros((n + 1, N), dtype=np.bool_)
        _reset(self._done, first_stage)
        self.meter = meter if meter is not None else CPointMeter(N)
        self.order = _bit_reversal(N)
        self.produced = 0

    @property
    def computed(self) -> np.ndarray:
        """Per-node flags, shape ``(n + 1, N)``."""
        out = np.empty_like(self._done)
        for s in range(self.n + 1):
            out[s] = self._done[s, np.arange(self.N) & ((1 << s) - 1)]
        return out

    def stage_values(self, s: int) -> np.ndarray:
        """Row ``s`` in natural node order (uncomputed nodes hold garbage)."""
        return from_layout(self.nodes[s], s)

    @property
    def exhausted(self) -> bool:
        return self.produced == self.N

    def next_output(self) -> tuple[int, complex, int]:
        """Emit the next output as ``(index, value, c_points_added)``."""
        if self.exhausted:
            raise StopIteration("all outputs already produced")
        m = int(self.order[self.produced])
        added = _emit(self.nodes, self._done, m, self.first_stage, twiddles(self.N))
        self.meter.add(added)
        self.produced += 1
        return m, complex(self.nodes[self.n, m]), added

    def __iter__(self):
        return self

    __next__ = next_output

    def complete(self) -> int:
        """Finish every remaining node; returns the c-points this took."""
        added = _complete(self.nodes, self._done, self.first_stage, self.n, twiddles(self.N))
        self.meter.add(added)
        self.produced = self.N
        return added

    def outputs(self) -> np.ndarray:
        if not self._done[self.n].all():
            raise RuntimeError("graph not complete")
        return self.nodes[self.n].copy()


def full_ifft(X, meter: CPointMeter | None = None) -> SignalSequence:
    """Unnormalized inverse DFT of ``X`` via the full butterfly graph."""
    g = ButterflyGraph(X, meter=meter)
    g.complete()
    return SignalSequence(g.nodes[g.n])


@dataclass(frozen=True)
class CommonStage:
    """Stage ``stage`` outputs shared by every candidate of a split transform."""

    values: np.ndarray
    stage: int
    c_points: int

    @property
    def N(self) -> int:
        return self.values.size

    @property
    def n_blocks(self) -> int:
        return self.N >> self.stage


def stage_split_ifft(X, r: int, meter: CPointMeter | None = None):
    """Run the first ``n - r`` stages once and return ``(common, resume)``.

    ``resume(block_phases=None)`` gives a :class:`ButterflyGraph` for the last
    ``r`` stages.  ``block_phases`` (length ``2**r``) multiplies each
    contiguous block of ``2**(n - r)`` stage outputs; block ``b`` carries the
    subcarriers ``k`` with ``k mod 2**r == bitrev_r(b)``.
    """
    g = ButterflyGraph(X, meter=meter)
    n = g.n
    if not 1 <= r <= n:
        raise ValueError(f"r must lie in [1, {n}], got {r}")
    s = n - r
    cost = _complete(g.nodes, g._done, 0, s, twiddles(g.N))
    g.meter.add(cost)
    vals = from_layout(g.nodes[s], s)
    vals.setflags(write=False)
    common = CommonStage(vals, s, cost)

    def resume(block_phases=None, meter: CPointMeter | None = None) -> ButterflyGraph:
        row = common.values
        if block_phases is not None:
            bp = np.asarray(block_phases, dtype=np.complex128)
            if bp.size != common.n_blocks:
                raise ValueError(f"need {common.n_blocks} block phases, got {bp.size}")
            row = row * np.repeat(bp, 1 << s)
        return ButterflyGraph(None, first_stage=s, stage_values=row, meter=meter)

    return common, resume
