"""Baseband OFDM building blocks: 16-QAM mapping, oversampling, PAPR, phase vectors.

All transforms in this package use the unnormalized inverse DFT
``x(n) = sum_k X(k) exp(+2j*pi*k*n/N)``.  PAPR is scale invariant, so the
missing ``1/N`` only changes the mean power, which is always divided out.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "QAM16",
    "PHASES",
    "SymbolSequence",
    "SignalSequence",
    "PhaseVector",
    "map_qam16",
    "oversample",
    "papr",
    "papr_db",
    "to_db",
    "random_phase_vector",
    "phase_codes",
    "random_bits",
    "random_symbols",
    "trial_streams",
]

# Gray code per axis: 00 -> +1, 01 -> +3, 10 -> -1, 11 -> -3.
_GRAY_LEVEL = np.array([1.0, 3.0, -1.0, -3.0])
_QAM16_SCALE = 1.0 / np.sqrt(10.0)

#: 16-QAM alphabet indexed by the 4-bit word ``b0 b1 b2 b3`` (b0 is the MSB);
#: ``b0 b1`` select the in-phase level and ``b2 b3`` the quadrature level.
QAM16 = (_GRAY_LEVEL[np.arange(16) >> 2] + 1j * _GRAY_LEVEL[np.arange(16) & 3]) * _QAM16_SCALE
QAM16.setflags(write=False)

#: Rotation alphabet for random phase vectors, indexed by a 2-bit code.
PHASES = np.array([1.0 + 0.0j, 0.0 + 1.0j, -1.0 + 0.0j, 0.0 - 1.0j])
PHASES.setflags(write=False)


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SymbolSequence:
    """Frequency-domain block of complex symbols (the IFFT input)."""

    symbols: np.ndarray
    oversampling: int = 1
    modulation: str = "QAM16"

    def __post_init__(self):
        sym = _frozen(np.ravel(self.symbols))
        if not _is_pow2(sym.size):
            raise ValueError(f"symbol block length must be a power of two, got {sym.size}")
        if not np.all(np.isfinite(sym)):
            raise ValueError("symbol block contains non-finite values")
        if not _is_pow2(self.oversampling):
            raise ValueError(f"oversampling must be a power of two, got {self.oversampling}")
        object.__setattr__(self, "symbols", sym)

    def __len__(self):
        return self.symbols.size

    @property
    def n_data(self) -> int:
        return self.symbols.size // self.oversampling

    @cached_property
    def energy(self) -> float:
        """Sum of ``|X(k)|**2``; equals the time-domain mean power of its IFFT."""
        s = self.symbols
        return float(np.sum(s.real * s.real + s.imag * s.imag))

    def rotate(self, phase: "PhaseVector") -> "SymbolSequence":
        """Element-wise product with a phase vector defined on the data symbols.

        On an oversampled block the rotation applies to the occupied
        subcarriers only; the inserted zeros stay zero.
        """
        if self.oversampling == 1:
            return SymbolSequence(self.symbols * phase.entries, 1, self.modulation)
        idx = occupied_bins(self.n_data, self.oversampling)
        out = self.symbols.copy()
        out[idx] = out[idx] * phase.entries
        return SymbolSequence(out, self.oversampling, self.modulation)


@dataclass(frozen=True)
class SignalSequence:
    """Time-domain block of samples produced from candidate ``source_u``."""

    samples: np.ndarray
    source_u: int = 1

    def __post_init__(self):
        object.__setattr__(self, "samples", _frozen(np.ravel(self.samples)))

    def __len__(self):
        return self.samples.size

    @cached_property
    def powers(self) -> np.ndarray:
        x = self.samples
        return x.real * x.real + x.imag * x.imag

    @cached_property
    def mean_power(self) -> float:
        return float(np.mean(self.powers))


@dataclass(frozen=True)
class PhaseVector:
    entries: np.ndarray
    u: int = 1
    codes: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        e = _frozen(np.ravel(self.entries))
        if not np.allclose(np.abs(e), 1.0, rtol=0.0, atol=1e-12):
            raise ValueError("phase vector entries must have unit magnitude")
        if self.u == 1 and not np.all(e == 1.0):
            raise ValueError("phase vector 1 must be the all-one vector")
        object.__setattr__(self, "entries", e)


def occupied_bins(n_data: int, L: int) -> np.ndarray:
    """Positions of the data symbols inside an ``L``-times oversampled spectrum."""
    half = n_data // 2
    N = n_data * L
    return np.concatenate([np.arange(half), np.arange(N - (n_data - half), N)])


def map_qam16(bits) -> SymbolSequence:
    """Gray-map a bit string onto unit-average-power 16-QAM."""
    bits = np.asarray(bits).ravel()
    if bits.size % 4:
        raise ValueError(f"bit count must be a multiple of 4, got {bits.size}")
    if bits.size and not np.all((bits == 0) | (bits == 1)):
        raise ValueError("bits must be 0 or 1")
    words = bits.reshape(-1, 4).astype(np.int64) @ np.array([8, 4, 2, 1])
    return SymbolSequence(QAM16[words])


def oversample(X: SymbolSequence, L: int) -> SymbolSequence:
    """Insert ``(L - 1) * N`` zeros in the middle of the spectrum."""
    if not _is_pow2(L):
        raise ValueError(f"oversampling factor must be a power of two, got {L}")
    if X.oversampling != 1:
        raise ValueError("sequence is already oversampled")
    if L == 1:
        return X
    n = len(X)
    out = np.zeros(n * L, dtype=np.complex128)
    out[occupied_bins(n, L)] = X.symbols
    return SymbolSequence(out, L, X.modulation)


def papr(x: SignalSequence, reference_power: float | None = None) -> float:
    """Linear PAPR, ``max |x(n)|**2 / reference_power``.

    ``reference_power`` defaults to the block's own mean power. SLM candidates
    share one reference, the mean power of the original block.
    """
    ref = x.mean_power if reference_power is None else float(reference_power)
    if not ref > 0.0:
        raise ValueError("PAPR undefined for a zero-power block")
    return float(np.max(x.powers)) / ref


def to_db(ratio):
    return 10.0 * np.log10(ratio)


def papr_db(x: SignalSequence, reference_power: float | None = None) -> float:
    return float(to_db(papr(x, reference_power)))


# -- random streams -----------------------------------------------------------

def trial_streams(master_seed: int, trial: int) -> tuple[np.random.SeedSequence, np.random.SeedSequence]:
    """Independent (symbol, phase) seed sequences for one Monte Carlo trial."""
    return (
        np.random.SeedSequence(master_seed, spawn_key=(trial, 0)),
        np.random.SeedSequence(master_seed, spawn_key=(trial, 1)),
    )


def _raw_words(seed, count: int, skip: int = 0) -> np.ndarray:
    bg = np.random.PCG64(seed)
    if skip:
        bg.advance(skip)
    return bg.random_raw(count).astype("<u8")


def _words_for(width: int, bits_per_item: int) -> int:
    return -(-width * bits_per_item // 64)


def _unpack(words: np.ndarray, bits_per_item: int) -> np.ndarray:
    b = words.view(np.uint8)
    per_byte = 8 // bits_per_item
    mask = (1 << bits_per_item) - 1
    shifts = np.arange(per_byte, dtype=np.uint8) * bits_per_item
    return ((b[..., None] >> shifts) & mask).reshape(*words.shape[:-1], -1)


def random_bits(n_bits: int, seed) -> np.ndarray:
    words = _raw_words(seed, _words_for(n_bits, 1))
    return _unpack(words, 1)[:n_bits]


def random_symbols(n_data: int, seed) -> SymbolSequence:
    """Uniform 16-QAM block drawn from ``seed``; same stream as :func:`random_bits`."""
    return map_qam16(random_bits(4 * n_data, seed))


def phase_codes(U: int, width: int, seed) -> np.ndarray:
    """2-bit rotation codes for candidates ``2..U``, shape ``(U - 1, width)``.

    Row ``u - 2`` depends only on ``(seed, u)``, so a run with fewer
    candidates sees exactly the leading rows of a larger run.
    """
    if U < 1:
        raise ValueError("U must be >= 1")
    wpv = _words_for(width, 2)
    if U == 1:
        return np.zeros((0, width), dtype=np.uint8)
    words = _raw_words(seed, (U - 1) * wpv).reshape(U - 1, wpv)
    return _unpack(words, 2)[:, :width]


def random_phase_vector(u: int, n_data: int, seed) -> PhaseVector:
    """Phase vector ``u`` with i.i.d. entries from ``{1, j, -1, -j}``.

    ``u = 1`` is the all-one vector. Otherwise the entries are reproducible
    from ``(seed, u)`` and agree with row ``u - 2`` of :func:`phase_codes`.
    """
    if u < 1:
        raise ValueError("candidate index starts at 1")
    if u == 1:
        return PhaseVector(np.ones(n_data, dtype=np.complex128), 1)
    wpv = _words_for(n_data, 2)
    codes = _unpack(_raw_words(seed, wpv, skip=(u - 2) * wpv), 2)[:n_data]
    return PhaseVector(PHASES[codes], u, codes)
