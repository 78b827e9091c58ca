"""Reference implementations used as test oracles.

None of these share code with the package under test: the DFT is a direct
matrix product, the c-point count walks the textbook in-place butterfly
graph with explicit node sets, and SLM selection is plain numpy.
"""
from __future__ import annotations

import numpy as np
import pytest


def naive_idft(X):
    X = np.asarray(X, dtype=complex)
    N = X.size
    k = np.arange(N)
    return np.exp(2j * np.pi * np.outer(k, k) / N) @ X


def bitrev(N):
    n = N.bit_length() - 1
    return np.array([int(format(i, f"0{n}b")[::-1], 2) if n else 0 for i in range(N)])


def butterfly_parents(s, i):
    """Nodes of stage s - 1 feeding node i of stage s (in-place radix-2 DIT)."""
    half = 1 << (s - 1)
    base = (i >> s) << s
    j = (i - base) % half
    return (s - 1, base + j), (s - 1, base + j + half)


def count_cpoints(N, a, min_stage=0):
    """Distinct butterfly nodes above ``min_stage`` needed for the first ``a`` outputs in bit-reversed order."""
    n = N.bit_length() - 1
    seen = set()
    stack = [(n, int(m)) for m in bitrev(N)[:a]]
    while stack:
        node = stack.pop()
        if node[0] <= min_stage or node in seen:
            continue
        seen.add(node)
        stack.extend(butterfly_parents(*node))
    return len(seen)


def oversampled(X, L):
    X = np.asarray(X, dtype=complex)
    nd = X.size
    out = np.zeros(nd * L, dtype=complex)
    out[: nd // 2] = X[: nd // 2]
    out[nd * L - (nd - nd // 2):] = X[nd // 2:]
    return out


def time_signal(X, L=1):
    """Unnormalized inverse DFT of the oversampled spectrum via numpy."""
    S = oversampled(X, L)
    return np.fft.ifft(S) * S.size


def select_min(signals, ref):
    """Index of the first candidate with the smallest PAPR, and all PAPRs."""
    paprs = np.array([np.max(np.abs(x) ** 2) / ref for x in signals])
    return int(np.argmin(paprs)), paprs


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
