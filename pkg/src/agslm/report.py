"""Per-trial cost records and their aggregation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["ComplexityReport", "UNIT_T", "UNIT_ADDITIONS"]

UNIT_T = "T"
UNIT_ADDITIONS = "complex_additions"


def _pad_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros(max(a.size, b.size), dtype=np.int64)
    out[: a.size] += a
    out[: b.size] += b
    return out


@dataclass
class ComplexityReport:
    """Costs of a set of SLM runs in one unit.

    ``raw`` holds integer costs (c-points or complex additions) and ``scale``
    converts them to the reporting unit: ``N * log2(N)`` for ``T``, 1 for
    additions.  ``aborts[u - 1]`` counts runs where candidate ``u`` was
    abandoned early; ``a_hist[a]`` counts candidates ``u >= 2`` that produced
    exactly ``a`` samples before stopping or finishing.
    """

    unit: str
    scale: int
    raw: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    trials: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    aborts: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    a_hist: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        self.raw = np.asarray(self.raw, dtype=np.int64)
        self.trials = np.asarray(self.trials, dtype=np.int64)
        self.aborts = np.asarray(self.aborts, dtype=np.int64)
        self.a_hist = np.asarray(self.a_hist, dtype=np.int64)
        if self.raw.shape != self.trials.shape:
            raise ValueError("one trial index per cost is required")

    @classmethod
    def single(cls, unit, scale, raw_cost, produced, aborted, trial=0, N=None):
        produced = np.asarray(produced, dtype=np.int64)
        hist = np.bincount(produced[1:], minlength=(N or int(produced.max(initial=0))) + 1)
        return cls(unit, scale, [raw_cost], [trial], np.asarray(aborted, dtype=np.int64), hist)

    @property
    def n_trials(self) -> int:
        return self.raw.size

    @property
    def costs(self) -> np.ndarray:
        return self.raw / self.scale

    @property
    def mean(self) -> float:
        if not self.n_trials:
            return float("nan")
        return float(self.raw.sum()) / self.n_trials / self.scale

    @property
    def stderr(self) -> float:
        if self.n_trials < 2:
            return 0.0
        return float(np.std(self.costs, ddof=1) / np.sqrt(self.n_trials))

    def merge(self, other: "ComplexityReport") -> "ComplexityReport":
        """Combine disjoint sets of trials; order of merging does not matter."""
        if (self.unit, self.scale) != (other.unit, other.scale):
            raise ValueError("cannot merge reports with different units")
        trials = np.concatenate([self.trials, other.trials])
        raw = np.concatenate([self.raw, other.raw])
        order = np.argsort(trials, kind="stable")
        return ComplexityReport(
            self.unit,
            self.scale,
            raw[order],
            trials[order],
            _pad_add(self.aborts, other.aborts),
            _pad_add(self.a_hist, other.a_hist),
        )

    def summary(self) -> dict:
        return {
            "unit": self.unit,
            "trials": self.n_trials,
            "mean": self.mean,
            "stderr": self.stderr,
            "aborts": self.aborts.tolist(),
        }
