"""Agreement between two labelings via normalized mutual information.

Probabilities are empirical cell frequencies (counts over n), entropies use
the natural logarithm, and the normalization is ``2 I(a; b) / (H(a) + H(b))``.
Sums are accumulated with ``math.fsum``, whose correct rounding makes the
score exactly symmetric in its arguments regardless of summation order.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidConfig


@dataclass(frozen=True, eq=False)
class Contingency:
    """Joint count table of two labelings over the same n objects."""

    counts: np.ndarray
    n: int

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=int)
        if c.ndim != 2 or c.size < 1:
            raise InvalidConfig("contingency counts must be a 2-d array")
        if c.min() < 0:
            raise InvalidConfig("contingency counts must be non-negative")
        if int(c.sum()) != self.n or self.n < 1:
            raise InvalidConfig(f"counts sum to {int(c.sum())}, expected n={self.n}")
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)


def _as_labels(x, name: str) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 1 or arr.size < 1:
        raise InvalidConfig(f"{name} must be a non-empty 1-d label array")
    return arr


def contingency(a, b) -> Contingency:
    """Joint count table over the distinct labels of each side."""
    a = _as_labels(a, "a")
    b = _as_labels(b, "b")
    if a.size != b.size:
        raise DimensionMismatch(f"label arrays of length {a.size} and {b.size}")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    counts = np.zeros((ia.max() + 1, ib.max() + 1), dtype=int)
    np.add.at(counts, (ia, ib), 1)
    return Contingency(counts, a.size)


def entropy_from_counts(counts: np.ndarray, n: int) -> float:
    """Shannon entropy (nats) of empirical frequencies counts / n."""
    return -math.fsum(
        (c / n) * math.log(c / n) for c in np.asarray(counts).ravel() if c > 0
    )


def mutual_information(table: Contingency) -> float:
    """I(a; b) in nats from the joint count table, clamped below at zero."""
    n = table.n
    rows = table.counts.sum(axis=1)
    cols = table.counts.sum(axis=0)
    value = math.fsum(
        (c / n) * math.log(n * c / (rows[i] * cols[j]))
        for (i, j), c in np.ndenumerate(table.counts)
        if c > 0
    )
    return max(value, 0.0)


def nmi(a, b) -> float:
    """Normalized mutual information 2 I / (H(a) + H(b)) in [0, 1].

    Two constant labelings carry zero entropy but agree perfectly, so the
    0/0 case is defined as 1.0.
    """
    table = contingency(a, b)
    h_a = entropy_from_counts(table.counts.sum(axis=1), table.n)
    h_b = entropy_from_counts(table.counts.sum(axis=0), table.n)
    denom = h_a + h_b
    if denom == 0.0:
        return 1.0
    return max(2.0 * mutual_information(table) / denom, 0.0)
