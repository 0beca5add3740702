"""Information-theoretic quantities for probability models.

Every function here is pure. Probability vectors are plain float64 numpy
arrays; :func:`as_probabilities` validates them and returns a read-only copy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Entries below this are treated as zero and rejected.
MIN_PROBABILITY = 1e-12
#: Allowed deviation of the total from 1.
SUM_TOLERANCE = 1e-9
# Above this alphabet size sums go through math.fsum.
_COMPENSATED_D = 256


def as_probabilities(p, *, name: str = "p") -> np.ndarray:
    """Validate `p` as a point of the open simplex and return a frozen copy.

    Raises
    ------
    ValueError
        If `p` is empty, not one-dimensional, non-finite, has an entry below
        ``MIN_PROBABILITY`` or does not sum to 1 within ``SUM_TOLERANCE``.
    """
    arr = np.array(p, dtype=np.float64, copy=True)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    if arr.min() < MIN_PROBABILITY:
        raise ValueError(
            f"{name} has an entry below {MIN_PROBABILITY:g}; model unused "
            "symbols with zero_symbol_penalty / unused_marking_cost instead"
        )
    total = _sum(arr)
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise ValueError(f"{name} sums to {total!r}, not 1")
    arr.flags.writeable = False
    return arr


def _sum(values: np.ndarray) -> float:
    if values.size >= _COMPENSATED_D:
        return math.fsum(values.tolist())
    return float(values.sum())


def entropy(p) -> float:
    """Shannon entropy of `p` in bits/symbol."""
    p = as_probabilities(p)
    return max(0.0, -_sum(p * np.log2(p)))


def _pair(p, q):
    p = as_probabilities(p, name="p")
    q = as_probabilities(q, name="q")
    if p.shape != q.shape:
        raise ValueError(f"dimension mismatch: {p.size} vs {q.size}")
    return p, q


def kl_divergence(p, q) -> float:
    """Extra bits/symbol paid for coding a `p` source with model `q`.

    This is the exact Kullback-Leibler divergence ``sum p_s lg(p_s/q_s)``,
    clamped at zero against round-off.
    """
    p, q = _pair(p, q)
    return max(0.0, _sum(p * np.log2(p / q)))


def kl_quadratic(p, q) -> float:
    """Second-order Taylor approximation of :func:`kl_divergence`.

    ``(1/ln 4) * sum (p_s - q_s)**2 / p_s``: a 1/p weighted squared error.
    """
    p, q = _pair(p, q)
    return _sum((p - q) ** 2 / p) / math.log(4.0)


def zero_symbol_penalty(k: int, q_min: float) -> float:
    """Bits/symbol lost by reserving `q_min` for each of `k` unused symbols.

    The used symbols are rescaled by ``1 - k*q_min``, which costs
    ``-lg(1 - k*q_min)`` bits for every coded symbol.
    """
    if k < 0 or q_min < 0:
        raise ValueError("k and q_min must be non-negative")
    x = k * q_min
    if x >= 1.0:
        raise ValueError(f"k*q_min = {x} leaves no probability for used symbols")
    return -math.log1p(-x) / math.log(2.0)


def binary_entropy(x: float) -> float:
    """h(x) = -x lg x - (1-x) lg(1-x), with h(0) = h(1) = 0."""
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def log2_binomial(n: int, k: int) -> float:
    """lg C(n, k) through log-gamma."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    return (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)) / math.log(2.0)


def unused_marking_cost(D: int, k: int) -> float:
    """Bits needed to point out which `k` of `D` symbols are unused: lg C(D, k)."""
    if not 0 <= k <= D:
        raise ValueError(f"need 0 <= k <= D, got D={D}, k={k}")
    if k in (0, D):
        return 0.0
    return log2_binomial(D, k)


def unused_marking_estimate(D: int, k: int) -> float:
    """Entropy estimate D*h(k/D) of :func:`unused_marking_cost` (an upper bound)."""
    if not 0 <= k <= D:
        raise ValueError(f"need 0 <= k <= D, got D={D}, k={k}")
    return D * binary_entropy(k / D)


@dataclass(frozen=True)
class PenaltyReport:
    """Description-length trade-off for a frame of `N` symbols."""

    header_bits: float
    delta_h: float
    N: int

    @property
    def total(self) -> float:
        return self.header_bits + self.N * self.delta_h


def mdl_penalty(header_bits: float, N: int, delta_h: float) -> PenaltyReport:
    """Header cost plus N times the per-symbol penalty."""
    if header_bits < 0 or delta_h < 0 or N < 0:
        raise ValueError("header_bits, N and delta_h must be non-negative")
    return PenaltyReport(float(header_bits), float(delta_h), int(N))


def random_simplex(D: int, seed) -> np.ndarray:
    """Random point of the open simplex, reproducible per `seed`.

    Coordinates are i.i.d. uniform on (0, 1] and then normalized. This is
    *not* the flat Dirichlet distribution; it is the ensemble used for the
    benchmark tables. Randomness comes from numpy's PCG64 generator seeded
    through ``numpy.random.default_rng(seed)``, so `seed` may be an int or a
    sequence of ints (e.g. ``(master_seed, trial)``).
    """
    if D < 1:
        raise ValueError("D must be >= 1")
    rng = np.random.default_rng(seed)
    u = 1.0 - rng.random(D)  # (0, 1], never exactly zero
    return as_probabilities(u / u.sum())
