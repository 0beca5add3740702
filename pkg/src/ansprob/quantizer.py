"""Probabilistic pyramid vector quantization of distributions.

A distribution ``p`` over ``D`` symbols is approximated by a composition
``Q`` (``D`` naturals summing to ``K``). The decoder side rebuilds a
distribution from ``Q`` with a power deformation ``w`` and an offset ``o``::

    q_s = (Q_s**w + o_s) / sum(Q_t**w + o_t)

and the encoder side aims ``Q/K`` at ``p**(1/w)`` (normalized), which spends
more quantization levels on small probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .probmodel import as_probabilities, entropy, kl_divergence

#: Floor for the penalty denominator ``K * t_s``.
TARGET_FLOOR = 1e-12


@dataclass(frozen=True)
class DeformParams:
    """Reconstruction deformation: power `w` and offset `o` (scalar or per symbol)."""

    w: float = 1.2
    o: float | tuple = 0.15

    def __post_init__(self):
        if not self.w > 0:
            raise ValueError("w must be positive")
        if np.any(np.asarray(self.o, dtype=float) < 0):
            raise ValueError("offsets must be non-negative")


#: Plain ``Q/K`` reconstruction.
PLAIN = DeformParams(w=1.0, o=0.0)


def deform_target(p, w: float) -> np.ndarray:
    """Normalized ``p**(1/w)``, the point ``Q/K`` should approximate."""
    p = np.asarray(p, dtype=np.float64)
    t = p ** (1.0 / w)
    return t / t.sum()


def quantize(p, K: int, w: float = 1.0, min_count: int = 0) -> np.ndarray:
    """Quantize `p` to an integer vector summing to `K`.

    Rounds ``K * t`` (``t`` from :func:`deform_target`) and then repairs the
    total. Each sweep moves up to ``|sum(Q) - K|`` coordinates by one unit
    toward `K`, picking those with the smallest increase of the quadratic
    KL proxy ``((Q_s + df - K t_s)**2 - (Q_s - K t_s)**2) / (K t_s)``. Ties go
    to the lowest symbol index.

    Parameters
    ----------
    p : array_like
        Distribution to quantize (strictly positive, sums to 1).
    K : int
        Required total of the returned counts.
    w : float
        Deformation power; ``w=1`` quantizes ``p`` itself.
    min_count : int
        Lower bound for every count. 0 allows empty symbols; tANS tables
        need 1.

    Returns
    -------
    numpy.ndarray
        int64 counts with ``Q.sum() == K`` and ``Q >= min_count``.
    """
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("p must be a non-empty 1-D vector")
    if not np.all(np.isfinite(p)):
        raise ValueError("p contains non-finite entries")
    if K < 1:
        raise ValueError("K must be >= 1")
    if not w > 0:
        raise ValueError("w must be positive")
    if min_count * p.size > K:
        raise ValueError(f"cannot give {p.size} symbols at least {min_count} out of K={K}")
    p = as_probabilities(p)

    pk = K * deform_target(p, w)
    denom = np.maximum(pk, TARGET_FLOOR)
    Q = np.maximum(np.rint(pk), min_count).astype(np.int64)
    total = int(Q.sum())
    while total != K:
        df = 1 if K > total else -1
        modifiable = np.flatnonzero(Q + df >= min_count)
        if modifiable.size == 0:
            raise RuntimeError("no coordinate can be adjusted")
        penalty = ((Q[modifiable] + df - pk[modifiable]) ** 2
                   - (Q[modifiable] - pk[modifiable]) ** 2) / denom[modifiable]
        count = min(abs(K - total), modifiable.size)
        # stable sort keeps lower indices first among equal penalties
        best = modifiable[np.argsort(penalty, kind="stable")[:count]]
        Q[best] += df
        total = int(Q.sum())
    return Q


def reconstruct(Q, params: DeformParams = PLAIN) -> np.ndarray:
    """Decoder-side distribution ``q_s ∝ Q_s**w + o_s``."""
    Q = np.asarray(Q)
    if Q.ndim != 1 or Q.size == 0:
        raise ValueError("Q must be a non-empty 1-D vector")
    if np.any(Q < 0):
        raise ValueError("counts must be non-negative")
    o = np.broadcast_to(np.asarray(params.o, dtype=np.float64), Q.shape)
    num = Q.astype(np.float64) ** params.w + o
    total = num.sum()
    if total <= 0:
        raise ValueError("all reconstruction numerators are zero")
    if np.any(num <= 0):
        raise ValueError("zero count with zero offset gives a zero probability")
    return num / total


def quantization_loss(p, K: int, params: DeformParams = PLAIN) -> float:
    """Relative size increase ΔH/H caused by quantizing `p` with `params`.

    When any offset is zero the counts are floored at 1 so that the
    reconstruction stays strictly positive.
    """
    p = as_probabilities(p)
    min_count = 1 if np.any(np.asarray(params.o) == 0) else 0
    q = reconstruct(quantize(p, K, params.w, min_count=min_count), params)
    h = entropy(p)
    dh = kl_divergence(p, q)
    return dh / h if h > 0 else dh
