"""Compact headers for count vectors (compositions of K into D parts).

Two coders share one model. Compositions are indexed so that array slot 0 is
the most significant coordinate: slot ``j`` holds coordinate ``s = D - j`` and
``k`` is the part of the total not yet consumed by earlier slots.

* :func:`enum_encode` / :func:`enum_decode` give the exact enumerative rank,
  a bijection onto ``range(count_compositions(D, K))``. It is the
  bit-optimal reference for a uniform prior.
* :func:`stream_encode_header` / :func:`stream_decode_header` code the slots
  one by one with a byte-wise rANS coder driven by
  ``Pr(Q_s = i | s, k) = n(s-1, k-i) / n(s, k)``.

Wire layout of a streamed header::

    varint(D) varint(K) [state: 4 bytes big-endian] [rANS bytes]

The state and rANS bytes are omitted for ``D == 1``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .probmodel import binary_entropy

PROB_BITS = 16
PROB_SCALE = 1 << PROB_BITS
RANS_L = 1 << 23  # state lives in [RANS_L, RANS_L << 8)
#: Largest K the streaming coder accepts (every candidate needs frequency >= 1).
MAX_STREAM_K = PROB_SCALE // 2 - 1


class HeaderDecodeError(ValueError):
    """Raised when a header is truncated or inconsistent."""


def count_compositions(D: int, K: int) -> int:
    """n(D, K) = C(K + D - 1, D - 1), the number of ways to write K as D naturals."""
    if D < 1 or K < 0:
        raise ValueError(f"need D >= 1 and K >= 0, got D={D}, K={K}")
    return math.comb(K + D - 1, D - 1)


class HeaderCost(NamedTuple):
    exact: float  #: lg n(D, K)
    estimate: float  #: (K+D-1) h((D-1)/(K+D-1))


def header_cost_bits(D: int, K: int) -> HeaderCost:
    """Uniform-prior header size in bits, exact and through the binary-entropy estimate."""
    n = count_compositions(D, K)
    m = K + D - 1
    estimate = m * binary_entropy((D - 1) / m) if m > 0 else 0.0
    return HeaderCost(math.log2(n), estimate)


class CompositionModel:
    """Exact composition counts n(s, k) for s <= D, k <= K.

    Counts are computed lazily from the closed form and cached; the object
    is immutable from the caller's view and safe to share.
    """

    def __init__(self, D: int, K: int):
        if D < 1 or K < 0:
            raise ValueError(f"need D >= 1 and K >= 0, got D={D}, K={K}")
        self.D = D
        self.K = K

    def n(self, s: int, k: int) -> int:
        if not (1 <= s <= self.D and 0 <= k <= self.K):
            raise ValueError(f"(s, k) = ({s}, {k}) outside the model")
        return _n(s, k)

    @property
    def total(self) -> int:
        return _n(self.D, self.K)

    def __repr__(self):
        return f"CompositionModel(D={self.D}, K={self.K})"


@lru_cache(maxsize=1 << 16)
def _n(s: int, k: int) -> int:
    return math.comb(k + s - 1, s - 1)


def conditional_probability(s: int, k: int, i: int) -> Fraction:
    """Pr(Q_s = i | s, k) = n(s-1, k-i) / n(s, k) as an exact fraction."""
    if s < 2:
        raise ValueError("coordinate s must be >= 2 (s = 1 is forced)")
    if not 0 <= i <= k:
        raise ValueError(f"need 0 <= i <= k, got i={i}, k={k}")
    return Fraction(_n(s - 1, k - i), _n(s, k))


def _check_counts(Q) -> list[int]:
    Q = [int(v) for v in np.asarray(Q).ravel()]
    if not Q:
        raise ValueError("empty count vector")
    if any(v < 0 for v in Q):
        raise ValueError("counts must be non-negative")
    return Q


def enum_encode(Q) -> int:
    """Enumerative rank of the composition `Q`."""
    Q = _check_counts(Q)
    D, k = len(Q), sum(Q)
    code = 0
    for j, q in enumerate(Q[:-1]):
        s = D - j
        # sum_{i<q} n(s-1, k-i) telescopes to n(s, k) - n(s, k-q)
        code += _n(s, k) - _n(s, k - q)
        k -= q
    return code


def enum_decode(index: int, D: int, K: int) -> np.ndarray:
    """Inverse of :func:`enum_encode` for compositions of `K` into `D` parts."""
    total = count_compositions(D, K)
    if not 0 <= index < total:
        raise ValueError(f"index {index} outside [0, {total})")
    Q = []
    k = K
    for j in range(D - 1):
        s = D - j
        # largest q with n(s, k) - n(s, k-q) <= index; bisect on the monotone prefix sum
        lo, hi = 0, k
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if _n(s, k) - _n(s, k - mid) <= index:
                lo = mid
            else:
                hi = mid - 1
        index -= _n(s, k) - _n(s, k - lo)
        Q.append(lo)
        k -= lo
    Q.append(k)
    return np.array(Q, dtype=np.int64)


# ---------------------------------------------------------------------------
# streaming coder


def _encode_varint(value: int, out: bytearray) -> None:
    if value < 0:
        raise ValueError("varints are unsigned")
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return


def _decode_varint(data: bytes, pos: int) -> tuple[int, int]:
    value = shift = 0
    while True:
        if pos >= len(data):
            raise HeaderDecodeError("truncated varint")
        byte = data[pos]
        pos += 1
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value, pos
        shift += 7
        if shift > 63:
            raise HeaderDecodeError("varint too long")


@lru_cache(maxsize=1024)
def _frequencies(s: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Integer frequencies (total PROB_SCALE) for Q_s in 0..k, and their cumulative starts."""
    m = np.arange(k, -1, -1, dtype=np.float64)  # k - i for i = 0..k
    # lg-domain n(s-1, k-i) = C(k-i+s-2, s-2); the common n(s, k) factor cancels
    logn = gammaln(m + s - 1) - gammaln(m + 1) - gammaln(s - 1)
    weight = np.exp(logn - logn.max())
    weight /= weight.sum()
    spare = PROB_SCALE - (k + 1)
    share = weight * spare
    freq = np.floor(share).astype(np.int64)
    left = spare - int(freq.sum())
    if left:
        # largest remainder, lower index first on ties
        order = np.argsort(-(share - freq), kind="stable")[:left]
        freq[order] += 1
    freq += 1
    cum = np.zeros(k + 2, dtype=np.int64)
    np.cumsum(freq, out=cum[1:])
    freq.flags.writeable = False
    cum.flags.writeable = False
    return freq, cum


def stream_encode_header(Q) -> bytes:
    """Serialize a count vector into a self-delimiting header."""
    Q = _check_counts(Q)
    D, K = len(Q), sum(Q)
    if K > MAX_STREAM_K:
        raise ValueError(f"K={K} exceeds the streaming limit {MAX_STREAM_K}")
    out = bytearray()
    _encode_varint(D, out)
    _encode_varint(K, out)
    if D == 1:
        return bytes(out)

    remaining = [0] * D  # k seen by slot j
    k = K
    for j, q in enumerate(Q):
        remaining[j] = k
        k -= q

    x = RANS_L
    emitted = bytearray()
    # LIFO coder: push slots last-to-first so the decoder reads them first-to-last
    for j in range(D - 2, -1, -1):
        freq, cum = _frequencies(D - j, remaining[j])
        f = int(freq[Q[j]])
        start = int(cum[Q[j]])
        x_max = ((RANS_L >> PROB_BITS) << 8) * f
        while x >= x_max:
            emitted.append(x & 0xFF)
            x >>= 8
        x = ((x // f) << PROB_BITS) + (x % f) + start
    out += x.to_bytes(4, "big")
    out += emitted[::-1]
    return bytes(out)


def stream_decode_header(data: bytes, *, return_size: bool = False):
    """Decode a header produced by :func:`stream_encode_header`.

    Returns the count vector, or ``(Q, bytes_consumed)`` with
    ``return_size=True``. Trailing bytes after the header are left alone.

    Raises
    ------
    HeaderDecodeError
        On truncation or when the coder state does not return to its
        initial value.
    """
    data = bytes(data)
    D, pos = _decode_varint(data, 0)
    K, pos = _decode_varint(data, pos)
    if D < 1:
        raise HeaderDecodeError("alphabet size 0")
    if K > MAX_STREAM_K:
        raise HeaderDecodeError(f"K={K} exceeds the streaming limit")
    if D == 1:
        Q = np.array([K], dtype=np.int64)
        return (Q, pos) if return_size else Q

    if pos + 4 > len(data):
        raise HeaderDecodeError("truncated coder state")
    x = int.from_bytes(data[pos:pos + 4], "big")
    pos += 4
    if not RANS_L <= x < RANS_L << 8:
        raise HeaderDecodeError("coder state out of range")
    mask = PROB_SCALE - 1
    Q = []
    k = K
    for j in range(D - 1):
        freq, cum = _frequencies(D - j, k)
        slot = x & mask
        q = int(np.searchsorted(cum, slot, side="right")) - 1
        x = int(freq[q]) * (x >> PROB_BITS) + slot - int(cum[q])
        while x < RANS_L:
            if pos >= len(data):
                raise HeaderDecodeError("truncated payload")
            x = (x << 8) | data[pos]
            pos += 1
        Q.append(q)
        k -= q
    Q.append(k)
    if x != RANS_L:
        raise HeaderDecodeError("final coder state mismatch (corrupt header)")
    Q = np.array(Q, dtype=np.int64)
    return (Q, pos) if return_size else Q


def payload_bits(header: bytes) -> int:
    """Bits of a header after its varint prefix (coder state included)."""
    _, pos = _decode_varint(header, 0)
    _, pos = _decode_varint(header, pos)
    return 8 * (len(header) - pos)
