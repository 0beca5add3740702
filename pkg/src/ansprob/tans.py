"""Tabled ANS: symbol spreads, coder tables and stream coding.

States are the integers ``I = {L, ..., 2L-1}``; arrays indexed by state
store state ``x`` at offset ``x - L``. A symbol ``s`` with ``Ls[s]``
appearances owns the reduced states ``Ls[s] .. 2*Ls[s]-1``, which map in
order onto its appearances in increasing state order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .probmodel import as_probabilities

SPREAD_KINDS = ("fast", "tuned-sorted", "tuned-bucketed", "tuned-iterated")


class TansError(ValueError):
    """Invalid table, state or bitstream."""


def _is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def _check_counts(Ls, L: int) -> np.ndarray:
    Ls = np.asarray(Ls, dtype=np.int64)
    if Ls.ndim != 1 or Ls.size == 0:
        raise TansError("Ls must be a non-empty 1-D vector")
    if not _is_pow2(L):
        raise TansError(f"L={L} is not a power of two")
    if Ls.min() < 1:
        raise TansError("every symbol needs at least one state (Ls >= 1)")
    if int(Ls.sum()) != L:
        raise TansError(f"counts sum to {int(Ls.sum())}, expected L={L}")
    return Ls


@dataclass(frozen=True, eq=False)
class SpreadTable:
    """Assignment of a symbol to each of the ``L`` states."""

    L: int
    Ls: np.ndarray
    spread: np.ndarray

    def __post_init__(self):
        Ls = _check_counts(self.Ls, self.L)
        spread = np.asarray(self.spread, dtype=np.int64)
        if spread.shape != (self.L,):
            raise TansError(f"spread must have length {self.L}")
        if spread.min() < 0 or spread.max() >= Ls.size:
            raise TansError("spread contains an unknown symbol")
        if not np.array_equal(np.bincount(spread, minlength=Ls.size), Ls):
            raise TansError("spread does not match the symbol counts")
        Ls.flags.writeable = False
        spread.flags.writeable = False
        object.__setattr__(self, "Ls", Ls)
        object.__setattr__(self, "spread", spread)

    @property
    def D(self) -> int:
        return self.Ls.size

    @property
    def log_L(self) -> int:
        return self.L.bit_length() - 1

    def reduced_index(self) -> np.ndarray:
        """Reduced state ``i`` for every state: ``Ls[s]`` plus earlier appearances of ``s``."""
        out = np.empty(self.L, dtype=np.int64)
        seen = self.Ls.copy()
        for x, s in enumerate(self.spread.tolist()):
            out[x] = seen[s]
            seen[s] += 1
        return out

    def __eq__(self, other):
        if not isinstance(other, SpreadTable):
            return NotImplemented
        return self.L == other.L and np.array_equal(self.Ls, other.Ls) and np.array_equal(
            self.spread, other.spread)

    def __repr__(self):
        return f"SpreadTable(L={self.L}, D={self.D})"


def fast_step(L: int) -> int:
    """Cursor step of the fast spread, ``L/2 + L/8 + 3`` (forced odd)."""
    return (L // 2 + L // 8 + 3) | 1


def spread_fast(Ls, L: int) -> SpreadTable:
    """Spread used by Finite State Entropy: a cursor jumping by a fixed odd step."""
    Ls = _check_counts(Ls, L)
    step = fast_step(L)
    spread = np.zeros(L, dtype=np.int64)
    pos = 1
    for s, count in enumerate(Ls.tolist()):
        for _ in range(count):
            pos = (pos + step) % L
            spread[pos] = s
    return SpreadTable(L, Ls, spread)


def inverse_log_table(n: int) -> np.ndarray:
    """``1/ln(1 + 1/i)`` for ``i = 0..n`` (entry 0 unused, set to 0)."""
    i = np.arange(1, n + 1, dtype=np.float64)
    return np.concatenate(([0.0], 1.0 / np.log1p(1.0 / i)))


def preferred_positions(Ls, p) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Preferred states ``1/(p_s ln(1+1/i))`` for all appearances.

    Returns ``(x, symbol, i)`` arrays in symbol-major, ``i``-ascending order.
    """
    Ls = np.asarray(Ls, dtype=np.int64)
    table = inverse_log_table(2 * int(Ls.max()) - 1)
    syms = np.repeat(np.arange(Ls.size), Ls)
    first = np.repeat(np.cumsum(Ls) - Ls, Ls)
    i = np.arange(syms.size) - first + Ls[syms]
    x = table[i] / np.asarray(p)[syms]
    return x, syms, i


def _tuned_inputs(Ls, p, L):
    Ls = _check_counts(Ls, L)
    p = as_probabilities(p)
    if p.size != Ls.size:
        raise TansError(f"{p.size} probabilities for {Ls.size} symbols")
    return Ls, p


def spread_tuned_sorted(Ls, p, L: int) -> SpreadTable:
    """Tuned spread: place appearances in order of their preferred positions.

    Ties are broken by symbol index, then by reduced index.
    """
    Ls, p = _tuned_inputs(Ls, p, L)
    x, syms, i = preferred_positions(Ls, p)
    order = np.lexsort((i, syms, x))
    return SpreadTable(L, Ls, syms[order])


def spread_tuned_bucketed(Ls, p, L: int) -> SpreadTable:
    """Linear-time tuned spread via rounding preferred positions into L buckets."""
    Ls, p = _tuned_inputs(Ls, p, L)
    x, syms, _ = preferred_positions(Ls, p)
    bucket = (np.clip(np.rint(x), L, 2 * L - 1) - L).astype(np.int64)
    # counting sort, stable within a bucket
    start = np.zeros(L + 1, dtype=np.int64)
    np.cumsum(np.bincount(bucket, minlength=L), out=start[1:])
    spread = np.empty(L, dtype=np.int64)
    fill = start[:-1].tolist()
    for b, s in zip(bucket.tolist(), syms.tolist()):
        spread[fill[b]] = s
        fill[b] += 1
    return SpreadTable(L, Ls, spread)


def spread_tuned_iterated(Ls, p, L: int, iters: int = 1) -> SpreadTable:
    """Tuned spread refined with the automaton's own stationary distribution.

    Starts from :func:`spread_tuned_sorted`. Each iteration computes the
    stationary state distribution ``rho`` of the current automaton, the
    probability mass ``p_s * rho(range(s, i))`` of entering every appearance,
    and refills the states in order of decreasing mass (ties by symbol, then
    ``i``). If the current automaton has no unique stationary distribution
    there is nothing to refine against, and the table built so far is
    returned.
    """
    from .automaton_analysis import StationaryError, build_model, source_ranges, stationary

    if iters < 1:
        raise ValueError("iters must be >= 1")
    Ls, p = _tuned_inputs(Ls, p, L)
    table = spread_tuned_sorted(Ls, p, L)
    if Ls.size == 1:
        return table
    syms = np.repeat(np.arange(Ls.size), Ls)
    i = np.arange(syms.size) - np.repeat(np.cumsum(Ls) - Ls, Ls) + Ls[syms]
    lo, hi = source_ranges(i, L)
    for _ in range(iters):
        try:
            rho = stationary(build_model(table, p))
        except StationaryError:
            break
        cum = np.concatenate(([0.0], np.cumsum(rho)))
        mass = p[syms] * (cum[hi] - cum[lo])
        order = np.lexsort((i, syms, -mass))
        table = SpreadTable(L, Ls, syms[order])
    return table


def make_spread(kind: str, Ls, L: int, p=None, iters: int = 1) -> SpreadTable:
    """Build a spread by name (one of ``SPREAD_KINDS``)."""
    if kind == "fast":
        return spread_fast(Ls, L)
    if p is None:
        raise ValueError(f"{kind} spread needs probabilities")
    if kind == "tuned-sorted":
        return spread_tuned_sorted(Ls, p, L)
    if kind == "tuned-bucketed":
        return spread_tuned_bucketed(Ls, p, L)
    if kind == "tuned-iterated":
        return spread_tuned_iterated(Ls, p, L, iters)
    raise ValueError(f"unknown spread kind {kind!r}; choose from {SPREAD_KINDS}")


# ---------------------------------------------------------------------------
# coder


@dataclass(frozen=True, eq=False)
class TansCoder:
    """Encoding and decoding tables for one spread.

    ``next_state[s][i - Ls[s]]`` is the state reached by symbol ``s`` from
    reduced state ``i``; ``dec_symbol``/``dec_bits``/``dec_base`` describe
    each state ``x`` (at offset ``x - L``): decoding emits the symbol, then
    the new state is ``dec_base + <dec_bits bits read>``.
    """

    table: SpreadTable
    next_state: tuple
    dec_symbol: np.ndarray
    dec_bits: np.ndarray
    dec_base: np.ndarray
    _lists: tuple = field(repr=False, default=())

    @property
    def L(self) -> int:
        return self.table.L

    def bits_for(self, s: int, x: int) -> int:
        """Bits emitted when encoding `s` from state `x`."""
        ls = int(self.table.Ls[s])
        b = x.bit_length() - ls.bit_length()
        return b - 1 if (x >> b) < ls else b


def build_coder(table: SpreadTable) -> TansCoder:
    """Derive encode/decode tables from a spread."""
    L, log_L = table.L, table.log_L
    reduced = table.reduced_index()
    next_state = [[] for _ in range(table.D)]
    for x, s in enumerate(table.spread.tolist()):
        next_state[s].append(L + x)
    # b = lg L - floor(lg i)
    floor_lg = np.array([int(v).bit_length() - 1 for v in reduced], dtype=np.int64)
    dec_bits = log_L - floor_lg
    dec_base = reduced << dec_bits
    for arr in (reduced, dec_bits, dec_base):
        arr.flags.writeable = False
    lists = (table.spread.tolist(), dec_bits.tolist(), dec_base.tolist())
    return TansCoder(table, tuple(tuple(v) for v in next_state), table.spread,
                     dec_bits, dec_base, lists)


class Bitstream:
    """Last-in-first-out bit container.

    Bits are held as ASCII ``'0'``/``'1'`` bytes, most significant bit of
    each written value first. :meth:`read` takes bits off the end, so a
    reader sees the values in the reverse order of writing.
    """

    def __init__(self, bits: bytes | bytearray = b""):
        self._buf = bytearray(bits)

    def __len__(self) -> int:
        return len(self._buf)

    def __eq__(self, other):
        return isinstance(other, Bitstream) and self._buf == other._buf

    def __repr__(self):
        return f"Bitstream({len(self)} bits)"

    def write(self, value: int, nbits: int) -> None:
        if nbits:
            self._buf += format(value, f"0{nbits}b").encode("ascii")

    def read(self, nbits: int) -> int:
        if nbits == 0:
            return 0
        if nbits > len(self._buf):
            raise TansError("bitstream underflow")
        chunk = self._buf[-nbits:]
        del self._buf[-nbits:]
        return int(chunk, 2)

    def copy(self) -> "Bitstream":
        return Bitstream(self._buf)

    def to_bytes(self) -> bytes:
        """Pack MSB-first; the final partial byte is zero padded."""
        n = len(self._buf)
        if n == 0:
            return b""
        padded = self._buf + b"0" * (-n % 8)
        return int(padded, 2).to_bytes(len(padded) // 8, "big")

    @classmethod
    def from_bytes(cls, data: bytes, nbits: int) -> "Bitstream":
        if nbits > 8 * len(data):
            raise TansError("fewer bytes than the declared bit length")
        if nbits == 0:
            return cls()
        text = format(int.from_bytes(data, "big"), f"0{8 * len(data)}b")
        return cls(text[:nbits].encode("ascii"))


def encode(coder: TansCoder, symbols) -> tuple[Bitstream, int]:
    """Encode `symbols`; returns the bitstream and the final state.

    Symbols are consumed last to first, starting from state ``L``, so that
    :func:`decode` reproduces them first to last.
    """
    Ls = coder.table.Ls.tolist()
    D = len(Ls)
    next_state = coder.next_state
    L = coder.L
    buf = bytearray()
    x = L
    for s in reversed(list(symbols)):
        s = int(s)
        if not 0 <= s < D:
            raise TansError(f"symbol {s} outside the alphabet")
        ls = Ls[s]
        b = x.bit_length() - ls.bit_length()
        if (x >> b) < ls:
            b -= 1
        if b:
            buf += format(x & ((1 << b) - 1), f"0{b}b").encode("ascii")
        x = next_state[s][(x >> b) - ls]
    return Bitstream(buf), x


def decode(coder: TansCoder, bits: Bitstream, final_state: int, n: int) -> list[int]:
    """Decode `n` symbols starting from `final_state`.

    `bits` is consumed. Raises :class:`TansError` if the state is out of
    range, the stream runs dry, or it does not end exactly at state ``L``
    with no bits left.
    """
    L = coder.L
    if not L <= final_state < 2 * L:
        raise TansError(f"state {final_state} outside [{L}, {2 * L})")
    sym, nbits, base = coder._lists
    buf = bits._buf
    out = []
    x = final_state
    for _ in range(n):
        j = x - L
        out.append(sym[j])
        b = nbits[j]
        if b:
            if b > len(buf):
                raise TansError("bitstream underflow")
            x = base[j] + int(buf[-b:], 2)
            del buf[-b:]
        else:
            x = base[j]
    if x != L or len(buf):
        raise TansError("stream did not return to the initial state")
    return out
