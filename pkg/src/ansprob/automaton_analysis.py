"""Exact compression rate of a tANS automaton on an i.i.d. source.

For a spread over states ``I = {L..2L-1}`` the coder is a Markov chain on
``I``. Entering state ``y`` (symbol ``s = spread[y]``, reduced index ``i``)
happens from every source state ``x`` whose top bits equal ``i``, i.e.
``x`` in ``[i * 2**b, (i+1) * 2**b)`` with ``b = lg L - floor(lg i)`` bits
written. With ``M[y, x] = p[s] * [x in range(i)]`` the chain is column
stochastic, its stationary distribution ``rho`` solves ``M rho = rho`` and
the rate is ``sum_y b(y) (M rho)_y`` bits/symbol.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve

from .probmodel import as_probabilities, entropy
from .tans import SpreadTable

LOG2E = 1.0 / np.log(2.0)
POWER_TOL = 1e-13
POWER_MAX_ITER = 10**6
DENSE_FALLBACK_L = 256


class StationaryError(RuntimeError):
    """The chain has no unique stationary distribution or the solver failed."""


def bits_table(L: int) -> np.ndarray:
    """Bits written per reduced index: ``lg L - floor(lg i)`` for ``i = 0..2L-1`` (entry 0 unused)."""
    log_L = L.bit_length() - 1
    i = np.arange(2 * L)
    out = np.zeros(2 * L, dtype=np.int64)
    out[1:] = log_L - (np.frexp(i[1:].astype(np.float64))[1] - 1)
    return out


def source_ranges(i, L: int) -> tuple[np.ndarray, np.ndarray]:
    """Source-state offsets ``[lo, hi)`` (relative to L) that reduce to index `i`."""
    i = np.asarray(i, dtype=np.int64)
    width = np.left_shift(1, bits_table(L)[i])
    lo = i * width - L
    return lo, lo + width


@dataclass(frozen=True, eq=False)
class AutomatonModel:
    """Transition structure of a tANS automaton under a real source `real_p`."""

    table: SpreadTable
    real_p: np.ndarray
    reduced: np.ndarray  # reduced index of each state
    nbt: np.ndarray  # bits written on entering each state
    matrix: sp.csr_matrix  # M[dest, src]

    @property
    def L(self) -> int:
        return self.table.L


def build_model(table: SpreadTable, real_p) -> AutomatonModel:
    """Assemble the sparse column-stochastic transition matrix."""
    p = as_probabilities(real_p, name="real_p")
    if p.size != table.D:
        raise ValueError(f"{p.size} probabilities for {table.D} symbols")
    L = table.L
    reduced = table.reduced_index()
    lo, hi = source_ranges(reduced, L)
    width = hi - lo
    rows = np.repeat(np.arange(L), width)
    cols = np.arange(width.sum()) - np.repeat(np.cumsum(width) - width, width) + np.repeat(lo, width)
    vals = np.repeat(p[table.spread], width)
    matrix = sp.csr_matrix((vals, (rows, cols)), shape=(L, L))
    nbt = bits_table(L)[reduced]
    return AutomatonModel(table, p, reduced, nbt, matrix)


def _closed_classes(matrix: sp.csr_matrix) -> int:
    n, labels = connected_components(matrix.T, directed=True, connection="strong")
    if n == 1:
        return 1
    coo = matrix.tocoo()
    leaving = labels[coo.col] != labels[coo.row]
    open_ = np.zeros(n, dtype=bool)
    open_[labels[coo.col[leaving]]] = True
    return int(n - open_.sum())


def _residual(matrix, rho) -> float:
    return float(np.abs(matrix @ rho - rho).max())


def stationary(model: AutomatonModel, tol: float = POWER_TOL,
               max_iter: int = POWER_MAX_ITER) -> np.ndarray:
    """Stationary state distribution ``rho`` (offset ``x - L``) of the automaton.

    Power iteration from ``rho_x ∝ 1/x``; if it does not settle within
    `max_iter` steps (e.g. a periodic chain) the linear system is solved
    directly, densely for small L.

    Raises
    ------
    StationaryError
        If the chain has more than one closed class (no unique answer) or
        the result fails the residual check.
    """
    M = model.matrix
    L = model.L
    if _closed_classes(M) > 1:
        raise StationaryError("reducible chain: stationary distribution is not unique")
    rho = 1.0 / np.arange(L, 2 * L, dtype=np.float64)
    rho /= rho.sum()
    for _ in range(max_iter):
        nxt = M @ rho
        nxt /= nxt.sum()
        if np.abs(nxt - rho).max() < tol:
            rho = nxt
            break
        rho = nxt
    else:
        rho = _direct_solve(M)
    if _residual(M, rho) >= 1e-10:
        rho = _direct_solve(M)
        if _residual(M, rho) >= 1e-10:
            raise StationaryError("stationary solve did not converge")
    return rho


def _direct_solve(M: sp.csr_matrix) -> np.ndarray:
    L = M.shape[0]
    if L <= DENSE_FALLBACK_L:
        kernel = scipy.linalg.null_space(M.toarray() - np.eye(L))
        if kernel.shape[1] != 1:
            raise StationaryError(f"kernel of M - I has dimension {kernel.shape[1]}")
        rho = kernel[:, 0]
    else:
        # replace one balance equation with the normalization
        A = (M - sp.identity(L, format="csr")).tolil()
        A[0, :] = np.ones(L)
        b = np.zeros(L)
        b[0] = 1.0
        rho = spsolve(A.tocsc(), b)
    rho = np.abs(rho)
    return rho / rho.sum()


def mean_bits_per_symbol(model: AutomatonModel, rho) -> float:
    """Average bits written per symbol in the stationary regime."""
    return float(model.nbt @ (model.matrix @ np.asarray(rho)))


def automaton_delta_h(p, table: SpreadTable) -> float:
    """Relative redundancy ``(rate - H(p)) / H(p)`` of the automaton for source `p`."""
    model = build_model(table, p)
    h = entropy(model.real_p)
    if model.L == 1:
        return 0.0
    rate = mean_bits_per_symbol(model, stationary(model))
    if h == 0.0:
        return rate
    return (rate - h) / h
