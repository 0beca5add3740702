import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ansprob.automaton_analysis import (LOG2E, StationaryError, automaton_delta_h, bits_table,
                                        build_model, mean_bits_per_symbol, stationary)
from ansprob.probmodel import entropy, kl_divergence, random_simplex
from ansprob.quantizer import quantize
from ansprob.tans import make_spread, spread_fast, spread_tuned_sorted

FIG3_P = np.array([0.04, 0.16, 0.16, 0.64])
FIG3_LS = np.array([1, 3, 2, 10])


def dense_reference(table, p):
    """Transition matrix from the listing's range rows, built densely and independently.

    Row i of the range table covers [fr, fr+len) in state offsets; len starts at L
    and halves each time the rows fill the state range once more.
    """
    L = table.L
    rows = np.zeros((2 * L, L))
    nbt = np.zeros(2 * L)
    fr, length, sub = 0, L, 0
    for i in range(1, 2 * L):
        rows[i, fr:fr + length] = 1.0
        nbt[i] = np.log2(L) - sub
        fr += length
        if fr == L:
            fr, length, sub = 0, length // 2, sub + 1
    counter = table.Ls.copy()
    idx = []
    for s in table.spread:
        idx.append(counter[s])
        counter[s] += 1
    idx = np.array(idx)
    M = p[table.spread][:, None] * rows[idx]
    return M, nbt[idx]


def test_bits_table_l16():
    b = bits_table(16)
    assert b[1] == 4
    assert b[2:4].tolist() == [3, 3]
    assert b[4:8].tolist() == [2] * 4
    assert b[8:16].tolist() == [1] * 8
    assert b[16:32].tolist() == [0] * 16


@pytest.mark.parametrize("kind", ["fast", "tuned-sorted", "tuned-bucketed"])
def test_matrix_matches_dense_listing(kind):
    table = make_spread(kind, FIG3_LS, 16, FIG3_P)
    model = build_model(table, FIG3_P)
    M, nbt = dense_reference(table, FIG3_P)
    assert np.allclose(model.matrix.toarray(), M, atol=0)
    assert np.array_equal(model.nbt, nbt)
    assert np.allclose(model.matrix.toarray().sum(axis=0), 1.0, atol=1e-12)


def test_single_symbol_is_reducible():
    model = build_model(spread_fast([16], 16), [1.0])
    assert np.array_equal(model.matrix.toarray(), np.eye(16))
    with pytest.raises(StationaryError, match="reducible"):
        stationary(model)


def test_interleaved_halves_are_reducible():
    # Ls = (8, 8) alternating: states {2m, 2m+1} only ever reach each other
    table = spread_tuned_sorted([8, 8], [0.51, 0.49], 16)
    assert table.spread.tolist() == [0, 1] * 8
    with pytest.raises(StationaryError, match="reducible"):
        stationary(build_model(table, [0.51, 0.49]))


def test_single_state_chain():
    model = build_model(spread_fast([1], 1), [1.0])
    rho = stationary(model)
    assert rho.tolist() == [1.0]
    assert mean_bits_per_symbol(model, rho) == 0.0
    assert automaton_delta_h([1.0], spread_fast([1], 1)) == 0.0


def test_fig3_stationary_near_inverse_x():
    model = build_model(spread_tuned_sorted(FIG3_LS, FIG3_P, 16), FIG3_P)
    rho = stationary(model)
    approx = LOG2E / np.arange(16, 32)
    approx /= approx.sum()
    assert 0.5 * np.abs(rho - approx).sum() < 0.1
    assert np.abs(model.matrix @ rho - rho).max() < 1e-10


def test_fig3_rates():
    h = entropy(FIG3_P)
    dh_quant = kl_divergence(FIG3_P, FIG3_LS / 16)
    tuned = build_model(spread_tuned_sorted(FIG3_LS, FIG3_P, 16), FIG3_P)
    rate_tuned = mean_bits_per_symbol(tuned, stationary(tuned))
    assert h <= rate_tuned <= h + dh_quant
    fast = build_model(spread_fast(FIG3_LS, 16), FIG3_P)
    assert mean_bits_per_symbol(fast, stationary(fast)) > rate_tuned
    assert automaton_delta_h(FIG3_P, spread_tuned_sorted(FIG3_LS, FIG3_P, 16)) < dh_quant / h


def test_rate_matches_dense_nullspace():
    table = spread_fast(FIG3_LS, 16)
    M, nbt = dense_reference(table, FIG3_P)
    w, v = np.linalg.eig(M)
    rho = np.real(v[:, np.argmin(np.abs(w - 1))])
    rho /= rho.sum()
    expected = float(nbt @ (M @ rho))
    model = build_model(table, FIG3_P)
    assert mean_bits_per_symbol(model, stationary(model)) == pytest.approx(expected, abs=1e-12)


def test_dyadic_source_is_lossless():
    p = np.array([0.5, 0.25, 0.125, 0.125])
    for kind in ("fast", "tuned-sorted"):
        table = make_spread(kind, (p * 8).astype(int), 8, p)
        assert abs(automaton_delta_h(p, table)) < 1e-10


def test_large_automaton():
    p = random_simplex(256, 77)
    table = make_spread("fast", quantize(p, 2048, min_count=1), 2048)
    model = build_model(table, p)
    rho = stationary(model)
    assert abs(rho.sum() - 1) < 1e-12 and rho.min() >= 0
    assert np.abs(model.matrix @ rho - rho).max() < 1e-10
    assert mean_bits_per_symbol(model, rho) >= entropy(p) - 1e-12


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([16, 64, 256]), st.integers(2, 40), st.integers(0, 2**31),
       st.sampled_from(["fast", "tuned-sorted", "tuned-bucketed"]))
def test_chain_properties(L, D, seed, kind):
    D = min(D, L)
    p = random_simplex(D, seed)
    table = make_spread(kind, quantize(p, L, min_count=1), L, p)
    model = build_model(table, p)
    assert np.allclose(np.asarray(model.matrix.sum(axis=0)).ravel(), 1.0, atol=1e-12)
    assert model.nbt.min() >= 0 and model.nbt.max() <= np.log2(L)
    try:
        rho = stationary(model)
    except StationaryError:
        assume(False)
    assert abs(rho.sum() - 1) < 1e-12
    assert np.abs(model.matrix @ rho - rho).max() < 1e-10
    # Gibbs at the automaton level
    assert mean_bits_per_symbol(model, rho) >= entropy(p) - 1e-12
    assert automaton_delta_h(p, table) >= -1e-12
