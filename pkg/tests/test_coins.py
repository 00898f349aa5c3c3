from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwplanes.coins import (
    DOWN,
    LEFT,
    RIGHT,
    UP,
    CoinError,
    CoinParams,
    ReducedCoinParams,
    direction_weights,
    grover,
    is_unitary,
    origin_coin_star,
    own_other_block,
    own_other_block_normalized,
    plane_coin,
    random_coin,
    reduced_coin,
)


def test_plane_coin_is_kron_square_of_base(random_coins):
    for p in random_coins:
        assert np.allclose(plane_coin(p), np.kron(p.base, p.base), atol=1e-15)


def test_hadamard_plane_coin_entries():
    h = plane_coin(CoinParams.hadamard())
    expected = 0.5 * np.array([[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]])
    assert np.allclose(h, expected, atol=1e-15)
    assert is_unitary(h)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_random_plane_coins_are_unitary(seed):
    p = random_coin(np.random.default_rng(seed))
    assert is_unitary(plane_coin(p), 1e-12)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 7])
def test_grover_is_symmetric_unitary_involution(k):
    g = grover(k)
    assert np.allclose(g, g.T)
    assert np.allclose(g @ g, np.eye(k), atol=1e-14)
    assert is_unitary(g)


def test_grover_small_values():
    assert np.allclose(grover(1), [[1]])
    assert np.allclose(grover(2), [[0, 1], [1, 0]])


@pytest.mark.parametrize("k", [1, 2, 3, 4, 10])
def test_grover_default_reduced_params(k):
    r = ReducedCoinParams.grover_default(k)
    assert r.a_k == pytest.approx((2 - k) / k)
    assert r.b_k == pytest.approx(2 / k)
    assert r.a_k**2 + (k - 1) * r.b_k**2 == pytest.approx(1.0, abs=1e-12)


def test_reduced_params_invariant_enforced():
    with pytest.raises(CoinError):
        ReducedCoinParams(3, 0.5, 0.5)
    with pytest.raises(CoinError):
        ReducedCoinParams(0, 1.0, 0.0)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 6])
def test_reduced_coin_unitary(k):
    assert is_unitary(reduced_coin(ReducedCoinParams.grover_default(k)))


@settings(max_examples=40, deadline=None)
@given(k=st.integers(2, 8), angle=st.floats(0, 2 * np.pi))
def test_reduced_coin_unitary_for_any_valid_pair(k, angle):
    r = ReducedCoinParams(k, np.cos(angle), np.sin(angle) / np.sqrt(k - 1))
    assert is_unitary(reduced_coin(r), 1e-12)
    assert is_unitary(own_other_block_normalized(r), 1e-12)


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_origin_coin_star_is_kron_of_own_other_block(k):
    r = ReducedCoinParams.grover_default(k)
    n = own_other_block(r)
    assert np.allclose(origin_coin_star(r), np.kron(n, n), atol=1e-15)


def test_origin_coin_star_unit_b_k2_is_antidiagonal_permutation():
    star = origin_coin_star(ReducedCoinParams(2, 0.0, 1.0))
    assert np.allclose(star, np.fliplr(np.eye(4)))
    assert is_unitary(star)


def test_origin_coin_star_unitary_only_when_k2_or_b0():
    assert is_unitary(origin_coin_star(ReducedCoinParams.grover_default(2)))
    assert is_unitary(origin_coin_star(ReducedCoinParams(3, 1.0, 0.0)))
    assert not is_unitary(origin_coin_star(ReducedCoinParams.grover_default(3)))
    assert not is_unitary(origin_coin_star(ReducedCoinParams.grover_default(1)))


def test_origin_coin_star_is_not_transpose_of_reduced_coin():
    r = ReducedCoinParams(1, 1.0, 0.0)
    assert not np.allclose(origin_coin_star(r), reduced_coin(r).T)


def test_own_other_block_is_grover_restricted():
    # G_k e_0 = a e_0 + b sum_{j>0} e_j; G_k (sum_{j>0} e_j) = (k-1) b e_0 - a sum_{j>0} e_j
    k = 5
    r = ReducedCoinParams.grover_default(k)
    g = grover(k)
    own = np.eye(k)[0]
    other = 1 - own
    n = own_other_block(r)
    assert np.allclose(g @ own, n[0, 0] * own + n[1, 0] * other)
    assert np.allclose(g @ other, n[0, 1] * own + n[1, 1] * other)


@pytest.mark.parametrize(
    "entries",
    [
        (1, 1, 1, 1),  # not unitary
        (1, 0, 0, 1),  # abcd = 0
    ],
)
def test_coin_params_rejects_invalid(entries):
    with pytest.raises(CoinError):
        CoinParams(*entries)


def test_coin_params_rejects_ctilde_off_circle():
    with pytest.raises(CoinError):
        CoinParams.hadamard(ctilde=1.5)


def test_det_delta_hadamard():
    assert CoinParams.hadamard().det_delta == pytest.approx(-1.0)


def test_direction_weights_sum_to_plane_coin(random_coins):
    r = ReducedCoinParams.grover_default(3)
    for p in random_coins:
        w = direction_weights(p, r)
        total = w.p_left + w.p_right + w.q_down + w.q_up
        assert np.allclose(total, np.kron(np.eye(4), plane_coin(p)), atol=1e-15)


def test_primed_weights_as_printed(hadamard):
    p = hadamard
    w = direction_weights(p, ReducedCoinParams.grover_default(2))
    blk = w.p_right_prime[:4, :4]
    assert np.allclose(blk[DOWN], [p.a * p.c, p.a * p.d, p.b * p.c, p.b * p.d])
    assert np.allclose(np.delete(blk, DOWN, axis=0), 0)
    blk = w.q_up_prime[:4, :4]
    assert np.allclose(blk[LEFT], [p.c**2, p.c * p.d, p.c * p.d, p.c * p.d])


def test_origin_departure_weights_use_left_slot(hadamard):
    r = ReducedCoinParams.grover_default(3)
    w = direction_weights(hadamard, r)
    n2 = np.kron(own_other_block(r), own_other_block(r))
    v = np.kron(np.ones(4), np.eye(4)[LEFT])
    out = (w.p_right_tilde @ v).reshape(4, 4)
    assert np.allclose(out[:, RIGHT], n2 @ np.ones(4))
    assert np.allclose(np.delete(out, RIGHT, axis=1), 0)
    out = (w.q_up_tilde @ v).reshape(4, 4)
    assert np.allclose(out[:, UP], n2 @ np.ones(4))


def test_is_unitary_rejects_non_square():
    with pytest.raises(ValueError):
        is_unitary(np.ones((2, 3)))
