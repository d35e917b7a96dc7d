import numpy as np
import pytest

from _helpers import linear_scan_argmax
from aeddqn.exceptions import EmptyMaskError, ShapeMismatchError
from aeddqn.linalg import argmax_masked, argmax_masked_rows, matmul
from aeddqn.rng import SeededRng


def _triple_loop(a, b):
    m, k = a.shape
    k2, n = b.shape
    out = np.zeros((m, n))
    for i in range(m):
        for j in range(n):
            for p in range(k):
                out[i, j] += a[i, p] * b[p, j]
    return out


def test_identity_left():
    rng = SeededRng(1)
    b = rng.uniform(3 * 6).reshape(3, 6)
    assert np.array_equal(matmul(np.eye(3), b), b)


def test_one_by_one():
    assert matmul([[2.0]], [[3.0]]).tolist() == [[6.0]]


def test_matches_triple_loop_oracle():
    rng = SeededRng(123)
    a = rng.uniform(7 * 5).reshape(7, 5) - 0.5
    b = rng.uniform(5 * 4).reshape(5, 4) - 0.5
    assert np.max(np.abs(matmul(a, b) - _triple_loop(a, b))) < 1e-12


def test_associativity_on_random_triples():
    rng = SeededRng(77)
    for _ in range(20):
        a = rng.uniform(4 * 3).reshape(4, 3) - 0.5
        b = rng.uniform(3 * 5).reshape(3, 5) - 0.5
        c = rng.uniform(5 * 2).reshape(5, 2) - 0.5
        lhs = matmul(matmul(a, b), c)
        rhs = matmul(a, matmul(b, c))
        denom = np.maximum(np.abs(lhs), 1e-9)
        assert np.max(np.abs(lhs - rhs) / denom) < 1e-9


def test_shape_mismatch_names_both_shapes():
    with pytest.raises(ShapeMismatchError, match=r"\(2, 3\).*\(2, 2\)"):
        matmul(np.zeros((2, 3)), np.zeros((2, 2)))
    with pytest.raises(ShapeMismatchError):
        matmul(np.zeros(3), np.zeros((3, 2)))


def test_argmax_masked_out_maximum():
    assert argmax_masked([5.0, 9.0, 1.0], [True, False, True]) == 0


def test_argmax_tie_breaks_lowest():
    assert argmax_masked([3.0, 3.0, 3.0], [True, True, True]) == 0


def test_argmax_empty_mask():
    with pytest.raises(EmptyMaskError):
        argmax_masked([1.0, 2.0], [False, False])


def test_argmax_against_linear_scan_oracle():
    rng = SeededRng(999)
    for _ in range(1000):
        n = 1 + rng.randint(12)
        values = rng.uniform(n) * 10 - 5
        if rng.random() < 0.3:  # force duplicates so ties get exercised
            values = np.round(values)
        valid = rng.uniform(n) < 0.6
        if not valid.any():
            valid[rng.randint(n)] = True
        assert argmax_masked(values, valid) == linear_scan_argmax(values, valid)


def test_argmax_rows_matches_per_row():
    rng = SeededRng(4)
    values = rng.uniform(6 * 9).reshape(6, 9)
    valid = rng.uniform(6 * 9).reshape(6, 9) < 0.5
    valid[:, 0] = True
    rowwise = argmax_masked_rows(values, valid)
    for i in range(6):
        assert rowwise[i] == argmax_masked(values[i], valid[i])
