"""Matrix construction and zero-eigenvalue combinatorics."""

import numpy as np
import pytest

from nilspectra.model import ModelParams, build_matrix, multiplicities, young_diagram


def test_build_matrix_shift_square():
    # S^2 for n=4: ones at (1,3) and (2,4), zero elsewhere
    m = build_matrix(ModelParams(4, 1, (), 0))
    expected = np.zeros((4, 4), dtype=complex)
    expected[0, 2] = expected[1, 3] = 1.0
    assert np.array_equal(m, expected)


def test_build_matrix_direct_placement():
    m = build_matrix(ModelParams(3, 1, (1.0,), 0.5))
    expected = np.full((3, 3), 0.5, dtype=complex)
    expected[0, 2] += 1.0  # S^2's only 1; S^3 = 0 truncates the b-term
    assert np.allclose(m, expected)


def test_build_matrix_nilpotency_index():
    # n=6, t=2: index 2, so M^2 = 0 and M != 0 regardless of b
    m = build_matrix(ModelParams(6, 2, (0.7 - 0.2j,), 0))
    assert multiplicities(6, 2).index == 2
    assert np.count_nonzero(m) > 0
    assert not np.count_nonzero(m @ m)


def test_build_matrix_rejects_bad_time():
    with pytest.raises(ValueError):
        ModelParams(4, 3, (), 0)
    with pytest.raises(ValueError):
        ModelParams(4, -1, (), 0)


def test_params_reject_bad_sizes():
    with pytest.raises(ValueError):
        ModelParams(1, 0, (), 0)
    with pytest.raises(ValueError):
        ModelParams(4, 1, (1.0, 2.0, 3.0, 4.0), 0)  # more than n-1 coefficients
    with pytest.raises(ValueError):
        ModelParams(4, 1, (float("nan"),), 0)


def test_multiplicities_large_initial_block():
    m = multiplicities(100, 1)
    assert (m.p1, m.algebraic, m.geometric, m.index) == (49, 50, 1, 50)


def test_multiplicities_mixed_blocks():
    m = multiplicities(17, 5)
    assert m.index == 3
    assert m.block_sizes == (3, 3, 3, 3, 2)


def test_multiplicities_equal_blocks():
    m = multiplicities(6, 2)
    assert m.block_sizes == (2, 2)
    assert m.algebraic == 4


def test_multiplicities_t0_sentinel():
    m = multiplicities(9, 0)
    assert (m.algebraic, m.geometric, m.index) == (0, 0, 0)
    assert m.block_sizes == ()


def test_multiplicities_final_time_convention():
    m = multiplicities(9, 7)
    assert m.index == 1
    assert m.block_sizes == (1,) * 7
    assert m.algebraic == m.geometric == 7


def test_multiplicities_rejects():
    with pytest.raises(ValueError):
        multiplicities(1, 0)
    with pytest.raises(ValueError):
        multiplicities(8, 7)


def test_young_diagram_rows():
    assert young_diagram(17, 1) == [8]
    assert young_diagram(17, 15) == [1] * 15
    assert young_diagram(12, 2) == [4, 4]


@pytest.mark.parametrize("n", range(2, 41))
def test_partition_invariants(n):
    prev_a0 = 0
    for t in range(1, n - 1):
        m = multiplicities(n, t)
        assert sum(m.block_sizes) == m.algebraic == n - m.p1 - 1
        assert len(m.block_sizes) == m.geometric == t
        assert max(m.block_sizes) == m.index
        assert m.index <= (n + t + 1) / (t + 1)
        assert m.algebraic >= prev_a0
        prev_a0 = m.algebraic
        if n >= 4 and t <= n - 3:
            assert m.geometric < m.algebraic or t == n - 2


def test_geometric_equals_algebraic_only_at_final_time():
    for n in range(4, 16):
        m = multiplicities(n, n - 2)
        assert m.geometric == m.algebraic == n - 2


@pytest.mark.parametrize("n,t", [(5, 1), (8, 2), (12, 3), (9, 1)])
def test_nilpotent_power_vanishes(n, t):
    # with delta = 0 the matrix is nilpotent of index ceil(n/(t+1))
    m = build_matrix(ModelParams(n, t, (0.5,), 0))
    index = -(-n // (t + 1))
    power = np.linalg.matrix_power(m, index)
    assert not np.count_nonzero(power)
    below = np.linalg.matrix_power(m, index - 1)
    assert np.count_nonzero(below)
    # the zero eigenvalue of the rank-one-perturbed matrix has the same
    # index except when n = 1 mod (t+1), where one chain is cut short
    k0 = multiplicities(n, t).index
    assert k0 == (index if n % (t + 1) != 1 else index - 1)
