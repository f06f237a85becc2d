"""Jordan chains: construction, bi-orthonormality, closed forms."""

import math
import warnings
from fractions import Fraction

import numpy as np
import pytest

from nilspectra.exact import QC
from nilspectra.jordan import (
    ChainExhaustedError,
    assemble_similarity,
    build_basis,
    build_left_chains,
    build_right_chains,
    chain_residual,
    chain_step,
    closed_form_b0,
    condition_numbers,
    gram_matrix,
    jordan_form_matrix,
    right_eigenvectors,
)
from nilspectra.model import ModelParams, build_matrix, multiplicities
from nilspectra.spectrum import nonzero_eigenvalues


def as_arrays(basis):
    def conv(vec):
        if isinstance(vec, np.ndarray):
            return vec
        return np.array([complex(x) for x in vec])

    rights = [np.column_stack([conv(v) for v in c]) for c in basis.right]
    lefts = [np.vstack([conv(w) for w in c]) for c in basis.left] if basis.left else None
    return rights, lefts


def test_kernel_vectors():
    vecs = right_eigenvectors(6, 2)
    assert np.array_equal(vecs[0], [1, -1, 0, 0, 0, 0])
    assert np.array_equal(vecs[1], [1, 0, -1, 0, 0, 0])
    m = build_matrix(ModelParams(6, 2, (0.3,), 0.7))
    for v in vecs:
        assert abs(v.sum()) == 0
        assert np.linalg.norm(m @ v) < 1e-15


def expected_second_vector(n, t, l, b):
    """Closed-form second chain vector for h(s) = b s."""
    v = np.zeros(n, dtype=complex)
    v[0] = b * (-1 + (-b) ** l) / (1 + b)
    v[t + 1] = 1 - (-b) ** l
    for p in range(1, l + 1):
        v[t + 1 + p] = -((-b) ** (l - p))
    return v


@pytest.mark.parametrize("b", [0.0, 1.0, 0.5 - 0.3j, 2.0])
@pytest.mark.parametrize("l", [1, 2, 3])
def test_chain_step_closed_form(b, l):
    n, t = 12, 3
    params = ModelParams(n, t, (b,), 0.1)
    start = np.zeros(n, dtype=complex)
    start[0], start[l] = 1.0, -1.0
    got = chain_step(params, start)
    assert np.allclose(got, expected_second_vector(n, t, l, b), atol=1e-14)


def test_chain_step_known_vector():
    # n=6, t=2, l=1: (-b, 0, 0, 1+b, -1, 0)
    b = 0.7 + 0.2j
    params = ModelParams(6, 2, (b,), 0.5)
    start = np.array([1, -1, 0, 0, 0, 0], dtype=complex)
    got = chain_step(params, start)
    assert np.allclose(got, [-b, 0, 0, 1 + b, -1, 0])


def test_chain_step_b0_is_inverse_shift():
    params = ModelParams(10, 2, (), 0.5)
    start = np.array([1, 0, -1, 0, 0, 0, 0, 0, 0, 0], dtype=complex)
    got = chain_step(params, start)
    assert np.allclose(got, np.concatenate([[0, 0, 0], start[: 10 - 3]]))


def test_chain_step_solves_full_matrix_equation():
    params = ModelParams(11, 2, (0.4 + 0.1j,), 0.3 - 0.2j)
    m = build_matrix(params)
    v = np.zeros(11, dtype=complex)
    v[0], v[2] = 1.0, -1.0
    w = chain_step(params, v)
    assert np.linalg.norm(m @ w - v) < 1e-13
    assert abs(w.sum()) < 1e-13


def test_chain_step_exhaustion():
    params = ModelParams(5, 1, (), 0.5)
    v = np.zeros(5, dtype=complex)
    v[2], v[3] = 1.0, -1.0  # support touches the last t+1 coordinates
    with pytest.raises(ChainExhaustedError):
        chain_step(params, v)


@pytest.mark.parametrize("n,t,expected", [(6, 2, [2, 2]), (17, 5, [3, 3, 3, 3, 2])])
def test_chain_lengths(n, t, expected):
    basis = build_right_chains(ModelParams(n, t, (1.0,), 0.1))
    assert [len(c) for c in basis.right] == expected


def test_chain_support_pattern():
    n, t = 17, 5
    basis = build_right_chains(ModelParams(n, t, (0.5,), 0.1))
    for l, chain in enumerate(basis.right, start=1):
        for q, v in enumerate(chain, start=1):
            support = (q - 1) * (t + 1) + (l + 1)
            assert np.allclose(v[support:], 0)


def test_right_chains_independent_of_delta():
    a = build_right_chains(ModelParams(12, 3, (0.5,), 1e-2))
    b = build_right_chains(ModelParams(12, 3, (0.5,), 3.0 + 1.0j))
    for ca, cb in zip(a.right, b.right):
        for va, vb in zip(ca, cb):
            assert np.array_equal(va, vb)


def test_left_chains_remark_values_rational():
    # n=6, t=2, b=1: the displayed generalized eigenvectors, exactly
    params = ModelParams(6, 2, (QC(1),), QC(Fraction(1, 100)))
    basis = build_basis(params, exact=True)
    f = Fraction

    def qv(*vals):
        return [QC(v) for v in vals]

    assert list(basis.right[0][1]) == qv(-1, 0, 0, 2, -1, 0)
    assert list(basis.right[1][1]) == qv(0, 0, 0, 0, 1, -1)
    assert list(basis.left[0][0]) == qv(
        f(2, 5), f(-3, 5), f(2, 5), f(3, 25), f(-4, 25), f(-4, 25))
    assert list(basis.left[0][1]) == qv(0, 0, 0, f(2, 5), f(-1, 5), f(-1, 5))
    assert list(basis.left[1][0]) == qv(
        f(1, 5), f(1, 5), f(-4, 5), f(4, 25), f(3, 25), f(3, 25))
    assert list(basis.left[1][1]) == qv(0, 0, 0, f(1, 5), f(2, 5), f(-3, 5))


def test_left_top_support():
    # top left rows vanish on the first n-(t+1) coordinates
    params = ModelParams(14, 3, (0.6,), 0.2)
    basis = build_basis(params)
    for chain in basis.left:
        top = chain[-1]
        assert np.allclose(top[: 14 - 4], 0)


@pytest.mark.parametrize(
    "n,t,b",
    [
        (12, 2, 0.0),
        (12, 2, 1.0),
        (13, 1, 0.5 + 0.25j),
        (20, 3, 1.0),
        (30, 4, 0.0),
        (30, 5, 0.3),
        (29, 9, 1.0),
    ],
)
def test_gram_identity_and_residuals(n, t, b):
    params = ModelParams(n, t, (b,) if b else (), 0.05)
    basis = build_basis(params)
    a0 = sum(basis.block_sizes)
    gram = gram_matrix(basis)
    assert np.abs(gram - np.eye(a0)).max() < 1e-10
    m = build_matrix(params)
    assert chain_residual(params, basis) <= 1e-10 * np.linalg.norm(m, 2)
    for chain in list(basis.right) + list(basis.left):
        for vec in chain:
            assert abs(vec.sum()) <= 1e-10 * max(1.0, np.abs(vec).max())


@pytest.mark.parametrize("n,t", [(8, 2), (12, 3), (20, 4), (30, 4), (29, 3)])
def test_closed_form_matches_construction(n, t):
    params = ModelParams(n, t, (), 0.1)
    built = build_basis(params)
    closed = closed_form_b0(n, t)
    for ca, cb in zip(built.right, closed.right):
        for va, vb in zip(ca, cb):
            assert np.abs(va - vb).max() < 1e-12
    for ca, cb in zip(built.left, closed.left):
        for va, vb in zip(ca, cb):
            assert np.abs(va - vb).max() < 1e-12


def test_closed_form_divisible_window():
    basis = closed_form_b0(12, 2)
    top = basis.left[0][-1]
    assert np.allclose(top, [0] * 9 + [1 / 3, -2 / 3, 1 / 3])


def test_omega_ratio_value():
    # amplitude ratio -(t - xi + 1)/xi for t=5, xi=2 is -2
    basis = closed_form_b0(14, 5, exact=True)  # 14 mod 6 = 2
    chain = basis.left[0]
    assert len(chain) == 3
    # trailing windows of consecutive generalized rows are graded by Omega
    ratio = chain[-3][-1] / chain[-2][-1]
    assert ratio == QC(-2)


def test_rank_one_norm_identity():
    rng = np.random.default_rng(5)
    v = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    w = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    outer = np.outer(v, w)
    direct = np.linalg.norm(outer, 2)
    assert abs(direct - np.linalg.norm(v) * np.linalg.norm(w)) < 1e-12 * direct


@pytest.mark.parametrize("n,t", [(17, 5), (14, 3), (23, 3)])
def test_condition_numbers_b0(n, t):
    xi = n % (t + 1)
    assert xi >= 2  # cases with the geometric left-amplitude branch
    basis = closed_form_b0(n, t)
    per_block, kappa0 = condition_numbers(basis)
    want = math.sqrt(2 * (xi - 1) / xi)
    for value in per_block.values():
        assert abs(value - want) < 1e-12
    assert abs(kappa0 - want) < 1e-12
    # stated upper bound in terms of t alone
    assert t * kappa0 <= math.sqrt(2 * t * (t - 1)) + 1e-12


def test_similarity_transformation():
    params = ModelParams(12, 2, (1.0,), 1e-2)
    basis = build_basis(params)
    spectrum = nonzero_eigenvalues(params)
    v, w = assemble_similarity(params, basis, spectrum)
    m = build_matrix(params)
    canon = jordan_form_matrix(basis.block_sizes, spectrum.eigenvalues)
    resid = np.linalg.norm(w @ m @ v - canon)
    assert resid <= 1e-6 * np.linalg.norm(m, 2)
    assert np.linalg.norm(w @ v - np.eye(12)) < 1e-8


def test_similarity_final_time_diagonalizes():
    n = 10
    params = ModelParams(n, n - 2, (0.5,), 0.3)
    basis = build_basis(params)
    spectrum = nonzero_eigenvalues(params)
    assert spectrum.eigenvalues.size == 2
    assert abs(spectrum.eigenvalues[0]) > abs(spectrum.eigenvalues[1]) > 0
    v, w = assemble_similarity(params, basis, spectrum)
    m = build_matrix(params)
    got = w @ m @ v
    want = np.diag([0.0] * (n - 2) + list(spectrum.eigenvalues))
    assert np.abs(got - want).max() < 1e-8


def test_similarity_block_structure():
    params = ModelParams(14, 4, (0.5,), 0.1)
    basis = build_basis(params)
    assert basis.block_sizes == multiplicities(14, 4).block_sizes
    spectrum = nonzero_eigenvalues(params)
    with warnings.catch_warnings():
        warnings.simplefilter("error")  # no ill-conditioning expected here
        v, w = assemble_similarity(params, basis, spectrum)
    m = build_matrix(params)
    got = w @ m @ v
    canon = jordan_form_matrix(basis.block_sizes, spectrum.eigenvalues)
    assert np.abs(got - canon).max() < 1e-7
