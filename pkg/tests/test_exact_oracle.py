"""Exact-arithmetic oracle: characteristic polynomials and rank sequences."""

from fractions import Fraction

import pytest

from nilspectra.exact import (
    QC,
    blocks_from_ranks,
    exact_chain_check,
    exact_charpoly,
    rank_sequence,
    verify_partition,
)
from nilspectra.jordan import build_basis
from nilspectra.model import ModelParams, multiplicities
from nilspectra.spectrum import char_poly


def qp(n, t, b, delta):
    coeffs = (QC.from_value(b),) if b is not None else ()
    return ModelParams(n, t, coeffs, QC.from_value(delta))


def test_qc_arithmetic():
    a = QC(Fraction(1, 2), Fraction(1, 3))
    b = QC(2, -1)
    assert a + b == QC(Fraction(5, 2), Fraction(-2, 3))
    assert (a * b) / b == a
    assert (1 / b) * b == QC(1)
    assert a ** 3 == a * a * a
    assert complex(QC(1, 2)) == 1 + 2j


def test_charpoly_quartic_example():
    # n=4, t=1, b=0, delta=1/4: z^4 - z^3 - z^2/2
    poly = exact_charpoly(qp(4, 1, None, Fraction(1, 4)))
    want = [QC(0), QC(0), QC(Fraction(-1, 2)), QC(-1), QC(1)]
    assert list(poly.coeffs) == want
    assert poly.zero_root_count == 2
    assert list(poly.nonzero_factor()) == [QC(Fraction(-1, 2)), QC(-1), QC(1)]


def test_charpoly_nilpotent():
    poly = exact_charpoly(qp(7, 2, QC(1, 1), 0))
    assert poly.zero_root_count == 7  # z^n


def test_charpoly_indicator_case_matches_formula():
    params = qp(10, 2, 1, 1)
    factor = list(exact_charpoly(params).nonzero_factor())
    formula = list(char_poly(params).coeffs)
    assert factor == formula


def test_rank_sequence_geometric_multiplicity():
    for t in range(1, 9):
        params = qp(10, t, 1, 1)
        ranks = rank_sequence(params, 1)
        assert 10 - ranks[1] == t


@pytest.mark.parametrize("n", [6, 10, 12])
def test_rank_blocks_match_partition(n):
    for t in range(1, n - 1):
        params = qp(n, t, QC(1, 1), Fraction(1, 10))
        mult = multiplicities(n, t)
        ranks = rank_sequence(params, mult.index + 1)
        assert blocks_from_ranks(ranks) == list(mult.block_sizes)


@pytest.mark.parametrize("t", [1, 2, 3, 5])
def test_rank_stabilization_gives_index(t):
    params = qp(12, t, 2, 1)
    mult = multiplicities(12, t)
    ranks = rank_sequence(params, mult.index + 1)
    stable = next(q for q in range(1, len(ranks)) if ranks[q] == ranks[q - 1])
    assert stable - 1 == mult.index


def test_verify_partition_summary():
    out = verify_partition(qp(9, 2, 1, Fraction(1, 10)))
    assert out["matches"]
    assert out["zero_root_count"] == out["algebraic"]


def test_chain_check_accepts_built_basis():
    params = qp(8, 3, QC(1, 1), 1)
    basis = build_basis(params, exact=True)
    assert exact_chain_check(params, basis).ok


def test_chain_check_names_violations():
    params = qp(6, 2, 1, 1)
    basis = build_basis(params, exact=True)
    # corrupt one right vector's zero sum
    bad_chain = list(basis.right[1])
    bad_vec = list(bad_chain[1])
    bad_vec[0] = bad_vec[0] + 1
    bad_chain[1] = bad_vec
    from dataclasses import replace

    corrupted = replace(basis, right=(basis.right[0], tuple(bad_chain)))
    report = exact_chain_check(params, corrupted)
    assert not report.ok
    kinds = {(kind, l, q) for kind, l, q in report.violations}
    assert ("right_zero_sum", 2, 2) in kinds
