"""Matrix family and zero-eigenvalue combinatorics.

The family under study is the n x n matrix

    S^(t+1) (I + h(S)) + delta * J,

where S is the upper shift matrix, h(s) = b_1 s + b_2 s^2 + ... is a
polynomial with complex coefficients, J is the all-ones matrix, and the
integer t runs over 0 <= t <= n - 2.  Without the all-ones term the matrix
is nilpotent; everything about its zero eigenvalue (algebraic/geometric
multiplicity, index, Jordan block partition) is combinatorial and is
computed here in closed form.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from numbers import Number

import numpy as np

__all__ = [
    "ModelParams",
    "Multiplicities",
    "build_matrix",
    "multiplicities",
    "young_diagram",
    "shift_matrix",
]


def _check_finite(value, name):
    if isinstance(value, (complex, float, int)) and not cmath.isfinite(complex(value)):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class ModelParams:
    """Full description of one matrix in the family.

    n:        matrix size, >= 2
    t:        discrete time, 0 <= t <= n - 2
    b_coeffs: coefficients (b_1, b_2, ...) of h(s) = sum_j b_j s^j;
              empty tuple means h = 0
    delta:    coefficient of the all-ones matrix

    Coefficient entries may be any number-like scalars (complex for the
    floating backend, Gaussian rationals for the exact one).
    """

    n: int
    t: int
    b_coeffs: tuple = ()
    delta: complex = 0j

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 2:
            raise ValueError(f"matrix size n must be an integer >= 2, got {self.n!r}")
        if not isinstance(self.t, int) or not 0 <= self.t <= self.n - 2:
            raise ValueError(
                f"time t must satisfy 0 <= t <= n-2 = {self.n - 2}, got {self.t!r}"
            )
        object.__setattr__(self, "b_coeffs", tuple(self.b_coeffs))
        if len(self.b_coeffs) > self.n - 1:
            raise ValueError(
                f"at most n-1 = {self.n - 1} shift coefficients allowed, "
                f"got {len(self.b_coeffs)}"
            )
        for j, b in enumerate(self.b_coeffs, start=1):
            _check_finite(b, f"b_{j}")
        _check_finite(self.delta, "delta")

    @property
    def final_time(self) -> int:
        return self.n - 2

    def single_b(self):
        """The sole coefficient b_1 when h(s) = b_1 s; raises otherwise."""
        if any(b != 0 for b in self.b_coeffs[1:]):
            raise ValueError(
                "operation supports only h(s) = b_1 s; higher coefficients present"
            )
        return self.b_coeffs[0] if self.b_coeffs else 0

    def diagonal_offsets(self):
        """Superdiagonal offsets and coefficients of the shift part.

        Returns a list of (offset, coefficient) pairs describing
        S^(t+1)(I + h(S)): offset t+1 carries 1, offset t+1+j carries b_j.
        Offsets >= n fall outside the matrix and are dropped.
        """
        pairs = [(self.t + 1, 1)]
        for j, b in enumerate(self.b_coeffs, start=1):
            off = self.t + 1 + j
            if off < self.n and b != 0:
                pairs.append((off, b))
        return pairs


@dataclass(frozen=True)
class Multiplicities:
    """Zero-eigenvalue bookkeeping for one (n, t) pair.

    p1, p2:      floor((n-1)/(t+1)) and floor((n-1)/(t+2))
    algebraic:   algebraic multiplicity of the zero eigenvalue, n - p1 - 1
    geometric:   geometric multiplicity (kernel dimension), equal to t
    index:       largest Jordan block size of the zero eigenvalue
    block_sizes: Jordan block partition, non-increasing; sums to `algebraic`
    remainder:   n mod (t+1) (0 when divisible)
    """

    n: int
    t: int
    p1: int
    p2: int
    algebraic: int
    geometric: int
    index: int
    block_sizes: tuple[int, ...]
    remainder: int


def multiplicities(n: int, t: int) -> Multiplicities:
    """Closed-form multiplicities and Jordan partition of the zero eigenvalue.

    Valid for 0 <= t <= n-2.  At t = 0 zero is not an eigenvalue: algebraic
    and geometric multiplicities are 0 and the index is reported as the
    sentinel 0.  At t = n-2 every block has size 1, so the index is 1.
    """
    if not isinstance(n, int) or n < 2:
        raise ValueError(f"matrix size n must be an integer >= 2, got {n!r}")
    if not isinstance(t, int) or not 0 <= t <= n - 2:
        raise ValueError(f"time t must satisfy 0 <= t <= n-2 = {n - 2}, got {t!r}")

    p1 = (n - 1) // (t + 1)
    p2 = (n - 1) // (t + 2)
    if t == 0:
        return Multiplicities(n, t, p1, p2, 0, 0, 0, (), n % 1)

    a0 = n - p1 - 1
    q, xi = divmod(n, t + 1)
    if xi == 0:
        blocks = (q,) * t
    else:
        # xi - 1 blocks one longer than the rest; literal at xi = 1 (none).
        blocks = (q + 1,) * (xi - 1) + (q,) * (t - xi + 1)
    assert sum(blocks) == a0 and len(blocks) == t
    return Multiplicities(n, t, p1, p2, a0, t, max(blocks), blocks, xi)


def young_diagram(n: int, t: int) -> list[int]:
    """Row lengths of the Young diagram of the zero eigenvalue's blocks."""
    if not isinstance(t, int) or not 1 <= t <= n - 2:
        raise ValueError(f"time t must satisfy 1 <= t <= n-2 = {n - 2}, got {t!r}")
    return list(multiplicities(n, t).block_sizes)


def shift_matrix(n: int) -> np.ndarray:
    """The n x n upper shift matrix (ones on the first superdiagonal)."""
    return np.eye(n, k=1, dtype=complex)


def build_matrix(params: ModelParams) -> np.ndarray:
    """Dense complex matrix S^(t+1)(I + h(S)) + delta * J."""
    if not isinstance(params, ModelParams):
        raise TypeError("params must be a ModelParams")
    for j, b in enumerate(params.b_coeffs, start=1):
        if not isinstance(b, Number):
            raise TypeError(f"b_{j} is not a numeric scalar: {b!r}")
    n = params.n
    m = np.full((n, n), complex(params.delta), dtype=complex)
    for off, coeff in params.diagonal_offsets():
        m += np.eye(n, k=off, dtype=complex) * complex(coeff)
    return m
