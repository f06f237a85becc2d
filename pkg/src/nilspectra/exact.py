"""Exact rational-complex arithmetic for small-instance validation.

Floating point cannot certify multiplicities of a defective eigenvalue, so
the combinatorial claims (zero-root counts, kernel dimension, block
partition, closed-form characteristic polynomial) are validated here in
exact arithmetic for n <= 12.

Determinants of zI - M are computed by fraction-free (Bareiss) elimination
over the polynomial ring with Gaussian-integer coefficients after clearing
denominators; matrix ranks use the same fraction-free elimination.  The
scalar type QC (Gaussian rational) backs the exact chain construction in
`jordan` and the exact evaluation of the closed-form polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .model import ModelParams, multiplicities

__all__ = [
    "QC",
    "ExactCharPoly",
    "ChainCheckReport",
    "exact_charpoly",
    "rank_sequence",
    "exact_chain_check",
    "build_matrix_exact",
]


class QC:
    """Gaussian rational: re + im*i with Fraction parts, always reduced."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def from_value(cls, value) -> "QC":
        """Coerce int/Fraction/float/complex/QC to a QC.

        Floats convert via their exact binary expansion; pass Fractions or
        rational strings ('1/10') to get decimal-exact values.
        """
        if isinstance(value, QC):
            return value
        if isinstance(value, complex):
            return cls(Fraction(value.real), Fraction(value.imag))
        return cls(Fraction(value))

    def _coerce(self, other):
        if isinstance(other, QC):
            return other
        if isinstance(other, (int, Fraction)):
            return QC(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return QC(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return QC(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return QC(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return QC(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return QC((self.re * o.re + self.im * o.im) / d,
                  (self.im * o.re - self.re * o.im) / d)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o.__truediv__(self)

    def __neg__(self):
        return QC(-self.re, -self.im)

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = QC(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def __abs__(self):
        return math.hypot(float(self.re), float(self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self):
        return QC(self.re, -self.im)

    def __repr__(self):
        return f"QC({self.re!r}, {self.im!r})"


# ---------------------------------------------------------------------------
# Gaussian-integer kernels (int pairs) for the fraction-free routines.
# ---------------------------------------------------------------------------

def _gi_mul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _gi_sub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def _gi_divexact(a, b):
    """Exact Gaussian-integer division; raises if not divisible."""
    d = b[0] * b[0] + b[1] * b[1]
    re_num = a[0] * b[0] + a[1] * b[1]
    im_num = a[1] * b[0] - a[0] * b[1]
    qr, rr = divmod(re_num, d)
    qi, ri = divmod(im_num, d)
    if rr or ri:
        raise ArithmeticError("inexact Gaussian-integer division")
    return (qr, qi)


_GI_ZERO = (0, 0)


def _poly_trim(p):
    while p and p[-1] == _GI_ZERO:
        p.pop()
    return p


def _poly_mul(p, q):
    if not p or not q:
        return []
    out = [_GI_ZERO] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == _GI_ZERO:
            continue
        for j, b in enumerate(q):
            if b == _GI_ZERO:
                continue
            c = out[i + j]
            m = _gi_mul(a, b)
            out[i + j] = (c[0] + m[0], c[1] + m[1])
    return _poly_trim(out)


def _poly_sub(p, q):
    out = list(p) + [_GI_ZERO] * (len(q) - len(p))
    for j, b in enumerate(q):
        out[j] = _gi_sub(out[j], b)
    return _poly_trim(out)


def _poly_divexact(p, q):
    """Exact long division in Z[i][z]; remainder must vanish."""
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    if not p:
        return []
    rem = list(p)
    lead = q[-1]
    dq = len(q) - 1
    out = [_GI_ZERO] * (len(p) - dq)
    for k in range(len(p) - 1, dq - 1, -1):
        c = rem[k]
        if c == _GI_ZERO:
            continue
        f = _gi_divexact(c, lead)
        out[k - dq] = f
        for j, b in enumerate(q):
            rem[k - dq + j] = _gi_sub(rem[k - dq + j], _gi_mul(f, b))
    if any(c != _GI_ZERO for c in rem):
        raise ArithmeticError("inexact polynomial division")
    return _poly_trim(out)


def _clear_denominators(values):
    """Least common multiple of the denominators of QC values."""
    lcm = 1
    for v in values:
        for frac in (v.re, v.im):
            lcm = lcm * frac.denominator // math.gcd(lcm, frac.denominator)
    return lcm


def _scaled_int_matrix(params: ModelParams):
    """The model matrix times the denominator-clearing integer c.

    Returns (entries, c) with entries a list of rows of Gaussian-int pairs.
    """
    coeffs = [QC.from_value(b) for b in params.b_coeffs]
    delta = QC.from_value(params.delta)
    c = _clear_denominators(coeffs + [delta])
    n = params.n
    d = delta * c
    rows = [[(int(d.re), int(d.im))] * n for _ in range(n)]
    offsets = {params.t + 1: QC(c)}
    for j, b in enumerate(coeffs, start=1):
        off = params.t + 1 + j
        if off < n and b != QC(0):
            offsets[off] = b * c
    for off, val in offsets.items():
        pair = (int(val.re), int(val.im))
        for i in range(n - off):
            prev = rows[i][i + off]
            rows[i][i + off] = (prev[0] + pair[0], prev[1] + pair[1])
    return rows, c


@dataclass(frozen=True)
class ExactCharPoly:
    """Monic characteristic polynomial det(zI - M) with QC coefficients."""

    coeffs: tuple  # ascending, length n + 1, coeffs[-1] == 1
    n: int

    @property
    def zero_root_count(self) -> int:
        for k, c in enumerate(self.coeffs):
            if c != QC(0):
                return k
        raise AssertionError("characteristic polynomial is identically zero")

    def nonzero_factor(self) -> tuple:
        """Coefficients of det(zI - M) / z^(zero multiplicity), ascending."""
        return self.coeffs[self.zero_root_count:]


def exact_charpoly(params: ModelParams) -> ExactCharPoly:
    """det(zI - M) by Bareiss elimination over the polynomial ring.

    Intended for n <= 12; cost grows quickly with n.
    """
    n = params.n
    if n > 12:
        raise ValueError("exact characteristic polynomial is limited to n <= 12")
    rows, c = _scaled_int_matrix(params)
    # Entries of yI - cM as polynomials in y (y = c z).
    mat = [
        [
            [(-rows[i][j][0], -rows[i][j][1])] if i != j
            else _poly_trim([(-rows[i][j][0], -rows[i][j][1]), (1, 0)])
            for j in range(n)
        ]
        for i in range(n)
    ]
    prev = [(1, 0)]
    for k in range(n - 1):
        pivot = mat[k][k]
        if not pivot:
            raise AssertionError("zero pivot in Bareiss elimination")
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = _poly_sub(_poly_mul(mat[i][j], pivot),
                                _poly_mul(mat[i][k], mat[k][j]))
                mat[i][j] = _poly_divexact(num, prev)
            mat[i][k] = []
        prev = pivot
    det = mat[n - 1][n - 1]
    # det(zI - M) = c^-n det(yI - cM)|_{y = cz}: coeff_k = det_k * c^(k-n).
    coeffs = []
    for k in range(n + 1):
        pair = det[k] if k < len(det) else _GI_ZERO
        scale = Fraction(c) ** (k - n)
        coeffs.append(QC(pair[0] * scale, pair[1] * scale))
    assert coeffs[-1] == QC(1)
    return ExactCharPoly(tuple(coeffs), n)


def _int_rank(rows) -> int:
    """Rank of a Gaussian-integer matrix by fraction-free elimination."""
    mat = [list(r) for r in rows]
    nrow = len(mat)
    ncol = len(mat[0]) if nrow else 0
    prev = (1, 0)
    rank = 0
    row = 0
    for col in range(ncol):
        piv = next((i for i in range(row, nrow) if mat[i][col] != _GI_ZERO), None)
        if piv is None:
            continue
        mat[row], mat[piv] = mat[piv], mat[row]
        pivot = mat[row][col]
        for i in range(row + 1, nrow):
            for j in range(col + 1, ncol):
                num = _gi_sub(_gi_mul(mat[i][j], pivot),
                              _gi_mul(mat[i][col], mat[row][j]))
                mat[i][j] = _gi_divexact(num, prev)
            mat[i][col] = _GI_ZERO
        prev = pivot
        rank += 1
        row += 1
        if row == nrow:
            break
    return rank


def rank_sequence(params: ModelParams, kmax: int) -> list[int]:
    """Exact ranks of M^0, M^1, ..., M^kmax.

    rank(M^(q-1)) - rank(M^q) counts Jordan blocks of the zero eigenvalue
    with size >= q, which pins the whole partition.  Limited to n <= 12.
    """
    n = params.n
    if n > 12:
        raise ValueError("exact rank sequence is limited to n <= 12")
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    rows, _ = _scaled_int_matrix(params)
    power = [[(1, 0) if i == j else _GI_ZERO for j in range(n)] for i in range(n)]
    ranks = [n]
    for _ in range(kmax):
        power = [
            [
                tuple(
                    sum(x)
                    for x in zip(*(_gi_mul(power[i][k], rows[k][j]) for k in range(n)))
                )
                for j in range(n)
            ]
            for i in range(n)
        ]
        ranks.append(_int_rank(power))
    return ranks


def blocks_from_ranks(ranks: list[int]) -> list[int]:
    """Jordan block partition of the zero eigenvalue from rank(M^q)."""
    counts = [ranks[q - 1] - ranks[q] for q in range(1, len(ranks))]
    sizes = []
    for q in range(len(counts), 0, -1):
        ge_q = counts[q - 1]
        ge_q1 = counts[q] if q < len(counts) else 0
        sizes.extend([q] * (ge_q - ge_q1))
    return sorted(sizes, reverse=True)


def build_matrix_exact(params: ModelParams) -> list[list[QC]]:
    """The model matrix with QC entries."""
    n = params.n
    delta = QC.from_value(params.delta)
    mat = [[delta for _ in range(n)] for _ in range(n)]
    for off, coeff in params.diagonal_offsets():
        val = QC.from_value(coeff)
        for i in range(n - off):
            mat[i][i + off] = mat[i][i + off] + val
    return mat


@dataclass(frozen=True)
class ChainCheckReport:
    """Outcome of the exact verification of a Jordan basis."""

    ok: bool
    violations: tuple  # of (kind, block index l, position q) triples

    def __bool__(self):
        return self.ok


def exact_chain_check(params: ModelParams, basis) -> ChainCheckReport:
    """Verify a rational-mode Jordan basis with exact equality.

    Checks, per block l: M v(l,q) = v(l,q-1) with M v(l,1) = 0; row chains
    w(l,q) M = w(l,q+1) with w(l,top) M = 0; zero coordinate sums; and the
    full Gram matrix (left rows times right columns) equal to the identity.
    """
    if not getattr(basis, "exact", False):
        raise ValueError("exact_chain_check requires a basis built in exact mode")
    if params.n > 10:
        raise ValueError("exact chain verification is limited to n <= 10")
    mat = build_matrix_exact(params)
    n = params.n
    zero, one = QC(0), QC(1)

    def matvec(v):
        return [sum((mat[i][j] * v[j] for j in range(n)), zero) for i in range(n)]

    def vecmat(w):
        return [sum((w[i] * mat[i][j] for i in range(n)), zero) for j in range(n)]

    violations = []
    for l, chain in enumerate(basis.right, start=1):
        for q, v in enumerate(chain, start=1):
            image = matvec(v)
            target = chain[q - 2] if q >= 2 else [zero] * n
            if image != target:
                violations.append(("right_chain", l, q))
            if sum(v, zero) != zero:
                violations.append(("right_zero_sum", l, q))
    for l, chain in enumerate(basis.left, start=1):
        top = len(chain)
        for q, w in enumerate(chain, start=1):
            image = vecmat(w)
            target = chain[q] if q < top else [zero] * n
            if image != target:
                violations.append(("left_chain", l, q))
            if sum(w, zero) != zero:
                violations.append(("left_zero_sum", l, q))
    for l, wchain in enumerate(basis.left, start=1):
        for p, w in enumerate(wchain, start=1):
            for r, vchain in enumerate(basis.right, start=1):
                for q, v in enumerate(vchain, start=1):
                    g = sum((w[i] * v[i] for i in range(n)), zero)
                    want = one if (l == r and p == q) else zero
                    if g != want:
                        violations.append(("gram", l, p))
    return ChainCheckReport(not violations, tuple(violations))


def verify_partition(params: ModelParams) -> dict:
    """Oracle summary for one parameter set (n <= 12, rational inputs).

    Returns the exact zero-root count, kernel dimension, and rank-derived
    block partition next to the closed-form predictions.
    """
    mult = multiplicities(params.n, params.t)
    poly = exact_charpoly(params)
    kmax = (mult.index + 1) if mult.index else 1
    ranks = rank_sequence(params, kmax)
    blocks = blocks_from_ranks(ranks)
    return {
        "zero_root_count": poly.zero_root_count,
        "algebraic": mult.algebraic,
        "kernel_dim": params.n - ranks[1],
        "geometric": mult.geometric,
        "rank_blocks": blocks,
        "block_sizes": list(mult.block_sizes),
        "ranks": ranks,
        "matches": (
            poly.zero_root_count == mult.algebraic
            and params.n - ranks[1] == mult.geometric
            and blocks == list(mult.block_sizes)
        ),
    }
