"""Generalized eigenvectors of the zero eigenvalue: Jordan chains.

Right chains start from the kernel vectors e_1 - e_(l+1) and extend by
solving M w = v under the zero-coordinate-sum constraint, which removes
the rank-one term and reduces every step to shift-band back-substitution.
Left chains are stored as row vectors (rows of the inverse basis) and are
solved, not guessed: each row is the unique solution of the transposed
band system pinned down by zero sum and bi-orthonormality against the
chain tops.  All pairings are plain (unconjugated) row-times-column
products.

Every routine runs on either backend: Python complex scalars (default,
returned as numpy arrays) or exact Gaussian rationals.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .model import ModelParams, build_matrix, multiplicities
from .spectrum import SpectrumReport, nonzero_eigenvector

__all__ = [
    "JordanBasis",
    "JordanError",
    "ChainExhaustedError",
    "right_eigenvectors",
    "chain_step",
    "build_right_chains",
    "build_left_chains",
    "build_basis",
    "closed_form_b0",
    "condition_numbers",
    "assemble_similarity",
    "jordan_form_matrix",
    "gram_matrix",
    "chain_residual",
]


class JordanError(RuntimeError):
    """Internal inconsistency while building generalized eigenvectors."""


class ChainExhaustedError(ValueError):
    """The chain cannot be extended past the end of the matrix."""


@dataclass(frozen=True)
class JordanBasis:
    """Right chains and left row chains of the zero eigenvalue.

    right[l][q] is the right chain vector at 1-based position q+1 of block
    l+1; left mirrors it with row vectors, ordered bottom (q=1) to top
    (q = block size).  Floating mode stores numpy arrays, exact mode lists
    of Gaussian rationals.
    """

    n: int
    t: int
    block_sizes: tuple[int, ...]
    right: tuple
    left: tuple | None
    exact: bool

    @property
    def complete(self) -> bool:
        return self.left is not None


def _is_exact_vector(v) -> bool:
    from .exact import QC

    return len(v) > 0 and isinstance(v[0], QC)


def _field_params(params: ModelParams, exact: bool):
    """(b offsets beyond t+1, zero, one) in the requested scalar field."""
    if exact:
        from .exact import QC

        coeffs = [QC.from_value(b) for b in params.b_coeffs]
        return coeffs, QC(0), QC(1)
    return [complex(b) for b in params.b_coeffs], 0j, 1.0 + 0j


def _unit_pair(n, i, j, one):
    """Vector e_i - e_j (0-based indices)."""
    v = [one - one] * n
    v[i] = one
    v[j] = -one
    return v


def _invert_unitriangular(b_coeffs, v, zero):
    """Solve (I + h(S)) u = v by back-substitution along the band."""
    n = len(v)
    u = [zero] * n
    terms = [(k, b) for k, b in enumerate(b_coeffs, start=1) if b != 0]
    for j in range(n - 1, -1, -1):
        acc = v[j]
        for k, b in terms:
            if j + k < n:
                acc = acc - b * u[j + k]
        u[j] = acc
    return u


def _invert_unitriangular_transposed(b_coeffs, w, zero):
    """Solve (I + h(S))^T z = w by forward substitution."""
    n = len(w)
    z = [zero] * n
    terms = [(k, b) for k, b in enumerate(b_coeffs, start=1) if b != 0]
    for j in range(n):
        acc = w[j]
        for k, b in terms:
            if j - k >= 0:
                acc = acc - b * z[j - k]
        z[j] = acc
    return z


def _chain_step_list(n, t, b_coeffs, v, zero):
    u = _invert_unitriangular(b_coeffs, v, zero)
    shifted = [zero] * (t + 1) + u[: n - t - 1]
    total = sum(shifted, zero)
    shifted[0] = shifted[0] - total
    return shifted


def right_eigenvectors(n: int, t: int) -> list[np.ndarray]:
    """Kernel vectors e_1 - e_(l+1), l = 1..t, of the full matrix."""
    if not 1 <= t <= n - 2:
        raise ValueError(f"time t must satisfy 1 <= t <= n-2 = {n - 2}, got {t!r}")
    out = []
    for l in range(1, t + 1):
        v = np.zeros(n, dtype=complex)
        v[0] = 1.0
        v[l] = -1.0
        out.append(v)
    return out


def chain_step(params: ModelParams, v):
    """Extend a Jordan chain: solve M w = v with zero coordinate sum.

    Requires v to vanish on its last t+1 coordinates (otherwise the chain
    has hit the end of the matrix and ChainExhaustedError is raised).
    Accepts numpy arrays (returns an array) or exact rational vectors
    (returns a list).
    """
    n, t = params.n, params.t
    exact = not isinstance(v, np.ndarray) and _is_exact_vector(list(v))
    vec = list(v)
    if len(vec) != n:
        raise ValueError(f"vector length {len(vec)} does not match n = {n}")
    b_coeffs, zero, _ = _field_params(params, exact)
    tail = vec[n - t - 1:]
    if exact:
        if any(x != zero for x in tail):
            raise ChainExhaustedError(
                "chain exhausted: vector has support in the last t+1 coordinates"
            )
    else:
        vec = [complex(x) for x in vec]
        scale = max(abs(x) for x in vec)
        if any(abs(x) > 1e-12 * scale for x in tail):
            raise ChainExhaustedError(
                "chain exhausted: vector has support in the last t+1 coordinates"
            )
        vec[n - t - 1:] = [0j] * (t + 1)
    w = _chain_step_list(n, t, b_coeffs, vec, zero)
    return w if exact else np.asarray(w, dtype=complex)


def build_right_chains(params: ModelParams, exact: bool = False) -> JordanBasis:
    """All right chains, block l with the closed-form length d(l).

    Chains depend only on the shift part of the matrix, never on delta.
    """
    n, t = params.n, params.t
    if t < 1:
        raise ValueError("right chains exist for t >= 1")
    mult = multiplicities(n, t)
    b_coeffs, zero, one = _field_params(params, exact)
    chains = []
    for l in range(1, t + 1):
        target = mult.block_sizes[l - 1]
        vec = _unit_pair(n, 0, l, one)
        chain = [vec]
        for _ in range(target - 1):
            tail = chain[-1][n - t - 1:]
            if any(x != zero for x in tail):
                raise JordanError(
                    f"chain {l} cannot reach its predicted length {target}"
                )
            chain.append(_chain_step_list(n, t, b_coeffs, chain[-1], zero))
        chains.append(tuple(chain))
    if not exact:
        chains = [tuple(np.asarray(v, dtype=complex) for v in c) for c in chains]
    return JordanBasis(n, t, mult.block_sizes, tuple(chains), None, exact)


def _solve_square(a_rows, b_cols, exact):
    """Solve A X = B for small dense systems in either backend.

    a_rows: list of rows; b_cols: list of right-hand-side columns.
    Returns the solution columns.  Raises JordanError on singularity.
    """
    if not exact:
        a = np.asarray(a_rows, dtype=complex)
        b = np.asarray(b_cols, dtype=complex).T
        try:
            x = np.linalg.solve(a, b)
        except np.linalg.LinAlgError as exc:
            raise JordanError(f"singular constraint system: {exc}") from None
        return [list(col) for col in x.T]
    m = len(a_rows)
    mat = [list(row) for row in a_rows]
    rhs = [list(col) for col in b_cols]  # rhs[k][i]
    for col in range(m):
        piv = max(range(col, m), key=lambda i: abs(mat[i][col]))
        if not mat[piv][col]:
            raise JordanError("singular constraint system in exact mode")
        mat[col], mat[piv] = mat[piv], mat[col]
        for k in range(len(rhs)):
            rhs[k][col], rhs[k][piv] = rhs[k][piv], rhs[k][col]
        pivot = mat[col][col]
        for i in range(col + 1, m):
            f = mat[i][col] / pivot
            if f:
                for j in range(col, m):
                    mat[i][j] = mat[i][j] - f * mat[col][j]
                for k in range(len(rhs)):
                    rhs[k][i] = rhs[k][i] - f * rhs[k][col]
    out = []
    for k in range(len(rhs)):
        x = [None] * m
        for i in range(m - 1, -1, -1):
            acc = rhs[k][i]
            for j in range(i + 1, m):
                acc = acc - mat[i][j] * x[j]
            x[i] = acc / mat[i][i]
        out.append(x)
    return out


def _dot(a, b, zero):
    return sum((x * y for x, y in zip(a, b)), zero)


def build_left_chains(params: ModelParams, right: JordanBasis) -> JordanBasis:
    """Left row chains matching the given right chains.

    The chain tops live in the last t+1 coordinates; every descent step is
    a transposed band solve whose t+1 free tail coordinates are fixed by
    the zero-sum condition and bi-orthonormality against the chain tops.
    """
    n, t = params.n, params.t
    if right.n != n or right.t != t:
        raise ValueError("right basis does not match params")
    exact = right.exact
    b_coeffs, zero, one = _field_params(params, exact)
    rights = [[list(v) for v in chain] for chain in right.right]
    tops = [chain[-1] for chain in rights]

    # Constraint matrix shared by every solve: rows = pairings of the tail
    # coordinates with each chain top, last row = coordinate sum.
    tail_idx = list(range(n - t - 1, n))
    a_rows = [[tops[r][i] for i in tail_idx] for r in range(t)]
    a_rows.append([one] * (t + 1))

    def pinned(base, gram_rhs):
        """base + tail correction meeting Gram targets and zero sum."""
        rhs = [gram_rhs[r] - _dot(base, tops[r], zero) for r in range(t)]
        rhs.append(zero - sum(base, zero))
        (sol,) = _solve_square(a_rows, [rhs], exact)
        out = list(base)
        for i, idx in enumerate(tail_idx):
            out[idx] = out[idx] + sol[i]
        return out

    lefts = []
    for l in range(1, t + 1):
        d = right.block_sizes[l - 1]
        gram = [one if r == l - 1 else zero for r in range(t)]
        top = pinned([zero] * n, gram)
        chain = [top]
        for _ in range(d - 1):
            z = _invert_unitriangular_transposed(b_coeffs, chain[-1], zero)
            head, body = z[: t + 1], z[t + 1:]
            if exact:
                if any(x != zero for x in head):
                    raise JordanError("left chain descent is inconsistent")
            else:
                scale = max(max(abs(x) for x in z), 1.0)
                if any(abs(x) > 1e-8 * scale for x in head):
                    raise JordanError("left chain descent is inconsistent")
            base = list(body) + [zero] * (t + 1)
            chain.append(pinned(base, [zero] * t))
        chain.reverse()  # store bottom (q=1) first
        lefts.append(tuple(chain))
    if not exact:
        lefts = [tuple(np.asarray(w, dtype=complex) for w in c) for c in lefts]
    return replace(right, left=tuple(lefts))


def build_basis(params: ModelParams, exact: bool = False) -> JordanBasis:
    """Right and left chains in one call."""
    return build_left_chains(params, build_right_chains(params, exact))


def closed_form_b0(n: int, t: int, exact: bool = False) -> JordanBasis:
    """The h = 0 basis in closed form (shifted unit pairs and graded rows).

    Right vectors are pure inverse shifts of the kernel pairs.  Left rows
    are supported on trailing windows; when t+1 does not divide n their
    amplitudes change geometrically block by block with ratio
    -(t - xi + 1)/xi, xi = n mod (t+1).
    """
    mult = multiplicities(n, t)
    if mult.geometric < 1:
        raise ValueError("closed forms exist for t >= 1")
    xi = mult.remainder
    rights = []
    for l in range(1, t + 1):
        d = mult.block_sizes[l - 1]
        chain = []
        for q in range(1, d + 1):
            v = [Fraction(0)] * n
            v[(t + 1) * (q - 1)] = Fraction(1)
            v[(t + 1) * (q - 1) + l] = Fraction(-1)
            chain.append(v)
        rights.append(chain)

    def graded_tail(head, q, omega, xi):
        """head block, then q-1 windows of widths t+1 and a final xi window."""
        out = list(head)
        for s in range(1, q):
            out.extend([omega ** s] * (t + 1))
        out.extend([omega ** q] * xi)
        return out

    lefts = []
    if xi == 0:
        unit = Fraction(1, t + 1)
        for l in range(1, t + 1):
            d = mult.block_sizes[l - 1]
            chain = []
            for q in range(d - 1, -1, -1):  # q = d-1 .. 0 maps to rows 1 .. d
                w = [Fraction(0)] * (n - (q + 1) * (t + 1))
                w += [Fraction(1)] * l + [Fraction(-t)] + [Fraction(1)] * (t - l)
                w += [Fraction(0)] * (q * (t + 1))
                chain.append([unit * x for x in w])
            lefts.append(chain)
    else:
        omega = Fraction(-(t - xi + 1), xi)
        unit = Fraction(1, xi)
        for l in range(1, t + 1):
            d = mult.block_sizes[l - 1]
            chain = []
            for q in range(d - 1, 0, -1):
                pad = (t + 1) * (d - (q + 1))
                if l < xi:
                    head = [Fraction(0)] * pad + [Fraction(1)] * l \
                        + [Fraction(1 - xi)] + [Fraction(1)] * (t - l)
                else:
                    head = [Fraction(0)] * (pad + l) + [Fraction(-xi)] \
                        + [Fraction(0)] * (t - l) + [Fraction(1)] * (t + 1)
                chain.append([unit * x for x in graded_tail(head, q, omega, xi)])
            if l < xi:
                top = [Fraction(0)] * (n - xi) + [Fraction(1)] * l \
                    + [Fraction(1 - xi)] + [Fraction(1)] * (xi - l - 1)
            else:
                top = [Fraction(0)] * (n - t - 1 + l - xi) + [Fraction(-xi)] \
                    + [Fraction(0)] * (t - l) + [Fraction(1)] * xi
            chain.append([unit * x for x in top])
            assert all(len(w) == n for w in chain)
            lefts.append(chain)

    if exact:
        from .exact import QC

        rights = [tuple([QC(x) for x in v] for v in c) for c in rights]
        lefts = [tuple([QC(x) for x in w] for w in c) for c in lefts]
    else:
        rights = [tuple(np.asarray(v, dtype=complex) for v in c) for c in rights]
        lefts = [tuple(np.asarray(w, dtype=complex) for w in c) for c in lefts]
    return JordanBasis(n, t, mult.block_sizes, tuple(rights), tuple(lefts), exact)


def _as_array(vec) -> np.ndarray:
    if isinstance(vec, np.ndarray):
        return vec
    return np.asarray([complex(x) for x in vec], dtype=complex)


def condition_numbers(basis: JordanBasis) -> tuple[dict[int, float], float]:
    """Generalized condition numbers of the maximal Jordan blocks.

    For every block of maximal size, the product of the norms of its
    bottom right vector and top left row; the second return value is their
    maximum.
    """
    if not basis.complete:
        raise ValueError("basis must include left chains")
    k0 = max(basis.block_sizes)
    per_block = {}
    for l, (vchain, wchain) in enumerate(zip(basis.right, basis.left), start=1):
        if len(vchain) != k0:
            continue
        v = _as_array(vchain[0])
        w = _as_array(wchain[-1])
        per_block[l] = float(np.linalg.norm(v) * np.linalg.norm(w))
    return per_block, max(per_block.values())


def gram_matrix(basis: JordanBasis) -> np.ndarray:
    """Plain product of all left rows with all right columns.

    Equals the identity for a bi-orthonormal basis.
    """
    if not basis.complete:
        raise ValueError("basis must include left chains")
    v = np.column_stack([_as_array(x) for c in basis.right for x in c])
    w = np.vstack([_as_array(x) for c in basis.left for x in c])
    return w @ v


def chain_residual(params: ModelParams, basis: JordanBasis) -> float:
    """max_l,q ||M v(l,q) - v(l,q-1)|| over all chain links (float check)."""
    m = build_matrix(params)
    worst = 0.0
    for chain in basis.right:
        prev = np.zeros(params.n, dtype=complex)
        for vec in chain:
            v = _as_array(vec)
            worst = max(worst, float(np.linalg.norm(m @ v - prev)))
            prev = v
    return worst


def jordan_form_matrix(block_sizes, eigenvalues) -> np.ndarray:
    """Direct sum of zero-eigenvalue shift blocks and the non-zero diagonal."""
    a0 = sum(block_sizes)
    n = a0 + len(eigenvalues)
    j = np.zeros((n, n), dtype=complex)
    pos = 0
    for d in block_sizes:
        for q in range(d - 1):
            j[pos + q, pos + q + 1] = 1.0
        pos += d
    for k, lam in enumerate(eigenvalues):
        j[pos + k, pos + k] = lam
    return j


def assemble_similarity(
    params: ModelParams,
    basis: JordanBasis,
    spectrum: SpectrumReport,
    tol: float = 1e-6,
) -> tuple[np.ndarray, np.ndarray]:
    """Similarity pair (V, W) with W V = I and W M V the canonical form.

    Columns of V are the right chains followed by the non-zero right
    eigenvectors; rows of W are the matching left rows.  A condition
    number above 1e12 is reported as a warning (expected at small t, where
    the matrix is far from normal), while a failed W V = I check raises.
    """
    if basis.exact:
        raise ValueError("assemble_similarity expects a floating-point basis")
    if not basis.complete:
        raise ValueError("basis must include left chains")
    cols = [v for chain in basis.right for v in chain]
    rows = [w for chain in basis.left for w in chain]
    for lam in spectrum.eigenvalues:
        v, w = nonzero_eigenvector(params, complex(lam))
        cols.append(v)
        rows.append(w)
    v_mat = np.column_stack(cols)
    w_mat = np.vstack(rows)
    cond = np.linalg.cond(v_mat)
    if cond > 1e12:
        warnings.warn(
            f"similarity basis is ill-conditioned (cond ~ {cond:.2e}); "
            "residuals may be inflated",
            RuntimeWarning,
            stacklevel=2,
        )
    defect = np.linalg.norm(w_mat @ v_mat - np.eye(params.n))
    if defect > tol * max(1.0, cond):
        raise JordanError(f"W V deviates from the identity by {defect:.3e}")
    return v_mat, w_mat
