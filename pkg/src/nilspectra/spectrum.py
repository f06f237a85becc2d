"""Non-zero eigenvalues: closed-form characteristic factor and solver.

For h(s) = b s the non-zero eigenvalues of S^(t+1)(I + h(S)) + delta*J are
the p1 + 1 simple roots of an explicit polynomial (p1 = floor((n-1)/(t+1))).
This module builds that polynomial, solves it with an Aberth-Ehrlich
simultaneous iteration, and provides the asymptotic cross-checks (outlier
series, circular limit) plus the right/left eigenvectors of the non-zero
eigenvalues.

Left eigenvectors are stored as row vectors (rows of the inverse of the
eigenvector basis), so every pairing used here is the plain, unconjugated
product row . column.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, Multiplicities, build_matrix, multiplicities

__all__ = [
    "CharPolynomial",
    "SpectrumReport",
    "DegenerateSpectrumError",
    "UnsupportedCoefficientsError",
    "RootSolveError",
    "CircularLimitError",
    "char_poly",
    "aberth_roots",
    "nonzero_eigenvalues",
    "outlier_expansion",
    "circular_limit",
    "nonzero_eigenvector",
    "catalan",
]


class DegenerateSpectrumError(ValueError):
    """delta = 0 collapses the non-zero spectrum (polynomial becomes z^deg)."""


class UnsupportedCoefficientsError(ValueError):
    """Closed-form polynomial exists only for h(s) = b_1 s."""


class RootSolveError(RuntimeError):
    """Root iteration failed; carries the best iterate and residuals."""

    def __init__(self, message, roots=None, residuals=None):
        super().__init__(message)
        self.roots = roots
        self.residuals = residuals


class CircularLimitError(ValueError):
    """Preconditions of the circular-configuration limit are not met."""


@dataclass(frozen=True)
class CharPolynomial:
    """Monic polynomial sum_k coeffs[k] z^k for the non-zero eigenvalues.

    coeffs is ascending with coeffs[-1] == 1 and degree exactly p1 + 1.
    Scalars are complex in the floating backend and Gaussian rationals in
    exact mode.  variant records which closed form produced it.
    """

    coeffs: tuple
    variant: str  # "general" or "zero_b"

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * z + c
        return acc


@dataclass(frozen=True)
class SpectrumReport:
    """All non-zero eigenvalues plus the zero-eigenvalue bookkeeping.

    eigenvalues are sorted by descending modulus (ties: ascending phase);
    residuals are the coefficient-weighted backward errors
    |p(lambda)| / sum_k |c_k| |lambda|^k of each root.
    """

    multiplicities: Multiplicities
    eigenvalues: np.ndarray
    residuals: np.ndarray

    @property
    def outlier(self) -> complex:
        return complex(self.eigenvalues[0])


def _char_coeffs_zero_b(n, t, delta):
    p1 = (n - 1) // (t + 1)
    coeffs = [-(delta * (n - (p1 - k) * (t + 1))) for k in range(p1 + 1)]
    coeffs.append(1 + (delta - delta))  # one in the scalar type of delta
    return coeffs


def _char_coeffs_general(n, t, b, delta):
    p1 = (n - 1) // (t + 1)
    p2 = (n - 1) // (t + 2)
    indicator = p1 >= p2 + 1 and (t + 2) * p1 >= n + 1
    one = b - b + 1
    coeffs = []
    for k in range(p1 + 1):
        j = p1 - k
        main = (n - j * (t + 1)) * (one + b) ** j
        if j:
            main = main - j * b * (one + b) ** (j - 1)
        extra = one - one
        if indicator and k <= p1 - p2 - 1:
            base = n - (t + 1) * j
            for q in range(base + 1, j + 1):
                extra = extra + math.comb(j, q) * (q - base) * b ** q
        coeffs.append(-(delta * (main + extra)))
    coeffs.append(one)
    return coeffs


def char_poly(params: ModelParams) -> CharPolynomial:
    """Closed-form monic polynomial whose roots are the non-zero eigenvalues.

    Supports h = 0 (simplified form) and h(s) = b_1 s (general form with
    the boundary-truncation correction term).  Works for any scalar type
    with field arithmetic, so exact coefficients come out when params hold
    Gaussian rationals.
    """
    if params.delta == 0:
        raise DegenerateSpectrumError(
            "delta must be non-zero for the closed-form polynomial "
            f"(with delta = 0 it degenerates to z^{(params.n - 1) // (params.t + 1) + 1})"
        )
    if all(b == 0 for b in params.b_coeffs):
        coeffs = _char_coeffs_zero_b(params.n, params.t, params.delta)
        return CharPolynomial(tuple(coeffs), "zero_b")
    if any(b != 0 for b in params.b_coeffs[1:]):
        raise UnsupportedCoefficientsError(
            "closed-form polynomial supports only h(s) = b_1 s; "
            "use a dense eigensolve for general coefficient sequences"
        )
    coeffs = _char_coeffs_general(params.n, params.t, params.b_coeffs[0], params.delta)
    return CharPolynomial(tuple(coeffs), "general")


# ---------------------------------------------------------------------------
# Aberth-Ehrlich simultaneous iteration.
# ---------------------------------------------------------------------------

_RESCALE_AT = 1e200
_RESCALE_BY = 2.0 ** -1000


def _eval_batch(coeffs_desc, abs_desc, x):
    """Horner evaluation of p, p' and the weighted coefficient norm.

    Returns (p, dp, err) up to one common per-element scale factor, which
    cancels in the ratios p/dp and |p|/err used by the iteration.
    """
    p = np.full_like(x, coeffs_desc[0])
    dp = np.zeros_like(x)
    err = np.full(x.shape, abs_desc[0])
    ax = np.abs(x)
    for c, a in zip(coeffs_desc[1:], abs_desc[1:]):
        dp = dp * x + p
        p = p * x + c
        err = err * ax + a
        big = err > _RESCALE_AT
        if big.any():
            p[big] *= _RESCALE_BY
            dp[big] *= _RESCALE_BY
            err[big] *= _RESCALE_BY
    return p, dp, err


def _initial_points(c: np.ndarray) -> np.ndarray:
    """Starting points from the coefficient Newton polygon.

    Moduli come from the slopes of the upper convex hull of (k, log|c_k|),
    which tracks clusters of root magnitudes even when they differ by
    orders of magnitude.  Phases per hull edge distribute uniformly around
    the argument of the edge's coefficient ratio, so an isolated large
    root (singleton edge) is seeded essentially on top of itself.
    """
    m = c.size - 1
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(c))
    ks = [k for k in range(m + 1) if np.isfinite(logs[k])]
    hull = []  # indices of upper-hull vertices, left to right
    for k in ks:
        while len(hull) >= 2:
            k1, k2 = hull[-2], hull[-1]
            if (logs[k2] - logs[k1]) * (k - k2) <= (logs[k] - logs[k2]) * (k2 - k1):
                hull.pop()
            else:
                break
        hull.append(k)
    radii = np.empty(m)
    pos = 0
    first = hull[0]
    if first > 0:  # zero coefficients below the first vertex: roots at zero
        radii[:first] = 1e-20
        pos = first
    edges = []
    for k1, k2 in zip(hull[:-1], hull[1:]):
        width = k2 - k1
        r = float(np.exp((logs[k1] - logs[k2]) / width))
        edges.append((pos, width, r, k1, k2))
        radii[pos:pos + width] = r
        pos += width
    angles = 2.0 * np.pi * (np.arange(m) + 0.5) / m + 0.43
    points = radii * np.exp(1j * angles)
    # an isolated dominant root deserves its phase too: the coefficient
    # ratio of its singleton edge is the root up to lower-order terms
    for pos, width, r, k1, k2 in edges:
        below = radii[pos - 1] if pos else 0.0
        if width == 1 and r > 2.0 * below:
            points[pos] = -c[k1] / c[k2] if k2 - k1 == 1 else r
    return points


def aberth_roots(coeffs, *, radius=None, tol=1e-13, max_iter=400):
    """All roots of a monic polynomial by Aberth-Ehrlich iteration.

    coeffs are ascending with a non-zero leading coefficient.  Starting
    points sit on circles whose radii follow the coefficient Newton
    polygon (or all on the circle `radius` when given).  Returns (roots,
    residuals) where residuals are coefficient-weighted backward errors;
    raises RootSolveError (carrying the best iterate) when any root fails
    to reach tol within max_iter sweeps.
    """
    c = np.asarray([complex(v) for v in coeffs], dtype=complex)
    if c.size < 2:
        raise ValueError("polynomial must have degree >= 1")
    if c[-1] == 0:
        raise ValueError("leading coefficient must be non-zero")
    c = c / c[-1]
    m = c.size - 1
    desc = c[::-1]
    abs_desc = np.abs(desc)
    with np.errstate(divide="ignore"):
        outer_bound = 2.0 * float(
            np.max(np.abs(c[:-1]) ** (1.0 / np.arange(m, 0, -1)))
        )

    if radius:
        angles = 2.0 * np.pi * (np.arange(m) + 0.5) / m + 0.43
        x = radius * np.exp(1j * angles)
    else:
        x = _initial_points(c)
    active = np.ones(m, dtype=bool)

    for _ in range(max_iter):
        p, dp, err = _eval_batch(desc, abs_desc, x)
        eta = np.abs(p) / np.maximum(err, 1e-300)
        active = eta > tol
        if not active.any():
            break
        dp = np.where(dp == 0, 1e-300, dp)
        newton = p / dp
        diff = x[:, None] - x[None, :]
        np.fill_diagonal(diff, np.inf)
        beta = np.sum(1.0 / diff, axis=1)
        denom = 1.0 - newton * beta
        step = np.where(denom == 0, newton, newton / np.where(denom == 0, 1.0, denom))
        # trust region: a near-singular correction denominator must not
        # throw an approximation far out of the root cluster
        cap = 0.5 * (1.0 + np.abs(x))
        big = np.abs(step) > cap
        step = np.where(big, step * (cap / np.abs(np.where(big, step, 1.0))), step)
        x = np.where(active, x - step, x)
        # no root exceeds the Fujiwara bound; project escapees back
        high = np.abs(x) > outer_bound
        if high.any():
            x = np.where(high, x * (outer_bound / np.abs(np.where(high, x, 1.0))), x)
    else:
        _, _, err = _eval_batch(desc, abs_desc, x)
        raise RootSolveError(
            f"Aberth iteration did not converge within {max_iter} sweeps "
            f"(worst residual {float(np.max(eta)):.3e})",
            roots=x,
            residuals=eta,
        )

    p, _, err = _eval_batch(desc, abs_desc, x)
    eta = np.abs(p) / np.maximum(err, 1e-300)
    order = np.lexsort((np.angle(x), -np.abs(x)))
    return x[order], eta[order]


def nonzero_eigenvalues(
    params: ModelParams, tol: float = 1e-10, sum_tol: float = 1e-8
) -> SpectrumReport:
    """Solve the closed-form polynomial for all p1 + 1 non-zero eigenvalues.

    Every root must reach a coefficient-weighted backward error <= tol and
    the root sum must reproduce the trace n*delta to sum_tol relative,
    otherwise a RootSolveError (with the best iterate attached) is raised.
    """
    poly = char_poly(params)
    mult = multiplicities(params.n, params.t)
    ndelta = params.n * complex(params.delta)
    roots, residuals = aberth_roots(poly.coeffs)
    if float(np.max(residuals)) > tol:
        raise RootSolveError(
            f"root residual {float(np.max(residuals)):.3e} exceeds tol {tol:.3e}",
            roots=roots, residuals=residuals,
        )
    total = complex(np.sum(roots))
    if abs(total - ndelta) > sum_tol * max(1.0, abs(ndelta)):
        raise RootSolveError(
            f"root sum {total} deviates from trace {ndelta} beyond tol",
            roots=roots, residuals=residuals,
        )
    return SpectrumReport(mult, roots, residuals)


def catalan(k: int) -> int:
    """Catalan number (2k)! / ((k+1)! k!)."""
    return math.comb(2 * k, k) // (k + 1)


def outlier_expansion(params: ModelParams, order: int) -> complex:
    """Truncated large-n*delta series for the outlier eigenvalue.

    order = 0 gives n*delta + 1 + b; each further order adds one Catalan
    term, with geometric accuracy gain in 1/(n*delta).
    """
    b = complex(params.single_b())
    delta = complex(params.delta)
    n, t = params.n, params.t
    nd = n * delta
    if abs(nd) <= 1:
        raise ValueError(f"outlier series requires |n delta| > 1, got {abs(nd):.3g}")
    p1 = (n - 1) // (t + 1)
    if not 0 <= order <= p1 - 1:
        raise ValueError(f"order must lie in [0, p1-1] = [0, {p1 - 1}], got {order}")
    if b == -1:
        raise UnsupportedCoefficientsError("outlier series is singular at b = -1")
    base = (t + 1) / n + b / ((1 + b) * n)
    acc = 0j
    for k in range(order):
        acc += catalan(k) * base ** (k + 1) * ((1 + b) / nd) ** k
    return nd + 1 + b - (1 + b) * acc


def circular_limit(params: ModelParams) -> list[complex]:
    """Predicted large-n positions of the non-outlier eigenvalues.

    They approach p1 equally spaced points on the circle of radius |1+b|,
    with the point at 1+b removed.  Raises CircularLimitError listing every
    violated precondition instead of returning a silent answer.
    """
    problems = []
    try:
        b = complex(params.single_b())
    except ValueError as exc:
        raise CircularLimitError(str(exc)) from None
    delta = complex(params.delta)
    n, t = params.n, params.t
    mult = multiplicities(n, t)
    if mult.p1 != mult.p2:
        problems.append(f"requires p1 == p2, got p1={mult.p1}, p2={mult.p2}")
    if b.imag != 0 or delta.imag != 0:
        problems.append("requires real b and delta")
    threshold = 4 * ((1 + b.real) * (t + 1) + b.real) / n ** 2
    if not delta.real > threshold:
        problems.append(
            f"requires delta > 4((1+b)(t+1)+b)/n^2 = {threshold:.3g}, got {delta.real:.3g}"
        )
    if problems:
        raise CircularLimitError("; ".join(problems))
    return [
        (1 + b) * cmath.exp(2j * cmath.pi * k / (mult.p1 + 1))
        for k in range(1, mult.p1 + 1)
    ]


def _solve_upper_banded(params: ModelParams, lam: complex) -> np.ndarray:
    """(lam I - N)^{-1} 1 by back-substitution along the shift band."""
    n = params.n
    offsets = params.diagonal_offsets()
    v = np.zeros(n, dtype=complex)
    for j in range(n - 1, -1, -1):
        acc = 1.0 + 0j
        for off, coeff in offsets:
            if j + off < n:
                acc += complex(coeff) * v[j + off]
        v[j] = acc / lam
    return v


def _solve_lower_banded(params: ModelParams, lam: complex) -> np.ndarray:
    """Row vector 1^T (lam I - N)^{-1} by forward substitution."""
    n = params.n
    offsets = params.diagonal_offsets()
    w = np.zeros(n, dtype=complex)
    for j in range(n):
        acc = 1.0 + 0j
        for off, coeff in offsets:
            if j - off >= 0:
                acc += complex(coeff) * w[j - off]
        w[j] = acc / lam
    return w


def nonzero_eigenvector(
    params: ModelParams, lam: complex, tol: float = 1e-8
) -> tuple[np.ndarray, np.ndarray]:
    """Right eigenvector and left row vector of a non-zero eigenvalue.

    Returns (v, w) with v a unit column and w the matching left row
    normalized to w . v = 1 (plain product, no conjugation).  The defining
    residual ||M v - lam v|| must stay below tol times the Frobenius norm
    of M.  Eigenvalues too close to zero make the triangular solve
    ill-posed and are rejected.
    """
    lam = complex(lam)
    scale = 1.0 + abs(params.n * complex(params.delta))
    if abs(lam) < 1e-10 * scale:
        raise ValueError(
            f"eigenvalue {lam} too close to zero for the triangular solve"
        )
    v = _solve_upper_banded(params, lam)
    w = _solve_lower_banded(params, lam)
    if not (np.isfinite(v).all() and np.isfinite(w).all()):
        raise ValueError("triangular solve overflowed; eigenvalue too small")
    v = v / np.linalg.norm(v)
    pairing = complex(w @ v)
    if pairing == 0:
        raise ValueError("left/right pairing vanished; not a simple eigenvalue?")
    w = w / pairing
    m = build_matrix(params)
    residual = np.linalg.norm(m @ v - lam * v)
    if residual > tol * np.linalg.norm(m):
        raise ValueError(
            f"eigenpair residual {residual:.3e} exceeds tolerance; "
            "lam is not a converged eigenvalue"
        )
    return v, w
