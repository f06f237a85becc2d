"""Resolvent norms, pseudospectrum grids, and enclosure disks.

The resolvent 2-norm at z is 1/sigma_min(zI - M); grids store sigma_min so
one computation answers every epsilon-level query.  The block expansion of
the resolvent over a Jordan basis gives an independent route to the same
matrix, and the disk enclosures bound the epsilon-pseudospectrum component
at the origin by radius (eps * t * kappa0)^((t+1)/(n+t+1)).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .jordan import JordanBasis, condition_numbers
from .model import ModelParams
from .parallel import parallel_map
from .spectrum import SpectrumReport, nonzero_eigenvector

__all__ = [
    "PseudoGrid",
    "EnclosureDisks",
    "ResolventError",
    "default_region",
    "resolvent_norm_direct",
    "resolvent_jordan",
    "pseudospectrum_grid",
    "zero_component",
    "enclosure_disks",
]

SVD_MAX_N = 200  # full SVD below, shifted inverse iteration above


class ResolventError(RuntimeError):
    """Evaluation point too close to the spectrum, or iteration failure."""


def default_region(params: ModelParams) -> tuple[float, float, float, float]:
    """Square window capturing the symbol-curve scale of the family."""
    b1 = abs(complex(params.b_coeffs[0])) if params.b_coeffs else 0.0
    half = 1.5 * (1.0 + b1)
    return (-half, half, -half, half)


@dataclass(frozen=True)
class PseudoGrid:
    """sigma_min(zI - M) sampled on a rectangular grid.

    values[iy, ix] belongs to xs[ix] + 1j*ys[iy].  Membership in the
    epsilon-pseudospectrum is the threshold query values < eps.
    """

    region: tuple[float, float, float, float]
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray

    @property
    def resolution(self) -> tuple[int, int]:
        return (self.xs.size, self.ys.size)

    @property
    def cell_diag(self) -> float:
        dx = self.xs[1] - self.xs[0] if self.xs.size > 1 else 0.0
        dy = self.ys[1] - self.ys[0] if self.ys.size > 1 else 0.0
        return float(np.hypot(dx, dy))

    def members(self, eps: float) -> np.ndarray:
        return self.values < eps


@dataclass(frozen=True)
class EnclosureDisks:
    """Disk cover of the epsilon-pseudospectrum.

    The zero disk has radius (eps * C0)^((t+1)/(n+t+1)) with C0 the product
    of t and the largest generalized condition number; each non-zero
    eigenvalue gets a disk of radius eps times its condition number.
    """

    epsilon: float
    exponent: float
    zero_constant: float
    zero_radius: float
    eigen_centers: tuple
    eigen_radii: tuple
    eigen_constants: tuple


def _grid_axes(region, resolution):
    nx, ny = resolution
    if nx < 2 or ny < 2:
        raise ValueError(f"resolution must be at least 2x2, got {resolution}")
    re_min, re_max, im_min, im_max = region
    if not (re_min < re_max and im_min < im_max):
        raise ValueError(f"degenerate region {region}")
    xs = np.linspace(re_min, re_max, nx)
    ys = np.linspace(im_min, im_max, ny)
    return xs, ys


def _sigma_min_svd_batch(m: np.ndarray, zs: np.ndarray) -> np.ndarray:
    """Smallest singular values of zI - M for a batch of z (stacked SVD)."""
    n = m.shape[0]
    out = np.empty(zs.size, dtype=float)
    # keep each stacked block under ~64 MB
    chunk = max(1, int(4_000_000 // (n * n)))
    eye = np.eye(n)
    for k in range(0, zs.size, chunk):
        zc = zs[k:k + chunk]
        stack = zc[:, None, None] * eye - m
        out[k:k + chunk] = np.linalg.svd(stack, compute_uv=False)[:, -1]
    return out


def _sigma_min_iter(a: np.ndarray, tol: float = 1e-8, max_iter: int = 200) -> float:
    """Smallest singular value by inverse iteration on a^H a.

    One LU factorization, then alternating adjoint/plain solves; the final
    value is the Rayleigh refinement ||a v|| at the unit iterate v.
    Deterministic starting vector, with rotated restarts on stagnation.
    """
    n = a.shape[0]
    try:
        lu = lu_factor(a, check_finite=False)
    except Exception as exc:  # singular to working precision
        raise ResolventError(f"factorization failed: {exc}") from None
    if not np.all(np.isfinite(lu[0])):
        return 0.0
    best = np.inf
    vec = None
    for restart in range(3):
        x = (1.0 + np.linspace(0.0, 1.0, n)) * (1j ** restart)
        x /= np.linalg.norm(x)
        prev = np.inf
        for _ in range(max_iter):
            y = lu_solve(lu, x, trans=2, check_finite=False)
            y = lu_solve(lu, y, trans=0, check_finite=False)
            growth = np.linalg.norm(y)
            if not np.isfinite(growth) or growth == 0.0:
                return 0.0
            est = growth ** -0.5
            x = y / growth
            if abs(est - prev) <= tol * est:
                sigma = float(np.linalg.norm(a @ x))
                return sigma
            prev = est
        sigma = float(np.linalg.norm(a @ x))
        if sigma < best:
            best, vec = sigma, x
    del vec
    return best


def resolvent_norm_direct(m: np.ndarray, z: complex) -> float:
    """2-norm of the resolvent at z, as 1/sigma_min(zI - M).

    Full SVD up to SVD_MAX_N, shifted inverse iteration beyond.  A sigma
    below 1e-300 (z numerically an eigenvalue) is reported as +inf.
    """
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    a = z * np.eye(n) - m
    if n <= SVD_MAX_N:
        sigma = float(np.linalg.svd(a, compute_uv=False)[-1])
    else:
        sigma = _sigma_min_iter(a)
    if sigma < 1e-300:
        return float("inf")
    return 1.0 / sigma


def pseudospectrum_grid(
    m: np.ndarray,
    region: tuple[float, float, float, float],
    resolution: tuple[int, int],
    threads: int = 1,
) -> PseudoGrid:
    """sigma_min(zI - M) on every node of a rectangular grid.

    Rows are independent work items; output ordering is deterministic for
    any thread count.
    """
    m = np.asarray(m, dtype=complex)
    xs, ys = _grid_axes(region, resolution)
    n = m.shape[0]

    def row(iy):
        zs = xs + 1j * ys[iy]
        if n <= SVD_MAX_N:
            return _sigma_min_svd_batch(m, zs)
        eye = np.eye(n)
        return np.array([_sigma_min_iter(z * eye - m) for z in zs])

    rows = parallel_map(row, range(ys.size), threads)
    return PseudoGrid(tuple(region), xs, ys, np.vstack(rows))


def zero_component(
    m: np.ndarray,
    region: tuple[float, float, float, float],
    resolution: tuple[int, int],
    eps: float,
    threads: int = 1,
) -> PseudoGrid:
    """Connected grid component of {sigma_min < eps} containing the origin.

    Flood fill (4-neighbor) from the node nearest 0, evaluating sigma_min
    lazily in frontier batches; untouched nodes keep the sentinel +inf.
    The result equals the origin component of the full grid at the same
    resolution while evaluating only the component and its boundary ring.
    """
    m = np.asarray(m, dtype=complex)
    xs, ys = _grid_axes(region, resolution)
    values = np.full((ys.size, xs.size), np.inf)
    known = np.zeros_like(values, dtype=bool)
    start = (int(np.argmin(np.abs(ys))), int(np.argmin(np.abs(xs))))

    frontier = [start]
    known[start] = True
    while frontier:
        zs = np.array([xs[ix] + 1j * ys[iy] for iy, ix in frontier])
        if m.shape[0] <= SVD_MAX_N:
            sig = _sigma_min_svd_batch(m, zs)
        else:
            sig = np.array(parallel_map(
                lambda z: _sigma_min_iter(z * np.eye(m.shape[0]) - m), zs, threads))
        nxt = deque()
        for (iy, ix), s in zip(frontier, sig):
            values[iy, ix] = s
            if s >= eps:
                continue
            for jy, jx in ((iy - 1, ix), (iy + 1, ix), (iy, ix - 1), (iy, ix + 1)):
                if 0 <= jy < ys.size and 0 <= jx < xs.size and not known[jy, jx]:
                    known[jy, jx] = True
                    nxt.append((jy, jx))
        frontier = list(nxt)
    return PseudoGrid(tuple(region), xs, ys, values)


def resolvent_jordan(
    params: ModelParams,
    basis: JordanBasis,
    spectrum: SpectrumReport,
    z: complex,
) -> np.ndarray:
    """Resolvent matrix from the Jordan block expansion.

    Sum over blocks of V_l (zI - S_d)^{-1} W_l plus the rank-one terms
    v_j w_j / (z - lambda_j).  Rejects z within 1e-12 of the spectrum,
    where the expansion is near-singular.
    """
    if not basis.complete or basis.exact:
        raise ValueError("resolvent expansion needs a complete floating basis")
    z = complex(z)
    if abs(z) < 1e-12:
        raise ResolventError(f"z = {z} is too close to the zero eigenvalue")
    gaps = np.abs(spectrum.eigenvalues - z)
    if float(gaps.min()) < 1e-12:
        raise ResolventError(f"z = {z} is too close to a non-zero eigenvalue")

    n = params.n
    out = np.zeros((n, n), dtype=complex)
    for vchain, wchain in zip(basis.right, basis.left):
        d = len(vchain)
        v = np.column_stack(vchain)
        w = np.vstack(wchain)
        block = np.zeros((d, d), dtype=complex)
        for j in range(d):
            for k in range(j, d):
                block[j, k] = z ** (-(k - j + 1))
        out += v @ block @ w
    for lam in spectrum.eigenvalues:
        vec, row = nonzero_eigenvector(params, complex(lam))
        out += np.outer(vec, row) / (z - lam)
    return out


def enclosure_disks(
    params: ModelParams,
    basis: JordanBasis,
    spectrum: SpectrumReport,
    epsilon: float,
) -> EnclosureDisks:
    """Disk cover of the epsilon-pseudospectrum from the condition numbers."""
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    _, kappa0 = condition_numbers(basis)
    t, n = params.t, params.n
    exponent = (t + 1) / (n + t + 1)
    c0 = t * kappa0
    centers, radii, constants = [], [], []
    for lam in spectrum.eigenvalues:
        vec, row = nonzero_eigenvector(params, complex(lam))
        kj = float(np.linalg.norm(vec) * np.linalg.norm(row))
        centers.append(complex(lam))
        radii.append(epsilon * kj)
        constants.append(kj)
    return EnclosureDisks(
        epsilon=float(epsilon),
        exponent=exponent,
        zero_constant=c0,
        zero_radius=float((epsilon * c0) ** exponent),
        eigen_centers=tuple(centers),
        eigen_radii=tuple(radii),
        eigen_constants=tuple(constants),
    )
