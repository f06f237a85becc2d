"""Gaussian-perturbation ensembles, symbol curves, and the inner region.

Adding a small complex Gaussian matrix to the family scatters eigenvalues
densely over the pseudospectrum of the zero eigenvalue while leaving the
non-zero eigenvalues essentially fixed.  This module runs such ensembles
reproducibly, separates the two populations, measures the mean radius of
the inner cloud and its linear law in (t+1)/(n+t+1), and builds the
size-reduced symbol-curve region that the inner cloud is expected to fill.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .model import ModelParams, build_matrix, multiplicities
from .parallel import parallel_map
from .spectrum import SpectrumReport

__all__ = [
    "EnsembleCloud",
    "SymbolCurve",
    "RegionGrid",
    "FitResult",
    "EigensolveError",
    "SymbolCurveError",
    "WindingError",
    "sample_gaussian",
    "dense_eigensolve",
    "run_ensemble",
    "mark_outer",
    "mean_radius",
    "fit_radius_law",
    "symbol_curve",
    "winding_number",
    "conjecture_region",
]

log = logging.getLogger(__name__)

MAX_EIG_N = 1500  # desk-scale cap for the dense eigensolver


class EigensolveError(RuntimeError):
    """Dense eigensolver failed to converge."""


class SymbolCurveError(RuntimeError):
    """Symbol-curve construction failed (no real-axis crossing found)."""


class WindingError(ValueError):
    """Winding number undefined: point on or too close to the curve."""


def sample_gaussian(n: int, stream_seed) -> np.ndarray:
    """n x n matrix of independent X + iY entries, X, Y standard normal.

    Variates come from a Box-Muller transform of 53-bit uniforms drawn
    from a Philox counter-based generator keyed by stream_seed (an int or
    a tuple of ints), so matrices are reproducible bit for bit and streams
    for different keys are independent.
    """
    key = np.asarray(stream_seed if isinstance(stream_seed, (tuple, list))
                     else (stream_seed,), dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    u1 = gen.random((n, n))
    u2 = gen.random((n, n))
    radial = np.sqrt(-2.0 * np.log1p(-u1))
    angle = 2.0 * np.pi * u2
    return radial * (np.cos(angle) + 1j * np.sin(angle))


def dense_eigensolve(m: np.ndarray) -> np.ndarray:
    """All eigenvalues of a dense complex matrix.

    Backed by LAPACK's balancing + Hessenberg + shifted-QR driver, whose
    backward-error contract matches the residual requirement here.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    if m.shape[0] > MAX_EIG_N:
        raise ValueError(f"matrix size {m.shape[0]} exceeds desk scale {MAX_EIG_N}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    try:
        return np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise EigensolveError(f"QR iteration failed: {exc}") from None


@dataclass(frozen=True)
class EnsembleCloud:
    """Eigenvalues of independently perturbed copies of one matrix.

    eigenvalues is flat with sample_index giving the originating sample;
    outer_mask (set by mark_outer) flags the eigenvalues attributed to the
    unperturbed non-zero spectrum.  failures lists (sample, message) pairs
    for samples whose eigensolve failed; their eigenvalues are absent.
    """

    params: ModelParams
    tilde_delta: complex
    master_seed: int
    samples: int
    eigenvalues: np.ndarray
    sample_index: np.ndarray
    outer_mask: np.ndarray | None = None
    failures: tuple = ()

    def inner_eigenvalues(self) -> np.ndarray:
        if self.outer_mask is None:
            raise ValueError("call mark_outer first")
        return self.eigenvalues[~self.outer_mask]


def run_ensemble(
    params: ModelParams,
    tilde_delta: complex,
    samples: int,
    master_seed: int,
    threads: int = 1,
) -> EnsembleCloud:
    """Eigenvalues of M + tilde_delta * Z_i for i.i.d. Gaussian Z_i.

    Sample i draws its Z from the stream keyed (master_seed, i), so the
    cloud is identical for any execution order or thread count.  Per-sample
    eigensolve failures are recorded, not fatal.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    m = build_matrix(params)
    td = complex(tilde_delta)

    def one(i):
        z = sample_gaussian(params.n, (master_seed, i))
        try:
            return dense_eigensolve(m + td * z), None
        except EigensolveError as exc:
            return None, (i, str(exc))

    results = parallel_map(one, range(1, samples + 1), threads)
    eigs, idx, failures = [], [], []
    for i, (vals, err) in enumerate(results, start=1):
        if err is not None:
            failures.append(err)
            continue
        eigs.append(vals)
        idx.append(np.full(params.n, i, dtype=np.int64))
    return EnsembleCloud(
        params=params,
        tilde_delta=td,
        master_seed=int(master_seed),
        samples=samples,
        eigenvalues=np.concatenate(eigs) if eigs else np.empty(0, dtype=complex),
        sample_index=np.concatenate(idx) if idx else np.empty(0, dtype=np.int64),
        failures=tuple(failures),
    )


def mark_outer(
    cloud: EnsembleCloud, spectrum: SpectrumReport, match_tol: float = 1e-2
) -> EnsembleCloud:
    """Flag, per sample, the eigenvalues matching the unperturbed spectrum.

    Greedy nearest match in descending modulus order of the exact
    eigenvalues, accepted within match_tol relative to each |lambda_j|;
    if any exact eigenvalue finds no match the sample falls back to
    flagging its p1+1 largest-modulus points.
    """
    if cloud.eigenvalues.size == 0:
        raise ValueError("cloud is empty")
    exact = spectrum.eigenvalues
    mask = np.zeros(cloud.eigenvalues.size, dtype=bool)
    for i in range(1, cloud.samples + 1):
        here = np.nonzero(cloud.sample_index == i)[0]
        if here.size == 0:
            continue
        vals = cloud.eigenvalues[here]
        taken = np.zeros(here.size, dtype=bool)
        matched = []
        ok = True
        for lam in exact:
            dist = np.abs(vals - lam)
            dist[taken] = np.inf
            j = int(np.argmin(dist))
            if dist[j] <= match_tol * max(abs(lam), 1e-300):
                taken[j] = True
                matched.append(j)
            else:
                ok = False
                break
        if ok:
            mask[here[matched]] = True
        else:
            log.debug("sample %d: nearest-match failed, using largest-modulus rule", i)
            order = np.argsort(-np.abs(vals))[: exact.size]
            mask[here[order]] = True
    return replace(cloud, outer_mask=mask)


def mean_radius(
    cloud: EnsembleCloud, spectrum: SpectrumReport, match_tol: float = 1e-2
) -> float:
    """Mean modulus of the cloud after removing the outer eigenvalues."""
    if cloud.outer_mask is None:
        cloud = mark_outer(cloud, spectrum, match_tol)
    inner = cloud.inner_eigenvalues()
    if inner.size == 0:
        raise ValueError("no inner eigenvalues left after filtering")
    return float(np.mean(np.abs(inner)))


@dataclass(frozen=True)
class FitResult:
    """Least-squares line log(rbar) = c1 * (t+1)/(n+t+1) + c2."""

    c1: float
    c2: float
    residual: float  # RMS of the fit residuals


def fit_radius_law(points) -> FitResult:
    """Fit the mean-radius law across a (t, n, rbar) sweep."""
    pts = list(points)
    if len(pts) < 3:
        raise ValueError("need at least 3 sweep points")
    x = np.array([(t + 1) / (n + t + 1) for t, n, _ in pts])
    rbar = np.array([r for _, _, r in pts], dtype=float)
    if np.any(rbar <= 0):
        raise ValueError("all mean radii must be positive")
    if np.ptp(x) == 0:
        raise ValueError("degenerate sweep: all abscissae equal")
    y = np.log(rbar)
    a = np.column_stack([x, np.ones_like(x)])
    sol, *_ = np.linalg.lstsq(a, y, rcond=None)
    res = float(np.sqrt(np.mean((a @ sol - y) ** 2)))
    return FitResult(float(sol[0]), float(sol[1]), res)


@dataclass(frozen=True)
class SymbolCurve:
    """Image of the circle of given radius under f(z) = z^(t+1)(1 + h(z)).

    thetas/points sample the closed curve (the closing point is implicit);
    theta0 is the smallest positive angle where the curve crosses the real
    axis, so the arcs with theta in [theta0, 2pi - theta0] form the inner
    part once the outermost simple loop is removed.
    """

    t: int
    b_coeffs: tuple
    radius: float
    thetas: np.ndarray
    points: np.ndarray
    theta0: float

    def map(self, z):
        acc = 1.0 + 0j
        for j, b in enumerate(self.b_coeffs, start=1):
            acc += complex(b) * z ** j
        return z ** (self.t + 1) * acc

    def closed_points(self) -> np.ndarray:
        return np.append(self.points, self.points[0])

    def inner_polyline(self) -> np.ndarray:
        """Closed polyline over theta in [theta0, 2pi - theta0]."""
        inside = (self.thetas > self.theta0) & (self.thetas < 2 * np.pi - self.theta0)
        ends = [self.map(self.radius * np.exp(1j * self.theta0)),
                self.map(self.radius * np.exp(1j * (2 * np.pi - self.theta0)))]
        pts = np.concatenate([[ends[0]], self.points[inside], [ends[1]], [ends[0]]])
        return pts


def _symbol_eval(t, b_coeffs, z):
    acc = 1.0 + 0j
    for j, b in enumerate(b_coeffs, start=1):
        acc += complex(b) * z ** j
    return z ** (t + 1) * acc


def symbol_curve(t: int, b_coeffs, r: float, samples: int = 4096) -> SymbolCurve:
    """Sample the (possibly size-reduced) symbol curve at radius r.

    theta0 is located by sign-change bracketing on the sample grid and
    bisection to 1e-13 in theta.  Raises SymbolCurveError when the curve
    never crosses the real axis away from theta = 0.
    """
    if not 0 < r <= 1:
        raise ValueError(f"radius must lie in (0, 1], got {r}")
    if samples < 16:
        raise ValueError("need at least 16 samples")
    b_coeffs = tuple(b_coeffs)
    thetas = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    points = _symbol_eval(t, b_coeffs, r * np.exp(1j * thetas))

    def g(theta):
        return _symbol_eval(t, b_coeffs, r * np.exp(1j * theta)).imag

    ims = points.imag
    # bracket the first positive crossing, including one just above theta=0
    probe = 1e-9 * 2 * np.pi / samples
    grid = np.concatenate([[probe], thetas[1:], [2 * np.pi - probe]])
    vals = np.concatenate([[g(probe)], ims[1:], [g(2 * np.pi - probe)]])
    bracket = None
    for k in range(len(grid) - 1):
        if vals[k] == 0.0:
            bracket = (grid[k], grid[k])
            break
        if np.sign(vals[k]) != np.sign(vals[k + 1]):
            bracket = (grid[k], grid[k + 1])
            break
    if bracket is None:
        raise SymbolCurveError(
            "no real-axis crossing in (0, 2pi): min |Im f| on the grid is "
            f"{float(np.min(np.abs(ims[1:]))):.3e}"
        )
    lo, hi = bracket
    flo = g(lo)
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        fmid = g(mid)
        if fmid == 0.0:
            lo = hi = mid
            break
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi = mid
    theta0 = 0.5 * (lo + hi)
    return SymbolCurve(t, b_coeffs, float(r), thetas, points, float(theta0))


def _segment_distance(points_closed: np.ndarray, z: complex) -> float:
    a = points_closed[:-1] - z
    b = points_closed[1:] - z
    d = b - a
    denom = np.abs(d) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.clip(-np.real(a * np.conj(d)) / np.where(denom == 0, 1.0, denom), 0, 1)
    nearest = a + s * d
    return float(np.min(np.abs(nearest)))


def winding_number(curve, z: complex) -> int:
    """Signed number of turns of a closed polyline around z.

    curve may be a SymbolCurve (its full closed sampling is used) or an
    array of points (closed automatically).  Raises WindingError when z
    sits on or numerically too close to the polyline.
    """
    if isinstance(curve, SymbolCurve):
        pts = curve.closed_points()
    else:
        pts = np.asarray(curve, dtype=complex)
        if pts[0] != pts[-1]:
            pts = np.append(pts, pts[0])
    scale = float(np.max(np.abs(pts))) + abs(z)
    margin = 1e-9 * max(scale, 1e-30)
    if _segment_distance(pts, z) <= margin:
        raise WindingError(f"point {z} lies on the sampled curve (within {margin:.2e})")
    increments = np.angle((pts[1:] - z) / (pts[:-1] - z))
    total = float(np.sum(increments)) / (2.0 * np.pi)
    w = round(total)
    if abs(total - w) > 0.05:
        raise WindingError(
            f"winding sum {total:.6f} is not close to an integer; "
            "curve sampling too coarse near the point"
        )
    return int(w)


@dataclass(frozen=True)
class RegionGrid:
    """Membership grid of the inner symbol-curve region.

    mask[iy, ix] is True when the winding number of the inner (size
    reduced) curve about xs[ix] + 1j*ys[iy] is non-zero.
    """

    region: tuple[float, float, float, float]
    xs: np.ndarray
    ys: np.ndarray
    mask: np.ndarray
    curve: SymbolCurve

    def contains(self, points, inflate_cells: int = 1) -> np.ndarray:
        """Membership of arbitrary points, inflated by whole grid cells."""
        pts = np.asarray(points, dtype=complex).ravel()
        dx = self.xs[1] - self.xs[0]
        dy = self.ys[1] - self.ys[0]
        out = np.zeros(pts.size, dtype=bool)
        for k, z in enumerate(pts):
            ix = int(round((z.real - self.xs[0]) / dx))
            iy = int(round((z.imag - self.ys[0]) / dy))
            lo_x = max(0, ix - inflate_cells)
            hi_x = min(self.xs.size, ix + inflate_cells + 1)
            lo_y = max(0, iy - inflate_cells)
            hi_y = min(self.ys.size, iy + inflate_cells + 1)
            if lo_x < hi_x and lo_y < hi_y:
                out[k] = bool(self.mask[lo_y:hi_y, lo_x:hi_x].any())
        return out


def conjecture_region(
    params: ModelParams,
    epsilon: float,
    resolution: tuple[int, int],
    region: tuple[float, float, float, float] | None = None,
    samples: int = 4096,
    threads: int = 1,
) -> RegionGrid:
    """Inner region of the size-reduced symbol curve as a membership grid.

    The reduction radius is epsilon^(1/w) with w = (t+1) times the index
    of the zero eigenvalue; the region is the set of points with non-zero
    winding number of the curve's inner arcs.  By construction nothing
    here depends on delta.
    """
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    mult = multiplicities(params.n, params.t)
    if mult.index < 1:
        raise ValueError("inner region needs t >= 1")
    power = (params.t + 1) * mult.index
    r = epsilon ** (1.0 / power)
    curve = symbol_curve(params.t, params.b_coeffs, r, samples)
    poly = curve.inner_polyline()
    if region is None:
        pad = 1.1
        lim = float(np.max(np.abs(curve.points))) * pad
        region = (-lim, lim, -lim, lim)
    xs, ys = _grid_axes(region, resolution)

    seg_a = poly[:-1]
    seg_b = poly[1:]

    def row(iy):
        zs = xs + 1j * ys[iy]
        inc = np.angle((seg_b[None, :] - zs[:, None]) / (seg_a[None, :] - zs[:, None]))
        total = inc.sum(axis=1) / (2.0 * np.pi)
        return np.abs(np.round(total)) > 0.5

    rows = parallel_map(row, range(ys.size), threads)
    return RegionGrid(tuple(region), xs, ys, np.vstack(rows), curve)


def _grid_axes(region, resolution):
    nx, ny = resolution
    if nx < 2 or ny < 2:
        raise ValueError(f"resolution must be at least 2x2, got {resolution}")
    re_min, re_max, im_min, im_max = region
    if not (re_min < re_max and im_min < im_max):
        raise ValueError(f"degenerate region {region}")
    return np.linspace(re_min, re_max, nx), np.linspace(im_min, im_max, ny)


def reduction_radius(n: int, t: int, epsilon: float) -> float:
    """epsilon^(1/w) with w = (t+1) * index of the zero eigenvalue."""
    mult = multiplicities(n, t)
    if mult.index < 1:
        raise ValueError("size reduction needs t >= 1")
    return float(epsilon ** (1.0 / ((t + 1) * mult.index)))


def spectral_abscissa_gap(cloud: EnsembleCloud, spectrum: SpectrumReport) -> float:
    """Smallest modulus gap between inner cloud and exact non-zero spectrum."""
    inner = cloud.inner_eigenvalues()
    ring = float(np.min(np.abs(spectrum.eigenvalues)))
    return ring - float(np.max(np.abs(inner)))
