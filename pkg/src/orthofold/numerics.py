"""Small dense linear algebra with explicit tolerance policy.

All matrices here are plain float64 arrays of at most 64 rows/columns.
Rank decisions use a relative singular-value threshold; subspace bases are
returned orthonormal, as columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from . import kernels

MAX_DIM = 64


@dataclass(frozen=True)
class Tolerance:
    """Numeric policy used throughout the pipeline.

    rank_eps: relative singular-value cutoff for rank decisions.
    match_eps: absolute tolerance for matching points, elements and weights.
    cluster_eps_factor: multiplier on the median nearest-neighbor distance
    when building epsilon-graphs.
    """

    rank_eps: float = 1e-9
    match_eps: float = 1e-8
    cluster_eps_factor: float = 2.0


DEFAULT_TOL = Tolerance()


def as_small_matrix(a) -> np.ndarray:
    """Validate and convert to a float64 matrix within the supported size."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise InputError(f"expected a matrix, got ndim={m.ndim}")
    if m.shape[0] > MAX_DIM or m.shape[1] > MAX_DIM:
        raise InputError(f"matrix of shape {m.shape} exceeds the {MAX_DIM} limit")
    if not np.all(np.isfinite(m)):
        raise InputError("matrix contains non-finite entries")
    return m


def rank(a, tol: Tolerance = DEFAULT_TOL) -> int:
    """Numerical rank with threshold tol.rank_eps * largest singular value."""
    m = as_small_matrix(a)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol.rank_eps * s[0]))


def kernel_basis(a, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the null space of a."""
    m = as_small_matrix(a)
    ncols = m.shape[1]
    if m.size == 0:
        return np.eye(ncols)
    _, s, vt = np.linalg.svd(m)
    if s.size == 0 or s[0] == 0.0:
        r = 0
    else:
        r = int(np.sum(s > tol.rank_eps * s[0]))
    return vt[r:].T.copy()


def orthogonal_complement(vectors, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the column span.

    A (d, k) input yields a (d, d - rank) output; a zero-column input yields
    the identity basis of the ambient space.
    """
    m = as_small_matrix(vectors)
    d = m.shape[0]
    if m.shape[1] == 0 or not m.any():
        return np.eye(d)
    u, s, _ = np.linalg.svd(m, full_matrices=True)
    r = int(np.sum(s > tol.rank_eps * s[0])) if s[0] > 0.0 else 0
    return u[:, r:].copy()


def orthonormalize(vectors, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the column span (rank-revealing, via SVD)."""
    m = as_small_matrix(vectors)
    if m.shape[1] == 0 or not m.any():
        return np.zeros((m.shape[0], 0))
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    r = int(np.sum(s > tol.rank_eps * s[0])) if s[0] > 0.0 else 0
    return u[:, :r].copy()


def spans_equal(a, b, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Whether two column spans agree, compared through their projectors."""
    pa = _projector(a)
    pb = _projector(b)
    if pa.shape != pb.shape:
        return False
    return bool(np.max(np.abs(pa - pb)) <= max(tol.match_eps, 1e2 * tol.rank_eps))


def _projector(a) -> np.ndarray:
    q = orthonormalize(a)
    if q.shape[1] == 0:
        d = as_small_matrix(a).shape[0]
        return np.zeros((d, d))
    return q @ q.T


def epsilon_components(
    points: np.ndarray,
    metric,
    eps_factor: float = 2.0,
    absolute_eps: float | None = None,
) -> list[list[int]]:
    """Connected components of the epsilon-graph on a point sample.

    metric maps the stacked (n, d) array to the full (n, n) distance matrix.
    Edges join points at distance <= eps_factor * median nearest-neighbor
    distance, or <= absolute_eps when that override is given (used when the
    scale is calibrated on a larger ambient sample). Components are sorted
    by smallest member index.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise InputError("epsilon_components expects a nonempty (n, d) array")
    n = pts.shape[0]
    if n == 1:
        return [[0]]
    dist = np.asarray(metric(pts), dtype=np.float64)
    if dist.shape != (n, n):
        raise InputError(f"metric returned shape {dist.shape}, expected {(n, n)}")
    if absolute_eps is not None:
        threshold = float(absolute_eps)
    else:
        off = dist + np.diag(np.full(n, np.inf))
        nearest = off.min(axis=1)
        threshold = float(eps_factor) * float(np.median(nearest))
    labels = kernels.graph_components(dist, threshold)
    comps: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        comps.setdefault(int(lab), []).append(i)
    return sorted(comps.values(), key=lambda c: c[0])


def median_nn_distance(dist: np.ndarray) -> float:
    """Median over points of the distance to the nearest distinct point."""
    n = dist.shape[0]
    if n < 2:
        return 0.0
    off = dist + np.diag(np.full(n, np.inf))
    return float(np.median(off.min(axis=1)))
