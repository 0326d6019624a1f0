"""Deterministic 2D projection of embeddings by principal components."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateData

_TOL = 1e-10
_MAX_ITER = 10_000


def _dominant_eigenvector(matrix: np.ndarray) -> tuple[float, np.ndarray]:
    """Power iteration from a fixed start vector; matrix is PSD here."""
    n = matrix.shape[0]
    v = np.ones(n) / np.sqrt(n)
    for _ in range(_MAX_ITER):
        nxt = matrix @ v
        norm = np.linalg.norm(nxt)
        if norm < 1e-15:
            return 0.0, np.zeros(n)
        nxt /= norm
        if np.linalg.norm(nxt - v) < _TOL:
            v = nxt
            break
        v = nxt
    return float(v @ matrix @ v), v


def _fix_sign(v: np.ndarray) -> np.ndarray:
    threshold = 1e-9 * max(1.0, float(np.max(np.abs(v))))
    for x in v:
        if abs(x) > threshold:
            return v if x > 0 else -v
    return v


def project_2d(embeddings) -> list[tuple[float, float]]:
    """Center the vectors and project onto the top two principal axes.

    The sign convention (first nonzero loading positive) plus the fixed
    power-iteration start vector make the output reproducible.
    """
    vectors = np.asarray(
        [np.asarray(getattr(e, "vector", e), dtype=float) for e in embeddings])
    if vectors.ndim != 2 or vectors.shape[0] < 2:
        raise DegenerateData("need at least two embeddings")
    centered = vectors - vectors.mean(axis=0)
    cov = centered.T @ centered / vectors.shape[0]
    if float(np.trace(cov)) <= 1e-18:
        raise DegenerateData("zero variance across embeddings")

    lam1, axis1 = _dominant_eigenvector(cov)
    if lam1 <= 0.0:
        raise DegenerateData("no principal direction")
    axis1 = _fix_sign(axis1)
    deflated = cov - lam1 * np.outer(axis1, axis1)
    lam2, axis2 = _dominant_eigenvector(deflated)
    # Rank-1 data leaves no second direction; its component reads zero.
    axis2 = _fix_sign(axis2) if lam2 > 1e-15 * lam1 else np.zeros_like(axis1)

    xs = centered @ axis1
    ys = centered @ axis2
    return [(float(x), float(y)) for x, y in zip(xs, ys)]
