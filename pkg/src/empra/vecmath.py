"""Vector primitives for embedding-space perturbation.

Everything here operates on 1-D float64 numpy arrays and is pure: cosine
similarity, its closed-form gradient, component-wise clipping, and
projection onto an L-infinity ball.  By convention any operation involving
a zero-norm vector returns 0 (cosine) or the zero vector (gradient) rather
than raising, so empty-text embeddings stay inert.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "as_vector",
    "cosine",
    "cosine_gradient",
    "clip_vec",
    "project_linf",
]


def as_vector(values, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite 1-D float64 array, optionally checking its length."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"embedding vector must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("embedding vector has non-finite components")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"expected dimension {dim}, got {v.shape[0]}")
    return v


def _check_same_dim(u: np.ndarray, v: np.ndarray) -> None:
    if u.shape[0] != v.shape[0]:
        raise ValueError(
            f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}"
        )


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; 0 if either vector has zero norm."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    _check_same_dim(u, v)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def cosine_gradient(s: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Gradient of cos(s, a) with respect to s.

    Closed form: a / (|s| |a|) - cos(s, a) * s / |s|^2.  Returns the zero
    vector when either norm is zero.
    """
    s = np.asarray(s, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    _check_same_dim(s, a)
    ns = np.linalg.norm(s)
    na = np.linalg.norm(a)
    if ns == 0.0 or na == 0.0:
        return np.zeros_like(s)
    cos_sa = np.dot(s, a) / (ns * na)
    return a / (ns * na) - cos_sa * s / (ns * ns)


def clip_vec(g: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Clamp every component of g into [lo, hi]."""
    if lo > hi:
        raise ValueError(f"clip bounds inverted: lo={lo} > hi={hi}")
    return np.clip(np.asarray(g, dtype=np.float64), lo, hi)


def project_linf(s: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    """Component-wise projection of s onto the L-inf ball around center.

    Computed as center + clip(s - center, -radius, radius) so the applied
    displacement is bounded by radius bit-exactly.
    """
    if radius < 0:
        raise ValueError(f"negative radius: {radius}")
    s = np.asarray(s, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    _check_same_dim(s, center)
    return center + np.clip(s - center, -radius, radius)
