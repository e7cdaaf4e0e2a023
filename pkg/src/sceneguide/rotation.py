"""Continuous 6-D rotation representation.

A rotation is encoded by two 3-vectors (the first two columns of the
rotation matrix before orthonormalization).  Decoding runs Gram-Schmidt:
the first column is the normalized first vector, the second is the
orthogonalized-and-normalized second vector, the third is their cross
product.  Any non-degenerate 6-vector (including pure Gaussian noise)
decodes to a valid element of SO(3), which is what makes this encoding
safe to denoise.
"""

from __future__ import annotations

import logging

import numpy as np

from .errors import DegenerateRotation, NotARotation

logger = logging.getLogger(__name__)

_DEGENERATE_NORM = 1e-8


def rot6d_to_matrix(r: np.ndarray, strict: bool = False) -> np.ndarray:
    """Decode a 6-vector into a 3x3 rotation matrix via Gram-Schmidt.

    Degenerate inputs (near-zero or parallel embedded vectors) decode to
    the identity with a warning, so that early, extremely noisy sampler
    states never crash.  Pass ``strict=True`` to raise instead.
    """
    r = np.asarray(r, dtype=np.float64).reshape(6)
    a, b = r[:3], r[3:]
    na = np.linalg.norm(a)
    if na < _DEGENERATE_NORM:
        return _degenerate(strict, "first vector near zero")
    c1 = a / na
    b_orth = b - np.dot(c1, b) * c1
    nb = np.linalg.norm(b_orth)
    if nb < _DEGENERATE_NORM or np.linalg.norm(b) < _DEGENERATE_NORM:
        return _degenerate(strict, "second vector near zero or parallel")
    c2 = b_orth / nb
    c3 = np.cross(c1, c2)
    return np.stack([c1, c2, c3], axis=1)


def _degenerate(strict: bool, reason: str) -> np.ndarray:
    if strict:
        raise DegenerateRotation(reason)
    logger.warning("degenerate 6-D rotation (%s); substituting identity", reason)
    return np.eye(3)


def rot6d_to_matrix_batch(r: np.ndarray) -> np.ndarray:
    """Vectorized decode of an (..., 6) array to (..., 3, 3) matrices.

    Degenerate rows fall back to the identity (non-strict semantics).
    """
    r = np.asarray(r, dtype=np.float64)
    a, b = r[..., :3], r[..., 3:]
    na = np.linalg.norm(a, axis=-1, keepdims=True)
    bad_a = na[..., 0] < _DEGENERATE_NORM
    c1 = a / np.where(na < _DEGENERATE_NORM, 1.0, na)
    b_orth = b - np.sum(c1 * b, axis=-1, keepdims=True) * c1
    nb = np.linalg.norm(b_orth, axis=-1, keepdims=True)
    bad = bad_a | (nb[..., 0] < _DEGENERATE_NORM) | (
        np.linalg.norm(b, axis=-1) < _DEGENERATE_NORM
    )
    c2 = b_orth / np.where(nb < _DEGENERATE_NORM, 1.0, nb)
    c3 = np.cross(c1, c2)
    out = np.stack([c1, c2, c3], axis=-1)
    if np.any(bad):
        out[bad] = np.eye(3)
    return out


def matrix_to_rot6d(R: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Encode a rotation matrix as its first two columns, flattened."""
    R = np.asarray(R, dtype=np.float64).reshape(3, 3)
    if np.max(np.abs(R.T @ R - np.eye(3))) > tol or np.linalg.det(R) < 0:
        raise NotARotation("input is not in SO(3) within tolerance")
    return np.concatenate([R[:, 0], R[:, 1]])


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform random rotation matrix from a normalized quaternion."""
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def yaw_matrix(angle: float) -> np.ndarray:
    """Rotation about +Y (the up axis) by ``angle`` radians."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
