"""Proximal operators and projections used by the splitting solver.

All functions take plain float arrays (any shape unless stated) and
return new arrays; inputs are never modified.
"""

from __future__ import annotations

import numpy as np

from . import _kernels


class NumericalFailure(RuntimeError):
    """An SVD failed to converge inside a prox evaluation.

    block_index identifies the offending structure tensor when the
    failure happened in block-wise code, else it is None.
    """

    def __init__(self, message: str, block_index: int | None = None):
        super().__init__(message)
        self.block_index = block_index


def _as_float(x) -> np.ndarray:
    data = getattr(x, "data", None)
    if isinstance(data, np.ndarray):
        x = data
    return np.asarray(x, dtype=np.float64)


def project_box(x, lower: float, upper: float) -> np.ndarray:
    """Clamp elementwise to [lower, upper]."""
    if lower > upper:
        raise ValueError(f"empty box: lower={lower} > upper={upper}")
    return np.clip(_as_float(x), lower, upper)


def project_l2_ball(x, center, radius: float) -> np.ndarray:
    """Euclidean projection onto the ball of given radius around center."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    x = _as_float(x)
    d = x - _as_float(center)
    nrm = np.linalg.norm(d.ravel())
    if nrm <= radius:
        return x.copy()
    return x - (1.0 - radius / nrm) * d


def project_l1_ball(x, radius: float) -> np.ndarray:
    """Euclidean projection onto {y : sum(|y|) <= radius}.

    Soft-thresholds by the theta solving sum(max(|x| - theta, 0)) ==
    radius; theta is found by a pivot search over the magnitudes, so no
    sort of the full array is needed.  Entries with |x| exactly equal to
    theta map to zero.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    x = _as_float(x)
    if radius == 0.0:
        return np.zeros_like(x)
    mag = np.abs(x)
    if mag.sum() <= radius:
        return x.copy()
    theta = _kernels.l1_threshold(mag.ravel().copy(), radius)
    out = mag
    out -= theta
    np.maximum(out, 0.0, out=out)
    out *= np.sign(x)
    return out


def prox_l1(x, gamma: float) -> np.ndarray:
    """Soft threshold: the prox of gamma * sum(|.|)."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    x = _as_float(x)
    out = np.abs(x)
    out -= gamma
    np.maximum(out, 0.0, out=out)
    out *= np.sign(x)
    return out


def prox_nuclear(m, gamma: float) -> np.ndarray:
    """Prox of gamma * nuclear norm: soft threshold the singular values.

    m may be a single matrix or a stack of matrices (leading axes are
    broadcast through the thin SVD).
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    m = _as_float(m)
    if m.ndim < 2:
        raise ValueError("expected a matrix or a stack of matrices")
    try:
        u, sv, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        index = None
        if m.ndim > 2:
            for b in range(m.shape[0]):
                try:
                    np.linalg.svd(m[b], full_matrices=False)
                except np.linalg.LinAlgError:
                    index = b
                    break
        where = "" if index is None else f" (block {index})"
        raise NumericalFailure(f"SVD did not converge{where}", index) from exc
    np.maximum(sv - gamma, 0.0, out=sv)
    return np.matmul(u * sv[..., None, :], vt)


def prox_conjugate(x, gamma: float, prox):
    """Prox of the convex conjugate, via the Moreau decomposition.

    prox is a callable (value, scale) -> array computing the prox of the
    underlying function at the given scale; for indicator functions the
    scale is irrelevant and ignored by the callable.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    x = _as_float(x)
    inv = 1.0 / gamma
    return x - gamma * prox(x * inv, inv)
