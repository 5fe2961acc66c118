"""Hyperspectral cube container and periodic difference operators.

A cube is an (n1, n2, n3) float64 array: vertical index first, then
horizontal, then the band index.  Serialized layouts (see cubeio) store
bands sequentially with the vertical index fastest, which is exactly the
Fortran ravel of this array.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels


class Axis(enum.IntEnum):
    """Cube axes; the value is the numpy axis number."""

    VERTICAL = 0
    HORIZONTAL = 1
    SPECTRAL = 2


@dataclass(frozen=True, eq=False)
class HSCube:
    """Immutable hyperspectral cube.

    Construction copies the input, casts to float64 and rejects anything
    that is not a finite 3-d array.  The stored array is marked read-only
    so operations on cubes stay pure.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, order="C")
        if arr.ndim != 3:
            raise ValueError(f"expected a 3-d array, got shape {arr.shape}")
        if arr.size == 0:
            raise ValueError("cube has no voxels")
        if not np.isfinite(arr).all():
            raise ValueError("cube contains non-finite values")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def n1(self) -> int:
        return self.data.shape[0]

    @property
    def n2(self) -> int:
        return self.data.shape[1]

    @property
    def n3(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def to_flat(self) -> np.ndarray:
        """Band-sequential vector, vertical index fastest within a band."""
        return self.data.ravel(order="F")

    @classmethod
    def from_flat(cls, flat, n1: int, n2: int, n3: int) -> "HSCube":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != n1 * n2 * n3:
            raise ValueError(
                f"flat length {flat.size} does not match {n1}x{n2}x{n3}"
            )
        return cls(flat.reshape((n1, n2, n3), order="F"))

    def band(self, k: int) -> np.ndarray:
        """A single (n1, n2) band as a read-only view."""
        return self.data[:, :, k]


def _as_array(x) -> np.ndarray:
    if isinstance(x, HSCube):
        return x.data
    return np.asarray(x, dtype=np.float64)


def forward_diff(x, axis: Axis) -> HSCube:
    """Periodic forward difference: out[i] = x[i+1 mod n] - x[i]."""
    return HSCube(_kernels.forward_diff(_as_array(x), int(axis)))


def adjoint_diff(y, axis: Axis) -> HSCube:
    """Adjoint of forward_diff: out[i] = y[i-1 mod n] - y[i]."""
    return HSCube(_kernels.adjoint_diff(_as_array(y), int(axis)))


def second_order_diff(x) -> tuple[HSCube, HSCube]:
    """Spectral difference followed by each spatial difference.

    Returns the pair (vertical-of-spectral, horizontal-of-spectral); both
    vanish on cubes whose bands are all identical.
    """
    arr = _as_array(x)
    ds = _kernels.forward_diff(arr, int(Axis.SPECTRAL))
    dv = _kernels.forward_diff(ds, int(Axis.VERTICAL))
    dh = _kernels.forward_diff(ds, int(Axis.HORIZONTAL))
    return HSCube(dv), HSCube(dh)
