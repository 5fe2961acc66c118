"""Block spatio-spectral structure tensors and the regularizer values.

The spatial grid is covered by blocks of shape (block_h, block_w) whose
origins step by the strides; blocks that overhang the border wrap
periodically, matching the difference operators.  For each block the two
second-order difference cubes are gathered into one matrix with
band-interleaved columns

    [vert_1, horz_1, vert_2, horz_2, ..., vert_n3, horz_n3],

each column holding the block's pixels with the vertical index fastest.
The regularizer is the sum of nuclear norms of these matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cube import Axis, HSCube, second_order_diff
from .prox import NumericalFailure


@dataclass(frozen=True)
class BlockGeometry:
    """Block covering of an (n1, n2) spatial grid.

    Strides default to the block shape (a non-overlapping tiling).  With
    stride 1 every pixel starts a block and the covering is fully
    overlapping.
    """

    n1: int
    n2: int
    block_h: int = 10
    block_w: int = 10
    stride_h: int | None = None
    stride_w: int | None = None
    origins: tuple[tuple[int, int], ...] = field(init=False, repr=False)

    def __post_init__(self):
        sh = self.block_h if self.stride_h is None else self.stride_h
        sw = self.block_w if self.stride_w is None else self.stride_w
        object.__setattr__(self, "stride_h", sh)
        object.__setattr__(self, "stride_w", sw)
        if not (1 <= self.block_h <= self.n1 and 1 <= self.block_w <= self.n2):
            raise ValueError(
                f"block {self.block_h}x{self.block_w} does not fit the "
                f"{self.n1}x{self.n2} grid"
            )
        if sh < 1 or sw < 1:
            raise ValueError("strides must be >= 1")
        origins = tuple(
            (r, c)
            for r in range(0, self.n1, sh)
            for c in range(0, self.n2, sw)
        )
        object.__setattr__(self, "origins", origins)

    @property
    def n_blocks(self) -> int:
        return len(self.origins)

    @property
    def block_pixels(self) -> int:
        return self.block_h * self.block_w

    def index_grids(self) -> tuple[np.ndarray, np.ndarray]:
        """Wrapped (row, col) index grids, each (n_blocks, block_h, block_w)."""
        rows = np.array([o[0] for o in self.origins])
        cols = np.array([o[1] for o in self.origins])
        ri = (rows[:, None] + np.arange(self.block_h)[None, :]) % self.n1
        ci = (cols[:, None] + np.arange(self.block_w)[None, :]) % self.n2
        return ri[:, :, None], ci[:, None, :]

    def coverage(self) -> np.ndarray:
        """(n1, n2) int array counting how many blocks contain each pixel."""
        cov = np.zeros((self.n1, self.n2), dtype=np.int64)
        ri, ci = self.index_grids()
        np.add.at(cov, (ri, ci), 1)
        return cov


def _check_dims(geometry: BlockGeometry, arr: np.ndarray):
    if arr.shape[:2] != (geometry.n1, geometry.n2):
        raise ValueError(
            f"geometry is bound to a {geometry.n1}x{geometry.n2} grid, "
            f"got a cube with spatial shape {arr.shape[:2]}"
        )


def _as_array(x) -> np.ndarray:
    if isinstance(x, HSCube):
        return x.data
    return np.asarray(x, dtype=np.float64)


def extract_blocks(dv, dh, geometry: BlockGeometry) -> np.ndarray:
    """Gather the structure tensors, one matrix per block.

    dv, dh are the two second-order difference cubes.  Returns an array
    of shape (n_blocks, block_h * block_w, 2 * n3), blocks ordered as
    geometry.origins.
    """
    dv = _as_array(dv)
    dh = _as_array(dh)
    if dv.shape != dh.shape:
        raise ValueError("difference cubes must share a shape")
    _check_dims(geometry, dv)
    n3 = dv.shape[2]
    ri, ci = geometry.index_grids()
    # (B, bh, bw, n3) -> (B, bw, bh, n3) -> (B, bw*bh, n3) gives flat
    # block index i + block_h * j, i.e. vertical fastest.
    m = geometry.block_pixels

    def gather(cubearr):
        sub = cubearr[ri, ci, :]
        return sub.transpose(0, 2, 1, 3).reshape(geometry.n_blocks, m, n3)

    out = np.empty((geometry.n_blocks, m, 2 * n3), dtype=np.float64)
    out[:, :, 0::2] = gather(dv)
    out[:, :, 1::2] = gather(dh)
    return out


def scatter_blocks_adjoint(blocks, geometry: BlockGeometry) -> tuple[np.ndarray, np.ndarray]:
    """Adjoint of extract_blocks.

    Splits the interleaved columns back into the two difference slots and
    accumulates every block onto the grid (pixels covered by several
    blocks receive the sum).  Blocks are processed in origin order so the
    summation order is fixed.
    """
    blocks = np.asarray(blocks, dtype=np.float64)
    if blocks.ndim != 3 or blocks.shape[0] != geometry.n_blocks:
        raise ValueError("blocks do not match the geometry")
    m = geometry.block_pixels
    if blocks.shape[1] != m or blocks.shape[2] % 2 != 0:
        raise ValueError("blocks do not match the geometry")
    n3 = blocks.shape[2] // 2
    bh, bw = geometry.block_h, geometry.block_w
    gv = np.zeros((geometry.n1, geometry.n2, n3), dtype=np.float64)
    gh = np.zeros_like(gv)
    ri, ci = geometry.index_grids()
    for b in range(geometry.n_blocks):
        # invert the vertical-fastest flattening
        vb = blocks[b, :, 0::2].reshape(bw, bh, n3).transpose(1, 0, 2)
        hb = blocks[b, :, 1::2].reshape(bw, bh, n3).transpose(1, 0, 2)
        gv[ri[b, :, 0][:, None], ci[b, 0, :][None, :], :] += vb
        gh[ri[b, :, 0][:, None], ci[b, 0, :][None, :], :] += hb
    return gv, gh


def block_nuclear_norms(x, geometry: BlockGeometry) -> np.ndarray:
    """Nuclear norm of each block's structure tensor, in origin order."""
    dv, dh = second_order_diff(_as_array(x))
    tensors = extract_blocks(dv.data, dh.data, geometry)
    try:
        sv = np.linalg.svd(tensors, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        index = None
        for b in range(tensors.shape[0]):
            try:
                np.linalg.svd(tensors[b], compute_uv=False)
            except np.linalg.LinAlgError:
                index = b
                break
        where = "" if index is None else f" (block {index})"
        raise NumericalFailure(f"SVD did not converge{where}", index) from exc
    return sv.sum(axis=1)


def s3ttv_value(x, geometry: BlockGeometry) -> float:
    """Sum of block nuclear norms of the structure tensors of x."""
    return float(block_nuclear_norms(x, geometry).sum())


def sstv_value(x) -> float:
    """l1 norm of both second-order difference cubes of x."""
    dv, dh = second_order_diff(_as_array(x))
    return float(np.abs(dv.data).sum() + np.abs(dh.data).sum())
