"""Array kernels with an optional compiled backend.

The compiled extension (hsdenoise._core) provides fused loops for the
periodic difference operators and the l1-ball pivot search.  When it is
missing (no compiler at install time) the numpy implementations below are
used instead; both backends compute the same quantities and are
individually deterministic.
"""

import numpy as np

try:
    from . import _core

    HAVE_COMPILED_CORE = True
except ImportError:  # pragma: no cover - depends on build environment
    _core = None
    HAVE_COMPILED_CORE = False


def _as_c_double(x):
    return np.ascontiguousarray(x, dtype=np.float64)


# ---------------------------------------------------------------------------
# periodic first differences, out[i] = x[i+1 mod n] - x[i] along an axis,
# and the corresponding adjoint out[i] = y[i-1 mod n] - y[i]

def forward_diff_numpy(x, axis):
    out = np.roll(x, -1, axis=axis)
    np.subtract(out, x, out=out)
    return out


def adjoint_diff_numpy(y, axis):
    out = np.roll(y, 1, axis=axis)
    np.subtract(out, y, out=out)
    return out


def forward_diff(x, axis):
    x = _as_c_double(x)
    if HAVE_COMPILED_CORE and x.ndim == 3:
        return _core.forward_diff(x, axis)
    return forward_diff_numpy(x, axis)


def adjoint_diff(y, axis):
    y = _as_c_double(y)
    if HAVE_COMPILED_CORE and y.ndim == 3:
        return _core.adjoint_diff(y, axis)
    return adjoint_diff_numpy(y, axis)


# ---------------------------------------------------------------------------
# l1-ball threshold: the theta >= 0 with sum(max(mag - theta, 0)) == radius.
# Callers guarantee 0 < radius < mag.sum().

def l1_threshold_numpy(mag, radius):
    # Median-pivot search.  (s, rho) accumulate the sum and count of the
    # entries already known to lie strictly above theta; each round keeps
    # at most half of the active set, so total work is O(n) amortized.
    u = mag[mag > 0.0]
    s = 0.0
    rho = 0
    while u.size:
        p = np.partition(u, u.size // 2)[u.size // 2]
        gt = u > p
        n_gt = int(np.count_nonzero(gt))
        f_p = s + float(u[gt].sum()) - (rho + n_gt) * p
        if f_p < radius:
            # theta < p: everything >= p sits above theta
            lt = u < p
            s += float(u[~lt].sum())
            rho += int(u.size - np.count_nonzero(lt))
            u = u[lt]
        else:
            # theta >= p: entries <= p contribute nothing
            u = u[gt]
    return (s - radius) / rho


def l1_threshold(mag, radius):
    """mag is used as scratch space and may be permuted in place."""
    mag = _as_c_double(mag).ravel()
    if HAVE_COMPILED_CORE:
        return _core.l1_threshold(mag, radius)
    return l1_threshold_numpy(mag, radius)
