# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: periodic differences on 3-d cubes and the l1-ball
pivot search.  Semantics mirror the numpy fallbacks in _kernels.py."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def forward_diff(const double[:, :, ::1] x, int axis):
    """out[i] = x[i+1 mod n] - x[i] along the given axis."""
    cdef Py_ssize_t n1 = x.shape[0], n2 = x.shape[1], n3 = x.shape[2]
    out_arr = np.empty((n1, n2, n3), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t i, j, k, nxt
    if axis == 0:
        for i in range(n1):
            nxt = i + 1 if i + 1 < n1 else 0
            for j in range(n2):
                for k in range(n3):
                    out[i, j, k] = x[nxt, j, k] - x[i, j, k]
    elif axis == 1:
        for i in range(n1):
            for j in range(n2):
                nxt = j + 1 if j + 1 < n2 else 0
                for k in range(n3):
                    out[i, j, k] = x[i, nxt, k] - x[i, j, k]
    elif axis == 2:
        for i in range(n1):
            for j in range(n2):
                for k in range(n3 - 1):
                    out[i, j, k] = x[i, j, k + 1] - x[i, j, k]
                out[i, j, n3 - 1] = x[i, j, 0] - x[i, j, n3 - 1]
    else:
        raise ValueError("axis must be 0, 1 or 2")
    return out_arr


def adjoint_diff(const double[:, :, ::1] y, int axis):
    """out[i] = y[i-1 mod n] - y[i]; the transpose of forward_diff."""
    cdef Py_ssize_t n1 = y.shape[0], n2 = y.shape[1], n3 = y.shape[2]
    out_arr = np.empty((n1, n2, n3), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t i, j, k, prv
    if axis == 0:
        for i in range(n1):
            prv = i - 1 if i > 0 else n1 - 1
            for j in range(n2):
                for k in range(n3):
                    out[i, j, k] = y[prv, j, k] - y[i, j, k]
    elif axis == 1:
        for i in range(n1):
            for j in range(n2):
                prv = j - 1 if j > 0 else n2 - 1
                for k in range(n3):
                    out[i, j, k] = y[i, prv, k] - y[i, j, k]
    elif axis == 2:
        for i in range(n1):
            for j in range(n2):
                out[i, j, 0] = y[i, j, n3 - 1] - y[i, j, 0]
                for k in range(1, n3):
                    out[i, j, k] = y[i, j, k - 1] - y[i, j, k]
    else:
        raise ValueError("axis must be 0, 1 or 2")
    return out_arr


def l1_threshold(double[::1] buf, double radius):
    """Return theta >= 0 with sum(max(buf - theta, 0)) == radius.

    buf holds the magnitudes and is partitioned in place (scratch space).
    The caller guarantees 0 < radius < sum(buf).  Median-of-three pivots
    with a three-way partition keep the expected work linear and the
    result independent of the initial element order up to roundoff.
    """
    cdef Py_ssize_t lo = 0, hi = buf.shape[0]
    cdef double s = 0.0
    cdef Py_ssize_t rho = 0
    cdef double p, a, b, c, tmp, sum_gt, sum_eq
    cdef Py_ssize_t i, lt, gt, cnt_gt, cnt_eq

    while hi > lo:
        # median-of-three pivot from the active range
        a = buf[lo]
        b = buf[(lo + hi - 1) // 2]
        c = buf[hi - 1]
        if a > b:
            tmp = a; a = b; b = tmp
        if b > c:
            b = c if a <= c else a
        p = b

        # three-way partition: [lo, lt) < p, [lt, gt) == p, [gt, hi) > p
        i = lo
        lt = lo
        gt = hi
        while i < gt:
            if buf[i] < p:
                tmp = buf[i]; buf[i] = buf[lt]; buf[lt] = tmp
                lt += 1
                i += 1
            elif buf[i] > p:
                gt -= 1
                tmp = buf[i]; buf[i] = buf[gt]; buf[gt] = tmp
            else:
                i += 1

        sum_gt = 0.0
        for i in range(gt, hi):
            sum_gt += buf[i]
        cnt_gt = hi - gt
        cnt_eq = gt - lt
        sum_eq = p * cnt_eq

        if s + sum_gt - (rho + cnt_gt) * p < radius:
            # theta < p: entries >= p all lie strictly above theta
            s += sum_gt + sum_eq
            rho += cnt_gt + cnt_eq
            hi = lt
        else:
            # theta >= p: entries <= p contribute nothing
            lo = gt

    return (s - radius) / rho
