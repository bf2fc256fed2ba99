# cython: boundscheck=False, wraparound=False, cdivision=True
"""BLAS-backed training kernels for the two-layer MLP.

Same contracts as eqlab._pykernels; GEMMs go through scipy's exported
cython_blas, elementwise work is fused into single C loops to avoid
the temporaries the NumPy fallback allocates every step.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()

BACKEND = "c"


cdef void _gemm_xwt(double[:, ::1] X, double[:, ::1] W, double[:, ::1] H) noexcept:
    # H (N, m) row-major = X (N, D) @ W(m, D)^T, phrased column-major.
    cdef int n = X.shape[0], d = X.shape[1], m = W.shape[0]
    cdef double one = 1.0, zero = 0.0
    dgemm("T", "N", &m, &n, &d, &one, &W[0, 0], &d, &X[0, 0], &d, &zero, &H[0, 0], &m)


cdef void _gemm_gtx(double[:, ::1] G, double[:, ::1] X, double[:, ::1] dW) noexcept:
    # dW (m, D) row-major = G(N, m)^T @ X (N, D), phrased column-major.
    cdef int n = X.shape[0], d = X.shape[1], m = G.shape[1]
    cdef double one = 1.0, zero = 0.0
    dgemm("N", "T", &d, &m, &n, &one, &X[0, 0], &d, &G[0, 0], &m, &zero, &dW[0, 0], &d)


def forward_centered_batch(double[::1] a, double[:, ::1] W,
                           double[::1] a0, double[:, ::1] W0,
                           double[:, ::1] X, double pref):
    cdef int n = X.shape[0], m = W.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] H = np.empty((n, m))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] H0 = np.empty((n, m))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] f = np.empty(n)
    cdef double[:, ::1] Hv = H, H0v = H0
    cdef double[::1] fv = f
    cdef int i, j
    cdef double acc

    _gemm_xwt(X, W, Hv)
    _gemm_xwt(X, W0, H0v)
    for i in range(n):
        acc = 0.0
        for j in range(m):
            if Hv[i, j] > 0.0:
                acc += a[j] * Hv[i, j]
            if H0v[i, j] > 0.0:
                acc -= a0[j] * H0v[i, j]
        fv[i] = pref * acc
    return f


def sgd_step_inplace(double[::1] a, double[:, ::1] W,
                     double[::1] a0, double[:, ::1] W0,
                     double[:, ::1] X, double[::1] y,
                     double pref, double lr):
    cdef int n = X.shape[0], m = W.shape[0], d = X.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] H = np.empty((n, m))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] H0 = np.empty((n, m))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dW = np.empty((m, d))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] da = np.zeros(m)
    cdef double[:, ::1] Hv = H, H0v = H0, dWv = dW
    cdef double[::1] dav = da
    cdef int i, j
    cdef double acc, f, g, scale = pref / n

    _gemm_xwt(X, W, Hv)
    _gemm_xwt(X, W0, H0v)
    for i in range(n):
        acc = 0.0
        for j in range(m):
            if Hv[i, j] > 0.0:
                acc += a[j] * Hv[i, j]
            if H0v[i, j] > 0.0:
                acc -= a0[j] * H0v[i, j]
        f = pref * acc
        if f >= 0.0:
            g = 1.0 / (1.0 + exp(-f)) - y[i]
        else:
            g = exp(f) / (1.0 + exp(f)) - y[i]
        # overwrite H row with G[i, j] = g_i * 1{H_ij > 0} * a_j; accumulate da
        for j in range(m):
            if Hv[i, j] > 0.0:
                dav[j] += scale * Hv[i, j] * g
                Hv[i, j] = g * a[j]
            else:
                Hv[i, j] = 0.0
    _gemm_gtx(Hv, X, dWv)
    for j in range(m):
        a[j] -= lr * dav[j]
        for i in range(d):
            W[j, i] -= lr * scale * dWv[j, i]
