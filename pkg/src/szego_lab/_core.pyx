# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the truncated cubic Szego flow.

Same signatures as :mod:`szego_lab._fallback`. Only the direct (convolution)
nonlinearity is compiled; the FFT path stays in numpy.
"""
import numpy as np

from libc.math cimport isfinite


cdef inline void _cubic(const double complex[::1] u, double[:, ::1] work,
                        double complex[::1] out) noexcept nogil:
    # Real and imaginary parts are kept in separate rows so the inner
    # reductions are plain double dot products the compiler can vectorize.
    # work rows: 0,1 = re/im of u; 2,3 = re/im of |u|^2 modes -n..n, reversed
    cdef Py_ssize_t n = u.shape[0] - 1
    cdef Py_ssize_t d, j, k, m
    cdef double sr, si, ar, ai
    cdef double* ur = &work[0, 0]
    cdef double* ui = &work[1, 0]
    cdef double* rr = &work[2, 0]
    cdef double* ri = &work[3, 0]
    for k in range(n + 1):
        ur[k] = u[k].real
        ui[k] = u[k].imag
    # modes of |u|^2: A(d) = sum_j u[j + d] conj(u[j]), A(-d) = conj(A(d)),
    # stored at index n - d so the second pass runs forward in memory
    for d in range(n + 1):
        sr = 0.0
        si = 0.0
        for j in range(n + 1 - d):
            sr = sr + ur[j + d] * ur[j] + ui[j + d] * ui[j]
            si = si + ui[j + d] * ur[j] - ur[j + d] * ui[j]
        rr[n - d] = sr
        ri[n - d] = si
        rr[n + d] = sr
        ri[n + d] = -si
    # out[k] = sum_m u[m] A(k - m), and A(k - m) sits at index n - k + m
    for k in range(n + 1):
        sr = 0.0
        si = 0.0
        for m in range(n + 1):
            ar = rr[n - k + m]
            ai = ri[n - k + m]
            sr = sr + ur[m] * ar - ui[m] * ai
            si = si + ur[m] * ai + ui[m] * ar
        out[k] = sr + 1j * si


def cubic_direct(u):
    """Coefficients 0..N of |u|^2 u by exact convolution."""
    cdef const double complex[::1] uv = np.ascontiguousarray(u, dtype=np.complex128)
    cdef Py_ssize_t n = uv.shape[0] - 1
    cdef double[:, ::1] work = np.empty((4, 2 * n + 1))
    out = np.empty(n + 1, dtype=np.complex128)
    _cubic(uv, work, out)
    return out


cdef inline bint _finite(const double complex[::1] u) noexcept nogil:
    cdef Py_ssize_t k
    for k in range(u.shape[0]):
        if not (isfinite(u[k].real) and isfinite(u[k].imag)):
            return False
    return True


def rk4_direct(u, double dt, Py_ssize_t nsteps):
    """Advance ``u`` by ``nsteps`` RK4 steps of du/dt = -i P(|u|^2 u).

    Returns ``(state, bad)`` where ``bad`` is the 1-based index (within this
    call) of the first step producing a non-finite state, or 0.
    """
    cdef double complex[::1] y = np.array(u, dtype=np.complex128, copy=True)
    cdef Py_ssize_t n = y.shape[0] - 1
    cdef Py_ssize_t step, k
    cdef double[:, ::1] work = np.empty((4, 2 * n + 1))
    cdef double complex[::1] k1 = np.empty(n + 1, dtype=np.complex128)
    cdef double complex[::1] k2 = np.empty(n + 1, dtype=np.complex128)
    cdef double complex[::1] k3 = np.empty(n + 1, dtype=np.complex128)
    cdef double complex[::1] k4 = np.empty(n + 1, dtype=np.complex128)
    cdef double complex[::1] tmp = np.empty(n + 1, dtype=np.complex128)
    cdef double complex mi = -1j
    cdef double h2 = 0.5 * dt
    cdef double h6 = dt / 6.0
    cdef Py_ssize_t bad = 0
    with nogil:
        for step in range(nsteps):
            _cubic(y, work, k1)
            for k in range(n + 1):
                k1[k] = mi * k1[k]
                tmp[k] = y[k] + h2 * k1[k]
            _cubic(tmp, work, k2)
            for k in range(n + 1):
                k2[k] = mi * k2[k]
                tmp[k] = y[k] + h2 * k2[k]
            _cubic(tmp, work, k3)
            for k in range(n + 1):
                k3[k] = mi * k3[k]
                tmp[k] = y[k] + dt * k3[k]
            _cubic(tmp, work, k4)
            for k in range(n + 1):
                k4[k] = mi * k4[k]
                y[k] = y[k] + h6 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k])
            if not _finite(y):
                bad = step + 1
                break
    return np.asarray(y), bad
