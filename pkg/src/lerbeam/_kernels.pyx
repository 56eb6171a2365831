# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled field kernels.

Same signatures and semantics as ``lerbeam._kernels_py``.  Every output
element is computed by one thread with a fixed summation order, so results
do not depend on the thread count.
"""

import numpy as np
from cython.parallel cimport prange
from libc.math cimport sqrt, floor, sin, cos
cimport openmp

cdef double TWO_PI = 6.283185307179586


cdef inline void _steering_row(const double* px, const double* py, Py_ssize_t n_pts,
                               double ax, double ay, double scale, double* out) noexcept nogil:
    cdef Py_ssize_t q
    cdef double dx, dy, d, f
    for q in range(n_pts):
        dx = px[q] - ax
        dy = py[q] - ay
        d = sqrt(dx * dx + dy * dy)
        f = d - floor(d)
        out[2 * q] = scale * cos(TWO_PI * f)
        out[2 * q + 1] = -scale * cos(TWO_PI * (f - 0.25))


# padding unit for the point loop: every point then goes through the SIMD
# body, never the scalar remainder, so a column does not depend on Q
cdef Py_ssize_t _PAD = 16


def steering_matrix(const double[:, ::1] antennas, const double[:, ::1] points):
    cdef Py_ssize_t n_ant = antennas.shape[0]
    cdef Py_ssize_t n_pts = points.shape[0]
    cdef Py_ssize_t n_pad = ((n_pts + _PAD - 1) // _PAD) * _PAD
    out = np.empty((n_ant, n_pad), dtype=np.complex128)
    if n_pts == 0:
        return out[:, :0]
    cdef double[:, ::1] o = out.view(np.float64)
    px_arr = np.empty(n_pad)
    py_arr = np.empty(n_pad)
    px_arr[:n_pts] = points[:, 0]
    py_arr[:n_pts] = points[:, 1]
    px_arr[n_pts:] = points[n_pts - 1, 0]
    py_arr[n_pts:] = points[n_pts - 1, 1]
    cdef const double[::1] px = px_arr
    cdef const double[::1] py = py_arr
    cdef double scale = 1.0 / sqrt(<double>n_ant)
    cdef Py_ssize_t n
    for n in prange(n_ant, nogil=True, schedule="static"):
        _steering_row(&px[0], &py[0], n_pad, antennas[n, 0], antennas[n, 1], scale, &o[n, 0])
    return out if n_pad == n_pts else np.ascontiguousarray(out[:, :n_pts])


cdef inline double _power_at(const double* wr, const double* wi,
                             const double* ax, const double* ay, Py_ssize_t n_ant,
                             double px, double py) noexcept nogil:
    cdef Py_ssize_t n
    cdef double re = 0.0
    cdef double im = 0.0
    cdef double dx, dy, d, f, c, s
    for n in range(n_ant):
        dx = px - ax[n]
        dy = py - ay[n]
        d = sqrt(dx * dx + dy * dy)
        f = d - floor(d)
        c = cos(TWO_PI * f)
        # sin via shifted cos: a sin/cos pair is fused into sincos, which
        # has no SIMD variant and blocks vectorization
        s = cos(TWO_PI * (f - 0.25))
        # conj(w_n) * exp(-j ph)
        re = re + wr[n] * c - wi[n] * s
        im = im - wr[n] * s - wi[n] * c
    return (re * re + im * im) / n_ant


def pattern_power(w, const double[:, ::1] antennas, const double[:, ::1] points):
    cdef const double[::1] wr = np.ascontiguousarray(np.real(w), dtype=np.float64)
    cdef const double[::1] wi = np.ascontiguousarray(np.imag(w), dtype=np.float64)
    cdef const double[::1] ax = np.ascontiguousarray(antennas[:, 0])
    cdef const double[::1] ay = np.ascontiguousarray(antennas[:, 1])
    cdef Py_ssize_t n_pts = points.shape[0]
    out = np.empty(n_pts, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t p
    for p in prange(n_pts, nogil=True, schedule="static"):
        o[p] = _power_at(&wr[0], &wi[0], &ax[0], &ay[0], wr.shape[0], points[p, 0], points[p, 1])
    return out


def pattern_power_grid(w, const double[:, ::1] antennas,
                       const double[::1] xs, const double[::1] ys):
    cdef const double[::1] wr = np.ascontiguousarray(np.real(w), dtype=np.float64)
    cdef const double[::1] wi = np.ascontiguousarray(np.imag(w), dtype=np.float64)
    cdef const double[::1] ax = np.ascontiguousarray(antennas[:, 0])
    cdef const double[::1] ay = np.ascontiguousarray(antennas[:, 1])
    cdef Py_ssize_t nx = xs.shape[0]
    cdef Py_ssize_t ny = ys.shape[0]
    out = np.empty((nx, ny), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t p
    for p in prange(nx * ny, nogil=True, schedule="static"):
        o[p // ny, p % ny] = _power_at(&wr[0], &wi[0], &ax[0], &ay[0], wr.shape[0],
                                       xs[p // ny], ys[p % ny])
    return out


def set_num_threads(int n):
    openmp.omp_set_num_threads(max(n, 1))


def get_num_threads():
    return openmp.omp_get_max_threads()
