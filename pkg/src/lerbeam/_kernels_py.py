"""NumPy implementation of the field kernels (fallback backend)."""

import numpy as np

# points per block; keeps the (N, block) phase matrix around 16 MB for N=1000
_BLOCK = 1024


def _phase_frac(antennas, points):
    dx = points[None, :, 0] - antennas[:, None, 0]
    dy = points[None, :, 1] - antennas[:, None, 1]
    d = np.sqrt(dx * dx + dy * dy)
    return d - np.floor(d)


def steering_matrix(antennas, points):
    antennas = np.asarray(antennas, dtype=float)
    points = np.asarray(points, dtype=float)
    ph = 2.0 * np.pi * _phase_frac(antennas, points)
    out = np.empty(ph.shape, dtype=np.complex128)
    out.real = np.cos(ph)
    out.imag = -np.sin(ph)
    out /= np.sqrt(antennas.shape[0])
    return out


def pattern_power(w, antennas, points):
    antennas = np.asarray(antennas, dtype=float)
    points = np.asarray(points, dtype=float)
    wc = np.conj(np.asarray(w, dtype=np.complex128))
    out = np.empty(points.shape[0])
    for start in range(0, points.shape[0], _BLOCK):
        blk = points[start:start + _BLOCK]
        amp = wc @ steering_matrix(antennas, blk)
        out[start:start + _BLOCK] = amp.real**2 + amp.imag**2
    return out


def pattern_power_grid(w, antennas, xs, ys):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    return pattern_power(w, antennas, pts).reshape(xs.size, ys.size)


def set_num_threads(n):
    """No-op; the NumPy backend threads through BLAS only."""


def get_num_threads():
    return 1
