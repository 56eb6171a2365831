"""Near-field steering vectors and received power.

Steering vectors use the exact spherical-wave model with unit norm:
entry ``n`` of ``a(r)`` is ``exp(-j 2 pi |r - x_n|) / sqrt(N)`` with
lengths in wavelengths.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .geometry import ArrayGeometry, GeometryError, antenna_positions, nearest_antenna_distance

#: Distance below which a position is considered on top of an antenna.
COINCIDENCE_TOL = 1e-9

#: dB value reported for zero power so CSV output stays finite.
DB_FLOOR = -400.0


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, 2)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"points must have shape (Q, 2), got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    return np.ascontiguousarray(pts)


def _check_clear(geom: ArrayGeometry, pts: np.ndarray) -> None:
    dist = nearest_antenna_distance(geom, pts)
    bad = np.flatnonzero(dist <= COINCIDENCE_TOL)
    if bad.size:
        raise GeometryError(
            f"position {pts[bad[0]].tolist()} (index {bad[0]}) coincides with an antenna"
        )


def steering_vector(geom: ArrayGeometry, r) -> np.ndarray:
    """Unit-norm steering vector of length N for position ``r``."""
    return steering_matrix(geom, _as_points(r))[:, 0]


def steering_matrix(geom: ArrayGeometry, points) -> np.ndarray:
    """Stack steering vectors of ``points`` as the columns of an N x Q matrix."""
    pts = _as_points(points)
    _check_clear(geom, pts)
    return kernels.steering_matrix(np.ascontiguousarray(antenna_positions(geom)), pts)


def received_power(w, a) -> float:
    """``|w^H a|^2``."""
    w = np.asarray(w)
    a = np.asarray(a)
    if w.shape != a.shape:
        raise ValueError(f"dimension mismatch: w {w.shape} vs a {a.shape}")
    return float(abs(np.vdot(w, a)) ** 2)


def to_db(power) -> np.ndarray:
    """10 log10 of power relative to MRT, floored at :data:`DB_FLOOR`."""
    p = np.asarray(power, dtype=float)
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(p)
    return np.maximum(out, DB_FLOOR)


def pattern_power(w, geom: ArrayGeometry, points) -> np.ndarray:
    """Linear power ``|w^H a(r)|^2`` at each point, without forming A."""
    pts = _as_points(points)
    _check_clear(geom, pts)
    w = np.asarray(w, dtype=np.complex128)
    if w.shape != (geom.n_antennas,):
        raise ValueError(f"w must have length {geom.n_antennas}")
    return kernels.pattern_power(w, np.ascontiguousarray(antenna_positions(geom)), pts)


def pattern_power_grid(w, geom: ArrayGeometry, xs, ys) -> np.ndarray:
    """Linear power on the tensor grid ``xs x ys``; result has shape (len(xs), len(ys))."""
    xs = np.ascontiguousarray(xs, dtype=float)
    ys = np.ascontiguousarray(ys, dtype=float)
    w = np.asarray(w, dtype=np.complex128)
    if w.shape != (geom.n_antennas,):
        raise ValueError(f"w must have length {geom.n_antennas}")
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    _check_clear(geom, np.column_stack([X.ravel(), Y.ravel()]))
    return kernels.pattern_power_grid(w, np.ascontiguousarray(antenna_positions(geom)), xs, ys)


def beam_pattern(w, geom: ArrayGeometry, points) -> np.ndarray:
    """Beam pattern in dB relative to MRT (0 dB for unit-norm steering)."""
    return to_db(pattern_power(w, geom, points))
