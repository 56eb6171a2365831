"""Uniform linear array layout.

All lengths are in wavelengths, so every quantity in the package is
frequency independent.  A carrier frequency only matters when labels in
meters are wanted (see :func:`wavelength_m`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299792458.0


class GeometryError(ValueError):
    """Raised for degenerate arrays or positions on top of an antenna."""


@dataclass(frozen=True)
class ArrayGeometry:
    """Line array of ``n_antennas`` elements spaced ``spacing`` apart.

    The array is centered at ``center`` and oriented along the unit vector
    ``axis``; the default is a vertical (y-axis) array at the origin with
    half-wavelength spacing.
    """

    n_antennas: int
    spacing: float = 0.5
    axis: tuple[float, float] = (0.0, 1.0)
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if int(self.n_antennas) != self.n_antennas or self.n_antennas < 1:
            raise GeometryError(f"n_antennas must be a positive integer, got {self.n_antennas}")
        if not self.spacing > 0:
            raise GeometryError(f"spacing must be positive, got {self.spacing}")
        norm = float(np.hypot(*self.axis))
        if not norm > 0:
            raise GeometryError("axis must be a non-zero vector")
        object.__setattr__(self, "n_antennas", int(self.n_antennas))
        object.__setattr__(self, "axis", (self.axis[0] / norm, self.axis[1] / norm))
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def aperture(self) -> float:
        """Physical length ``(N - 1) * spacing`` in wavelengths."""
        return (self.n_antennas - 1) * self.spacing


def antenna_positions(geom: ArrayGeometry) -> np.ndarray:
    """Return the ``(N, 2)`` array of element positions, ordered along ``axis``."""
    offsets = (np.arange(geom.n_antennas) - (geom.n_antennas - 1) / 2.0) * geom.spacing
    center = np.asarray(geom.center)
    axis = np.asarray(geom.axis)
    return center[None, :] + offsets[:, None] * axis[None, :]


def fraunhofer_distance(geom: ArrayGeometry) -> float:
    """Far-field boundary ``2 D^2 / lambda`` in wavelengths."""
    if geom.n_antennas < 2:
        raise GeometryError("Fraunhofer distance is undefined for a single element")
    return 2.0 * geom.aperture**2


def nearest_antenna_distance(geom: ArrayGeometry, points) -> np.ndarray:
    """Distance from each point to its closest antenna element.

    Uses the regular layout, so the cost is O(len(points)) rather than
    O(N * len(points)).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    rel = pts - np.asarray(geom.center)[None, :]
    axis = np.asarray(geom.axis)
    along = rel @ axis
    start = -(geom.n_antennas - 1) / 2.0 * geom.spacing
    idx = np.clip(np.rint((along - start) / geom.spacing), 0, geom.n_antennas - 1)
    nearest = start + idx * geom.spacing
    return np.hypot(along - nearest, rel @ np.array([-axis[1], axis[0]]))


def wavelength_m(carrier_ghz: float) -> float:
    return SPEED_OF_LIGHT / (carrier_ghz * 1e9)
