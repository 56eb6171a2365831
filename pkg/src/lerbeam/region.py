"""Rectangular low exposure region and its sampling grids."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RectRegion:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"empty region {self}")

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def contains(self, points, tol: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return (
            (pts[:, 0] >= self.x_min - tol) & (pts[:, 0] <= self.x_max + tol)
            & (pts[:, 1] >= self.y_min - tol) & (pts[:, 1] <= self.y_max + tol)
        )


def axis_samples(lo: float, hi: float, step: float) -> np.ndarray:
    """Endpoint-inclusive samples ``lo + i * step`` for ``i = 0 .. floor((hi - lo) / step)``.

    The count carries a small relative slack so that spans which are an
    integer number of steps (500 / 0.25, say) are not lost to rounding.
    """
    count = math.floor((hi - lo) / step * (1 + 1e-12)) + 1
    return np.minimum(lo + step * np.arange(count), hi)


@dataclass(frozen=True)
class SampledRegion:
    region: RectRegion
    step: float
    xs: np.ndarray
    ys: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return (self.xs.size, self.ys.size)

    @property
    def n_points(self) -> int:
        return self.xs.size * self.ys.size

    @property
    def points(self) -> np.ndarray:
        """(Q, 2) array in row-major order: y varies fastest."""
        X, Y = np.meshgrid(self.xs, self.ys, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])


def sample_region(region: RectRegion, step: float) -> SampledRegion:
    if not step > 0:
        raise ValueError(f"sampling step must be positive, got {step}")
    side = min(region.x_max - region.x_min, region.y_max - region.y_min)
    if step > side * (1 + 1e-12):
        raise ValueError(f"sampling step {step} exceeds the region side {side}")
    return SampledRegion(
        region=region,
        step=float(step),
        xs=axis_samples(region.x_min, region.x_max, step),
        ys=axis_samples(region.y_min, region.y_max, step),
    )


def default_scenario_region() -> RectRegion:
    """500 x 500 wavelength square starting 2000 wavelengths from the array."""
    return RectRegion(2000.0, 2500.0, 0.0, 500.0)
