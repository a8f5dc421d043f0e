"""Clustering observables of a density field."""
from __future__ import annotations

import numpy as np

from .grid import DensityField

__all__ = ["peak_height", "second_moment"]


def peak_height(field: DensityField) -> float:
    return float(np.max(field.values))


def second_moment(field: DensityField) -> float:
    """sum_i x_i^2 rho_i dx about the domain centre x = 0."""
    x = field.grid.centers
    return float(np.sum(x * x * field.values) * field.grid.dx)
