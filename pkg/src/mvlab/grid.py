"""Periodic 1-D mesh on [-L/2, L/2) and cell-averaged densities living on it."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import erfc

from .errors import IncompatibleGridsError, InvalidConfigurationError

__all__ = [
    "TorusGrid",
    "DensityField",
    "make_grid",
    "wrap_displacement",
    "periodized_gaussian",
    "mixture",
    "mass",
    "uniform_density",
]


@dataclass(frozen=True, eq=False)
class TorusGrid:
    """Uniform cell-centred grid on the torus [-L/2, L/2).

    Build instances with :func:`make_grid`; the constructor does not
    re-derive ``dx`` or ``centers``.
    """

    L: float
    n_cells: int
    dx: float
    centers: np.ndarray = field(repr=False)

    def __eq__(self, other):
        if not isinstance(other, TorusGrid):
            return NotImplemented
        return self.L == other.L and self.n_cells == other.n_cells

    def __hash__(self):
        return hash((self.L, self.n_cells))

    @property
    def interfaces(self) -> np.ndarray:
        """Right interface x_{i+1/2} of every cell (the last one wraps to -L/2)."""
        return wrap_displacement(self.L, self.centers + 0.5 * self.dx)

    def check_compatible(self, other: "TorusGrid") -> None:
        if self != other:
            raise IncompatibleGridsError(
                f"grid (L={self.L}, n={self.n_cells}) does not match "
                f"grid (L={other.L}, n={other.n_cells})"
            )


@dataclass(frozen=True, eq=False)
class DensityField:
    """Nonnegative cell averages on a :class:`TorusGrid`.

    ``values`` is stored as a read-only float64 copy. Unit mass is a
    property of the constructors in this module, not of the type itself,
    so scaled fields (mass != 1) are representable.
    """

    grid: TorusGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.shape != (self.grid.n_cells,):
            raise InvalidConfigurationError(
                f"density has shape {v.shape}, expected ({self.grid.n_cells},)"
            )
        if not np.all(np.isfinite(v)):
            raise InvalidConfigurationError("density contains non-finite values")
        if np.any(v < 0.0):
            raise InvalidConfigurationError("density contains negative values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.grid.n_cells

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def with_values(self, values) -> "DensityField":
        return DensityField(self.grid, values)


def make_grid(L: float, n_cells: int) -> TorusGrid:
    """Return the uniform grid with ``n_cells`` cells on [-L/2, L/2).

    Centres are computed as ``(i + 1/2 - n/2) * dx`` so that, for even
    ``n_cells``, ``centers[i] == -centers[n-1-i]`` holds bit-for-bit.
    """
    if not (np.isfinite(L) and L > 0):
        raise InvalidConfigurationError(f"L must be positive, got {L!r}")
    if int(n_cells) != n_cells or n_cells < 2:
        raise InvalidConfigurationError(f"n_cells must be an integer >= 2, got {n_cells!r}")
    n_cells = int(n_cells)
    L = float(L)
    dx = L / n_cells
    centers = (np.arange(n_cells) + 0.5 - 0.5 * n_cells) * dx
    centers.setflags(write=False)
    return TorusGrid(L=L, n_cells=n_cells, dx=dx, centers=centers)


def wrap_displacement(L: float, d):
    """Minimum-image representative of ``d`` in [-L/2, L/2).

    Works on scalars and arrays.
    """
    d = np.asarray(d, dtype=float)
    w = d - L * np.floor((d + 0.5 * L) / L)
    # floor() can land one period off when d + L/2 rounds onto a multiple of L
    w = np.where(w >= 0.5 * L, w - L, w)
    w = np.where(w < -0.5 * L, w + L, w)
    return float(w) if w.ndim == 0 else w


def _image_count(L: float, mean: float, std: float, image_tol: float) -> int:
    # mass of N(mean, std) outside [-L/2 - K L, L/2 + K L)
    K = 0
    while True:
        lo = -0.5 * L - K * L
        hi = 0.5 * L + K * L
        tail = 0.5 * erfc((mean - lo) / (std * np.sqrt(2.0))) + 0.5 * erfc(
            (hi - mean) / (std * np.sqrt(2.0))
        )
        if tail < image_tol:
            return K
        K += 1


def _gaussian_images(x: np.ndarray, L: float, mean: float, std: float, K: int) -> np.ndarray:
    norm = 1.0 / (std * np.sqrt(2.0 * np.pi))

    def phi(d):
        return norm * np.exp(-0.5 * (d / std) ** 2)

    d = x - mean
    out = phi(d)
    # pairwise +/- n keeps the sum exactly even in d
    for n in range(1, K + 1):
        out = out + (phi(d + n * L) + phi(d - n * L))
    return out


def periodized_gaussian(
    grid: TorusGrid, mean: float = 0.0, std: float = 0.5, image_tol: float = 1e-12
) -> DensityField:
    """Gaussian N(mean, std^2) wrapped onto the torus and normalised on the grid.

    The density is evaluated at cell centres, summing images ``|n| <= K``
    with ``K`` the smallest count whose omitted tail mass is below
    ``image_tol``; the result is rescaled to unit discrete mass.
    """
    if not std > 0:
        raise InvalidConfigurationError(f"std must be positive, got {std!r}")
    if not image_tol > 0:
        raise InvalidConfigurationError(f"image_tol must be positive, got {image_tol!r}")
    mean = wrap_displacement(grid.L, float(mean))
    K = _image_count(grid.L, mean, std, image_tol)
    rho = _gaussian_images(grid.centers, grid.L, mean, std, K)
    return DensityField(grid, rho / (rho.sum() * grid.dx))


def mixture(
    components: Iterable[Sequence[float]], grid: TorusGrid, image_tol: float = 1e-12
) -> DensityField:
    """Convex combination of periodized Gaussians.

    Parameters
    ----------
    components : iterable of (weight, mean, std)
        Weights must be positive and sum to one within 1e-10.
    grid : TorusGrid
    """
    components = [tuple(float(v) for v in c) for c in components]
    if not components:
        raise InvalidConfigurationError("mixture needs at least one component")
    weights = np.array([c[0] for c in components])
    if np.any(weights <= 0):
        raise InvalidConfigurationError("mixture weights must be positive")
    if abs(weights.sum() - 1.0) > 1e-10:
        raise InvalidConfigurationError(f"mixture weights sum to {weights.sum()!r}, not 1")
    rho = np.zeros(grid.n_cells)
    for w, m, s in components:
        rho = rho + w * periodized_gaussian(grid, m, s, image_tol).values
    return DensityField(grid, rho / (rho.sum() * grid.dx))


def uniform_density(grid: TorusGrid) -> DensityField:
    return DensityField(grid, np.full(grid.n_cells, 1.0 / grid.L))


def mass(field: DensityField) -> float:
    """Discrete mass sum_i rho_i dx."""
    return float(np.sum(field.values) * field.grid.dx)
