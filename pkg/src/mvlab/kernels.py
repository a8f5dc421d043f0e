"""Pair potentials, their periodic tabulation, and circular convolution."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import InvalidConfigurationError
from .grid import DensityField, TorusGrid

__all__ = [
    "Morse",
    "HegselmannKrause",
    "InteractionKernel",
    "KernelTable",
    "evaluate_free",
    "kernel_gradient_free",
    "periodize_on_grid",
    "convolve",
    "convolve_direct",
    "morse_fourier_closed_form",
    "DEFAULT_MORSE",
]


@dataclass(frozen=True)
class Morse:
    """U(x) = -C_a exp(-|x|/l_a) + C_r exp(-|x|/l_r)."""

    C_a: float
    C_r: float
    l_a: float
    l_r: float

    def __post_init__(self):
        for name in ("C_a", "C_r", "l_a", "l_r"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise InvalidConfigurationError(f"Morse.{name} must be positive, got {v!r}")

    def __call__(self, x):
        ax = np.abs(x)
        return -self.C_a * np.exp(-ax / self.l_a) + self.C_r * np.exp(-ax / self.l_r)

    def gradient(self, x):
        ax = np.abs(x)
        mag = self.C_a / self.l_a * np.exp(-ax / self.l_a) - self.C_r / self.l_r * np.exp(-ax / self.l_r)
        # np.sign(0) == 0 gives the zero self-force convention
        return np.sign(x) * mag

    def image_count(self, L: float, tol: float, derivative: bool = False) -> int:
        """Smallest K such that images with |n| > K contribute less than ``tol``."""
        K = 0
        while True:
            dist = (K + 0.5) * L
            tail = 0.0
            for C, ell in ((self.C_a, self.l_a), (self.C_r, self.l_r)):
                amp = C / ell if derivative else C
                tail += 2.0 * amp * math.exp(-dist / ell) / (1.0 - math.exp(-L / ell))
            if tail < tol:
                return K
            K += 1


@dataclass(frozen=True)
class HegselmannKrause:
    """Truncated quadratic U(x) = (x^2 - 1)/2 for |x| <= R_0, else 0."""

    R_0: float

    def __post_init__(self):
        if not (np.isfinite(self.R_0) and self.R_0 > 0):
            raise InvalidConfigurationError(f"HegselmannKrause.R_0 must be positive, got {self.R_0!r}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(np.abs(x) <= self.R_0, 0.5 * (x * x - 1.0), 0.0)
        return float(out) if out.ndim == 0 else out

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        # |x| == R_0 takes the interior value
        out = np.where(np.abs(x) <= self.R_0, x, 0.0)
        return float(out) if out.ndim == 0 else out

    def image_count(self, L: float, tol: float, derivative: bool = False) -> int:
        return 0


InteractionKernel = Union[Morse, HegselmannKrause]

#: Locally attractive Morse parameters used throughout the reference experiments (L = 5).
DEFAULT_MORSE = Morse(C_a=4.0, C_r=1.0, l_a=0.025 * 5.0, l_r=0.01 * 5.0)


def evaluate_free(kernel: InteractionKernel, x):
    """Non-periodized potential value at displacement ``x``."""
    out = kernel(x)
    return float(out) if np.ndim(out) == 0 else out


def kernel_gradient_free(kernel: InteractionKernel, x):
    """Derivative of the non-periodized potential, with U'(0) = 0."""
    out = kernel.gradient(x)
    return float(out) if np.ndim(out) == 0 else out


def morse_fourier_closed_form(kernel: Morse, L: float, k):
    """Continuum Fourier coefficients of the periodized Morse potential.

    Poisson summation turns the full-line transform into
    ``-2 C_a l_a / (1 + (2 pi k l_a / L)^2) + 2 C_r l_r / (1 + (2 pi k l_r / L)^2)``.
    """
    k = np.asarray(k, dtype=float)
    wa = 2.0 * np.pi * k * kernel.l_a / L
    wr = 2.0 * np.pi * k * kernel.l_r / L
    return -2.0 * kernel.C_a * kernel.l_a / (1.0 + wa**2) + 2.0 * kernel.C_r * kernel.l_r / (1.0 + wr**2)


@dataclass(frozen=True, eq=False)
class KernelTable:
    """Periodized potential sampled at circular grid displacements.

    ``u[j]`` and ``du[j]`` hold U_per and U_per' at displacement
    ``j * dx`` (indices above n/2 stand for negative displacements);
    ``fourier[k]`` is the real part of ``sum_j u_j exp(-2 pi i k j / n) dx``.
    """

    grid: TorusGrid
    u: np.ndarray = field(repr=False)
    du: np.ndarray = field(repr=False)
    fourier: np.ndarray = field(repr=False)
    kernel: InteractionKernel | None = None
    _u_rfft: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("u", "du", "fourier"):
            arr = np.array(getattr(self, name), dtype=float, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "_u_rfft", np.fft.rfft(self.u))

    @classmethod
    def from_values(cls, grid: TorusGrid, u, du=None, kernel=None) -> "KernelTable":
        """Build a table from already-sampled circular values."""
        u = np.asarray(u, dtype=float)
        du = np.zeros_like(u) if du is None else np.asarray(du, dtype=float)
        if u.shape != (grid.n_cells,) or du.shape != (grid.n_cells,):
            raise InvalidConfigurationError("kernel table length does not match the grid")
        fourier = np.fft.fft(u).real * grid.dx
        return cls(grid=grid, u=u, du=du, fourier=fourier, kernel=kernel)

    @property
    def displacements(self) -> np.ndarray:
        return circular_displacements(self.grid)


def circular_displacements(grid: TorusGrid) -> np.ndarray:
    """Signed displacement represented by each circular table index.

    Built from integer offsets so that entries j and n-j are exact negatives.
    """
    n = grid.n_cells
    j = np.arange(n)
    k = np.where(j < n - n // 2, j, j - n)
    if n % 2 == 0:
        k[n // 2] = -(n // 2)
    return k * grid.dx


def periodize_on_grid(
    kernel: InteractionKernel, grid: TorusGrid, image_tol: float = 1e-14
) -> KernelTable:
    """Tabulate the periodic extension of ``kernel`` on ``grid``."""
    if isinstance(kernel, HegselmannKrause) and kernel.R_0 > 0.5 * grid.L:
        raise InvalidConfigurationError(
            f"Hegselmann-Krause radius {kernel.R_0} exceeds half the domain {0.5 * grid.L}"
        )
    d = circular_displacements(grid)
    L = grid.L
    u = np.zeros_like(d)
    du = np.zeros_like(d)
    K = kernel.image_count(L, image_tol)
    Kd = kernel.image_count(L, image_tol, derivative=True)
    u += kernel(d)
    du += kernel.gradient(d)
    for m in range(1, K + 1):
        u += kernel(d + m * L) + kernel(d - m * L)
    for m in range(1, Kd + 1):
        du += kernel.gradient(d + m * L) + kernel.gradient(d - m * L)
    du[0] = 0.0
    return KernelTable.from_values(grid, u, du, kernel=kernel)


def convolve(table: KernelTable, field: DensityField, method: str = "fft") -> np.ndarray:
    """Circular convolution (U * rho)_i = sum_j u_{(i-j) mod n} rho_j dx.

    ``method="fft"`` (default) uses the cached real FFT of the table;
    ``method="direct"`` runs the O(n^2) sum.
    """
    table.grid.check_compatible(field.grid)
    if method == "fft":
        return _convolve_fft(table, field.values)
    if method == "direct":
        return convolve_direct(table, field)
    raise InvalidConfigurationError(f"unknown convolution method {method!r}")


def _convolve_fft(table: KernelTable, rho: np.ndarray) -> np.ndarray:
    # U is even, so conv(rho) == R conv(R rho) with R the cell reflection.
    # Averaging the two FFT evaluations makes the rounded result commute
    # with R exactly; otherwise odd round-off is amplified by the
    # aggregation instability and mirror-symmetric data drifts apart.
    n = table.grid.n_cells
    both = np.fft.irfft(table._u_rfft * np.fft.rfft(np.stack((rho, rho[::-1])), axis=1), n, axis=1)
    return 0.5 * (both[0] + both[1][::-1]) * table.grid.dx


def convolve_direct(table: KernelTable, field: DensityField) -> np.ndarray:
    table.grid.check_compatible(field.grid)
    n = table.grid.n_cells
    idx = np.arange(n)
    circulant = table.u[(idx[:, None] - idx[None, :]) % n]
    return circulant @ field.values * table.grid.dx
