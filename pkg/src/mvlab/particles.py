"""Euler-Maruyama simulation of the interacting particle system on the torus.

Each particle follows

    dX_i = -(1/N) sum_j U'(X_i - X_j) dt + sigma dW_i,

with displacements taken in the minimum-image convention and U'(0) = 0.

Random numbers come from :class:`numpy.random.SeedSequence` children keyed
by ``(seed, purpose, step)``, so a trajectory depends only on the seed and
the step index, never on how the work is scheduled.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import IncompatibleGridsError, InvalidConfigurationError
from .grid import DensityField, TorusGrid, wrap_displacement
from .kernels import HegselmannKrause, InteractionKernel, Morse

__all__ = [
    "ParticleEnsemble",
    "ParticleTrajectory",
    "sample_from_density",
    "pair_forces",
    "pair_forces_direct",
    "em_step",
    "empirical_histogram",
    "empirical_second_moment",
    "evolve_particles",
]

_SAMPLE_KEY = 0
_NOISE_KEY = 1
_DIRECT_MAX_N = 256


@dataclass(frozen=True, eq=False)
class ParticleEnsemble:
    """Particle positions in [-L/2, L/2) at time ``t``.

    ``step_index`` counts Euler-Maruyama steps taken so far and selects the
    noise stream for the next one.
    """

    positions: np.ndarray = field(repr=False)
    L: float
    seed: int
    t: float = 0.0
    step_index: int = 0

    def __post_init__(self):
        x = np.array(self.positions, dtype=float, copy=True).reshape(-1)
        if x.size and (np.any(x < -0.5 * self.L) or np.any(x >= 0.5 * self.L)):
            raise InvalidConfigurationError("particle positions must lie in [-L/2, L/2)")
        x.setflags(write=False)
        object.__setattr__(self, "positions", x)

    @property
    def N(self) -> int:
        return self.positions.size

    def shifted(self, c: float) -> "ParticleEnsemble":
        return ParticleEnsemble(
            wrap_displacement(self.L, self.positions + c), self.L, self.seed, self.t, self.step_index
        )


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(key)))


def sample_from_density(field: DensityField, N: int, seed: int) -> ParticleEnsemble:
    """Draw ``N`` positions from the piecewise-constant density ``field``.

    A cell is chosen by inverse transform of the cumulative cell masses and
    the position is uniform inside that cell.
    """
    if int(N) != N or N < 1:
        raise InvalidConfigurationError(f"N must be a positive integer, got {N!r}")
    grid = field.grid
    rng = _rng(seed, _SAMPLE_KEY)
    p = field.values * grid.dx
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    u = rng.random(int(N))
    cells = np.minimum(np.searchsorted(cdf, u, side="right"), grid.n_cells - 1)
    left = -0.5 * grid.L + cells * grid.dx
    x = left + rng.random(int(N)) * grid.dx
    x = np.where(x >= 0.5 * grid.L, x - grid.L, x)
    return ParticleEnsemble(x, grid.L, int(seed))


def pair_forces_direct(positions: np.ndarray, kernel: InteractionKernel, L: float) -> np.ndarray:
    """sum_j U'(wrap(x_i - x_j)) by explicit O(N^2) summation."""
    x = np.asarray(positions, dtype=float)
    out = np.empty_like(x)
    chunk = max(1, 2_000_000 // max(x.size, 1))
    for s in range(0, x.size, chunk):
        d = wrap_displacement(L, x[s : s + chunk, None] - x[None, :])
        out[s : s + chunk] = np.sum(kernel.gradient(d), axis=1)
    return out


@numba.njit(cache=True)
def _exp_window_sums(v, c, half, ell):
    """Windowed exponential sums over sorted group values ``v`` with counts ``c``.

    left[g]  = sum_{h: v_g - half < v_h < v_g} c_h exp(-(v_g - v_h)/ell)
    right[g] = sum_{h: v_g < v_h <= v_g + half} c_h exp(-(v_h - v_g)/ell)
    """
    G = v.shape[0]
    # beyond this distance the subtracted tail is below exp(-50) per particle
    cutoff = 50.0 * ell
    P = np.zeros(G)
    Q = np.zeros(G)
    for g in range(1, G):
        P[g] = np.exp(-(v[g] - v[g - 1]) / ell) * (P[g - 1] + c[g - 1])
    for g in range(G - 2, -1, -1):
        Q[g] = np.exp(-(v[g + 1] - v[g]) / ell) * (Q[g + 1] + c[g + 1])
    left = np.empty(G)
    right = np.empty(G)
    s = -1
    for g in range(G):
        while s + 1 < g and v[g] - v[s + 1] >= half:
            s += 1
        val = P[g]
        if s >= 0 and v[g] - v[s] < cutoff:
            val -= np.exp(-(v[g] - v[s]) / ell) * (P[s] + c[s])
        left[g] = max(val, 0.0)
    e = G
    for g in range(G - 1, -1, -1):
        while e - 1 > g and v[e - 1] - v[g] > half:
            e -= 1
        val = Q[g]
        if e < G and v[e] - v[g] < cutoff:
            val -= np.exp(-(v[e] - v[g]) / ell) * (Q[e] + c[e])
        right[g] = max(val, 0.0)
    return left, right


@numba.njit(cache=True)
def _group_images(y, L):
    """Distinct values of the sorted images of ``y`` inside (-L, L], with counts.

    Every minimum-image window (y_i - L/2, y_i + L/2] lies inside (-L, L],
    so images beyond it never contribute. Also returns, for every entry of
    ``y``, the index of its group.
    """
    N = y.shape[0]
    n_pos = 0
    for k in range(N):
        if y[k] > 0.0:
            n_pos += 1
    n_neg = N - n_pos
    M = n_pos + N + n_neg
    ext = np.empty(M)
    ext[:n_pos] = y[n_neg:] - L
    ext[n_pos : n_pos + N] = y
    ext[n_pos + N :] = y[:n_neg] + L
    v = np.empty(M)
    c = np.zeros(M)
    own = np.empty(N, dtype=np.int64)
    G = -1
    for k in range(M):
        if G < 0 or ext[k] != v[G]:
            G += 1
            v[G] = ext[k]
        c[G] += 1.0
        if n_pos <= k < n_pos + N:
            own[k - n_pos] = G
    return v[: G + 1], c[: G + 1], own


def _morse_forces(x: np.ndarray, kernel: Morse, L: float) -> np.ndarray:
    order = np.argsort(x)
    v, counts, own = _group_images(x[order], L)
    total = np.zeros(v.size)
    for C, ell in ((kernel.C_a / kernel.l_a, kernel.l_a), (-kernel.C_r / kernel.l_r, kernel.l_r)):
        left, right = _exp_window_sums(v, counts, 0.5 * L, ell)
        # particles to the left have positive displacement x_i - x_j
        total += C * (left - right)
    out = np.empty_like(x)
    out[order] = total[own]
    return out


def _hk_forces(x: np.ndarray, kernel: HegselmannKrause, L: float) -> np.ndarray:
    R = kernel.R_0
    order = np.argsort(x, kind="stable")
    y = x[order]
    ext = np.concatenate((y - L, y, y + L))
    csum = np.concatenate(([0.0], np.cumsum(ext)))
    # minimum-image window (y - L/2, y + L/2] intersected with |d| <= R
    lo_edge = np.maximum(y - R, np.nextafter(y - 0.5 * L, np.inf))
    hi_edge = np.minimum(y + R, y + 0.5 * L)
    lo = np.searchsorted(ext, lo_edge, side="left")
    hi = np.searchsorted(ext, hi_edge, side="right")
    count = hi - lo
    total = count * y - (csum[hi] - csum[lo])
    out = np.empty_like(x)
    out[order] = total
    return out


def pair_forces(positions, kernel: InteractionKernel, L: float, method: str = "auto") -> np.ndarray:
    """sum_j U'(wrap(x_i - x_j)) for every particle.

    ``method="fast"`` uses sorted window sums (exponential recursions for
    Morse, prefix sums for Hegselmann-Krause) in O(N log N);
    ``"direct"`` uses the O(N^2) reference; ``"auto"`` picks direct for
    small ensembles.
    """
    x = np.asarray(positions, dtype=float)
    if method == "auto":
        method = "direct" if x.size <= _DIRECT_MAX_N else "fast"
    if method == "direct":
        return pair_forces_direct(x, kernel, L)
    if method != "fast":
        raise InvalidConfigurationError(f"unknown force method {method!r}")
    if isinstance(kernel, Morse):
        return _morse_forces(x, kernel, L)
    if isinstance(kernel, HegselmannKrause):
        if kernel.R_0 > 0.5 * L:
            raise InvalidConfigurationError("Hegselmann-Krause radius exceeds L/2")
        return _hk_forces(x, kernel, L)
    raise InvalidConfigurationError(f"no fast force path for {type(kernel).__name__}")


def em_step(
    ens: ParticleEnsemble,
    kernel: InteractionKernel,
    sigma: float,
    dt: float,
    method: str = "auto",
) -> ParticleEnsemble:
    """One Euler-Maruyama step with mean-field drift and wrapped positions."""
    if not dt > 0:
        raise InvalidConfigurationError(f"dt must be positive, got {dt!r}")
    x = ens.positions
    drift = -pair_forces(x, kernel, ens.L, method) / ens.N
    xi = _rng(ens.seed, _NOISE_KEY, ens.step_index).standard_normal(ens.N)
    new = wrap_displacement(ens.L, x + dt * drift + sigma * np.sqrt(dt) * xi)
    return ParticleEnsemble(new, ens.L, ens.seed, ens.t + dt, ens.step_index + 1)


def empirical_histogram(ens: ParticleEnsemble, grid: TorusGrid) -> DensityField:
    """Counting-measure density: particles per cell divided by N dx."""
    if ens.L != grid.L:
        raise IncompatibleGridsError(f"ensemble domain {ens.L} does not match grid domain {grid.L}")
    cells = np.floor((ens.positions + 0.5 * grid.L) / grid.dx).astype(np.int64)
    cells = np.clip(cells, 0, grid.n_cells - 1)
    counts = np.bincount(cells, minlength=grid.n_cells)
    return DensityField(grid, counts / (ens.N * grid.dx))


def empirical_second_moment(ens: ParticleEnsemble) -> float:
    """(1/N) sum_i X_i^2 about the domain centre."""
    return float(np.mean(ens.positions**2))


@dataclass
class ParticleTrajectory:
    t: np.ndarray
    peak: np.ndarray
    m2: np.ndarray
    final: ParticleEnsemble

    def as_rows(self):
        return list(zip(self.t.tolist(), self.peak.tolist(), self.m2.tolist()))


def evolve_particles(
    ens: ParticleEnsemble,
    kernel: InteractionKernel,
    sigma: float,
    dt: float,
    t_final: float,
    grid: TorusGrid,
    record_stride: int = 1,
    method: str = "auto",
) -> ParticleTrajectory:
    """Repeated :func:`em_step`, recording histogram peak and second moment.

    Observables are recorded at t = 0, every ``record_stride`` steps, and at
    the final step.
    """
    if not t_final > 0:
        raise InvalidConfigurationError(f"t_final must be positive, got {t_final!r}")
    if ens.L != grid.L:
        raise IncompatibleGridsError(f"ensemble domain {ens.L} does not match grid domain {grid.L}")
    n_steps = int(round(t_final / dt))
    ts, peaks, m2s = [], [], []

    def record(e):
        ts.append(e.t)
        peaks.append(float(np.max(empirical_histogram(e, grid).values)))
        m2s.append(empirical_second_moment(e))

    record(ens)
    for k in range(1, n_steps + 1):
        ens = em_step(ens, kernel, sigma, dt, method)
        if k % record_stride == 0 or k == n_steps:
            record(ens)
    return ParticleTrajectory(np.array(ts), np.array(peaks), np.array(m2s), ens)
