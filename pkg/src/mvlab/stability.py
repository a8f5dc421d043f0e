"""Linear-stability threshold of the homogeneous state and bisection for sigma_c."""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidBracketError, InvalidConfigurationError
from .grid import DensityField, TorusGrid, periodized_gaussian
from .kernels import InteractionKernel, KernelTable, periodize_on_grid
from .solver import SolverConfig, evolve

__all__ = [
    "FinalState",
    "ProbeVerdict",
    "PhaseBracket",
    "sigma_sharp",
    "unstable_mode",
    "classify_final_state",
    "probe_sigma",
    "estimate_sigma_c",
    "DEFAULT_FLATNESS_TOL",
]

log = logging.getLogger(__name__)

DEFAULT_FLATNESS_TOL = 1e-3


class FinalState(str, enum.Enum):
    HOMOGENEOUS = "Homogeneous"
    CLUSTERED = "Clustered"

    def __str__(self):
        return self.value


def _instability_thresholds(table: KernelTable, L: float, k_max: int) -> np.ndarray:
    n = table.grid.n_cells
    if k_max < 1 or k_max >= n / 2:
        raise InvalidConfigurationError(f"k_max must satisfy 1 <= k_max < n/2, got {k_max}")
    U_hat = table.fourier[1 : k_max + 1]
    return -2.0 * U_hat / L


def sigma_sharp(table: KernelTable, L: float | None = None, k_max: int = 20) -> float:
    """Noise strength below which the uniform density is linearly unstable.

    Linearising about rho = 1/L, the mode exp(2 pi i k x / L) grows at rate
    ``-(2 pi k / L)^2 (sigma^2/2 + U_hat_k / L)``, so it is unstable iff
    ``sigma^2 < -2 U_hat_k / L``. The maximum over ``k = 1..k_max`` is
    returned (0 if no Fourier coefficient is negative).
    """
    L = table.grid.L if L is None else L
    thresholds = _instability_thresholds(table, L, k_max)
    return float(math.sqrt(max(0.0, float(thresholds.max()))))


def unstable_mode(table: KernelTable, L: float | None = None, k_max: int = 20) -> int:
    """Wavenumber k attaining :func:`sigma_sharp` (0 if none is unstable)."""
    L = table.grid.L if L is None else L
    thresholds = _instability_thresholds(table, L, k_max)
    k = int(np.argmax(thresholds))
    return k + 1 if thresholds[k] > 0 else 0


def classify_final_state(field: DensityField, flatness_tol: float = DEFAULT_FLATNESS_TOL) -> FinalState:
    """Homogeneous iff max(rho) - min(rho) < ``flatness_tol``."""
    if not flatness_tol > 0:
        raise InvalidConfigurationError("flatness_tol must be positive")
    contrast = float(np.max(field.values) - np.min(field.values))
    return FinalState.HOMOGENEOUS if contrast < flatness_tol else FinalState.CLUSTERED


@dataclass(frozen=True)
class ProbeVerdict:
    sigma: float
    state: FinalState
    contrast: float
    t_end: float
    stop_reason: str


@dataclass
class PhaseBracket:
    """Bisection bracket for the homogeneous/clustered transition."""

    sigma_lo: float
    sigma_hi: float
    iterations: int = 0
    verdicts: list[ProbeVerdict] = field(default_factory=list)

    def __post_init__(self):
        if not self.sigma_lo < self.sigma_hi:
            raise InvalidConfigurationError("sigma_lo must be below sigma_hi")

    @property
    def width(self) -> float:
        return self.sigma_hi - self.sigma_lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.sigma_lo + self.sigma_hi)

    def is_monotone(self) -> bool:
        """No Clustered verdict at a larger sigma than a Homogeneous one."""
        ordered = sorted(self.verdicts, key=lambda v: v.sigma)
        seen_homogeneous = False
        for v in ordered:
            if v.state is FinalState.HOMOGENEOUS:
                seen_homogeneous = True
            elif seen_homogeneous:
                return False
        return True

    def to_dict(self) -> dict:
        return {
            "sigma_lo": self.sigma_lo,
            "sigma_hi": self.sigma_hi,
            "iterations": self.iterations,
            "verdicts": [
                {
                    "sigma": v.sigma,
                    "state": v.state.value,
                    "contrast": v.contrast,
                    "t_end": v.t_end,
                    "stop_reason": v.stop_reason,
                }
                for v in self.verdicts
            ],
        }


def probe_sigma(
    sigma: float,
    table: KernelTable,
    initial: DensityField,
    t_max: float,
    cfg: SolverConfig | None = None,
    flatness_tol: float = DEFAULT_FLATNESS_TOL,
) -> ProbeVerdict:
    """Evolve ``initial`` to stationarity or ``t_max`` and classify the end state."""
    res = evolve(initial, table, sigma, cfg, t_final=t_max, record_stride=max(1, int(round(t_max / (cfg or SolverConfig()).dt))))
    state = classify_final_state(res.final, flatness_tol)
    contrast = float(np.ptp(res.final.values))
    log.info("probe sigma=%.5f -> %s (contrast %.3e, t=%.2f, %s)", sigma, state, contrast, res.t_end, res.stop_reason)
    return ProbeVerdict(sigma, state, contrast, res.t_end, res.stop_reason)


def estimate_sigma_c(
    kernel: InteractionKernel,
    grid: TorusGrid,
    probe_std: float = 0.2,
    bracket: tuple[float, float] = (0.70, 1.00),
    sigma_tol: float = 0.01,
    t_max: float = 30.0,
    cfg: SolverConfig | None = None,
    flatness_tol: float = DEFAULT_FLATNESS_TOL,
) -> PhaseBracket:
    """Bisect on sigma for the largest noise that still sustains a cluster.

    The probe starts from a sharp periodized Gaussian centred at 0. A
    Clustered end state places sigma below the transition, a Homogeneous
    one above it. Bisection stops once the bracket is narrower than
    ``sigma_tol``.

    Raises
    ------
    InvalidBracketError
        If both bracket ends give the same verdict.
    """
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise InvalidConfigurationError("bracket must satisfy sigma_lo < sigma_hi")
    if not sigma_tol > 0:
        raise InvalidConfigurationError("sigma_tol must be positive")
    table = periodize_on_grid(kernel, grid)
    initial = periodized_gaussian(grid, 0.0, probe_std)
    result = PhaseBracket(lo, hi)
    v_lo = probe_sigma(lo, table, initial, t_max, cfg, flatness_tol)
    v_hi = probe_sigma(hi, table, initial, t_max, cfg, flatness_tol)
    result.verdicts += [v_lo, v_hi]
    if v_lo.state is v_hi.state:
        raise InvalidBracketError(
            f"both bracket ends ({lo}, {hi}) end {v_lo.state.value}; the transition is not bracketed"
        )
    if v_lo.state is FinalState.HOMOGENEOUS:
        raise InvalidBracketError(
            f"sigma={lo} ends Homogeneous while sigma={hi} ends Clustered; verdicts are not monotone"
        )
    while result.sigma_hi - result.sigma_lo >= sigma_tol:
        mid = result.midpoint
        v = probe_sigma(mid, table, initial, t_max, cfg, flatness_tol)
        result.verdicts.append(v)
        result.iterations += 1
        if v.state is FinalState.CLUSTERED:
            result.sigma_lo = mid
        else:
            result.sigma_hi = mid
    return result
