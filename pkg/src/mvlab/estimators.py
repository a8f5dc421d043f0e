"""scikit-learn style wrappers around the functional API.

Hyperparameters are plain constructor arguments (so ``get_params`` /
``set_params`` / ``clone`` work) and everything learned in ``fit`` ends with
an underscore. Densities are passed as 1-D arrays of cell values on the
grid given by ``L`` and ``n_cells``, as a :class:`~mvlab.grid.DensityField`,
or as a 2-D array with one density per row.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from .config import kernel_from_mapping
from .errors import InvalidConfigurationError
from .grid import DensityField, make_grid
from .kernels import InteractionKernel, periodize_on_grid
from .ledger import EnergyLedger
from .particles import empirical_histogram, evolve_particles, sample_from_density
from .regimes import DEFAULT_MIN_DURATION, classify_regimes
from .solver import SolverConfig, evolve
from .stability import FinalState, estimate_sigma_c, sigma_sharp

__all__ = [
    "MeanFieldSolver",
    "RegimeClassifier",
    "CriticalNoiseEstimator",
    "ParticleSimulator",
    "check_densities",
    "resolve_kernel",
]


def resolve_kernel(kernel, kernel_params=None, L: float = 5.0) -> InteractionKernel:
    """Kernel object from a name plus parameters, or pass an object through."""
    if isinstance(kernel, str):
        return kernel_from_mapping({"type": kernel, **(kernel_params or {})}, L)
    if callable(kernel) and hasattr(kernel, "gradient"):
        if kernel_params:
            raise InvalidConfigurationError("kernel_params given together with a kernel object")
        return kernel
    raise InvalidConfigurationError(f"cannot interpret kernel {kernel!r}")


def check_densities(X, n_cells: int) -> np.ndarray:
    """Validate densities and return them as a 2-D float array.

    Raises
    ------
    InvalidConfigurationError
        On a wrong number of cells or negative values.
    """
    if isinstance(X, DensityField):
        X = X.values
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    X = check_array(X, dtype=float)
    if X.shape[1] != n_cells:
        raise InvalidConfigurationError(f"expected {n_cells} cells per density, got {X.shape[1]}")
    if np.any(X < 0):
        raise InvalidConfigurationError("densities must be nonnegative")
    return X


class MeanFieldSolver(TransformerMixin, BaseEstimator):
    """Evolve densities with the finite-volume scheme.

    ``fit`` runs one initial density and keeps the full result; ``transform``
    maps each input density to its state at ``t_final``.

    Attributes
    ----------
    grid_, table_ : TorusGrid, KernelTable
    result_ : EvolutionResult
        Result of the run started in ``fit``.
    ledger_ : EnergyLedger
    final_ : ndarray of shape (n_cells,)
    sigma_sharp_ : float
    """

    def __init__(
        self,
        kernel="morse",
        kernel_params=None,
        sigma=0.838,
        L=5.0,
        n_cells=512,
        t_final=1.0,
        dt=1e-3,
        scheme="full_potential",
        record_stride=1,
        stop_when_stationary=True,
        stationarity_tol=1e-8,
    ):
        self.kernel = kernel
        self.kernel_params = kernel_params
        self.sigma = sigma
        self.L = L
        self.n_cells = n_cells
        self.t_final = t_final
        self.dt = dt
        self.scheme = scheme
        self.record_stride = record_stride
        self.stop_when_stationary = stop_when_stationary
        self.stationarity_tol = stationarity_tol

    def _setup(self):
        self.grid_ = make_grid(self.L, self.n_cells)
        self.table_ = periodize_on_grid(resolve_kernel(self.kernel, self.kernel_params, self.L), self.grid_)
        self.cfg_ = SolverConfig(dt=self.dt, scheme=self.scheme, stationarity_tol=self.stationarity_tol)
        self.sigma_sharp_ = sigma_sharp(self.table_)

    def _run(self, rho):
        return evolve(
            DensityField(self.grid_, rho),
            self.table_,
            self.sigma,
            self.cfg_,
            t_final=self.t_final,
            record_stride=self.record_stride,
            stop_when_stationary=self.stop_when_stationary,
        )

    def fit(self, X, y=None):
        X = check_densities(X, self.n_cells)
        if X.shape[0] != 1:
            raise InvalidConfigurationError("fit takes a single initial density")
        self._setup()
        self.result_ = self._run(X[0])
        self.ledger_ = self.result_.ledger
        self.final_ = self.result_.final.values
        self.n_features_in_ = self.n_cells
        return self

    def transform(self, X):
        check_is_fitted(self, "table_")
        X = check_densities(X, self.n_cells)
        return np.vstack([self._run(row).final.values for row in X])


class RegimeClassifier(BaseEstimator):
    """Segment an energy ledger into dominance regimes.

    ``fit`` takes an :class:`EnergyLedger` (or an array with the ledger
    columns); ``predict`` returns the regime label in force at each time.
    """

    def __init__(self, rate_deadband=None, min_duration=DEFAULT_MIN_DURATION):
        self.rate_deadband = rate_deadband
        self.min_duration = min_duration

    @staticmethod
    def _as_ledger(X) -> EnergyLedger:
        if isinstance(X, EnergyLedger):
            return X
        return EnergyLedger.from_array(check_array(X, dtype=float))

    def fit(self, X, y=None):
        ledger = self._as_ledger(X)
        self.segmentation_ = classify_regimes(ledger, self.rate_deadband, self.min_duration)
        self.sample_labels_ = np.array([r.value for r in self.segmentation_.sample_labels], dtype=object)
        return self

    def predict(self, t):
        """Label of the segment containing each time (segment ends are inclusive)."""
        check_is_fitted(self, "segmentation_")
        t = np.atleast_1d(np.asarray(t, dtype=float))
        segs = self.segmentation_.segments
        ends = np.array([s.t_end for s in segs])
        idx = np.minimum(np.searchsorted(ends, t, side="left"), len(segs) - 1)
        return np.array([segs[i].label.value for i in idx], dtype=object)

    def fit_predict(self, X, y=None):
        """Per-sample labels before segment merging."""
        return self.fit(X).sample_labels_


class CriticalNoiseEstimator(BaseEstimator):
    """Bisection estimate of the critical noise strength sigma_c.

    ``predict`` labels noise values by comparing them with the bracket
    midpoint; it describes the fate of the sharp probe profile, not of
    arbitrary initial data.
    """

    def __init__(
        self,
        kernel="morse",
        kernel_params=None,
        L=5.0,
        n_cells=512,
        probe_std=0.2,
        bracket=(0.70, 1.00),
        sigma_tol=0.01,
        t_max=30.0,
        dt=1e-3,
    ):
        self.kernel = kernel
        self.kernel_params = kernel_params
        self.L = L
        self.n_cells = n_cells
        self.probe_std = probe_std
        self.bracket = bracket
        self.sigma_tol = sigma_tol
        self.t_max = t_max
        self.dt = dt

    def fit(self, X=None, y=None):
        kernel = resolve_kernel(self.kernel, self.kernel_params, self.L)
        grid = make_grid(self.L, self.n_cells)
        self.bracket_ = estimate_sigma_c(
            kernel, grid, self.probe_std, tuple(self.bracket), self.sigma_tol, self.t_max, SolverConfig(dt=self.dt)
        )
        self.sigma_c_ = self.bracket_.midpoint
        self.sigma_sharp_ = sigma_sharp(periodize_on_grid(kernel, grid))
        return self

    def predict(self, sigma):
        check_is_fitted(self, "sigma_c_")
        sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
        return np.where(sigma < self.sigma_c_, FinalState.CLUSTERED.value, FinalState.HOMOGENEOUS.value).astype(object)


class ParticleSimulator(TransformerMixin, BaseEstimator):
    """Euler-Maruyama particle system started from samples of a density.

    ``transform`` returns the empirical histogram at ``t_final`` for each
    input density (one fresh run per row, all with ``seed``).
    """

    def __init__(
        self,
        kernel="morse",
        kernel_params=None,
        sigma=1.1,
        N=10_000,
        L=5.0,
        n_cells=512,
        dt=1e-3,
        t_final=1.0,
        seed=0,
        record_stride=100,
        method="auto",
    ):
        self.kernel = kernel
        self.kernel_params = kernel_params
        self.sigma = sigma
        self.N = N
        self.L = L
        self.n_cells = n_cells
        self.dt = dt
        self.t_final = t_final
        self.seed = seed
        self.record_stride = record_stride
        self.method = method

    def _run(self, rho):
        ens = sample_from_density(DensityField(self.grid_, rho), self.N, self.seed)
        return evolve_particles(
            ens, self.kernel_, self.sigma, self.dt, self.t_final, self.grid_, self.record_stride, self.method
        )

    def fit(self, X, y=None):
        X = check_densities(X, self.n_cells)
        if X.shape[0] != 1:
            raise InvalidConfigurationError("fit takes a single initial density")
        self.grid_ = make_grid(self.L, self.n_cells)
        self.kernel_ = resolve_kernel(self.kernel, self.kernel_params, self.L)
        self.trajectory_ = self._run(X[0])
        self.final_ensemble_ = self.trajectory_.final
        self.n_features_in_ = self.n_cells
        return self

    def transform(self, X):
        check_is_fitted(self, "kernel_")
        X = check_densities(X, self.n_cells)
        return np.vstack([empirical_histogram(self._run(row).final, self.grid_).values for row in X])
