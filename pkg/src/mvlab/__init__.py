"""Aggregation-diffusion dynamics on the one-dimensional torus.

Finite-volume solver for the nonlocal Fokker-Planck equation

    d_t rho = (sigma^2/2) d_xx rho + d_x(rho d_x(U * rho)),

its free-energy bookkeeping, a classifier for aggregation/diffusion
dominance, linear-stability and bisection tools for the noise thresholds,
and an Euler-Maruyama particle simulator for the underlying SDE system.
"""
from .errors import (
    ConfigParseError,
    ConfigValidationError,
    IncompatibleGridsError,
    InsufficientDataError,
    InvalidBracketError,
    InvalidConfigurationError,
    MVLabError,
    NumericalFailureError,
    StepRejectedError,
)
from .grid import DensityField, TorusGrid, make_grid, mass, mixture, periodized_gaussian, uniform_density, wrap_displacement
from .kernels import DEFAULT_MORSE, HegselmannKrause, KernelTable, Morse, convolve, periodize_on_grid
from .energy import chemical_potential, dissipation, entropy_energy, flux, free_energy, interaction_energy
from .observables import peak_height, second_moment
from .ledger import EnergyLedger
from .solver import SolverConfig, cfl_max_dt, evolve, step
from .regimes import Regime, RegimeSegmentation, RegimeWarning, Segment, classify_regimes
from .stability import FinalState, PhaseBracket, classify_final_state, estimate_sigma_c, sigma_sharp
from .particles import ParticleEnsemble, em_step, empirical_histogram, evolve_particles, pair_forces, sample_from_density
from .config import SimulationConfig, parse_config
from .estimators import CriticalNoiseEstimator, MeanFieldSolver, ParticleSimulator, RegimeClassifier

__version__ = "0.1.0"
