"""Named experiment presets and the pipelines that write their output files.

A mean-field run writes four files into its output directory:

``ledger.csv``
    one row per recorded sample, columns ``t, F, F_ent, F_int, dissipation, peak, m2``
``segmentation.json``
    regime segments plus the classifier settings used
``snapshots.csv``
    density snapshots in long format ``t, x, rho``
``summary.json``
    final-state label, boundary times, noise thresholds and run diagnostics

Nothing time- or host-dependent is written, so reruns are byte-identical.
"""
from __future__ import annotations

import copy
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import SimulationConfig, config_from_mapping, kernel_to_mapping
from .errors import InvalidConfigurationError
from .grid import make_grid, mixture
from .io import rows_to_csv, atomic_write_text, write_json, write_ledger, write_segmentation, write_snapshots
from .kernels import DEFAULT_MORSE, KernelTable, periodize_on_grid
from .particles import empirical_histogram, evolve_particles, sample_from_density
from .regimes import RegimeSegmentation, classify_regimes
from .solver import EvolutionResult, SolverConfig, evolve
from .stability import classify_final_state, estimate_sigma_c, sigma_sharp, unstable_mode

__all__ = [
    "PRESETS",
    "SWEEP_DEFAULTS",
    "preset_names",
    "preset_config",
    "default_snapshot_times",
    "SimulationOutcome",
    "simulate",
    "write_outcome",
    "run_simulation",
    "run_particles",
    "run_sweep_sigma_c",
    "run_scenario",
]

log = logging.getLogger(__name__)

_MORSE = {"type": "morse", "C_a": 4.0, "C_r": 1.0, "l_a": 0.125, "l_r": 0.05}
_DOMAIN = {"L": 5.0, "n_cells": 512}


def _preset(name, sigma, initial, t_final, kernel=_MORSE, record_stride=1):
    return {
        "name": name,
        "domain": dict(_DOMAIN),
        "kernel": dict(kernel),
        "sigma": sigma,
        "solver": {"dt": 1e-3, "t_final": t_final, "record_stride": record_stride},
        "initial": [list(c) for c in initial],
    }


# t_final is long enough for each run to settle into its end state; the
# homogeneous runs decay slowly near the coexistence window and need more.
PRESETS: dict[str, dict] = {
    "fig1": _preset("fig1", 1.1, [(1.0, 0.0, 0.5)], 15.0),
    "fig2": _preset("fig2", 0.5, [(1.0, 0.0, 0.5)], 10.0),
    "ex1": _preset("ex1", 0.838, [(1.0, 0.0, 0.5)], 40.0),
    "ex2": _preset("ex2", 0.65, [(0.5, 0.5, 0.2), (0.5, -0.5, 0.2)], 20.0),
    "fig5": _preset("fig5", 0.838, [(1.0, 0.0, 0.4)], 20.0),
    "fig6": _preset("fig6", 0.838, [(1.0, 0.0, 0.6)], 40.0),
    "hk": _preset(
        "hk", 0.485, [(1.0, 0.0, 0.5)], 200.0,
        kernel={"type": "hegselmann_krause", "R_0": 0.5}, record_stride=5,
    ),
}

SWEEP_DEFAULTS = {
    "probe_std": 0.2,
    "bracket": (0.70, 1.00),
    "sigma_tol": 0.01,
    "t_max": 30.0,
}


def preset_names() -> list[str]:
    return sorted(PRESETS) + ["sweep-sigma-c"]


def preset_config(name: str, output_directory: str | None = None) -> SimulationConfig:
    """Validated configuration for a mean-field preset."""
    if name not in PRESETS:
        raise InvalidConfigurationError(
            f"unknown preset {name!r}; choose from {', '.join(preset_names())}"
        )
    doc = copy.deepcopy(PRESETS[name])
    doc["output"] = {"directory": output_directory}
    return config_from_mapping(doc)


def default_snapshot_times(t_final: float, dt: float, n: int = 8) -> tuple[float, ...]:
    """``0`` followed by ``n - 1`` log-spaced times in [dt, t_final], on the dt grid."""
    if n < 2:
        return (0.0,)
    raw = np.geomspace(max(10 * dt, 1e-2), t_final, n - 1)
    steps = np.unique(np.round(raw / dt).astype(np.int64))
    return (0.0,) + tuple(float(k * dt) for k in steps)


@dataclass
class SimulationOutcome:
    """Everything produced by one mean-field preset run."""

    config: SimulationConfig
    table: KernelTable
    result: EvolutionResult
    segmentation: RegimeSegmentation
    summary: dict


def simulate(cfg: SimulationConfig) -> SimulationOutcome:
    """Evolve and classify without writing anything."""
    grid = make_grid(cfg.L, cfg.n_cells)
    table = periodize_on_grid(cfg.kernel, grid)
    initial = mixture(cfg.components, grid)
    snaps = cfg.snapshot_times or default_snapshot_times(cfg.t_final, cfg.solver.dt)
    log.info("evolving %s: sigma=%g t_final=%g", cfg.name or "config", cfg.sigma, cfg.t_final)
    res = evolve(
        initial,
        table,
        cfg.sigma,
        cfg.solver,
        t_final=cfg.t_final,
        record_stride=cfg.record_stride,
        snapshot_times=snaps,
        stop_when_stationary=cfg.stop_when_stationary,
    )
    seg = classify_regimes(res.ledger, cfg.rate_deadband, cfg.min_duration)
    peak = res.ledger.column("peak")
    summary = {
        "name": cfg.name,
        "sigma": cfg.sigma,
        "kernel": kernel_to_mapping(cfg.kernel),
        "final_state": classify_final_state(res.final).value,
        "final_contrast": float(np.ptp(res.final.values)),
        "final_peak": float(peak[-1]),
        "max_peak": float(peak.max()),
        "t_max_peak": float(res.ledger.t[int(np.argmax(peak))]),
        "stop_reason": res.stop_reason,
        "t_end": res.t_end,
        "n_steps": res.n_steps,
        "n_substeps": res.n_substeps,
        "max_mass_drift": res.max_mass_drift,
        "min_density": res.min_density,
        "max_energy_increase": res.ledger.max_energy_increase(),
        "segments": [s.to_dict() for s in seg.segments],
        "active_sequence": [r.value for r in seg.active_sequence()],
        "boundaries": seg.boundaries(),
        "sigma_sharp": sigma_sharp(table),
        "unstable_mode": unstable_mode(table),
    }
    return SimulationOutcome(cfg, table, res, seg, summary)


def write_outcome(out_dir, outcome: SimulationOutcome) -> None:
    out = Path(out_dir)
    write_ledger(out / "ledger.csv", outcome.result.ledger)
    write_segmentation(out / "segmentation.json", outcome.segmentation)
    write_snapshots(out / "snapshots.csv", [(t_req, f) for t_req, _, f in outcome.result.snapshots])
    write_json(out / "summary.json", outcome.summary)


def run_simulation(cfg: SimulationConfig, out_dir=None) -> dict:
    """Evolve, classify and (optionally) write the four output files.

    Returns the summary dictionary.
    """
    outcome = simulate(cfg)
    if out_dir is not None:
        write_outcome(out_dir, outcome)
    return outcome.summary


def run_particles(cfg: SimulationConfig, seed: int | None = None, out_dir=None) -> dict:
    """Sample ``cfg.n_particles`` from the initial density and run Euler-Maruyama.

    Writes ``particles.csv`` (t, peak, m2), ``snapshots.csv`` (final
    histogram) and ``summary.json``.
    """
    seed = cfg.seed if seed is None else int(seed)
    if not 0 <= seed < 2**64:
        raise InvalidConfigurationError("seed must fit in an unsigned 64-bit integer")
    grid = make_grid(cfg.L, cfg.n_cells)
    dt = cfg.particle_dt or cfg.solver.dt
    t_final = cfg.particle_t_final or cfg.t_final
    ens = sample_from_density(mixture(cfg.components, grid), cfg.n_particles, seed)
    traj = evolve_particles(ens, cfg.kernel, cfg.sigma, dt, t_final, grid, cfg.particle_record_stride)
    hist = empirical_histogram(traj.final, grid)
    summary = {
        "name": cfg.name,
        "seed": seed,
        "N": cfg.n_particles,
        "sigma": cfg.sigma,
        "dt": dt,
        "t_end": float(traj.final.t),
        "final_m2": float(traj.m2[-1]),
        "final_peak": float(traj.peak[-1]),
        "final_state": classify_final_state(hist).value,
    }
    if out_dir is not None:
        out = Path(out_dir)
        atomic_write_text(out / "particles.csv", rows_to_csv(("t", "peak", "m2"), traj.as_rows()))
        write_snapshots(out / "snapshots.csv", [(traj.final.t, hist)])
        write_json(out / "summary.json", summary)
    return summary


def run_sweep_sigma_c(
    out_dir=None,
    probe_std: float = SWEEP_DEFAULTS["probe_std"],
    bracket=SWEEP_DEFAULTS["bracket"],
    sigma_tol: float = SWEEP_DEFAULTS["sigma_tol"],
    t_max: float = SWEEP_DEFAULTS["t_max"],
    L: float = 5.0,
    n_cells: int = 512,
    cfg: SolverConfig | None = None,
) -> dict:
    """Bracket sigma_c for the reference Morse kernel.

    Writes ``sweep.csv`` (one row per probe) and ``summary.json``.
    """
    grid = make_grid(L, n_cells)
    table = periodize_on_grid(DEFAULT_MORSE, grid)
    result = estimate_sigma_c(DEFAULT_MORSE, grid, probe_std, tuple(bracket), sigma_tol, t_max, cfg)
    summary = {
        "name": "sweep-sigma-c",
        "sigma_sharp": sigma_sharp(table),
        "sigma_c_bracket": [result.sigma_lo, result.sigma_hi],
        "sigma_c_estimate": result.midpoint,
        "bracket_width": result.width,
        "n_probes": len(result.verdicts),
        "monotone": result.is_monotone(),
        "probe_std": probe_std,
        "t_max": t_max,
        "probes": result.to_dict()["verdicts"],
    }
    if out_dir is not None:
        out = Path(out_dir)
        rows = [
            (v.sigma, 1.0 if v.state.value == "Clustered" else 0.0, v.contrast, v.t_end)
            for v in result.verdicts
        ]
        atomic_write_text(out / "sweep.csv", rows_to_csv(("sigma", "clustered", "contrast", "t_end"), rows))
        write_json(out / "summary.json", summary)
    return summary


def run_scenario(name: str, out_dir=None) -> dict:
    """Run a preset by name and write its output files into ``out_dir``."""
    if name == "sweep-sigma-c":
        return run_sweep_sigma_c(out_dir)
    return run_simulation(preset_config(name, None if out_dir is None else str(out_dir)), out_dir)
