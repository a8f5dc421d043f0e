"""Segmentation of a trajectory by the signs of dF_ent/dt and dF_int/dt.

Per-sample labels:

==============  =============  =============
label           dF_ent/dt      dF_int/dt
==============  =============  =============
Aggregation     > +delta       < -delta
Diffusion       < -delta       > +delta
Cooperative     < -delta       < -delta
Quiescent       otherwise
==============  =============  =============

Both rates above ``+delta`` is impossible for an exact gradient flow; such
samples are labelled Quiescent and reported through a warning.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, InvalidConfigurationError
from .ledger import EnergyLedger

__all__ = [
    "Regime",
    "Segment",
    "RegimeSegmentation",
    "RegimeWarning",
    "classify_regimes",
    "regime_rates",
    "label_samples",
    "default_rate_deadband",
    "DEFAULT_DEADBAND_FACTOR",
    "DEFAULT_MIN_DURATION",
]

DEFAULT_DEADBAND_FACTOR = 1e-4
DEFAULT_MIN_DURATION = 0.1


class Regime(str, enum.Enum):
    AGGREGATION = "Aggregation"
    DIFFUSION = "Diffusion"
    COOPERATIVE = "Cooperative"
    QUIESCENT = "Quiescent"

    def __str__(self):
        return self.value


class RegimeWarning(UserWarning):
    """Both free-energy parts increase beyond the dead-band."""


@dataclass(frozen=True)
class Segment:
    t_start: float
    t_end: float
    label: Regime

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def overlaps(self, lo: float, hi: float) -> bool:
        return self.t_start < hi and self.t_end > lo

    def to_dict(self) -> dict:
        return {"t_start": self.t_start, "t_end": self.t_end, "label": self.label.value}


@dataclass(frozen=True)
class RegimeSegmentation:
    """Contiguous labelled intervals covering the ledger's time span."""

    segments: tuple[Segment, ...]
    rate_deadband: float = 0.0
    min_duration: float = 0.0
    n_inconsistent: int = 0
    sample_labels: tuple[Regime, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        for a, b in zip(segs, segs[1:]):
            if a.t_end != b.t_start:
                raise InvalidConfigurationError("segments must be contiguous")
            if a.label == b.label:
                raise InvalidConfigurationError("adjacent segments must have distinct labels")

    def __len__(self):
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)

    @property
    def labels(self) -> list[Regime]:
        return [s.label for s in self.segments]

    def active(self) -> list[Segment]:
        """Non-Quiescent segments in time order."""
        return [s for s in self.segments if s.label is not Regime.QUIESCENT]

    def active_sequence(self) -> list[Regime]:
        """Labels of :meth:`active`, with consecutive repeats collapsed."""
        out: list[Regime] = []
        for s in self.active():
            if not out or out[-1] is not s.label:
                out.append(s.label)
        return out

    def boundaries(self) -> list[float]:
        return [s.t_start for s in self.segments[1:]]

    def to_dict(self) -> dict:
        return {
            "segments": [s.to_dict() for s in self.segments],
            "settings": {
                "rate_deadband": self.rate_deadband,
                "min_duration": self.min_duration,
            },
            "n_inconsistent": self.n_inconsistent,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RegimeSegmentation":
        segs = tuple(
            Segment(float(s["t_start"]), float(s["t_end"]), Regime(s["label"]))
            for s in data["segments"]
        )
        settings = data.get("settings", {})
        return cls(
            segments=segs,
            rate_deadband=float(settings.get("rate_deadband", 0.0)),
            min_duration=float(settings.get("min_duration", 0.0)),
            n_inconsistent=int(data.get("n_inconsistent", 0)),
        )


def default_rate_deadband(ledger: EnergyLedger, factor: float = DEFAULT_DEADBAND_FACTOR) -> float:
    """``factor`` times the mean dissipation rate over the ledger."""
    t = ledger.t
    F = ledger.column("F")
    span = t[-1] - t[0]
    return float(factor * max(F[0] - F[-1], 0.0) / span) if span > 0 else 0.0


def regime_rates(ledger: EnergyLedger) -> tuple[np.ndarray, np.ndarray]:
    """Centred-difference rates of F_ent and F_int (one-sided at the ends)."""
    t = ledger.t
    return (
        np.gradient(ledger.column("F_ent"), t),
        np.gradient(ledger.column("F_int"), t),
    )


def label_samples(r_ent: np.ndarray, r_int: np.ndarray, delta: float) -> tuple[list[Regime], int]:
    """Per-sample labels and the count of both-increasing samples."""
    labels = []
    bad = 0
    for e, i in zip(r_ent, r_int):
        if e > delta and i < -delta:
            labels.append(Regime.AGGREGATION)
        elif e < -delta and i > delta:
            labels.append(Regime.DIFFUSION)
        elif e < -delta and i < -delta:
            labels.append(Regime.COOPERATIVE)
        else:
            if e > delta and i > delta:
                bad += 1
            labels.append(Regime.QUIESCENT)
    return labels, bad


def _runs(t: np.ndarray, labels: list[Regime]) -> list[list]:
    runs: list[list] = []
    for k, lab in enumerate(labels):
        if runs and runs[-1][2] is lab:
            continue
        if runs:
            runs[-1][1] = float(t[k])
        runs.append([float(t[k]), float(t[-1]), lab])
    return runs


def _coalesce(runs: list[list]) -> list[list]:
    out: list[list] = []
    for r in runs:
        if out and out[-1][2] is r[2]:
            out[-1][1] = r[1]
        else:
            out.append(list(r))
    return out


def _merge_short(runs: list[list], min_duration: float, tol: float = 0.0) -> list[list]:
    """Absorb short interior runs into their longer neighbour, shortest first.

    The first and last runs are cut off by the observation window, so their
    duration says nothing about their significance; they are never merged.
    Durations within ``tol`` of each other (or of ``min_duration``) compare
    as equal, so the result does not depend on rounding of the time axis.
    """
    runs = _coalesce(runs)
    while len(runs) > 2:
        durations = np.array([r[1] - r[0] for r in runs[1:-1]])
        k = int(np.flatnonzero(durations <= durations.min() + tol)[0]) + 1
        if durations[k - 1] >= min_duration - tol:
            break
        before = runs[k - 1][1] - runs[k - 1][0]
        after = runs[k + 1][1] - runs[k + 1][0]
        # ties go to the earlier neighbour
        target = k - 1 if before >= after - tol else k + 1
        lo, hi = min(k, target), max(k, target)
        merged = [runs[lo][0], runs[hi][1], runs[target][2]]
        runs = _coalesce(runs[:lo] + [merged] + runs[hi + 1 :])
    return runs


def classify_regimes(
    ledger: EnergyLedger,
    rate_deadband: float | None = None,
    min_duration: float = DEFAULT_MIN_DURATION,
) -> RegimeSegmentation:
    """Label each ledger sample and merge the labels into time segments.

    Parameters
    ----------
    ledger : EnergyLedger
        At least three samples.
    rate_deadband : float, optional
        Rates with magnitude at or below this value count as zero. Defaults
        to :func:`default_rate_deadband`.
    min_duration : float
        Interior segments shorter than this are absorbed by their longer
        neighbour, shortest first. The first and last segments are kept
        whatever their length.

    Raises
    ------
    InsufficientDataError
        If the ledger has fewer than three samples.
    """
    if len(ledger) < 3:
        raise InsufficientDataError(f"need at least 3 ledger samples, got {len(ledger)}")
    if rate_deadband is None:
        rate_deadband = default_rate_deadband(ledger)
    if rate_deadband < 0 or min_duration < 0:
        raise InvalidConfigurationError("rate_deadband and min_duration must be nonnegative")
    t = ledger.t
    r_ent, r_int = regime_rates(ledger)
    labels, bad = label_samples(r_ent, r_int, rate_deadband)
    if bad:
        warnings.warn(
            f"{bad} samples have both dF_ent/dt and dF_int/dt above the dead-band",
            RegimeWarning,
            stacklevel=2,
        )
    # a few ulps of the time magnitude: differences of shifted times are inexact
    tol = 64 * float(np.spacing(max(abs(t[0]), abs(t[-1]))))
    runs = _merge_short(_runs(t, labels), min_duration, tol)
    segments = tuple(Segment(a, b, lab) for a, b, lab in runs)
    return RegimeSegmentation(
        segments=segments,
        rate_deadband=float(rate_deadband),
        min_duration=float(min_duration),
        n_inconsistent=bad,
        sample_labels=tuple(labels),
    )
