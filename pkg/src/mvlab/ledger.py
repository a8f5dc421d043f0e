"""Time series of energy samples recorded along a trajectory."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .energy import EnergySample
from .errors import InvalidConfigurationError

__all__ = ["EnergyLedger", "LEDGER_COLUMNS"]

LEDGER_COLUMNS = ("t", "F", "F_ent", "F_int", "dissipation", "peak", "m2")


@dataclass(frozen=True)
class EnergyLedger:
    """Time-ordered energy samples with strictly increasing ``t``."""

    samples: tuple[EnergySample, ...] = field(default_factory=tuple)

    def __post_init__(self):
        samples = tuple(self.samples)
        object.__setattr__(self, "samples", samples)
        for a, b in zip(samples, samples[1:]):
            if not b.t > a.t:
                raise InvalidConfigurationError(
                    f"ledger times must increase strictly ({a.t!r} then {b.t!r})"
                )

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    def column(self, name: str) -> np.ndarray:
        if name not in LEDGER_COLUMNS:
            raise KeyError(name)
        return np.array([getattr(s, name) for s in self.samples], dtype=float)

    @property
    def t(self) -> np.ndarray:
        return self.column("t")

    def as_array(self) -> np.ndarray:
        """(n_samples, 7) array in :data:`LEDGER_COLUMNS` order."""
        if not self.samples:
            return np.empty((0, len(LEDGER_COLUMNS)))
        return np.array([[getattr(s, c) for c in LEDGER_COLUMNS] for s in self.samples])

    @classmethod
    def from_array(cls, rows: Iterable[Sequence[float]]) -> "EnergyLedger":
        return cls(tuple(EnergySample(*map(float, r)) for r in rows))

    @classmethod
    def from_columns(cls, **cols) -> "EnergyLedger":
        """Build a ledger from named columns; missing ones default to zero.

        ``F`` defaults to ``F_ent + F_int`` when not given.
        """
        t = np.asarray(cols["t"], dtype=float)
        n = len(t)
        get = lambda k: np.asarray(cols.get(k, np.zeros(n)), dtype=float)  # noqa: E731
        F_ent, F_int = get("F_ent"), get("F_int")
        F = np.asarray(cols["F"], dtype=float) if "F" in cols else F_ent + F_int
        rows = zip(t, F, F_ent, F_int, get("dissipation"), get("peak"), get("m2"))
        return cls.from_array(rows)

    def max_energy_increase(self) -> float:
        """Largest F(t_{k+1}) - F(t_k); non-positive for a dissipative run."""
        F = self.column("F")
        if len(F) < 2:
            return 0.0
        return float(np.max(np.diff(F)))
