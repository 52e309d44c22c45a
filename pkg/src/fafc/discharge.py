"""Per-slot discharging power drawn from the five phone working statuses.

Random streams are numpy ``Generator(PCG64)`` instances seeded from
``SeedSequence(seed, spawn_key=(index,))``; equal ``(seed, index)`` pairs give
identical draw sequences on every platform.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import DomainError


class WorkingStatus(enum.IntEnum):
    STANDBY = 0
    VIDEO = 1
    SOCIAL = 2
    GAME = 3
    MUSIC = 4

    @property
    def power(self) -> float:
        return float(STATUS_POWER[self])

    @property
    def usage_rate(self) -> float:
        return float(USAGE_RATE[self])


STATUS_POWER = np.array([0.0076, 0.4289, 0.4348, 0.6766, 0.1706])
USAGE_RATE = np.array([0.2839, 0.1235, 0.2469, 0.1235, 0.2222])
if abs(USAGE_RATE.sum() - 1.0) > 1e-9:
    raise AssertionError("usage rates must sum to 1")

_CDF = np.cumsum(USAGE_RATE)
_CDF[-1] = 1.0

MEAN_DISCHARGE = float(STATUS_POWER @ USAGE_RATE)


def make_stream(seed: int, index: int = 0) -> np.random.Generator:
    """Deterministic stream ``index`` under master ``seed``."""
    if seed < 0 or index < 0:
        raise DomainError("seed and stream index must be non-negative")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def status_from_uniform(u):
    """Inverse CDF over the statuses in declaration order; ``u`` in [0, 1)."""
    idx = np.searchsorted(_CDF, u, side="right")
    return np.minimum(idx, len(_CDF) - 1)


def sample_discharge(rng: np.random.Generator) -> tuple[WorkingStatus, float]:
    status = WorkingStatus(int(status_from_uniform(rng.random())))
    return status, status.power


def sample_discharge_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    if n < 1:
        raise DomainError("need at least one receiver")
    return STATUS_POWER[status_from_uniform(rng.random(n))]
