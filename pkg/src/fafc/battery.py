"""Lithium-ion receiver battery: SOC/energy bookkeeping, preferred charging power, CC-CV profile.

Energy is measured in watt-hours throughout (``E_o = 6.3865``), so a power
in watts applied for ``dt`` hours changes the energy by ``P * dt``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, DomainError, SingularityError

SINGULAR_TOL = 1e-9


@dataclass(frozen=True)
class BatterySpec:
    capacity_mah: float = 1000.0
    cv_voltage: float = 4.2
    cc_current: float = 1.0
    total_energy: float = 6.3865

    def __post_init__(self):
        for name in ("capacity_mah", "cv_voltage", "cc_current", "total_energy"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"BatterySpec.{name} must be positive")


DEFAULT_BATTERY = BatterySpec()


@dataclass(frozen=True)
class RationalFitCoefficients:
    """P(x)/Q(x) with both coefficient lists ordered highest power first."""

    name: str
    numerator: tuple[float, ...]
    denominator: tuple[float, ...]

    def __post_init__(self):
        if not self.numerator or not self.denominator:
            raise ConfigError("rational fit needs non-empty coefficient lists")


# The printed fits omit the monic leading denominator coefficient; it is 1.
R44 = RationalFitCoefficients(
    "R44",
    numerator=(-3.112, 1.439, 120.4, -7.452, 0.1543),
    denominator=(1.0, -9.881, 44.84, -5.49, 0.4007),
)
R45 = RationalFitCoefficients(
    "R45",
    numerator=(-21.65, 141.2, -11.5, 0.1526, 0.008358),
    denominator=(1.0, -10.7, 41.01, -1.509, -0.3997, 0.0362),
)
FITS = {"R44": R44, "R45": R45}


def get_fit(variant: str | RationalFitCoefficients) -> RationalFitCoefficients:
    if isinstance(variant, RationalFitCoefficients):
        return variant
    try:
        return FITS[variant.upper()]
    except KeyError:
        raise ConfigError(f"unknown fit variant {variant!r}; expected one of {sorted(FITS)}") from None


def soc_to_energy(soc: float, spec: BatterySpec = DEFAULT_BATTERY) -> float:
    if not 0.0 <= soc <= 1.0:
        raise DomainError(f"soc must lie in [0, 1], got {soc!r}")
    return soc * spec.total_energy


def energy_to_soc(energy: float, spec: BatterySpec = DEFAULT_BATTERY) -> float:
    if not 0.0 <= energy <= spec.total_energy:
        raise DomainError(f"energy must lie in [0, {spec.total_energy}], got {energy!r}")
    return energy / spec.total_energy


def horner(coeffs: Sequence[float], x):
    """Evaluate a polynomial (highest power first) at scalar or array ``x``."""
    y = 0.0
    for c in coeffs:
        y = y * x + c
    return y


def eval_rational_fit(coeffs: RationalFitCoefficients, x):
    """Evaluate ``P(x)/Q(x)``; raises :class:`SingularityError` where ``|Q(x)| < 1e-9``.

    Works elementwise on numpy arrays.
    """
    den = horner(coeffs.denominator, x)
    bad = np.abs(den) < SINGULAR_TOL
    if np.any(bad):
        if np.ndim(x) == 0:
            raise SingularityError(float(x), float(den))
        i = int(np.flatnonzero(bad)[0])
        raise SingularityError(float(np.ravel(x)[i]), float(np.ravel(den)[i]))
    return horner(coeffs.numerator, x) / den


def preferred_power_from_energy(coeffs: RationalFitCoefficients, energy, spec: BatterySpec = DEFAULT_BATTERY):
    """Requested charging power at battery energy ``energy`` (scalar or array).

    Negative fit values are clamped to 0 W and a full battery requests nothing.
    """
    p = np.maximum(eval_rational_fit(coeffs, energy), 0.0)
    p = np.where(np.asarray(energy) >= spec.total_energy, 0.0, p)
    return float(p) if np.ndim(p) == 0 else p


def preferred_power(variant, soc: float, spec: BatterySpec = DEFAULT_BATTERY) -> float:
    energy = soc_to_energy(soc, spec)
    if soc == 1.0:
        return 0.0
    return preferred_power_from_energy(get_fit(variant), energy, spec)


# ---------------------------------------------------------------------------
# CC-CV charging profile
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProfileParams:
    """Shape of the synthesized four-stage charging profile.

    The defaults were chosen so that the (energy, power) pairs of the
    synthesized profile are matched by the R44/R45 fits with RMSE below 0.1;
    ``scripts/calibrate_profile.py`` reproduces the search.  Setting
    ``cc_voltage_tau_hours=None`` and ``cc_current_rise_hours=0`` gives the
    plain linear-ramp, step-current profile.
    """

    trickle_current: float = 0.1
    trickle_start_voltage: float = 2.55
    trickle_end_voltage: float = 3.0
    termination_current: float = 0.02
    trickle_hours: float = 0.205
    cc_hours: float = 1.02
    total_hours: float = 3.6
    cc_voltage_tau_hours: float | None = 0.37
    cc_current_rise_hours: float = 0.056
    step_hours: float = 0.01

    @property
    def cv_hours(self) -> float:
        return self.total_hours - self.trickle_hours - self.cc_hours

    def validate(self, spec: BatterySpec) -> None:
        positive = ("trickle_current", "trickle_hours", "cc_hours", "total_hours", "step_hours",
                    "termination_current", "trickle_start_voltage")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"ProfileParams.{name} must be positive")
        if not self.cv_hours > 0:
            raise ConfigError("trickle_hours + cc_hours must be shorter than total_hours")
        if self.cc_voltage_tau_hours is not None and not self.cc_voltage_tau_hours > 0:
            raise ConfigError("cc_voltage_tau_hours must be positive or None")
        if not 0 <= self.cc_current_rise_hours < self.cc_hours:
            raise ConfigError("cc_current_rise_hours must lie in [0, cc_hours)")
        if not self.trickle_start_voltage <= self.trickle_end_voltage < spec.cv_voltage:
            raise ConfigError("need trickle_start_voltage <= trickle_end_voltage < cv_voltage")
        if not (self.trickle_current <= spec.cc_current and self.termination_current < spec.cc_current):
            raise ConfigError("trickle and termination currents must not exceed cc_current")


@dataclass(frozen=True)
class ChargeProfile:
    time: np.ndarray  # hours
    voltage: np.ndarray
    current: np.ndarray
    boundaries: tuple[float, float, float]  # TC->CC, CC->CV, CV->termination

    def __len__(self):
        return len(self.time)


@dataclass(frozen=True)
class StandardPairs:
    energy: np.ndarray
    power: np.ndarray

    def __post_init__(self):
        if len(self.energy) != len(self.power):
            raise DomainError("energy and power must have equal length")

    def __len__(self):
        return len(self.energy)


def synthesize_cc_cv_profile(spec: BatterySpec = DEFAULT_BATTERY,
                             params: ProfileParams = ProfileParams()) -> ChargeProfile:
    params.validate(spec)
    t_cc = params.trickle_hours
    t_cv = params.trickle_hours + params.cc_hours
    t_end = params.total_hours
    n = max(1, int(round(t_end / params.step_hours)))
    grid = np.linspace(0.0, t_end, n + 1)
    near = (np.abs(grid - t_cc) < 1e-9) | (np.abs(grid - t_cv) < 1e-9)
    t = np.union1d(grid[~near], [t_cc, t_cv])

    tc = t < t_cc
    cv = t >= t_cv
    cc = ~tc & ~cv
    tau = t - t_cc
    v_span = spec.cv_voltage - params.trickle_end_voltage

    voltage = np.empty_like(t)
    current = np.empty_like(t)
    voltage[tc] = params.trickle_start_voltage + (
        params.trickle_end_voltage - params.trickle_start_voltage) * t[tc] / t_cc
    current[tc] = params.trickle_current

    if params.cc_voltage_tau_hours is None:
        ramp = tau[cc] / params.cc_hours
    else:
        k = params.cc_voltage_tau_hours
        ramp = -np.expm1(-tau[cc] / k) / -math.expm1(-params.cc_hours / k)
    voltage[cc] = params.trickle_end_voltage + v_span * ramp
    if params.cc_current_rise_hours > 0:
        rise = params.trickle_current + (spec.cc_current - params.trickle_current) * (
            tau[cc] / params.cc_current_rise_hours)
        current[cc] = np.minimum(spec.cc_current, rise)
    else:
        current[cc] = spec.cc_current

    decay = math.log(spec.cc_current / params.termination_current) / params.cv_hours
    voltage[cv] = spec.cv_voltage
    current[cv] = spec.cc_current * np.exp(-decay * (t[cv] - t_cv))
    return ChargeProfile(t, voltage, current, (t_cc, t_cv, t_end))


def profile_power(profile: ChargeProfile) -> tuple[np.ndarray, np.ndarray]:
    return profile.time, profile.voltage * profile.current


def profile_energy(profile: ChargeProfile) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative trapezoidal integral of the charging power, starting at 0."""
    t, p = profile_power(profile)
    if len(t) < 2:
        raise DomainError("profile_energy needs at least two samples")
    energy = np.concatenate(([0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * np.diff(t))))
    return t, energy


def standard_pairs(profile: ChargeProfile) -> StandardPairs:
    _, power = profile_power(profile)
    _, energy = profile_energy(profile)
    return StandardPairs(energy, power)


def fit_square_errors(coeffs: RationalFitCoefficients, pairs: StandardPairs) -> np.ndarray:
    if len(pairs) == 0:
        raise DomainError("need at least one standard pair")
    fitted = eval_rational_fit(coeffs, np.asarray(pairs.energy, dtype=float))
    return (fitted - pairs.power) ** 2


def fit_rmse(coeffs: RationalFitCoefficients, pairs: StandardPairs) -> float:
    return math.sqrt(float(np.mean(fit_square_errors(coeffs, pairs))))


def pairs_from_fit(coeffs: RationalFitCoefficients, energy: Sequence[float]) -> StandardPairs:
    """Pairs lying exactly on a fit (useful as a zero-error reference)."""
    energy = np.asarray(energy, dtype=float)
    return StandardPairs(energy, eval_rational_fit(coeffs, energy))
