"""Power chain from source power to receiver electrical power."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError, DomainError


@dataclass(frozen=True)
class LinkEfficiencies:
    eta_el: float = 0.40  # electro-optical
    eta_lt: float = 1.00  # beam transmission
    eta_le: float = 0.50  # photoelectric

    def __post_init__(self):
        for name in ("eta_el", "eta_lt", "eta_le"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ConfigError(f"{name} must lie in (0, 1], got {v!r}")

    @property
    def after_transmitter(self) -> float:
        """Fraction of transmitting power reaching the battery as electrical power."""
        return self.eta_lt * self.eta_le


@dataclass(frozen=True)
class PowerChain:
    source: float
    transmit: float
    receiver_beam: float
    electrical: float


def overall_efficiency(eff: LinkEfficiencies) -> float:
    return eff.eta_el * eff.eta_lt * eff.eta_le


def power_chain(source_power: float, eff: LinkEfficiencies = LinkEfficiencies()) -> PowerChain:
    if source_power < 0:
        raise DomainError("source power must be non-negative")
    p_t = source_power * eff.eta_el
    p_b = p_t * eff.eta_lt
    return PowerChain(source_power, p_t, p_b, p_b * eff.eta_le)
