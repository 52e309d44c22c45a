"""First-access-first-charge scheduling over a rotating receiver queue.

A run proceeds slot by slot.  At the start of each slot every live receiver
requests its preferred charging power (from its current SOC); the head of the
queue is served greedily until the transmitting power is used up; every live
receiver discharges at a power drawn from its working status; energies are
updated and clamped; the receivers that were charged move to the tail.

Allocation is budgeted in transmitting power.  Unless ``ideal_link`` is set, a
receiver requesting ``P_r`` at its battery asks the transmitter for
``P_r / (eta_lt * eta_le)`` and receives ``alloc * eta_lt * eta_le``, so a fully
served receiver charges at exactly its preferred power.

The per-slot arithmetic is written once, on ``(trials, receivers)`` arrays, and
shared by the scalar operations and the batched engine used by the sweeps.
Every trial row evolves independently, so batching never changes a result.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .battery import DEFAULT_BATTERY, BatterySpec, get_fit, preferred_power_from_energy, soc_to_energy
from .discharge import STATUS_POWER, WorkingStatus, make_stream, status_from_uniform
from .errors import ConfigError, DomainError, SimulationError
from .link import LinkEfficiencies


class TerminationMode(str, enum.Enum):
    STRICT = "strict"
    CONTINUE = "continue"


class TerminationReason(str, enum.Enum):
    BATTERY_EXHAUSTED = "battery_exhausted"
    ALL_FULLY_CHARGED = "all_fully_charged"
    TIME_LIMIT_REACHED = "time_limit_reached"


@dataclass(frozen=True)
class SchedulerConfig:
    transmit_power: float = 20.0  # W
    n_receivers: int = 10
    slot_seconds: float = 10.0
    charge_hours: float = 3.0
    variant: str = "R44"
    termination: TerminationMode = TerminationMode.STRICT
    initial_soc: tuple[float, ...] | None = None  # None: uniform integer percentages
    link: LinkEfficiencies = field(default_factory=LinkEfficiencies)
    ideal_link: bool = False
    rotate_partial: bool = True
    forced_status: WorkingStatus | None = None
    battery: BatterySpec = DEFAULT_BATTERY

    def __post_init__(self):
        object.__setattr__(self, "termination", TerminationMode(self.termination))
        object.__setattr__(self, "variant", get_fit(self.variant).name)
        if self.initial_soc is not None:
            object.__setattr__(self, "initial_soc", tuple(float(s) for s in self.initial_soc))
        if self.forced_status is not None:
            object.__setattr__(self, "forced_status", WorkingStatus(self.forced_status))
        if not self.transmit_power > 0:
            raise ConfigError("transmit_power must be positive")
        if int(self.n_receivers) != self.n_receivers or self.n_receivers < 1:
            raise ConfigError("n_receivers must be a positive integer")
        if not self.slot_seconds > 0:
            raise ConfigError("slot_seconds must be positive")
        if not self.charge_hours * 3600.0 >= self.slot_seconds:
            raise ConfigError("charge_hours must cover at least one slot")
        if self.initial_soc is not None:
            if len(self.initial_soc) != self.n_receivers:
                raise ConfigError(
                    f"initial_soc has {len(self.initial_soc)} entries for {self.n_receivers} receivers")
            if any(not 0.0 <= s <= 1.0 for s in self.initial_soc):
                raise ConfigError("initial_soc entries must lie in [0, 1]")

    @property
    def delivery_efficiency(self) -> float:
        return 1.0 if self.ideal_link else self.link.after_transmitter

    @property
    def slot_hours(self) -> float:
        return self.slot_seconds / 3600.0

    @property
    def max_slots(self) -> int:
        return math.ceil(self.charge_hours * 3600.0 / self.slot_seconds - 1e-9)


@dataclass(frozen=True)
class Receiver:
    id: int
    energy: float
    alive: bool = True
    last_allocation: float = 0.0
    last_discharge: float = 0.0


@dataclass(frozen=True)
class SlotAllocation:
    allocations: tuple[float, ...]  # queue order
    k: int  # receivers with a positive allocation
    residual: float


# ---------------------------------------------------------------------------
# per-slot kernels (arrays of shape (trials, receivers))
# ---------------------------------------------------------------------------


def _allocate_rows(requests: np.ndarray, budget: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    remaining = np.array(budget, dtype=float)
    alloc = np.zeros_like(requests, dtype=float)
    for j in range(requests.shape[1]):
        r = requests[:, j]
        a = np.where(remaining >= r, r, np.where(remaining > 0.0, remaining, 0.0))
        alloc[:, j] = a
        remaining = remaining - a
    starved = (requests > 0.0) & (alloc == 0.0)
    after_starved = np.logical_or.accumulate(starved, axis=1)[:, :-1]
    if np.any(after_starved & (alloc[:, 1:] > 0.0)):
        raise SimulationError("service is not prefix-shaped")
    return alloc, remaining


def _update_energy(energy, alloc, discharge, efficiency: float, slot_hours: float, total_energy: float):
    raw = energy + (alloc * efficiency - discharge) * slot_hours
    died = raw <= 0.0
    return np.clip(raw, 0.0, total_energy), died


def _requeue(order: np.ndarray, served: np.ndarray) -> np.ndarray:
    """Move served entries to the tail, keeping relative order on both sides."""
    idx = np.argsort(served.astype(np.int8), axis=1, kind="stable")
    return np.take_along_axis(order, idx, axis=1)


# ---------------------------------------------------------------------------
# scalar operations
# ---------------------------------------------------------------------------


def init_receivers(config: SchedulerConfig, rng: np.random.Generator | None = None) -> list[Receiver]:
    if config.initial_soc is not None:
        socs = config.initial_soc
    else:
        if rng is None:
            raise ConfigError("uniform-random initial SOC needs a random stream")
        socs = rng.integers(0, 101, size=config.n_receivers) / 100.0
    return [Receiver(i + 1, soc_to_energy(float(s), config.battery)) for i, s in enumerate(socs)]


def allocate_slot(preferred: Sequence[float], transmit_power: float) -> SlotAllocation:
    if transmit_power < 0:
        raise DomainError("transmit power must be non-negative")
    req = np.asarray(preferred, dtype=float).reshape(1, -1)
    if np.any(req < 0):
        raise DomainError("preferred powers must be non-negative")
    alloc, remaining = _allocate_rows(req, np.array([transmit_power]))
    row = alloc[0]
    return SlotAllocation(tuple(float(a) for a in row), int(np.count_nonzero(row > 0)), float(remaining[0]))


def apply_slot(receivers: Sequence[Receiver], allocation: SlotAllocation | Sequence[float],
               discharges: Sequence[float], slot_seconds: float,
               spec: BatterySpec = DEFAULT_BATTERY, delivery_efficiency: float = 1.0) -> list[Receiver]:
    alloc = allocation.allocations if isinstance(allocation, SlotAllocation) else tuple(allocation)
    if not len(receivers) == len(alloc) == len(discharges):
        raise SimulationError("receivers, allocations and discharges are misaligned")
    out = []
    for rec, a, d in zip(receivers, alloc, discharges):
        if not rec.alive:
            if a != 0 or d != 0:
                raise SimulationError(f"dead receiver {rec.id} was charged or discharged")
            out.append(replace(rec, last_allocation=0.0, last_discharge=0.0))
            continue
        energy, died = _update_energy(rec.energy, a, d, delivery_efficiency, slot_seconds / 3600.0,
                                      spec.total_energy)
        out.append(replace(rec, energy=float(energy), alive=not bool(died),
                           last_allocation=float(a), last_discharge=float(d)))
    return out


def rotate_queue(queue: Sequence[int], k: int) -> list[int]:
    if not 0 <= k <= len(queue):
        raise DomainError(f"rotation {k} out of range for a queue of {len(queue)}")
    queue = list(queue)
    return queue[k:] + queue[:k]


def check_termination(receivers: Sequence[Receiver], elapsed_hours: float,
                      config: SchedulerConfig) -> TerminationReason | None:
    if config.termination is TerminationMode.STRICT and any(not r.alive for r in receivers):
        return TerminationReason.BATTERY_EXHAUSTED
    if all(r.energy >= config.battery.total_energy for r in receivers):
        return TerminationReason.ALL_FULLY_CHARGED
    if elapsed_hours >= config.charge_hours - 1e-12:
        return TerminationReason.TIME_LIMIT_REACHED
    return None


# ---------------------------------------------------------------------------
# batched engine
# ---------------------------------------------------------------------------

DischargeSource = Callable[[int], np.ndarray]


@dataclass
class BatchResult:
    """Snapshots of a batch of runs; arrays are indexed ``[trial, receiver id - 1]``."""

    snapshots: dict[int, tuple[np.ndarray, np.ndarray]]  # slot -> (energy, alive)
    reasons: list[TerminationReason]
    slots_run: np.ndarray
    history: dict[str, list] | None = None


def simulate_batch(config: SchedulerConfig, initial_energy: np.ndarray, discharge: DischargeSource,
                   snapshot_slots: Sequence[int] = (), record_history: bool = False) -> BatchResult:
    """Run ``initial_energy.shape[0]`` independent trials of ``config`` in lockstep.

    ``discharge(slot)`` returns a ``(trials, n_receivers)`` array whose column
    ``j`` is the discharging power of the ``j``-th live receiver in queue order;
    trailing columns beyond the live count are ignored.  Rows that terminate
    freeze their state, so a snapshot past a row's end holds its final state.
    """
    energy = np.array(initial_energy, dtype=float)
    if energy.ndim != 2 or energy.shape[1] != config.n_receivers:
        raise ConfigError("initial_energy must have shape (trials, n_receivers)")
    trials, n = energy.shape
    fit = get_fit(config.variant)
    spec = config.battery
    eta = config.delivery_efficiency
    slot_hours = config.slot_hours
    strict = config.termination is TerminationMode.STRICT
    wanted = set(int(s) for s in snapshot_slots)

    alive = np.ones((trials, n), dtype=bool)
    order = np.tile(np.arange(n), (trials, 1))
    active = np.ones(trials, dtype=bool)
    reasons: list[TerminationReason | None] = [None] * trials
    slots_run = np.zeros(trials, dtype=int)
    history = {"energy": [], "alloc": [], "discharge": [], "queue": [], "alive": []} if record_history else None
    snapshots = {}
    if 0 in wanted:
        snapshots[0] = (energy.copy(), alive.copy())

    full0 = np.all(energy >= spec.total_energy, axis=1)
    for b in np.flatnonzero(full0):
        reasons[b] = TerminationReason.ALL_FULLY_CHARGED
    active &= ~full0

    slot = 0
    while active.any() and slot < config.max_slots:
        pref = preferred_power_from_energy(fit, energy, spec)
        requests = np.where(alive, pref / eta, 0.0)
        req_q = np.take_along_axis(requests, order, axis=1)
        alive_q = np.take_along_axis(alive, order, axis=1)
        rank = np.cumsum(alive_q, axis=1) - 1
        draws = np.asarray(discharge(slot), dtype=float)
        pd_q = np.where(alive_q & active[:, None], np.take_along_axis(draws, np.maximum(rank, 0), axis=1), 0.0)
        budget = np.where(active, config.transmit_power, 0.0)
        alloc_q, _ = _allocate_rows(req_q, budget)

        alloc = np.empty_like(alloc_q)
        pd = np.empty_like(pd_q)
        np.put_along_axis(alloc, order, alloc_q, axis=1)
        np.put_along_axis(pd, order, pd_q, axis=1)
        new_energy, died = _update_energy(energy, alloc, pd, eta, slot_hours, spec.total_energy)
        step = active[:, None] & alive
        energy = np.where(step, new_energy, energy)
        alive = alive & ~(step & died)

        if history is not None:
            history["energy"].append(energy[0].copy())
            history["alloc"].append(alloc[0].copy())
            history["discharge"].append(pd[0].copy())
            history["queue"].append(tuple(int(i) + 1 for i, a in zip(order[0], alive_q[0]) if a))
            history["alive"].append(alive[0].copy())

        served = alloc_q > 0.0
        if not config.rotate_partial:
            served &= alloc_q >= req_q
        order = _requeue(order, served)
        slot += 1
        slots_run[active] = slot
        if slot in wanted:
            snapshots[slot] = (energy.copy(), alive.copy())

        dead_any = ~alive.all(axis=1) if strict else np.zeros(trials, dtype=bool)
        all_full = np.all(energy >= spec.total_energy, axis=1)
        time_up = slot >= config.max_slots
        for b in np.flatnonzero(active):
            if dead_any[b]:
                reasons[b] = TerminationReason.BATTERY_EXHAUSTED
            elif all_full[b]:
                reasons[b] = TerminationReason.ALL_FULLY_CHARGED
            elif time_up:
                reasons[b] = TerminationReason.TIME_LIMIT_REACHED
        active &= np.array([r is None for r in reasons])

    for s in wanted:
        if s not in snapshots:
            snapshots[s] = (energy.copy(), alive.copy())
    return BatchResult(snapshots, [r for r in reasons], slots_run, history)


def initial_energies(config: SchedulerConfig, streams: Sequence[np.random.Generator]) -> np.ndarray:
    return np.array([[r.energy for r in init_receivers(config, rng)] for rng in streams])


def random_discharge_source(config: SchedulerConfig, streams: Sequence[np.random.Generator]) -> DischargeSource:
    """Per-slot status draws: each stream yields ``n_receivers`` uniforms per slot, in slot order.

    Call after the initial SOC has been drawn from the same streams.
    """
    if config.forced_status is not None:
        power = config.forced_status.power
        shape = (len(streams), config.n_receivers)
        return lambda slot: np.full(shape, power)
    codes = np.stack([
        status_from_uniform(rng.random((config.max_slots, config.n_receivers))).astype(np.uint8)
        for rng in streams
    ])
    return lambda slot: STATUS_POWER[codes[:, slot, :]]


def array_discharge_source(discharges: np.ndarray) -> DischargeSource:
    """Explicit per-slot discharges, shape ``(slots, n)`` or ``(trials, slots, n)``."""
    d = np.asarray(discharges, dtype=float)
    if d.ndim == 2:
        d = d[None]
    return lambda slot: d[:, slot, :]


# ---------------------------------------------------------------------------
# single run
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Trace:
    config: SchedulerConfig
    initial_soc: np.ndarray  # (n,)
    soc: np.ndarray  # (slots, n), indexed by receiver id - 1, state after each slot
    allocation: np.ndarray  # (slots, n), transmit-side watts
    discharge: np.ndarray  # (slots, n)
    alive: np.ndarray  # (slots, n)
    queues: tuple[tuple[int, ...], ...]  # live ids in queue order used during each slot
    termination: TerminationReason

    @property
    def n_slots(self) -> int:
        return self.soc.shape[0]

    @property
    def total_hours(self) -> float:
        return self.n_slots * self.config.slot_hours

    def soc_at_slot(self, slot: int) -> np.ndarray:
        if slot == 0:
            return self.initial_soc
        return self.soc[min(slot, self.n_slots) - 1]

    def soc_at_hours(self, hours: float) -> np.ndarray:
        return self.soc_at_slot(int(round(hours * 3600.0 / self.config.slot_seconds)))

    def rows(self):
        """(slot, t_hours, receiver_id, soc, alloc_w, discharge_w), slot 0 being the initial state."""
        n = self.initial_soc.shape[0]
        for i in range(n):
            yield 0, 0.0, i + 1, float(self.initial_soc[i]), 0.0, 0.0
        for s in range(self.n_slots):
            t = (s + 1) * self.config.slot_hours
            for i in range(n):
                yield (s + 1, t, i + 1, float(self.soc[s, i]), float(self.allocation[s, i]),
                       float(self.discharge[s, i]))


def run_simulation(config: SchedulerConfig, seed: int = 0, discharges: np.ndarray | None = None,
                   stream_index: int = 0) -> Trace:
    """One run of ``config``; ``discharges`` overrides the random statuses (shape ``(slots, n)``)."""
    rng = make_stream(seed, stream_index)
    energy0 = initial_energies(config, [rng])
    source = random_discharge_source(config, [rng]) if discharges is None else array_discharge_source(discharges)
    res = simulate_batch(config, energy0, source, record_history=True)
    h = res.history
    e_o = config.battery.total_energy
    n = config.n_receivers

    def stack(key, dtype=float):
        return np.array(h[key], dtype=dtype).reshape(len(h[key]), n)

    return Trace(
        config=config,
        initial_soc=energy0[0] / e_o,
        soc=stack("energy") / e_o,
        allocation=stack("alloc"),
        discharge=stack("discharge"),
        alive=stack("alive", bool),
        queues=tuple(h["queue"]),
        termination=res.reasons[0],
    )
