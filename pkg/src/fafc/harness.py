"""Seeded trial batches, parameter sweeps, fit validation, and CSV output."""

from __future__ import annotations

import configparser
import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .battery import (FITS, ProfileParams, StandardPairs, fit_rmse, fit_square_errors, profile_energy,
                      profile_power, standard_pairs, synthesize_cc_cv_profile)
from .discharge import WorkingStatus, make_stream
from .errors import ConfigError
from .link import LinkEfficiencies
from .scheduler import (SchedulerConfig, TerminationMode, Trace, initial_energies, random_discharge_source,
                        simulate_batch)

TIME_SWEEP_COLUMNS = ["n_receivers", "checkpoint_hours", "variant", "mean_soc", "std_soc", "dead_frac",
                      "full_frac", "trials"]
POWER_SWEEP_COLUMNS = ["n_receivers", "transmit_power_w", "variant", "mean_soc", "std_soc", "dead_frac",
                       "full_frac", "trials"]
TRACE_COLUMNS = ["slot", "t_hours", "receiver_id", "soc", "alloc_w", "discharge_w"]
PROFILE_COLUMNS = ["t_hours", "voltage_v", "current_a", "power_w", "energy_units"]

DEFAULT_RECEIVER_COUNTS = tuple(range(10, 51, 5))
DEFAULT_TRIALS = 200
TRIAL_CHUNK = 256


@dataclass(frozen=True)
class SweepConfig:
    kind: str = "time"  # time | power | single
    receiver_counts: tuple[int, ...] = DEFAULT_RECEIVER_COUNTS
    transmit_powers: tuple[float, ...] = (20.0,)
    checkpoints: tuple[float, ...] = (1.0, 2.0, 3.0)
    trials: int = DEFAULT_TRIALS
    seed: int = 1
    variants: tuple[str, ...] = ("R44",)
    termination: TerminationMode = TerminationMode.CONTINUE
    slot_seconds: float = 10.0
    link: LinkEfficiencies = field(default_factory=LinkEfficiencies)
    ideal_link: bool = False
    rotate_partial: bool = True
    jobs: int = 1

    def __post_init__(self):
        if self.kind not in ("time", "power", "single"):
            raise ConfigError(f"unknown sweep kind {self.kind!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.receiver_counts or not self.transmit_powers or not self.checkpoints:
            raise ConfigError("sweep axes must be non-empty")
        if self.kind == "power" and len(self.checkpoints) != 1:
            raise ConfigError("a power sweep uses a single charging time")
        object.__setattr__(self, "termination", TerminationMode(self.termination))
        object.__setattr__(self, "variants", tuple(FITS[v.upper()].name for v in self.variants))

    @classmethod
    def defaults(cls, kind: str, **overrides) -> "SweepConfig":
        if kind == "power":
            base = dict(transmit_powers=(20.0, 40.0, 60.0, 80.0, 100.0), checkpoints=(3.0,))
        else:
            base = dict(transmit_powers=(20.0,), checkpoints=(1.0, 2.0, 3.0))
        base.update(overrides)
        return cls(kind=kind, **base)

    def point(self, n_receivers: int, transmit_power: float, variant: str) -> SchedulerConfig:
        return SchedulerConfig(
            transmit_power=transmit_power, n_receivers=n_receivers, slot_seconds=self.slot_seconds,
            charge_hours=max(self.checkpoints), variant=variant, termination=self.termination,
            link=self.link, ideal_link=self.ideal_link, rotate_partial=self.rotate_partial,
        )


@dataclass(frozen=True)
class AggregateResult:
    n_receivers: int
    transmit_power: float
    checkpoint_hours: float
    variant: str
    mean_soc: float
    std_soc: float
    dead_frac: float
    full_frac: float
    trials: int

    @property
    def sem(self) -> float:
        return self.std_soc / math.sqrt(self.trials)


def _aggregate(point: SchedulerConfig, hours: float, per_trial_soc: Sequence[float], dead: float,
               full: float, trials: int) -> AggregateResult:
    mean = math.fsum(per_trial_soc) / trials
    std = math.sqrt(math.fsum((x - mean) ** 2 for x in per_trial_soc) / (trials - 1)) if trials > 1 else 0.0
    return AggregateResult(point.n_receivers, point.transmit_power, hours, point.variant,
                           mean, std, dead, full, trials)


def run_trials(point: SchedulerConfig, trials: int, master_seed: int,
               checkpoints: Sequence[float] | None = None) -> list[AggregateResult]:
    """Average receiver-mean SOC over ``trials`` runs using streams ``0 .. trials-1``.

    Each checkpoint is read from the same runs.  Sums are exactly rounded
    (``math.fsum``), so the result does not depend on how trials are batched.
    """
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    checkpoints = tuple(checkpoints) if checkpoints else (point.charge_hours,)
    slot_of = {h: int(round(h * 3600.0 / point.slot_seconds)) for h in checkpoints}
    if max(slot_of.values()) > point.max_slots:
        raise ConfigError("checkpoint beyond the configured charging time")

    e_o = point.battery.total_energy
    per_trial = {h: [] for h in checkpoints}
    dead = {h: 0 for h in checkpoints}
    full = {h: 0 for h in checkpoints}
    for start in range(0, trials, TRIAL_CHUNK):
        streams = [make_stream(master_seed, i) for i in range(start, min(trials, start + TRIAL_CHUNK))]
        energy0 = initial_energies(point, streams)
        res = simulate_batch(point, energy0, random_discharge_source(point, streams), slot_of.values())
        for h, s in slot_of.items():
            energy, alive = res.snapshots[s]
            per_trial[h].extend(math.fsum(row) / (point.n_receivers * e_o) for row in energy)
            dead[h] += int(np.count_nonzero(~alive))
            full[h] += int(np.count_nonzero(energy >= e_o))
    total = trials * point.n_receivers
    return [_aggregate(point, h, per_trial[h], dead[h] / total, full[h] / total, trials) for h in checkpoints]


def _run_point(args) -> list[AggregateResult]:
    point, trials, seed, checkpoints = args
    return run_trials(point, trials, seed, checkpoints)


def _sweep(cfg: SweepConfig, points: list[SchedulerConfig]) -> list[AggregateResult]:
    tasks = [(p, cfg.trials, cfg.seed, cfg.checkpoints) for p in points]
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            batches = list(pool.map(_run_point, tasks))
    else:
        batches = [_run_point(t) for t in tasks]
    return [r for batch in batches for r in batch]


def time_sweep(cfg: SweepConfig) -> list[AggregateResult]:
    """Mean SOC over (receiver count, checkpoint) at the first transmit power."""
    p_t = cfg.transmit_powers[0]
    points = [cfg.point(n, p_t, v) for n in sorted(cfg.receiver_counts) for v in cfg.variants]
    return sort_results(_sweep(cfg, points), "time")


def power_sweep(cfg: SweepConfig) -> list[AggregateResult]:
    """Mean SOC over (receiver count, transmit power) after the single charging time."""
    points = [cfg.point(n, p, v) for n in sorted(cfg.receiver_counts) for p in sorted(cfg.transmit_powers)
              for v in cfg.variants]
    return sort_results(_sweep(cfg, points), "power")


def sort_results(results: Iterable[AggregateResult], kind: str) -> list[AggregateResult]:
    if kind == "power":
        key = lambda r: (r.n_receivers, r.transmit_power, r.variant)
    else:
        key = lambda r: (r.n_receivers, r.checkpoint_hours, r.variant)
    return sorted(results, key=key)


def lookup(results: Iterable[AggregateResult], **match) -> AggregateResult:
    hits = [r for r in results if all(getattr(r, k) == v for k, v in match.items())]
    if len(hits) != 1:
        raise KeyError(f"{len(hits)} results match {match}")
    return hits[0]


# ---------------------------------------------------------------------------
# fit validation
# ---------------------------------------------------------------------------

RMSE_PASS = 0.1
RMSE_WARN = 0.2


@dataclass(frozen=True)
class FitCheck:
    variant: str
    rmse: float
    max_square_error: float

    @property
    def status(self) -> str:
        if self.rmse < RMSE_PASS:
            return "pass"
        return "warn" if self.rmse < RMSE_WARN else "fail"


@dataclass(frozen=True)
class FitReport:
    checks: tuple[FitCheck, ...]
    n_pairs: int

    @property
    def status(self) -> str:
        statuses = {c.status for c in self.checks}
        for s in ("fail", "warn"):
            if s in statuses:
                return s
        return "pass"

    @property
    def rmse_difference(self) -> float:
        r = [c.rmse for c in self.checks]
        return max(r) - min(r)

    def lines(self) -> list[str]:
        out = [f"standard pairs: {self.n_pairs}"]
        out += [f"{c.variant}: rmse={c.rmse:.6f} max_se={c.max_square_error:.6f} [{c.status}]"
                for c in self.checks]
        out.append(f"rmse difference: {self.rmse_difference:.6f}")
        out.append(f"overall: {self.status}")
        return out


def validate_fits(pairs: StandardPairs | None = None, params: ProfileParams = ProfileParams()) -> FitReport:
    if pairs is None:
        pairs = standard_pairs(synthesize_cc_cv_profile(params=params))
    checks = tuple(FitCheck(name, fit_rmse(fit, pairs), float(np.max(fit_square_errors(fit, pairs))))
                   for name, fit in FITS.items())
    return FitReport(checks, len(pairs))


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.6g}"
    return str(x)


def _write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def emit_csv(results: Sequence[AggregateResult], path, kind: str = "time") -> Path:
    if kind == "power":
        header = POWER_SWEEP_COLUMNS
        rows = ((r.n_receivers, r.transmit_power, r.variant, r.mean_soc, r.std_soc, r.dead_frac, r.full_frac,
                 r.trials) for r in sort_results(results, "power"))
    else:
        header = TIME_SWEEP_COLUMNS
        rows = ((r.n_receivers, r.checkpoint_hours, r.variant, r.mean_soc, r.std_soc, r.dead_frac, r.full_frac,
                 r.trials) for r in sort_results(results, "time"))
    return _write_rows(path, header, rows)


def read_csv(path, kind: str = "time") -> list[AggregateResult]:
    """Parse a sweep CSV back into results (at the serialized precision)."""
    out = []
    with Path(path).open(encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            if kind == "power":
                p_t, hours = float(row["transmit_power_w"]), math.nan
            else:
                p_t, hours = math.nan, float(row["checkpoint_hours"])
            out.append(AggregateResult(int(row["n_receivers"]), p_t, hours, row["variant"],
                                       float(row["mean_soc"]), float(row["std_soc"]), float(row["dead_frac"]),
                                       float(row["full_frac"]), int(row["trials"])))
    return out


def write_trace_csv(trace: Trace, path) -> Path:
    return _write_rows(path, TRACE_COLUMNS, trace.rows())


def write_profile_csv(path, params: ProfileParams = ProfileParams()) -> Path:
    profile = synthesize_cc_cv_profile(params=params)
    _, power = profile_power(profile)
    _, energy = profile_energy(profile)
    rows = zip(profile.time, profile.voltage, profile.current, power, energy)
    return _write_rows(path, PROFILE_COLUMNS, rows)


def write_gnuplot(results: Sequence[AggregateResult], csv_path, kind: str, path=None) -> Path:
    """Companion gnuplot script plotting mean SOC (with 2-SEM bars) against receiver count."""
    csv_path = Path(csv_path)
    path = Path(path) if path else csv_path.with_suffix(".gp")
    if kind == "power":
        series = sorted({(r.transmit_power, r.variant) for r in results})
        title = "%g W, %s"
    else:
        series = sorted({(r.checkpoint_hours, r.variant) for r in results})
        title = "%g h, %s"
    clauses = [
        f"data using 1:(($2 == {x!r} && strcol(3) eq '{v}') ? $4 : NaN):(2*$5/sqrt($8)) "
        f"with yerrorlines title '{title % (x, v)}'"
        for x, v in series
    ]
    lines = [
        "set datafile separator ','",
        "set xlabel 'receiver number'",
        "set ylabel 'average SOC'",
        "set yrange [0:1]",
        f"data = '{csv_path.name}'",
        "plot " + (", \\\n     ".join(clauses) if clauses else "NaN notitle"),
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# key = value configuration files
# ---------------------------------------------------------------------------

_FLOAT_KEYS = {"transmit_power", "slot_seconds", "charge_hours", "eta_el", "eta_lt", "eta_le"}
_INT_KEYS = {"n_receivers", "seed", "trials", "jobs"}
_BOOL_KEYS = {"ideal_link", "rotate_partial"}
_LIST_FLOAT_KEYS = {"initial_soc", "transmit_powers", "checkpoints"}
_LIST_INT_KEYS = {"receiver_counts"}
_STR_KEYS = {"variant", "termination", "forced_status", "kind"}
CONFIG_KEYS = _FLOAT_KEYS | _INT_KEYS | _BOOL_KEYS | _LIST_FLOAT_KEYS | _LIST_INT_KEYS | _STR_KEYS


def parse_config_text(text: str) -> dict:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    out = {}
    for key, raw in parser["run"].items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            if key in _FLOAT_KEYS:
                out[key] = float(raw)
            elif key in _INT_KEYS:
                out[key] = int(raw)
            elif key in _BOOL_KEYS:
                out[key] = parser["run"].getboolean(key)
            elif key in _LIST_FLOAT_KEYS:
                out[key] = tuple(float(v) for v in raw.split(",") if v.strip())
            elif key in _LIST_INT_KEYS:
                out[key] = tuple(int(v) for v in raw.split(",") if v.strip())
            else:
                out[key] = raw.strip()
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
    return out


def load_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    return parse_config_text(text)


def _link_from(opts: dict) -> LinkEfficiencies:
    base = LinkEfficiencies()
    return replace(base, **{k: opts[k] for k in ("eta_el", "eta_lt", "eta_le") if k in opts})


def scheduler_config_from(opts: dict) -> SchedulerConfig:
    kwargs = {k: opts[k] for k in ("transmit_power", "n_receivers", "slot_seconds", "charge_hours", "variant",
                                   "termination", "initial_soc", "ideal_link", "rotate_partial") if k in opts}
    if "forced_status" in opts:
        try:
            kwargs["forced_status"] = WorkingStatus[opts["forced_status"].upper()]
        except KeyError:
            raise ConfigError(f"unknown working status {opts['forced_status']!r}") from None
    if "initial_soc" in opts and "n_receivers" not in opts:
        kwargs["n_receivers"] = len(opts["initial_soc"])
    try:
        return SchedulerConfig(link=_link_from(opts), **kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def sweep_config_from(kind: str, opts: dict) -> SweepConfig:
    keys = ("receiver_counts", "transmit_powers", "checkpoints", "trials", "seed", "termination", "slot_seconds",
            "ideal_link", "rotate_partial", "jobs")
    kwargs = {k: opts[k] for k in keys if k in opts}
    if "variants" in opts:
        kwargs["variants"] = opts["variants"]
    if kind == "power" and "charge_hours" in opts:
        kwargs["checkpoints"] = (opts["charge_hours"],)
    if kind == "time" and "transmit_power" in opts:
        kwargs["transmit_powers"] = (opts["transmit_power"],)
    try:
        return SweepConfig.defaults(kind, link=_link_from(opts), **kwargs)
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
