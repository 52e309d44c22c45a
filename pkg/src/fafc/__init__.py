"""Discrete-slot simulator of first-access-first-charge scheduling for multi-receiver beam charging."""

from .battery import (DEFAULT_BATTERY, R44, R45, BatterySpec, ChargeProfile, ProfileParams,
                      RationalFitCoefficients, StandardPairs, energy_to_soc, eval_rational_fit, fit_rmse,
                      fit_square_errors, preferred_power, profile_energy, profile_power, soc_to_energy,
                      standard_pairs, synthesize_cc_cv_profile)
from .discharge import WorkingStatus, make_stream, sample_discharge, sample_discharge_vector
from .errors import ConfigError, DomainError, SimulationError, SingularityError
from .harness import (AggregateResult, SweepConfig, emit_csv, power_sweep, run_trials, time_sweep,
                      validate_fits)
from .link import LinkEfficiencies, PowerChain, overall_efficiency, power_chain
from .scheduler import (Receiver, SchedulerConfig, SlotAllocation, TerminationMode, TerminationReason, Trace,
                        allocate_slot, apply_slot, check_termination, init_receivers, rotate_queue,
                        run_simulation)

__version__ = "0.1.0"
