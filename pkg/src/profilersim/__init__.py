"""profilersim: closed-loop simulator for a buoyancy-driven ocean profiler.

A diving buoy with an adjustable buoyancy chamber descends through a
stratified water column under a two-circuit control system: an inner speed
regulator and an outer supervisor that drops from the fast cruising mode
to the slow measuring mode wherever the measured density gradient spikes,
keeping sensor-lag distortion inside the WOCE accuracy budget.
"""

from .control import (Mode, RegulatorConfig, SpeedEstimator, SpeedRefs, SpeedRegulator,
                      Supervisor, SupervisorConfig, reference_speed, update_fp_estimate)
from .dynamics import (ActuatorMode, BuoyParams, BuoyState, actuator_derivative, advance,
                       drag_accel, forcing, integrate_step, state_derivative,
                       terminal_velocity)
from .environment import (ProfileKind, StratificationProfile, density_at,
                          density_gradient, relative_density_change)
from .errors import (ConfigError, ContractError, DomainError, NumericalFailure,
                     OutOfRangeError, ProfilerSimError)
from .numerics import FirstOrderDiscrete, discrete_step, rk4_step, tustin_first_order
from .sensing import (ComplianceRow, SensorChannel, WoceBudget, compliance_table,
                      dynamic_error_estimate, measure, woce_compliance)
from .scenario import (RunResult, Scenario, SensorSettings, StopCondition, StrategyReport,
                       TraceRecord, compare_strategies, format_comparison, format_summary,
                       format_trace, profile_time_estimate, run, summarize)
from .config import (BUILTIN_SCENARIOS, DEFAULTS, build_scenario, dump_toml,
                     load_scenario, parse_config, resolve_config)

__version__ = "0.1.0"
