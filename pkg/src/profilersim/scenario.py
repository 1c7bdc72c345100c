"""Closed-loop scenario runner.

Per controller sample: read sensors, step the mode supervisor, pick the
speed reference, run the regulator, then hold the control over the plant
substeps.  Runs are strictly sequential and deterministic: the same
scenario and seed reproduce the trace bit for bit.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Optional

from .control import (Mode, RegulatorConfig, SpeedEstimator, SpeedRefs, SpeedRegulator,
                      Supervisor, SupervisorConfig, reference_speed, update_fp_estimate)
from .dynamics import ActuatorMode, BuoyParams, advance, forcing
from .environment import StratificationProfile
from .errors import DomainError, NumericalFailure
from .sensing import ComplianceRow, SensorChannel, WoceBudget, dynamic_error_estimate, woce_compliance

TRACE_HEADER = "t,z,v,l,u,rho_true,rho_meas,grad_est,f_p_hat,mode,v_ref"


@dataclass(frozen=True)
class SensorSettings:
    theta_density: float = 0.065
    theta_depth: float = 0.065
    theta_temperature: float = 0.065
    noise_sd_density: float = 0.0
    noise_sd_depth: float = 0.0
    seed: int = 0
    speed_smoothing_T: float = 0.5
    v_meas_source: str = "differenced"  # or "exact"
    fp_source: str = "measured"         # or "exact"
    temp_gradient_ref: float = 0.3      # degC/m used for the WOCE screening rows
    temp_per_density: float = 4.0       # degC per kg/m^3, maps drho/dz to dT/dz


@dataclass(frozen=True)
class StopCondition:
    kind: str = "time_up"  # time_up | depth_reached | surfaced
    depth: Optional[float] = None


@dataclass(frozen=True)
class Scenario:
    name: str
    params: BuoyParams
    profile: StratificationProfile
    regulator: RegulatorConfig
    supervisor: SupervisorConfig
    speeds: SpeedRefs
    sensors: SensorSettings
    t_s: float
    plant_dt: float
    t_end: float
    z0: float
    v0: float
    stop: StopCondition
    actuator_mode: ActuatorMode
    mode_control: str = "auto"  # auto | fixed_cruise | fixed_measure
    v_ref_override: Optional[float] = None

    @property
    def n_substeps(self) -> int:
        return round(self.t_s / self.plant_dt)


@dataclass(frozen=True)
class TraceRecord:
    t: float
    z: float
    v: float
    l: float
    u: float
    rho_true: float
    rho_meas: float
    grad_est: float
    f_p_hat: float
    mode: str
    v_ref: float


@dataclass
class RunResult:
    scenario: Scenario
    records: list[TraceRecord]
    transitions: list[tuple[float, str, str]]
    stop_reason: str
    wall_time_s: float
    summary: dict = field(default_factory=dict)


def run(scenario: Scenario) -> RunResult:
    """Simulate one scenario and return its trace plus summary metrics."""
    sc = scenario
    t_s = sc.t_s
    n_sub = sc.n_substeps
    params = sc.params
    profile = sc.profile
    ss = sc.sensors
    g = params.g
    rho_ref = profile.rho_ref

    density_ch = SensorChannel(ss.theta_density, t_s, ss.noise_sd_density, ss.seed)
    depth_ch = SensorChannel(ss.theta_depth, t_s, ss.noise_sd_depth, ss.seed + 1)
    supervisor = Supervisor(sc.supervisor)
    regulator = SpeedRegulator(sc.regulator, params)
    speed_est = SpeedEstimator(t_s, ss.speed_smoothing_T)

    z, v, l = sc.z0, sc.v0, 0.0
    density_ch.prime(profile.density(z))
    depth_ch.prime(z)
    speed_est.prime(z, v)

    exact_speed = ss.v_meas_source == "exact"
    exact_fp = ss.fp_source == "exact"
    fixed_mode = {"auto": None,
                  "fixed_cruise": Mode.CRUISE,
                  "fixed_measure": Mode.MEASURE}[sc.mode_control]

    # epsilon shields floor() from float division noise (60/0.1 = 599.99...)
    n_samples = math.floor(sc.t_end / t_s + 1e-9) + 1
    records: list[TraceRecord] = []
    transitions: list[tuple[float, str, str]] = []
    stop_reason = "time_up"
    prev_mode = None
    started = time.perf_counter()

    try:
        for k in range(n_samples):
            t = k * t_s
            rho_true = profile.density(z)
            rho_meas = density_ch.measure(rho_true)
            z_meas = depth_ch.measure(z)
            v_meas = v if exact_speed else speed_est.step(z_meas)
            sup_mode = supervisor.step(rho_meas, z_meas, t)
            mode = fixed_mode if fixed_mode is not None else sup_mode
            if sc.v_ref_override is not None:
                v_ref = sc.v_ref_override
            else:
                v_ref = reference_speed(mode, sc.speeds)
            if exact_fp:
                f_p_hat = forcing(params, profile, z)
            else:
                f_p_hat = update_fp_estimate(rho_meas, rho_ref, g)
            u = regulator.step(v_ref, v_meas, f_p_hat)

            if prev_mode is not None and mode != prev_mode:
                transitions.append((t, prev_mode, mode))
            prev_mode = mode
            records.append(TraceRecord(t, z, v, l, u, rho_true, rho_meas,
                                       supervisor.grad_estimate, f_p_hat, mode, v_ref))

            if sc.stop.kind == "depth_reached" and z >= sc.stop.depth:
                stop_reason = "depth_reached"
                break
            if sc.stop.kind == "surfaced" and k > 0 and z <= 0.0:
                stop_reason = "surfaced"
                break
            z, v, l = advance(params, profile, z, v, l, u, sc.plant_dt, n_sub,
                              sc.actuator_mode)
    except NumericalFailure as failure:
        failure.record_index = len(records) - 1
        raise

    result = RunResult(sc, records, transitions, stop_reason,
                       time.perf_counter() - started)
    result.summary = summarize(result)
    return result


def summarize(result: RunResult) -> dict:
    """Flat summary metrics for a finished run."""
    sc = result.scenario
    recs = result.records
    t_s = sc.t_s
    time_in = {Mode.CRUISE: 0.0, Mode.MEASURE: 0.0}
    depth_in = {Mode.CRUISE: 0.0, Mode.MEASURE: 0.0}
    max_u = 0.0
    max_l = 0.0
    z_max = 0.0
    for i, r in enumerate(recs):
        time_in[r.mode] += t_s
        if i + 1 < len(recs):
            depth_in[r.mode] += max(recs[i + 1].z - r.z, 0.0)
        max_u = max(max_u, abs(r.u))
        max_l = max(max_l, abs(r.l))
        z_max = max(z_max, r.z)
    last = recs[-1]
    summary = {
        "scenario": sc.name,
        "stop_reason": result.stop_reason,
        "samples": len(recs),
        "t_final_s": last.t,
        "z_final_m": last.z,
        "z_max_m": z_max,
        "time_cruise_s": time_in[Mode.CRUISE],
        "time_measure_s": time_in[Mode.MEASURE],
        "depth_cruise_m": depth_in[Mode.CRUISE],
        "depth_measure_m": depth_in[Mode.MEASURE],
        "max_abs_u_V": max_u,
        "max_abs_l_m": max_l,
        "mode_transitions": len(result.transitions),
        "wall_time_s": round(result.wall_time_s, 3),
    }
    for i, (t, frm, to) in enumerate(result.transitions):
        summary[f"transition_{i}"] = f"t={t:.9g}s {frm}->{to}"
    budget = WoceBudget()
    ss = sc.sensors
    for mode, speed in ((Mode.CRUISE, sc.speeds.cruise), (Mode.MEASURE, sc.speeds.measure)):
        if time_in[mode] == 0.0:
            continue
        rows = woce_compliance(budget, {
            "temperature": dynamic_error_estimate(ss.theta_temperature, speed,
                                                  ss.temp_gradient_ref),
            "depth": ss.theta_temperature * speed,
        })
        for row in rows:
            verdict = "pass" if row.passed else "FAIL"
            summary[f"woce_{mode}_{row.channel}"] = (
                f"{row.estimate:.9g} vs {row.limit:.9g} {verdict}")
    return summary


def format_summary(summary: dict) -> str:
    return "\n".join(f"{key} = {value}" for key, value in summary.items()) + "\n"


def format_trace(records: list[TraceRecord]) -> str:
    """Trace CSV: one row per sample, floats at 9 significant digits."""
    lines = [TRACE_HEADER]
    for r in records:
        lines.append(
            f"{r.t:.9g},{r.z:.9g},{r.v:.9g},{r.l:.9g},{r.u:.9g},{r.rho_true:.9g},"
            f"{r.rho_meas:.9g},{r.grad_est:.9g},{r.f_p_hat:.9g},{r.mode},{r.v_ref:.9g}")
    return "\n".join(lines) + "\n"


def profile_time_estimate(depth: float, speed: float) -> float:
    """Kinematic profiling duration depth/speed, ignoring transients."""
    if speed <= 0.0:
        raise DomainError(f"speed must be positive, got {speed}")
    if depth < 0.0:
        raise DomainError(f"depth must be non-negative, got {depth}")
    return depth / speed


@dataclass(frozen=True)
class StrategyReport:
    strategy: str
    total_time_s: float
    measure_depth_fraction: float
    woce_violation_fraction: float
    samples: int


def _violation_fraction(result: RunResult) -> float:
    """Fraction of samples whose temperature lag error exceeds the budget.

    Uses the true local gradient (physical distortion, not the control
    system's estimate), scaled to a temperature gradient.
    """
    sc = result.scenario
    ss = sc.sensors
    budget = WoceBudget()
    profile = sc.profile
    violating = 0
    for r in result.records:
        grad_t = abs(profile.gradient(r.z)) * ss.temp_per_density
        err = dynamic_error_estimate(ss.theta_temperature, abs(r.v), grad_t)
        if err > budget.d_t:
            violating += 1
    return violating / len(result.records)


def compare_strategies(scenario: Scenario) -> tuple[list[StrategyReport], dict[str, RunResult]]:
    """Run the same profile all-measuring, all-cruising, and adaptive.

    Reports total simulated time, the fraction of depth covered in
    measuring mode, and the fraction of WOCE-violating samples for each.
    """
    variants = {
        "all_measuring": replace(scenario, mode_control="fixed_measure"),
        "all_cruising": replace(scenario, mode_control="fixed_cruise"),
        "adaptive": replace(scenario, mode_control="auto"),
    }
    reports = []
    results = {}
    for label, variant in variants.items():
        result = run(variant)
        results[label] = result
        total_depth = max(result.summary["z_max_m"] - variant.z0, 1e-12)
        reports.append(StrategyReport(
            strategy=label,
            total_time_s=result.summary["t_final_s"],
            measure_depth_fraction=result.summary["depth_measure_m"] / total_depth,
            woce_violation_fraction=_violation_fraction(result),
            samples=result.summary["samples"],
        ))
    return reports, results


def format_comparison(reports: list[StrategyReport]) -> str:
    lines = [f"{'strategy':<14} {'total_time_s':>12} {'measure_frac':>13} "
             f"{'woce_viol_frac':>15} {'samples':>9}"]
    for r in reports:
        lines.append(f"{r.strategy:<14} {r.total_time_s:>12.9g} "
                     f"{r.measure_depth_fraction:>13.4f} "
                     f"{r.woce_violation_fraction:>15.5f} {r.samples:>9}")
    return "\n".join(lines)
