"""Two-circuit speed-mode control.

Inner loop: a speed regulator holding the commanded vertical speed, fed a
buoyancy-residual estimate from the measured density (the adaptation
channel).  Outer loop: a supervisor watching the measured density gradient
that switches the speed reference between a fast cruising mode and a slow
measuring mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .dynamics import BuoyParams
from .errors import ContractError, DomainError, NumericalFailure
from .numerics import FirstOrderDiscrete, discrete_step, tustin_first_order


class Mode:
    CRUISE = "cruise"
    MEASURE = "measure"


@dataclass(frozen=True)
class SpeedRefs:
    cruise: float = 1.0   # m/s
    measure: float = 0.1  # m/s

    def __post_init__(self):
        if self.cruise <= 0.0 or self.measure <= 0.0:
            raise DomainError("reference speeds must be positive")


def reference_speed(mode: str, speeds: SpeedRefs = SpeedRefs()) -> float:
    if mode == Mode.CRUISE:
        return speeds.cruise
    if mode == Mode.MEASURE:
        return speeds.measure
    raise DomainError(f"unknown mode '{mode}'")


@dataclass(frozen=True)
class RegulatorConfig:
    law: str = "inverse_dynamics"  # or "pi"
    lam: float = 0.5               # 1/s, error-decay rate of the inverse law
    kp: float = 8.0                # V/(m/s)
    ki: float = 2.0                # V/m
    u_max: float = 10.0            # V, from BuoyParams
    t_s: float = 0.1               # s

    def __post_init__(self):
        if self.law not in ("inverse_dynamics", "pi"):
            raise DomainError(f"unknown regulator law '{self.law}'")
        if self.lam <= 0.0:
            raise DomainError(f"lambda must be positive, got {self.lam}")
        if self.kp <= 0.0:
            raise DomainError(f"kp must be positive, got {self.kp}")
        if self.ki < 0.0:
            raise DomainError(f"ki must be non-negative, got {self.ki}")
        if self.u_max <= 0.0 or self.t_s <= 0.0:
            raise DomainError("u_max and t_s must be positive")


class SpeedRegulator:
    """Discrete-time speed regulator, output clamped to +-u_max/2.

    The inverse-dynamics law cancels the modelled drag and buoyancy
    residual and imposes first-order error decay at rate lambda:

        u = (f_p_hat - a*|v|*v - lambda*(v_ref - v)) / b

    The PI fallback uses trapezoidal integral accumulation with the
    integrator frozen while the output saturates.
    """

    def __init__(self, cfg: RegulatorConfig, params: BuoyParams):
        self.cfg = cfg
        self.params = params
        self._integral = 0.0
        self._e_prev = 0.0

    def reset(self) -> None:
        self._integral = 0.0
        self._e_prev = 0.0

    def step(self, v_ref: float, v_meas: float, f_p_hat: float = 0.0) -> float:
        for name, x in (("v_ref", v_ref), ("v_meas", v_meas), ("f_p_hat", f_p_hat)):
            if not math.isfinite(x):
                raise NumericalFailure(name, x)
        half_u = 0.5 * self.cfg.u_max
        if self.cfg.law == "inverse_dynamics":
            p = self.params
            u_raw = (f_p_hat - p.a * abs(v_meas) * v_meas
                     - self.cfg.lam * (v_ref - v_meas)) / p.b
            return min(max(u_raw, -half_u), half_u)
        # PI: positive error (too slow) must push u negative (downward force)
        e = v_ref - v_meas
        integral_try = self._integral + 0.5 * self.cfg.t_s * (e + self._e_prev)
        u_raw = -(self.cfg.kp * e + self.cfg.ki * integral_try)
        if -half_u <= u_raw <= half_u:
            self._integral = integral_try
            u = u_raw
        else:
            u = half_u if u_raw > half_u else -half_u
        self._e_prev = e
        return u


def update_fp_estimate(rho_meas: float, rho_ref: float, g: float = 9.81) -> float:
    """Adaptation channel: buoyancy residual implied by the measured density."""
    if rho_meas <= 0.0:
        raise DomainError(f"measured density must be positive, got {rho_meas}")
    if rho_ref <= 0.0:
        raise DomainError(f"reference density must be positive, got {rho_ref}")
    return g * (1.0 - rho_meas / rho_ref)


@dataclass
class SupervisorConfig:
    trigger_threshold: float = 0.02  # kg/m^4
    rho_ref: float = 1022.0          # kg/m^3
    dwell_s: float = 300.0           # min time in Measure after the last trigger
    quiet_window_s: float = 60.0     # trailing quiet time required to leave Measure
    trigger_on: str = "gradient"     # or "deviation" (absolute offset from rho_ref)
    deviation_threshold: float = 1.0  # kg/m^3, used by the deviation metric

    def __post_init__(self):
        if self.trigger_threshold <= 0.0:
            raise DomainError("trigger_threshold must be positive")
        if self.rho_ref <= 0.0:
            raise DomainError("rho_ref must be positive")
        if self.dwell_s < 0.0:
            raise DomainError("dwell_s must be >= 0")
        if self.quiet_window_s < 0.0:
            raise DomainError("quiet_window_s must be >= 0")
        if self.trigger_on not in ("gradient", "deviation"):
            raise DomainError(f"unknown trigger metric '{self.trigger_on}'")
        if self.deviation_threshold <= 0.0:
            raise DomainError("deviation_threshold must be positive")


class Supervisor:
    """Cruise/Measure switch driven by the measured density.

    The gradient is estimated by backward-differencing measured density
    over measured depth; the true profile is never consulted.  Leaving
    Measure requires both the dwell since the last trigger and a quiet
    trailing window; re-entering Measure right after a return is held off
    for min(dwell, quiet window) so the mode cannot chatter.
    """

    MIN_DELTA_Z = 1e-6  # m; below this the previous gradient estimate is held

    def __init__(self, cfg: SupervisorConfig):
        self.cfg = cfg
        self.mode = Mode.CRUISE
        self.last_trigger_t = -math.inf
        self.grad_estimate = 0.0
        self._prev_rho = None
        self._prev_z = None
        self._last_t = -math.inf
        self._entered_cruise_t = -math.inf  # -inf: initial mode, no re-entry hold

    def step(self, rho_meas: float, z: float, t: float) -> str:
        if t < self._last_t:
            raise ContractError(f"time ran backwards: {t} after {self._last_t}")
        self._last_t = t

        if self._prev_rho is not None and abs(z - self._prev_z) >= self.MIN_DELTA_Z:
            self.grad_estimate = (rho_meas - self._prev_rho) / (z - self._prev_z)
        self._prev_rho = rho_meas
        self._prev_z = z

        cfg = self.cfg
        if cfg.trigger_on == "gradient":
            exceeded = abs(self.grad_estimate) >= cfg.trigger_threshold
        else:
            exceeded = abs(rho_meas - cfg.rho_ref) >= cfg.deviation_threshold

        if exceeded:
            self.last_trigger_t = t
            if self.mode == Mode.CRUISE:
                hold = min(cfg.dwell_s, cfg.quiet_window_s)
                if t - self._entered_cruise_t >= hold:
                    self.mode = Mode.MEASURE
        elif self.mode == Mode.MEASURE:
            since = t - self.last_trigger_t
            if since >= cfg.dwell_s and since >= cfg.quiet_window_s:
                self.mode = Mode.CRUISE
                self._entered_cruise_t = t
        return self.mode


class SpeedEstimator:
    """Sinking-speed estimate from the depth channel.

    Backward difference of measured depth across one sample, smoothed by a
    Tustin-discretized first-order lag.
    """

    def __init__(self, t_s: float, smoothing_T: float = 0.5):
        if smoothing_T <= 0.0:
            raise DomainError("smoothing time constant must be positive")
        self.t_s = t_s
        self._smooth: FirstOrderDiscrete = tustin_first_order(smoothing_T, 1.0, t_s)
        self._prev_z = None

    def prime(self, z0: float, v0: float = 0.0) -> None:
        self._prev_z = z0
        self._smooth.reset(v0)

    def step(self, z_meas: float) -> float:
        if self._prev_z is None:
            self._prev_z = z_meas
        raw = (z_meas - self._prev_z) / self.t_s
        self._prev_z = z_meas
        return discrete_step(self._smooth, raw)
