"""First-order-lag measurement channels and the sensor-lag error budget.

A channel profiling at speed v through a vertical gradient dX/dz lags the
true value by roughly theta*v*dX/dz once transients die out; that product
against the WOCE accuracy limits is what selects the speed mode.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .errors import DomainError, NumericalFailure
from .numerics import FirstOrderDiscrete, discrete_step, tustin_first_order

THETA_SBE = 0.065  # s, SBE thermistor time constant; default for all channels


@dataclass
class SensorChannel:
    """Unity-DC-gain first-order lag, optionally with additive Gaussian noise.

    Carries filter and RNG state: single-owner, do not share across
    concurrent runs.
    """

    theta: float = THETA_SBE
    t_s: float = 0.1
    noise_sd: float = 0.0
    seed: int = 0
    lag_block: FirstOrderDiscrete = field(init=False, repr=False)
    _rng: random.Random = field(init=False, repr=False)

    def __post_init__(self):
        if self.theta <= 0.0:
            raise DomainError(f"theta must be positive, got {self.theta}")
        if self.noise_sd < 0.0:
            raise DomainError(f"noise_sd must be non-negative, got {self.noise_sd}")
        self.lag_block = tustin_first_order(self.theta, 1.0, self.t_s)
        self._rng = random.Random(self.seed)

    def prime(self, value: float) -> None:
        """Settle the channel as if ``value`` had been applied forever."""
        self.lag_block.reset(value)

    def measure(self, true_value: float) -> float:
        if not math.isfinite(true_value):
            raise NumericalFailure("sensor input", true_value)
        out = discrete_step(self.lag_block, true_value)
        if self.noise_sd > 0.0:
            out += self._rng.gauss(0.0, self.noise_sd)
        return out


def measure(channel: SensorChannel, true_value: float) -> float:
    return channel.measure(true_value)


@dataclass(frozen=True)
class WoceBudget:
    """WOCE accuracy limits used as the speed-mode selection criterion."""

    d_sp: float = 0.002  # practical salinity
    d_t: float = 0.002   # degC
    d_p: float = 3.0     # dbar
    d_h: float = 3.0     # m, depth assignment

    def __post_init__(self):
        for name in ("d_sp", "d_t", "d_p", "d_h"):
            if getattr(self, name) <= 0.0:
                raise DomainError(f"{name} must be strictly positive")

    def limit_for(self, channel: str) -> float:
        limits = {"salinity": self.d_sp, "temperature": self.d_t,
                  "pressure": self.d_p, "depth": self.d_h}
        try:
            return limits[channel]
        except KeyError:
            raise DomainError(f"unknown budget channel '{channel}'; "
                              f"expected one of {sorted(limits)}") from None


def dynamic_error_estimate(theta: float, speed: float, vertical_gradient: float) -> float:
    """Quasi-steady lag error theta*v*|dX/dz| of a first-order sensor."""
    return theta * speed * abs(vertical_gradient)


@dataclass(frozen=True)
class ComplianceRow:
    channel: str
    estimate: float
    limit: float
    passed: bool


def woce_compliance(budget: WoceBudget, errors: dict[str, float]) -> list[ComplianceRow]:
    """Compare per-channel error estimates against the budget limits."""
    rows = []
    for channel, estimate in errors.items():
        limit = budget.limit_for(channel)
        rows.append(ComplianceRow(channel, estimate, limit, estimate <= limit))
    return rows


def compliance_table(rows: list[ComplianceRow]) -> str:
    """Human-readable fixed-width table of a compliance report."""
    lines = [f"{'channel':<12} {'estimate':>12} {'limit':>10}  result"]
    for r in rows:
        verdict = "pass" if r.passed else "FAIL"
        lines.append(f"{r.channel:<12} {r.estimate:>12.6g} {r.limit:>10.6g}  {verdict}")
    return "\n".join(lines)
