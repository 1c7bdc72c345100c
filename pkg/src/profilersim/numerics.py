"""Fixed-step integration and bilinear (Tustin) discretization.

The plant is integrated with classical RK4 between controller samples,
holding the control constant (zero-order hold).  Continuous first-order
blocks (actuator model used by the controller, sensor lags, smoothing
filters) are converted to discrete recursions with the bilinear map
s <- (2/t_s)(z - 1)/(z + 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .errors import DomainError, NumericalFailure

StateVec = tuple[float, ...]
DerivFn = Callable[[float, StateVec, float], StateVec]


def rk4_step(derivative_fn: DerivFn, t: float, state: Sequence[float], u: float,
             dt: float, clamp_fn: Optional[Callable[[StateVec], StateVec]] = None) -> StateVec:
    """One classical 4-stage Runge-Kutta step with u held constant.

    ``clamp_fn``, when given, is applied to the combined state after the
    step (piston hard stops, surface clamp).  Raises NumericalFailure if
    the result is non-finite.
    """
    if dt <= 0.0:
        raise DomainError(f"dt must be positive, got {dt}")
    y = tuple(state)
    k1 = derivative_fn(t, y, u)
    half = 0.5 * dt
    k2 = derivative_fn(t + half, tuple(yi + half * ki for yi, ki in zip(y, k1)), u)
    k3 = derivative_fn(t + half, tuple(yi + half * ki for yi, ki in zip(y, k2)), u)
    k4 = derivative_fn(t + dt, tuple(yi + dt * ki for yi, ki in zip(y, k3)), u)
    sixth = dt / 6.0
    out = tuple(yi + sixth * (a + 2.0 * b + 2.0 * c + d)
                for yi, a, b, c, d in zip(y, k1, k2, k3, k4))
    if clamp_fn is not None:
        out = clamp_fn(out)
    for i, yi in enumerate(out):
        if not math.isfinite(yi):
            raise NumericalFailure(f"state[{i}]", yi)
    return out


@dataclass
class FirstOrderDiscrete:
    """Bilinear discretization of k/(T s + 1).

    Recursion: y[k] = a1*y[k-1] + b0*x[k] + b1*x[k-1].  Carries its own
    filter state (previous input/output); single-owner, not shared.
    """

    a1: float
    b0: float
    b1: float
    t_s: float
    x_prev: float = field(default=0.0)
    y_prev: float = field(default=0.0)

    def dc_gain(self) -> float:
        return (self.b0 + self.b1) / (1.0 - self.a1)

    def reset(self, steady_input: float = 0.0) -> None:
        """Set the filter state as if the input had been constant forever."""
        self.x_prev = steady_input
        self.y_prev = steady_input * self.dc_gain()


def tustin_first_order(T: float, k: float, t_s: float) -> FirstOrderDiscrete:
    """Discretize H(s) = k/(T s + 1) at sample period t_s.

    a1 = (2T - t_s)/(2T + t_s), b0 = b1 = k*t_s/(2T + t_s); the map keeps
    |a1| < 1 for any T, t_s > 0 and preserves the DC gain exactly.
    """
    if T <= 0.0:
        raise DomainError(f"time constant must be positive, got {T}")
    if t_s <= 0.0:
        raise DomainError(f"sample period must be positive, got {t_s}")
    den = 2.0 * T + t_s
    return FirstOrderDiscrete(a1=(2.0 * T - t_s) / den,
                              b0=k * t_s / den,
                              b1=k * t_s / den,
                              t_s=t_s)


def discrete_step(block: FirstOrderDiscrete, x: float) -> float:
    """Advance the recursion by one sample and return the output."""
    if not math.isfinite(x):
        raise NumericalFailure("filter input", x)
    y = block.a1 * block.y_prev + block.b0 * x + block.b1 * block.x_prev
    block.x_prev = x
    block.y_prev = y
    return y
