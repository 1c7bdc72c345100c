"""Vertical motion of the buoy and its electro-hydraulic buoyancy actuator.

Conventions: depth z and speed v are positive downward, so a diving buoy
has v > 0.  The net buoyancy residual f_p(z) = g*(1 - rho(z)/rho_ref) is
negative (upward) in water denser than the neutral reference.  Control
voltage u extends the piston through a first-order lag; positive u grows
the chamber volume and pushes the buoy upward, hence the -b*u term in the
acceleration.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .environment import StratificationProfile
from .errors import DomainError, NumericalFailure
from .numerics import rk4_step

log = logging.getLogger(__name__)


class ActuatorMode(Enum):
    # PHYSICAL drives the hull with the lagged piston position, -(b/k_e)*l;
    # BYPASS applies -b*u directly (pure equation-of-motion mode).
    PHYSICAL = "physical"
    BYPASS = "bypass"


@dataclass(frozen=True)
class BuoyParams:
    """Physical constants of the hull and buoyancy engine.

    The derived coefficients are always recomputed from the primitives:
    a = c_x*s_m/(2*v0), b = s_c*g*k_e/v0, u_max = l_max/k_e.  Passing
    explicit derived values that disagree with the primitives is an error.
    """

    c_x: float = 0.82       # drag coefficient
    s_m: float = 0.0227     # m^2, maximal hull cross-section
    s_c: float = 0.0227     # m^2, buoyancy-chamber cross-section
    v0: float = 0.025       # m^3, reference hull volume
    l_max: float = 0.04     # m, full piston travel
    t_e: float = 2.0        # s, actuator time constant
    k_e: float = 0.004      # m/V, actuator transmission coefficient
    g: float = 9.81         # m/s^2
    a: float = field(default=None)      # 1/m
    b: float = field(default=None)      # (m/s^2)/V
    u_max: float = field(default=None)  # V

    def __post_init__(self):
        for name in ("c_x", "s_m", "s_c", "v0", "l_max", "t_e", "k_e", "g"):
            if getattr(self, name) <= 0.0:
                raise DomainError(f"{name} must be strictly positive, got {getattr(self, name)}")
        a = self.c_x * self.s_m / (2.0 * self.v0)
        b = self.s_c * self.g * self.k_e / self.v0
        u_max = self.l_max / self.k_e
        for name, derived in (("a", a), ("b", b), ("u_max", u_max)):
            given = getattr(self, name)
            if given is not None and not math.isclose(given, derived, rel_tol=1e-12):
                raise DomainError(
                    f"inconsistent derived coefficient {name}: given {given}, "
                    f"primitives yield {derived}")
            object.__setattr__(self, name, derived)

    def chamber_volume(self, l: float) -> float:
        """Buoyancy-chamber volume at piston displacement l from neutral."""
        if abs(l) > 0.5 * self.l_max:
            raise DomainError(f"|l| = {abs(l)} exceeds half travel {0.5 * self.l_max}")
        return self.s_c * (l + 0.5 * self.l_max)


@dataclass(frozen=True)
class BuoyState:
    z: float = 0.0  # m, depth (positive down)
    v: float = 0.0  # m/s, sinking speed
    l: float = 0.0  # m, piston displacement from neutral
    t: float = 0.0  # s


def drag_accel(params: BuoyParams, v: float, v_l: float = 0.0) -> float:
    """Quadratic drag acceleration -a*|v - v_l|*(v - v_l); opposes relative motion."""
    rel = v - v_l
    return -params.a * abs(rel) * rel


def forcing(params: BuoyParams, profile: StratificationProfile, z: float) -> float:
    """Net buoyancy residual f_p(z) = g*(1 - rho(z)/rho_ref).

    Zero exactly at the neutral reference density, negative (upward) in
    denser water.
    """
    return params.g * (1.0 - profile.density(z) / profile.rho_ref)


def actuator_derivative(params: BuoyParams, l: float, u: float) -> float:
    """Piston rate (k_e*u - l)/T_e with hard stops at +-l_max/2.

    The regulator keeps |u| <= u_max/2; out-of-bound commands are clamped
    here as defense in depth.  At a hard stop the rate is zeroed only in
    the violating direction.
    """
    half_u = 0.5 * params.u_max
    if u > half_u or u < -half_u:
        log.debug("control %.6g V outside +-%.6g V, clamping", u, half_u)
        u = half_u if u > half_u else -half_u
    rate = (params.k_e * u - l) / params.t_e
    half_l = 0.5 * params.l_max
    if l >= half_l and rate > 0.0:
        return 0.0
    if l <= -half_l and rate < 0.0:
        return 0.0
    return rate


def state_derivative(params: BuoyParams, profile: StratificationProfile,
                     state: BuoyState, u: float,
                     actuator_mode: ActuatorMode = ActuatorMode.BYPASS) -> tuple[float, float, float]:
    """(dz/dt, dv/dt, dl/dt) of the coupled hull + actuator system."""
    z = max(state.z, 0.0)  # RK4 stage points may poke above the clamped surface
    v_l = profile.local_velocity(z)
    accel = drag_accel(params, state.v, v_l) + forcing(params, profile, z)
    if actuator_mode is ActuatorMode.PHYSICAL:
        accel -= (params.b / params.k_e) * state.l
    else:
        half_u = 0.5 * params.u_max
        accel -= params.b * min(max(u, -half_u), half_u)
    return state.v, accel, actuator_derivative(params, state.l, u)


def terminal_velocity(params: BuoyParams, f_p: float, u: float = 0.0) -> float:
    """Steady speed where drag balances the net forcing, from setting the
    acceleration to zero: sign(f_p - b*u)*sqrt(|f_p - b*u|/a)."""
    net = f_p - params.b * u
    return math.copysign(math.sqrt(abs(net) / params.a), net)


def clamp_state(params: BuoyParams, state: tuple[float, float, float]) -> tuple[float, float, float]:
    """Hard piston stops and the surface clamp, applied after a step."""
    z, v, l = state
    half_l = 0.5 * params.l_max
    if l > half_l:
        l = half_l
    elif l < -half_l:
        l = -half_l
    if z < 0.0:
        z = 0.0
        if v < 0.0:  # no bobbing above the surface
            v = 0.0
    return z, v, l


def integrate_step(params: BuoyParams, profile: StratificationProfile,
                   state: BuoyState, u: float, dt: float,
                   actuator_mode: ActuatorMode = ActuatorMode.BYPASS) -> BuoyState:
    """One RK4 step of the full state with u held, clamps applied after."""
    def deriv(t, y, uu):
        return state_derivative(params, profile, BuoyState(y[0], y[1], y[2], t), uu,
                                actuator_mode)

    z, v, l = rk4_step(deriv, state.t, (state.z, state.v, state.l), u, dt,
                       clamp_fn=lambda y: clamp_state(params, y))
    return BuoyState(z, v, l, state.t + dt)


def advance(params: BuoyParams, profile: StratificationProfile,
            z: float, v: float, l: float, u: float, dt: float, n_sub: int,
            actuator_mode: ActuatorMode = ActuatorMode.BYPASS) -> tuple[float, float, float]:
    """Advance (z, v, l) by n_sub RK4 substeps of size dt with u held.

    Inlined equivalent of repeated ``integrate_step`` for the simulation
    hot loop; kept numerically identical (a consistency test enforces it).
    """
    a = params.a
    b = params.b
    k_e = params.k_e
    inv_te = 1.0 / params.t_e
    g = params.g
    rho_ref = profile.rho_ref
    density = profile.density
    v_l_fn = profile.v_l_fn
    half_l = 0.5 * params.l_max
    half_u = 0.5 * params.u_max
    if u > half_u or u < -half_u:
        log.debug("control %.6g V outside +-%.6g V, clamping", u, half_u)
        u = half_u if u > half_u else -half_u
    physical = actuator_mode is ActuatorMode.PHYSICAL
    u_force = b * u  # constant over the hold interval in bypass mode
    l_target = k_e * u

    def deriv(zi: float, vi: float, li: float) -> tuple[float, float, float]:
        if zi < 0.0:  # stage points may poke above the clamped surface
            zi = 0.0
        rel = vi - v_l_fn(zi) if v_l_fn is not None else vi
        accel = -a * abs(rel) * rel + g * (1.0 - density(zi) / rho_ref)
        if physical:
            accel -= (b / k_e) * li
        else:
            accel -= u_force
        dl = (l_target - li) * inv_te
        if li >= half_l and dl > 0.0:
            dl = 0.0
        elif li <= -half_l and dl < 0.0:
            dl = 0.0
        return vi, accel, dl

    half = 0.5 * dt
    sixth = dt / 6.0
    for _ in range(n_sub):
        dz1, dv1, dl1 = deriv(z, v, l)
        dz2, dv2, dl2 = deriv(z + half * dz1, v + half * dv1, l + half * dl1)
        dz3, dv3, dl3 = deriv(z + half * dz2, v + half * dv2, l + half * dl2)
        dz4, dv4, dl4 = deriv(z + dt * dz3, v + dt * dv3, l + dt * dl3)
        z += sixth * (dz1 + 2.0 * (dz2 + dz3) + dz4)
        v += sixth * (dv1 + 2.0 * (dv2 + dv3) + dv4)
        l += sixth * (dl1 + 2.0 * (dl2 + dl3) + dl4)
        if l > half_l:
            l = half_l
        elif l < -half_l:
            l = -half_l
        if z < 0.0:
            z = 0.0
            if v < 0.0:
                v = 0.0
    for name, value in (("z", z), ("v", v), ("l", l)):
        if not math.isfinite(value):
            raise NumericalFailure(name, value)
    return z, v, l
