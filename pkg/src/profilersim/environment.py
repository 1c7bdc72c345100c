"""Vertical stratification of the water column.

Density profiles are immutable after construction and expose analytic
gradients; the dynamics module consumes them through ``density_at`` /
``density_gradient``.  Depth is positive downward, in metres.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

from .errors import DomainError, OutOfRangeError

DEFAULT_RHO_REF = 1022.0  # kg/m^3, neutral-buoyancy reference at half chamber
DEFAULT_Z_MAX = 2000.0    # m, sounding depth


class ProfileKind(Enum):
    CONSTANT = "constant"
    LINEAR_RAMP = "linear_ramp"
    TANH_PYCNOCLINE = "tanh_pycnocline"
    PIECEWISE_LINEAR = "piecewise_linear"
    TABLE_LOOKUP = "table_lookup"


@dataclass(frozen=True)
class StratificationProfile:
    """Density as a function of depth, with analytic gradient.

    ``rho_ref`` is the density at which the buoy is neutrally buoyant with
    the piston at half travel.  ``v_l_fn`` optionally supplies a local
    water velocity (m/s, positive down) used by the drag term; it defaults
    to still water.
    """

    kind: ProfileKind
    rho_ref: float = DEFAULT_RHO_REF
    z_max: float = DEFAULT_Z_MAX
    v_l_fn: Optional[Callable[[float], float]] = None
    # kind-specific; filled by the factory constructors
    _density: Callable[[float], float] = field(repr=False, default=None)
    _gradient: Callable[[float], float] = field(repr=False, default=None)

    # -- factories ---------------------------------------------------------

    @staticmethod
    def constant(rho: float = DEFAULT_RHO_REF, rho_ref: float = DEFAULT_RHO_REF,
                 z_max: float = DEFAULT_Z_MAX,
                 v_l_fn: Optional[Callable[[float], float]] = None) -> "StratificationProfile":
        if rho <= 0.0:
            raise DomainError(f"density must be positive, got {rho}")
        return StratificationProfile(ProfileKind.CONSTANT, rho_ref, z_max, v_l_fn,
                                     lambda z: rho, lambda z: 0.0)

    @staticmethod
    def linear_ramp(rho_surface: float, slope: float,
                    rho_ref: float = DEFAULT_RHO_REF, z_max: float = DEFAULT_Z_MAX,
                    v_l_fn: Optional[Callable[[float], float]] = None) -> "StratificationProfile":
        """Density rho_surface + slope*z, slope in kg/m^4."""
        if rho_surface <= 0.0:
            raise DomainError(f"surface density must be positive, got {rho_surface}")
        if rho_surface + slope * z_max <= 0.0:
            raise DomainError("density becomes non-positive inside the depth range")
        return StratificationProfile(ProfileKind.LINEAR_RAMP, rho_ref, z_max, v_l_fn,
                                     lambda z: rho_surface + slope * z,
                                     lambda z: slope)

    @staticmethod
    def tanh_pycnocline(rho_top: float, rho_bottom: float, z_center: float,
                        thickness: float, rho_ref: float = DEFAULT_RHO_REF,
                        z_max: float = DEFAULT_Z_MAX,
                        v_l_fn: Optional[Callable[[float], float]] = None) -> "StratificationProfile":
        """Smooth ramp between two mixed layers.

        rho(z) = mid + (delta/2) * tanh((z - z_center)/thickness), so the
        peak gradient is delta/(2*thickness) at z_center.
        """
        if rho_top <= 0.0 or rho_bottom <= 0.0:
            raise DomainError("layer densities must be positive")
        if thickness <= 0.0:
            raise DomainError(f"thickness must be positive, got {thickness}")
        mid = 0.5 * (rho_top + rho_bottom)
        half = 0.5 * (rho_bottom - rho_top)
        inv_w = 1.0 / thickness

        def density(z: float) -> float:
            return mid + half * math.tanh((z - z_center) * inv_w)

        def gradient(z: float) -> float:
            x = (z - z_center) * inv_w
            if abs(x) > 350.0:  # sech^2 underflows to 0 long before cosh overflows
                return 0.0
            sech = 1.0 / math.cosh(x)
            return half * inv_w * sech * sech

        return StratificationProfile(ProfileKind.TANH_PYCNOCLINE, rho_ref, z_max,
                                     v_l_fn, density, gradient)

    @staticmethod
    def piecewise_linear(knots: Sequence[tuple[float, float]],
                         rho_ref: float = DEFAULT_RHO_REF, z_max: float = DEFAULT_Z_MAX,
                         v_l_fn: Optional[Callable[[float], float]] = None,
                         kind: ProfileKind = ProfileKind.PIECEWISE_LINEAR) -> "StratificationProfile":
        """Linear interpolation between (depth, density) knots.

        Knots must be strictly increasing in depth; the profile extends
        flat beyond the first and last knot.
        """
        if len(knots) < 1:
            raise DomainError("at least one knot required")
        zs = [float(z) for z, _ in knots]
        rhos = [float(r) for _, r in knots]
        for i in range(1, len(zs)):
            if zs[i] <= zs[i - 1]:
                raise DomainError(
                    f"knot depths must be strictly increasing, got {zs[i - 1]} then {zs[i]}")
        if min(rhos) <= 0.0:
            raise DomainError("knot densities must be positive")
        slopes = [(rhos[i + 1] - rhos[i]) / (zs[i + 1] - zs[i]) for i in range(len(zs) - 1)]

        def density(z: float) -> float:
            i = bisect_right(zs, z) - 1
            if i < 0:
                return rhos[0]
            if i >= len(slopes):
                return rhos[-1]
            return rhos[i] + slopes[i] * (z - zs[i])

        def gradient(z: float) -> float:
            # at a knot the right-hand slope applies; flat beyond the ends
            i = bisect_right(zs, z) - 1
            if i < 0 or i >= len(slopes):
                return 0.0
            return slopes[i]

        return StratificationProfile(kind, rho_ref, z_max, v_l_fn, density, gradient)

    @staticmethod
    def table_lookup(knots: Sequence[tuple[float, float]],
                     rho_ref: float = DEFAULT_RHO_REF, z_max: float = DEFAULT_Z_MAX,
                     v_l_fn: Optional[Callable[[float], float]] = None) -> "StratificationProfile":
        return StratificationProfile.piecewise_linear(
            knots, rho_ref, z_max, v_l_fn, kind=ProfileKind.TABLE_LOOKUP)

    @staticmethod
    def from_csv(path: str, rho_ref: float = DEFAULT_RHO_REF,
                 z_max: float = DEFAULT_Z_MAX) -> "StratificationProfile":
        """Load a TableLookup profile from a two-column CSV.

        Expects a header row ``depth_m,density_kg_m3`` and strictly
        increasing depths.
        """
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DomainError(f"{path}: empty profile CSV") from None
            expected = ["depth_m", "density_kg_m3"]
            if [h.strip() for h in header] != expected:
                raise DomainError(
                    f"{path}: header must be '{','.join(expected)}', got {header}")
            knots = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 2:
                    raise DomainError(f"{path}:{lineno}: expected two columns, got {len(row)}")
                try:
                    knots.append((float(row[0]), float(row[1])))
                except ValueError as exc:
                    raise DomainError(f"{path}:{lineno}: {exc}") from None
        return StratificationProfile.table_lookup(knots, rho_ref=rho_ref, z_max=z_max)

    # -- queries -----------------------------------------------------------

    def check_range(self, z: float) -> None:
        if z < 0.0:
            raise OutOfRangeError(f"depth {z} m is below the lower bound 0 m")
        if z > self.z_max:
            raise OutOfRangeError(f"depth {z} m is above the upper bound {self.z_max} m")

    def density(self, z: float) -> float:
        self.check_range(z)
        return self._density(z)

    def gradient(self, z: float) -> float:
        self.check_range(z)
        return self._gradient(z)

    def local_velocity(self, z: float) -> float:
        return self.v_l_fn(z) if self.v_l_fn is not None else 0.0


def density_at(profile: StratificationProfile, z: float) -> float:
    """Density (kg/m^3) at depth z, continuous in z for all built-in kinds."""
    return profile.density(z)


def density_gradient(profile: StratificationProfile, z: float) -> float:
    """Analytic vertical density gradient (kg/m^4) at depth z."""
    return profile.gradient(z)


def relative_density_change(rho: float, rho_ref: float) -> float:
    """(rho - rho_ref)/rho_ref, the dimensionless deviation from reference."""
    if rho <= 0.0:
        raise DomainError(f"density must be positive, got {rho}")
    if rho_ref <= 0.0:
        raise DomainError(f"reference density must be positive, got {rho_ref}")
    return (rho - rho_ref) / rho_ref
