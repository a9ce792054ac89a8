"""Physical configuration shared by all syntheses.

Angle convention: radians everywhere, principal value in [-pi, pi); all
angular comparisons are wrap-aware. Config files speak degrees, the library
speaks radians.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SPEED_OF_LIGHT",
    "wrap_angle",
    "CylinderGeometry",
    "SteeringSpec",
    "AngularGrid",
    "incident_field",
    "exclusion_set_mask",
]

# Free-space propagation speed [m/s]. The round 3e8 convention keeps the
# electrical sizes used throughout the test suite at their quoted values.
SPEED_OF_LIGHT = 3.0e8


def wrap_angle(x):
    """Wrap angle(s) to the principal interval [-pi, pi)."""
    return (np.asarray(x) + np.pi) % (2 * np.pi) - np.pi


@dataclass(frozen=True)
class CylinderGeometry:
    """Cylinder radius and operating frequency; electrical size is derived."""

    radius_m: float
    freq_hz: float

    def __post_init__(self):
        if self.radius_m <= 0:
            raise ValueError("radius_m must be positive")
        if self.freq_hz <= 0:
            raise ValueError("freq_hz must be positive")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.freq_hz

    @property
    def k0(self) -> float:
        """Free-space wavenumber [rad/m]."""
        return 2.0 * np.pi * self.freq_hz / SPEED_OF_LIGHT

    @property
    def k0r(self) -> float:
        """Electrical radius k0 * R (dimensionless), always recomputed."""
        return self.k0 * self.radius_m


def incident_field(geom: CylinderGeometry, r, phi):
    """Unit plane wave travelling along -x: exp(j k0 r cos(phi))."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be non-negative")
    out = np.exp(1j * geom.k0 * r * np.cos(np.asarray(phi, dtype=float)))
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class SteeringSpec:
    """Steering direction and protected main-beam width (both radians)."""

    phi_o: float
    delta_phi: float

    def __post_init__(self):
        if not self.delta_phi > 0:
            raise ValueError("delta_phi must be positive")
        object.__setattr__(self, "phi_o", float(wrap_angle(self.phi_o)))
        object.__setattr__(self, "delta_phi", float(self.delta_phi))

    @classmethod
    def from_degrees(cls, phi_o_deg: float, delta_phi_deg: float) -> "SteeringSpec":
        return cls(np.radians(phi_o_deg), np.radians(delta_phi_deg))

    def warn_if_below_reference(self, reference_rad: float) -> None:
        if self.delta_phi < reference_rad:
            warnings.warn(
                f"delta_phi = {np.degrees(self.delta_phi):.2f} deg is below the "
                f"reference beamwidth {np.degrees(reference_rad):.2f} deg; the "
                "sidelobe problem may be ill-conditioned",
                stacklevel=2,
            )


class AngularGrid:
    """Uniform angular grid on [-pi, pi), half-open.

    A uniform half-open grid makes the periodic trapezoid rule collapse to a
    plain Riemann sum, which every quadrature in the package relies on.
    """

    __slots__ = ("values",)

    def __init__(self, values):
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("grid needs at least two samples")
        d = np.diff(values)
        if np.any(d <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.max(np.abs(d - d[0])) > 1e-12:
            raise ValueError("grid must be uniform to 1e-12")
        if values[0] < -np.pi - 1e-12 or values[-1] >= np.pi:
            raise ValueError("grid samples must lie in [-pi, pi)")
        self.values = values
        self.values.setflags(write=False)

    @classmethod
    def uniform(cls, n_points: int) -> "AngularGrid":
        if n_points < 2:
            raise ValueError("need at least two grid points")
        return cls(-np.pi + 2 * np.pi * np.arange(n_points) / n_points)

    @property
    def spacing(self) -> float:
        return float(self.values[1] - self.values[0])

    @property
    def degrees(self) -> np.ndarray:
        return np.degrees(self.values)

    def __len__(self) -> int:
        return self.values.size

    def nearest_index(self, phi: float) -> int:
        """Index of the sample closest to phi (wrap-aware)."""
        return int(np.argmin(np.abs(wrap_angle(self.values - phi))))


def exclusion_set_mask(spec: SteeringSpec, grid: AngularGrid) -> np.ndarray:
    """Boolean mask, true exactly where |wrap(phi - phi_o)| > delta_phi / 2."""
    if len(grid) == 0:
        raise ValueError("grid must be nonempty")
    return np.abs(wrap_angle(grid.values - spec.phi_o)) > spec.delta_phi / 2.0
