"""Exact modal synthesis on the cylinder.

The scattered field is expanded in cylindrical harmonics
E_sz(r, phi) = sum_m c_m exp(-j m (phi - pi/2)) H_m(k0 r), with H the Hankel
function of the second kind. Enforcing the steered surface field
E_sz(R, phi) = exp(-j k0 R cos(phi - phi_o)) fixes the coefficients in
closed form; the surface impedance follows from the boundary condition
E_z = Z H_phi at r = R.

Sign convention: the surface target is taken with a plus sign,
E_sz(R, phi) = +exp(-j k0 R cos(phi - phi_o)); reported patterns are
magnitude-normalized so the overall phase reference drops out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .geometry import AngularGrid, CylinderGeometry
from .patterns import PatternGrid

__all__ = [
    "ModalExpansion",
    "ImpedanceProfile",
    "modal_coefficients",
    "scattered_surface_field",
    "surface_impedance",
    "far_field_exact",
    "boundary_residual",
]

POLE_TOL_FACTOR = 1e-6


@dataclass(frozen=True)
class ModalExpansion:
    """Truncated coefficient vector c_m, m = -M..M."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 == 0:
            raise ValueError("coefficient vector must have odd length 2M+1")
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.order, self.order + 1)

    def tail_ratio(self) -> float:
        """max(|c_{-M}|, |c_M|) / max|c_m|; small once the expansion converged."""
        mx = np.abs(self.coeffs).max()
        if mx == 0:
            return 0.0
        return float(max(abs(self.coeffs[0]), abs(self.coeffs[-1])) / mx)


@dataclass(frozen=True)
class ImpedanceProfile:
    """Normalized surface impedance Z(phi)/eta0 with pole annotations.

    Samples under pole_mask sit near zeros of the boundary-condition
    denominator (vanishing total H_phi); they are physical poles of Z, not
    numerical failures, and must not be consumed downstream.
    """

    grid: AngularGrid
    z_over_eta0: np.ndarray
    pole_mask: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z_over_eta0, dtype=complex)
        m = np.asarray(self.pole_mask, dtype=bool)
        if z.shape != (len(self.grid),) or m.shape != z.shape:
            raise ValueError("profile arrays must match the grid length")
        object.__setattr__(self, "z_over_eta0", z)
        object.__setattr__(self, "pole_mask", m)


def modal_coefficients(
    geom: CylinderGeometry, phi_o: float, order: int | None = None
) -> ModalExpansion:
    """Coefficients c_m = exp(j m (phi_o - pi)) J_m(k0 R) / H_m(k0 R).

    `order` defaults to the package truncation rule and must be at least
    ceil(k0 R) to cover the propagating modal content.
    """
    x = geom.k0r
    if order is None:
        order = specfun.truncation_order(x)
    if order < math.ceil(x):
        raise ValueError(f"truncation order {order} is below ceil(k0R) = {math.ceil(x)}")
    ms = np.arange(-order, order + 1)
    c = np.exp(1j * ms * (phi_o - np.pi)) * specfun.bessel_j(ms, x) / specfun.hankel2(ms, x)
    return ModalExpansion(c)


def scattered_surface_field(geom: CylinderGeometry, expansion: ModalExpansion, phi) -> np.ndarray:
    """E_sz(R, phi) = sum_m c_m exp(-j m (phi - pi/2)) H_m(k0 R)."""
    ms = expansion.orders
    h = specfun.hankel2(ms, geom.k0r)
    phases = np.exp(-1j * np.multiply.outer(np.asarray(phi, dtype=float) - np.pi / 2, ms))
    return phases @ (expansion.coeffs * h)


def surface_impedance(
    geom: CylinderGeometry,
    expansion: ModalExpansion,
    grid: AngularGrid,
    pole_tol_factor: float = POLE_TOL_FACTOR,
) -> ImpedanceProfile:
    """Normalized impedance Z(phi)/eta0 enforcing the steered surface field.

    With the incident-field phase factored out, the numerator is the total
    tangential E and the denominator the total tangential H (times -j eta0);
    samples where the denominator magnitude falls below
    pole_tol_factor * max|denominator| are flagged as poles.
    """
    x = geom.k0r
    ms = expansion.orders
    phi = grid.values
    phases = np.exp(-1j * np.multiply.outer(phi - np.pi / 2, ms))
    s_e = phases @ (expansion.coeffs * specfun.hankel2(ms, x))
    s_h = phases @ (expansion.coeffs * specfun.hankel2_prime(ms, x))
    inc = np.exp(-1j * x * np.cos(phi))
    num = 1.0 + inc * s_e
    den = np.cos(phi) - 1j * inc * s_h
    pole_tol = pole_tol_factor * np.abs(den).max()
    pole = np.abs(den) < pole_tol
    z = np.empty_like(num)
    with np.errstate(divide="ignore", invalid="ignore"):
        np.divide(num, den, out=z)
    z[pole] = np.nan + 1j * np.nan
    return ImpedanceProfile(grid=grid, z_over_eta0=z, pole_mask=pole)


def far_field_exact(expansion: ModalExpansion, grid: AngularGrid) -> PatternGrid:
    """Far-field pattern F(phi) = sum_m (-1)^m c_m exp(-j m phi).

    This is the sqrt(r)-scaled limit of the modal expansion with the
    large-argument Hankel form substituted; constant prefactors are dropped
    because all reported patterns are normalized.
    """
    ms = expansion.orders
    weights = ((-1.0) ** ms) * expansion.coeffs
    f = np.exp(-1j * np.multiply.outer(grid.values, ms)) @ weights
    return PatternGrid(grid=grid, f=f)


def boundary_residual(
    geom: CylinderGeometry,
    expansion: ModalExpansion,
    profile: ImpedanceProfile,
) -> np.ndarray:
    """Per-angle residual |E_z - Z H_phi| / max|E_z| on the profile's grid.

    The total fields are evaluated from the modal expansion (incident plus
    scattered); entries under the profile's pole mask are returned as NaN.
    """
    x = geom.k0r
    ms = expansion.orders
    phi = profile.grid.values
    phases = np.exp(-1j * np.multiply.outer(phi - np.pi / 2, ms))
    inc = np.exp(1j * x * np.cos(phi))
    e_total = inc + phases @ (expansion.coeffs * specfun.hankel2(ms, x))
    # eta0 * H_phi = -j d(E_z)/d(k0 r); for the incident wave that is
    # cos(phi) * exp(j k0 R cos(phi))
    h_total = np.cos(phi) * inc - 1j * (phases @ (expansion.coeffs * specfun.hankel2_prime(ms, x)))
    scale = np.abs(e_total).max()
    res = np.abs(e_total - profile.z_over_eta0 * h_total) / scale
    res = np.where(profile.pole_mask, np.nan, res)
    return res
