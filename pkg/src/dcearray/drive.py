"""Flux drive parameters and the per-mode parametric response.

The terminating and coupling Josephson energies are modulated as

    E_J(t) = A0 sin(phi) + dA0 sin(theta) cos(w_d t)
    F_J(t) = A0 cos(phi) + dA0 cos(theta) cos(w_d t)

so each normal mode n with Laplacian eigenvalue lambda_n sees a static
energy Lambda0_n = A0 (sin phi + lambda_n cos phi), a modulation
dLambda_n = dA0 (sin theta + lambda_n cos theta), an effective length
modulation deltaL_n = (phi0/2pi)^2 dLambda_n / (L0 Lambda0_n^2), and a
dimensionless pair-creation amplitude eps_n = (w_d / 2v) deltaL_n.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .constants import FLUX_QUANTUM
from .errors import NonPositiveModeEnergy, NoResponse
from .lattice import LaplacianSpectrum

__all__ = [
    "DriveParams",
    "LineParams",
    "ModeResponse",
    "mode_response",
    "calibrate_da0",
    "calibrate_da0_over_grid",
    "flux_to_energy",
]

PERTURBATIVE_RATIO = 0.1


@dataclass(frozen=True)
class DriveParams:
    """Static amplitude, modulation amplitude, mixing angles and drive frequency."""

    a0: float        # J
    da0: float       # J
    phi: float       # rad
    theta: float     # rad
    omega_d: float   # rad/s

    def __post_init__(self):
        if self.a0 <= 0:
            raise ValueError(f"a0 must be positive, got {self.a0}")
        if self.da0 < 0:
            raise ValueError(f"da0 must be non-negative, got {self.da0}")
        if self.omega_d <= 0:
            raise ValueError(f"omega_d must be positive, got {self.omega_d}")
        if self.da0 / self.a0 > PERTURBATIVE_RATIO:
            warnings.warn(
                f"da0/a0 = {self.da0 / self.a0:.3g} exceeds {PERTURBATIVE_RATIO}; "
                "the perturbative treatment assumes da0 << a0",
                stacklevel=2,
            )


@dataclass(frozen=True)
class LineParams:
    """Characteristic impedance and phase velocity of each waveguide."""

    z0: float                          # ohm
    v: float                           # m/s
    flux_quantum: float = FLUX_QUANTUM # Wb

    def __post_init__(self):
        if self.z0 <= 0 or self.v <= 0:
            raise ValueError("z0 and v must be positive")

    @property
    def l0(self) -> float:
        """Inductance per unit length, H/m."""
        return self.z0 / self.v

    @property
    def c0(self) -> float:
        """Capacitance per unit length, F/m."""
        return 1.0 / (self.z0 * self.v)


@dataclass(frozen=True)
class ModeResponse:
    """Per-mode static energies, modulations and pair amplitudes."""

    lambda0: np.ndarray   # J
    dlambda: np.ndarray   # J
    delta_l: np.ndarray   # m
    eps: np.ndarray       # dimensionless, (omega_d / 2v) * delta_l
    omega_d: float        # rad/s
    v: float              # m/s

    @property
    def n(self) -> int:
        return len(self.eps)


def mode_response(
    drive: DriveParams, line: LineParams, spectrum: LaplacianSpectrum
) -> ModeResponse:
    """Parametric response of every normal mode to the flux drive."""
    lam = spectrum.lambdas
    lambda0 = drive.a0 * (math.sin(drive.phi) + lam * math.cos(drive.phi))
    if np.any(lambda0 <= 0):
        bad = int(np.argmin(lambda0))
        raise NonPositiveModeEnergy(
            f"mode {bad} has Lambda0 = {lambda0[bad]:.3g} J <= 0; "
            "unphysical static working point"
        )
    dlambda = drive.da0 * (math.sin(drive.theta) + lam * math.cos(drive.theta))
    delta_l = (line.flux_quantum / (2.0 * math.pi)) ** 2 * dlambda / (
        line.l0 * lambda0**2
    )
    eps = drive.omega_d / (2.0 * line.v) * delta_l
    return ModeResponse(
        lambda0=lambda0,
        dlambda=dlambda,
        delta_l=delta_l,
        eps=eps,
        omega_d=drive.omega_d,
        v=line.v,
    )


def _max_intensity(modes: ModeResponse, spectrum: LaplacianSpectrum) -> float:
    weights = spectrum.modes**2  # weights[n, i] = (c_n^i)^2
    return float(np.max(weights.T @ modes.eps**2))


def calibrate_da0(
    drive: DriveParams,
    line: LineParams,
    spectrum: LaplacianSpectrum,
    target_max_occupancy: float,
) -> DriveParams:
    """Rescale da0 so the largest waveguide intensity equals the target at T=0.

    Intensities scale exactly as da0^2, so a single evaluation fixes the scale.
    """
    if not 0.0 < target_max_occupancy < 1.0:
        raise ValueError("target occupancy must lie in (0, 1)")
    if drive.da0 <= 0:
        raise ValueError("need a positive da0 seed")
    peak = _max_intensity(mode_response(drive, line, spectrum), spectrum)
    if peak == 0.0:
        raise NoResponse("all length modulations vanish at this working point")
    return replace(drive, da0=drive.da0 * math.sqrt(target_max_occupancy / peak))


def calibrate_da0_over_grid(
    drive: DriveParams,
    line: LineParams,
    spectrum: LaplacianSpectrum,
    thetas: np.ndarray,
    target_max_occupancy: float,
) -> DriveParams:
    """Calibrate da0 against the intensity maximum over a theta grid.

    Mirrors the figure convention of choosing amplitudes once per sweep so
    that max_i <a_i^dag a_i> never exceeds the target at T=0.
    """
    if not 0.0 < target_max_occupancy < 1.0:
        raise ValueError("target occupancy must lie in (0, 1)")
    if drive.da0 <= 0:
        raise ValueError("need a positive da0 seed")
    peak = 0.0
    for theta in np.atleast_1d(thetas):
        trial = replace(drive, theta=float(theta))
        try:
            resp = mode_response(trial, line, spectrum)
        except NonPositiveModeEnergy:
            continue
        peak = max(peak, _max_intensity(resp, spectrum))
    if peak == 0.0:
        raise NoResponse("no grid point produces a nonzero response")
    return replace(drive, da0=drive.da0 * math.sqrt(target_max_occupancy / peak))


def flux_to_energy(
    phi_flux: float, ej_max: float, flux_quantum: float = FLUX_QUANTUM
) -> float:
    """Standard SQUID flux-to-energy relation E = EJmax |cos(pi Phi / phi0)|.

    Convenience for building example configurations; the core math works
    directly with the abstract amplitudes A0, dA0.
    """
    if ej_max <= 0:
        raise ValueError("ej_max must be positive")
    return ej_max * abs(math.cos(math.pi * phi_flux / flux_quantum))
