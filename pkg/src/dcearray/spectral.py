"""Broadband voltage-based observables: scattering, flux density, G1, G2(tau).

The perturbative boundary scattering amplitude of normal mode n is

    S_n(w', w'') = -i (deltaL_n / v) sqrt(w' w'') Theta(w') Theta(w'')

from which follow the photon flux spectral density, the broadband
intensity G1_i, and the time-delayed pair correlator G2_ij(tau) built
from I_n(tau) = int_0^{w_d} sqrt(w (w_d - w)) S_n e^{i w tau} dw.  Every
frequency integral has an elementary closed form; adaptive quadrature
cross-checks guard against algebra slips.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .constants import HBAR
from .drive import LineParams, ModeResponse
from .errors import QuadratureDisagreement, ZeroIntensity
from .lattice import LaplacianSpectrum
from .quantum_state import thermal_occupation

__all__ = [
    "SpectralConfig",
    "scattering_amplitude",
    "photon_flux_density",
    "g1_broadband",
    "pair_integral",
    "pair_integral_quadrature",
    "g2_broadband",
    "g2_broadband_normalized",
]


@dataclass(frozen=True)
class SpectralConfig:
    """Grids and environment for broadband sweeps."""

    omega_d: float
    line: LineParams
    temperature: float = 0.0
    resolution: int = 2048
    tau_grid: np.ndarray = field(
        default_factory=lambda: np.linspace(0.0, 30.0, 512)
    )  # in units of omega_d * tau

    def __post_init__(self):
        if self.resolution < 16:
            raise ValueError("frequency grid resolution must be >= 16")

    def omega_grid(self) -> np.ndarray:
        """Interior frequency grid over (0, omega_d), endpoints excluded."""
        k = np.arange(1, self.resolution + 1)
        return self.omega_d * k / (self.resolution + 1.0)


def scattering_amplitude(
    n: int, omega1: float, omega2: float, modes: ModeResponse
) -> complex:
    """Pair-scattering amplitude S_n(w', w'') of normal mode n."""
    if omega1 <= 0.0 or omega2 <= 0.0:
        return 0.0j
    return -1j * modes.delta_l[n] / modes.v * math.sqrt(omega1 * omega2)


def photon_flux_density(
    i: int,
    omega: float,
    modes: ModeResponse,
    spectrum: LaplacianSpectrum,
    temperature: float = 0.0,
) -> float:
    """Photon flux spectral density of the output field of waveguide i.

    T=0: n_i(w) = sum_n (c_n^i)^2 |S_n(w, w_d - w)|^2.  At finite
    temperature the reflected thermal background N_T(w) adds, and the
    parametric term is stimulated by (1 + N_T(w_d - w)).
    """
    weights = spectrum.modes[:, i] ** 2
    parametric = 0.0
    if 0.0 < omega < modes.omega_d:
        s2 = (modes.delta_l / modes.v) ** 2 * omega * (modes.omega_d - omega)
        parametric = float(weights @ s2)
    if temperature == 0.0:
        return parametric
    background = thermal_occupation(omega, temperature)
    stimulated = 1.0 + thermal_occupation(modes.omega_d - omega, temperature)
    return background + parametric * stimulated


def g1_broadband(
    i: int,
    modes: ModeResponse,
    spectrum: LaplacianSpectrum,
    line: LineParams,
    check: bool = False,
) -> float:
    """Broadband voltage intensity (hbar Z0 / 4 pi) sum_n (c_n^i)^2 w_d^4/12 (dL_n/v)^2."""
    weights = spectrum.modes[:, i] ** 2
    ratios = (modes.delta_l / modes.v) ** 2
    closed = (
        HBAR * line.z0 / (4.0 * math.pi)
        * modes.omega_d**4 / 12.0
        * float(weights @ ratios)
    )
    if check:
        w_d = modes.omega_d
        integral, _ = quad(lambda w: w * w * (w_d - w), 0.0, w_d)
        numeric = (
            HBAR * line.z0 / (4.0 * math.pi) * float(weights @ ratios) * integral
        )
        if closed != 0.0 and abs(numeric - closed) > 1e-9 * abs(closed):
            raise QuadratureDisagreement(
                f"G1 closed form {closed:.12g} vs quadrature {numeric:.12g}"
            )
    return closed


def _poly_kernel_closed(tau: float, w_d: float) -> complex:
    """J(tau) = int_0^{w_d} w (w_d - w) e^{i w tau} dw, elementary antiderivative.

    A power series takes over for |tau| w_d < 1 where the closed form loses
    digits to cancellation.
    """
    x = tau * w_d
    if abs(x) < 1.0:
        total = 0.0j
        term_power = 1.0 + 0.0j
        for m in range(40):
            contrib = term_power * w_d**3 / ((m + 2.0) * (m + 3.0))
            total += contrib
            if abs(contrib) < 1e-18 * abs(total) and m > 4:
                break
            term_power *= 1j * x / (m + 1.0)
        return total
    k = 1j * tau
    e = cmath.exp(k * w_d)
    return e * (w_d / k**2 - 2.0 / k**3) + w_d / k**2 + 2.0 / k**3


def pair_integral(n: int, tau: float, modes: ModeResponse) -> complex:
    """I_n(tau) = -i (deltaL_n / v) * int_0^{w_d} w (w_d - w) e^{i w tau} dw."""
    return -1j * modes.delta_l[n] / modes.v * _poly_kernel_closed(tau, modes.omega_d)


def pair_integral_quadrature(n: int, tau: float, modes: ModeResponse) -> complex:
    """Adaptive-quadrature evaluation of I_n(tau); the independent cross-check."""
    w_d = modes.omega_d
    scale = w_d**3 / 6.0

    def kernel(w: float) -> complex:
        return w * (w_d - w) * cmath.exp(1j * w * tau)

    re, _ = quad(lambda w: kernel(w).real, 0.0, w_d,
                 epsabs=1e-12 * scale, epsrel=1e-12, limit=200)
    im, _ = quad(lambda w: kernel(w).imag, 0.0, w_d,
                 epsabs=1e-12 * scale, epsrel=1e-12, limit=200)
    return -1j * modes.delta_l[n] / modes.v * complex(re, im)


def g2_broadband(
    i: int,
    j: int,
    tau: float,
    modes: ModeResponse,
    spectrum: LaplacianSpectrum,
    line: LineParams,
    check: bool = True,
) -> float:
    """Time-delayed broadband pair correlator G2_ij(tau) of the output voltages.

    G2_ij(tau) = (hbar Z0 / 4 pi)^2 |sum_n c_n^i c_n^j I_n(tau)|^2.  With
    ``check`` the closed-form I_n is validated against adaptive quadrature
    to 1e-9 relative.
    """
    c = spectrum.modes
    kappa = HBAR * line.z0 / (4.0 * math.pi)
    amplitude = 0.0j
    for n in range(spectrum.n):
        i_n = pair_integral(n, tau, modes)
        if check and modes.delta_l[n] != 0.0:
            ref = pair_integral_quadrature(n, tau, modes)
            scale = max(abs(i_n), abs(ref))
            if scale > 0 and abs(i_n - ref) > 1e-9 * scale:
                raise QuadratureDisagreement(
                    f"I_{n}({tau:g}) closed form {i_n} vs quadrature {ref}"
                )
        amplitude += c[n, i] * c[n, j] * i_n
    return kappa**2 * abs(amplitude) ** 2


def g2_broadband_normalized(
    i: int,
    j: int,
    modes: ModeResponse,
    spectrum: LaplacianSpectrum,
    line: LineParams,
) -> float:
    """Dimensionless zero-delay broadband correlation G2_ij(0)/sqrt(G1_i G1_j).

    The voltage correlators are expressed in units of the single-photon
    voltage scale at the band centre, i.e. the ratio is divided by
    (hbar Z0 / 4 pi) (w_d / 2)^2, making it dimensionless.  Unlike the
    single-frequency g2 it is not bounded by one (it peaks at 4/3 for two
    waveguides).
    """
    g1_i = g1_broadband(i, modes, spectrum, line)
    g1_j = g1_broadband(j, modes, spectrum, line)
    if g1_i <= 0.0 or g1_j <= 0.0:
        raise ZeroIntensity("broadband intensity vanishes; g2 undefined")
    g2 = g2_broadband(i, j, 0.0, modes, spectrum, line, check=False)
    photon_scale = HBAR * line.z0 / (4.0 * math.pi) * (modes.omega_d / 2.0) ** 2
    return g2 / math.sqrt(g1_i * g1_j) / photon_scale
