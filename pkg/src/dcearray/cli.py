"""Command-line driver: key=value configs, parameter sweeps, CSV output.

Configs are UTF-8 ``key=value`` lines, optionally layered with command-line
overrides that mirror the keys (``--theta-start`` for ``theta_start`` and so
on).  Every subcommand emits CSV with '#'-prefixed header and status lines,
17 significant digits, and deterministic row order, so reruns with the same
config are byte-identical.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import oracle
from .correlations import (
    cauchy_schwarz_violation,
    g2_thermal,
    g2_zero_temperature,
)
from .drive import DriveParams, LineParams, calibrate_da0_over_grid, mode_response
from .errors import ConfigError, DceArrayError, MissingRequired, RangeError, UnknownKey
from .lattice import ArrayTopology, build_laplacian, eigendecompose
from .quantum_state import (
    density_matrix,
    maximally_entangled_fidelity,
    noon_fidelity,
    output_gaussian,
    perturbative_density_matrix,
    von_neumann_entropy,
    wick_moment,
)
from .spectral import (
    SpectralConfig,
    g2_broadband,
    g2_broadband_normalized,
    photon_flux_density,
)

__all__ = ["RunConfig", "parse_config", "run_sweep", "main"]

CONFIG_KEYS = (
    "topology",
    "n",
    "a0_joule",
    "da0_joule",
    "target_occupancy",
    "phi_rad",
    "theta_rad",
    "theta_start",
    "theta_end",
    "theta_steps",
    "omega_d_rad_s",
    "z0_ohm",
    "v_m_s",
    "temperature_mk",
    "observables",
    "out",
)

_OBS_RE = re.compile(
    r"^(n_\d+|g2_\d+_\d+|cs_violation_\d+_\d+|entropy|f_noon|f_eq10)$"
)

DEFAULTS = {
    "topology": "open_chain",
    "n": "2",
    "a0_joule": "1e-23",
    "phi_rad": repr(math.pi / 4.0),
    "omega_d_rad_s": repr(2.0 * math.pi * 10.3e9),
    "z0_ohm": "55",
    "v_m_s": "1.2e8",
    "temperature_mk": "0",
    "observables": "n_1,g2_1_1,g2_1_2",
}


@dataclass(frozen=True)
class RunConfig:
    """Validated sweep configuration."""

    topology: ArrayTopology
    a0: float                 # J
    da0: float | None         # J; exactly one of da0 / target_occupancy is set
    target_occupancy: float | None
    phi: float                # rad
    thetas: np.ndarray        # rad, the sweep grid (length 1 for a point run)
    single_theta: bool
    omega_d: float            # rad/s
    line: LineParams
    temperatures: tuple       # K
    observables: tuple        # validated header tokens
    out: str | None           # output path, None for stdout


def _parse_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise RangeError(f"{key}={raw!r} is not a number") from None


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise RangeError(f"{key}={raw!r} is not an integer") from None


def _parse_pairs(text: str) -> dict:
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key=value, got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise UnknownKey(f"unknown configuration key {key!r}")
        pairs[key] = value.strip()
    return pairs


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Parse and validate a key=value config, with optional layered overrides."""
    raw = dict(DEFAULTS)
    raw.update(_parse_pairs(text))
    for key, value in (overrides or {}).items():
        if key not in CONFIG_KEYS:
            raise UnknownKey(f"unknown configuration key {key!r}")
        if value is not None:
            raw[key] = str(value)

    kind = raw["topology"]
    n = _parse_int("n", raw["n"])
    if n < 1:
        raise RangeError(f"n must be at least 1, got {n}")
    if kind == "open_chain":
        topology = ArrayTopology.open_chain(n)
    elif kind == "ring":
        topology = ArrayTopology.ring(n)
    else:
        raise RangeError(f"topology must be open_chain or ring, got {kind!r}")

    a0 = _parse_float("a0_joule", raw["a0_joule"])
    if a0 <= 0:
        raise RangeError(f"a0_joule must be positive, got {a0}")
    has_da0 = "da0_joule" in raw
    has_target = "target_occupancy" in raw
    if has_da0 and has_target:
        raise RangeError("da0_joule and target_occupancy are mutually exclusive")
    if not has_da0 and not has_target:
        raise MissingRequired("one of da0_joule or target_occupancy is required")
    da0 = _parse_float("da0_joule", raw["da0_joule"]) if has_da0 else None
    target = (
        _parse_float("target_occupancy", raw["target_occupancy"])
        if has_target
        else None
    )
    if da0 is not None and da0 < 0:
        raise RangeError(f"da0_joule must be non-negative, got {da0}")
    if target is not None and not 0.0 < target < 1.0:
        raise RangeError(f"target_occupancy must lie in (0, 1), got {target}")

    phi = _parse_float("phi_rad", raw["phi_rad"])
    omega_d = _parse_float("omega_d_rad_s", raw["omega_d_rad_s"])
    if omega_d <= 0:
        raise RangeError(f"omega_d_rad_s must be positive, got {omega_d}")
    z0 = _parse_float("z0_ohm", raw["z0_ohm"])
    v = _parse_float("v_m_s", raw["v_m_s"])
    if z0 <= 0 or v <= 0:
        raise RangeError("z0_ohm and v_m_s must be positive")

    sweep_keys = [k for k in ("theta_start", "theta_end", "theta_steps") if k in raw]
    if "theta_rad" in raw:
        if sweep_keys:
            raise RangeError("theta_rad excludes theta_start/theta_end/theta_steps")
        thetas = np.array([_parse_float("theta_rad", raw["theta_rad"])])
        single = True
    else:
        start = _parse_float("theta_start", raw.get("theta_start", "0"))
        end = _parse_float("theta_end", raw.get("theta_end", repr(math.pi)))
        steps = _parse_int("theta_steps", raw.get("theta_steps", "200"))
        if steps < 1:
            raise RangeError(f"theta_steps must be at least 1, got {steps}")
        if not (math.isfinite(start) and math.isfinite(end)):
            raise RangeError("theta sweep range must be finite")
        thetas = np.linspace(start, end, steps)
        single = False

    temps = []
    for tok in raw["temperature_mk"].split(","):
        t_mk = _parse_float("temperature_mk", tok.strip())
        if t_mk < 0:
            raise RangeError(f"temperature_mk must be non-negative, got {t_mk}")
        temps.append(t_mk * 1e-3)  # millikelvin to kelvin

    observables = []
    for tok in raw["observables"].split(","):
        tok = tok.strip()
        if not _OBS_RE.match(tok):
            raise RangeError(f"unrecognized observable token {tok!r}")
        for idx in re.findall(r"\d+", tok):
            if not 1 <= int(idx) <= n:
                raise RangeError(f"observable {tok!r} indexes outside 1..{n}")
        observables.append(tok)

    return RunConfig(
        topology=topology,
        a0=a0,
        da0=da0,
        target_occupancy=target,
        phi=phi,
        thetas=thetas,
        single_theta=single,
        omega_d=omega_d,
        line=LineParams(z0=z0, v=v),
        temperatures=tuple(temps),
        observables=tuple(observables),
        out=raw.get("out"),
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    return "%.17g" % value


def _resolve_drive(config: RunConfig, spectrum) -> DriveParams:
    """Fix da0 either directly or by calibrating over the theta grid."""
    seed = config.da0 if config.da0 is not None else config.a0 * 1e-3
    drive = DriveParams(
        a0=config.a0,
        da0=seed,
        phi=config.phi,
        theta=float(config.thetas[0]),
        omega_d=config.omega_d,
    )
    if config.target_occupancy is not None:
        drive = calibrate_da0_over_grid(
            drive, config.line, spectrum, config.thetas, config.target_occupancy
        )
    return drive


def _spectrum(config: RunConfig):
    return eigendecompose(build_laplacian(config.topology))


def _point_values(config, spectrum, drive, theta, temperature):
    """Observable values at one (theta, T) grid point."""
    modes = mode_response(replace(drive, theta=theta), config.line, spectrum)
    corr = None
    tdm = None

    def get_corr():
        nonlocal corr
        if corr is None:
            if temperature == 0.0:
                corr = g2_zero_temperature(modes, spectrum)
            else:
                corr = g2_thermal(modes, spectrum, temperature)
        return corr

    def get_tdm():
        nonlocal tdm
        if tdm is None:
            if temperature == 0.0:
                tdm = perturbative_density_matrix(modes, spectrum)
            else:
                state = output_gaussian(modes, spectrum, temperature)
                tdm = density_matrix(state, post_select=True, max_degree=None)
        return tdm

    values = []
    for token in config.observables:
        if token.startswith("n_"):
            i = int(token[2:]) - 1
            values.append(float(get_corr().intensities[i]))
        elif token.startswith("g2_"):
            i, j = (int(s) - 1 for s in token[3:].split("_"))
            values.append(get_corr().g2(i, j))
        elif token.startswith("cs_violation_"):
            i, j = (int(s) - 1 for s in token[len("cs_violation_"):].split("_"))
            values.append(cauchy_schwarz_violation(get_corr(), i, j))
        elif token == "entropy":
            values.append(von_neumann_entropy(get_tdm()))
        elif token == "f_noon":
            values.append(noon_fidelity(get_tdm()))
        else:  # f_eq10
            values.append(maximally_entangled_fidelity(get_tdm()))
    return values


def _workers() -> int:
    raw = os.environ.get("DCE_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_sweep(config: RunConfig) -> tuple:
    """Evaluate the (theta, temperature) grid; returns (lines, n_failures).

    One row per grid point ordered by index, observables per the config;
    failed points leave their cells empty and carry the error message in the
    trailing error column.
    """
    spectrum = _spectrum(config)
    drive = _resolve_drive(config, spectrum)
    grid = [
        (theta, temp)
        for temp in config.temperatures
        for theta in config.thetas
    ]

    def evaluate(point):
        theta, temp = point
        try:
            return _point_values(config, spectrum, drive, float(theta), temp), None
        except DceArrayError as exc:
            return None, f"{type(exc).__name__}: {exc}"

    if _workers() > 1:
        with ThreadPoolExecutor(max_workers=_workers()) as pool:
            results = list(pool.map(evaluate, grid))
    else:
        results = [evaluate(p) for p in grid]

    header = "# theta,phi,temperature_mk," + ",".join(config.observables) + ",error"
    lines = [header]
    failures = 0
    for (theta, temp), (values, error) in zip(grid, results):
        cells = [_fmt(float(theta)), _fmt(config.phi), _fmt(temp * 1e3)]
        if error is None:
            cells.extend(_fmt(v) for v in values)
            cells.append("")
        else:
            cells.extend("" for _ in config.observables)
            cells.append(error)
            failures += 1
        lines.append(",".join(cells))
    if failures:
        lines.append(f"# status: partial ({failures} of {len(grid)} points failed)")
    else:
        lines.append("# status: ok")
    return lines, failures


def _run_spectrum(config: RunConfig) -> tuple:
    """Photon flux spectral density of waveguide 1 over (0, omega_d)."""
    spectrum = _spectrum(config)
    drive = _resolve_drive(config, spectrum)
    modes = mode_response(
        replace(drive, theta=float(config.thetas[0])), config.line, spectrum
    )
    spec_cfg = SpectralConfig(omega_d=config.omega_d, line=config.line)
    omegas = spec_cfg.omega_grid()
    lines = ["# omega_rad_s,temperature_mk,flux_1"]
    for temp in config.temperatures:
        for w in omegas:
            flux = photon_flux_density(0, float(w), modes, spectrum, temp)
            lines.append(",".join([_fmt(float(w)), _fmt(temp * 1e3), _fmt(flux)]))
    lines.append("# status: ok")
    return lines, 0


def _run_time_delay(config: RunConfig) -> tuple:
    """Broadband G2_11 and G2_12 against the dimensionless delay omega_d*tau."""
    spectrum = _spectrum(config)
    drive = _resolve_drive(config, spectrum)
    modes = mode_response(
        replace(drive, theta=float(config.thetas[0])), config.line, spectrum
    )
    spec_cfg = SpectralConfig(omega_d=config.omega_d, line=config.line)
    lines = ["# omega_d_tau,g2_broadband_1_1,g2_broadband_1_2"]
    for x in spec_cfg.tau_grid:
        tau = float(x) / config.omega_d
        g11 = g2_broadband(0, 0, tau, modes, spectrum, config.line, check=False)
        g12 = g2_broadband(0, 1, tau, modes, spectrum, config.line, check=False)
        lines.append(",".join([_fmt(float(x)), _fmt(g11), _fmt(g12)]))
    lines.append("# status: ok")
    return lines, 0


def _run_broadband(config: RunConfig) -> tuple:
    """Normalized zero-delay broadband correlations over the theta grid."""
    spectrum = _spectrum(config)
    drive = _resolve_drive(config, spectrum)
    lines = ["# theta,g2bb_1_1,g2bb_1_2,error"]
    failures = 0
    for theta in config.thetas:
        try:
            modes = mode_response(
                replace(drive, theta=float(theta)), config.line, spectrum
            )
            g11 = g2_broadband_normalized(0, 0, modes, spectrum, config.line)
            g12 = g2_broadband_normalized(0, 1, modes, spectrum, config.line)
            lines.append(",".join([_fmt(float(theta)), _fmt(g11), _fmt(g12), ""]))
        except DceArrayError as exc:
            failures += 1
            lines.append(
                ",".join([_fmt(float(theta)), "", "", f"{type(exc).__name__}: {exc}"])
            )
    if failures:
        lines.append(f"# status: partial ({failures} points failed)")
    else:
        lines.append("# status: ok")
    return lines, failures


def _run_entangle(config: RunConfig) -> tuple:
    """Entropy and fidelities over the grid; single-theta runs also dump rho."""
    cfg = config
    if not cfg.observables or not any(
        t in ("entropy", "f_noon", "f_eq10") for t in cfg.observables
    ):
        cfg = replace(cfg, observables=("entropy", "f_noon", "f_eq10"))
    lines, failures = run_sweep(cfg)
    if cfg.single_theta:
        spectrum = _spectrum(cfg)
        drive = _resolve_drive(cfg, spectrum)
        modes = mode_response(
            replace(drive, theta=float(cfg.thetas[0])), cfg.line, spectrum
        )
        temp = cfg.temperatures[0]
        if temp == 0.0:
            tdm = perturbative_density_matrix(modes, spectrum)
        else:
            state = output_gaussian(modes, spectrum, temp)
            tdm = density_matrix(state, post_select=True, max_degree=None)
        lines.append("# rho: rows |n1 n2>, re/im pairs for the 9 columns")
        for row in tdm.rho:
            cells = []
            for z in row:
                cells.append(_fmt(z.real))
                cells.append(_fmt(z.imag))
            lines.append(",".join(cells))
    return lines, failures


def _run_calibrate(config: RunConfig) -> tuple:
    """Report the da0 that meets the target occupancy over the theta grid."""
    if config.target_occupancy is None:
        raise MissingRequired("calibrate requires target_occupancy")
    spectrum = _spectrum(config)
    drive = _resolve_drive(config, spectrum)
    lines = [
        "# da0_joule,target_occupancy",
        ",".join([_fmt(drive.da0), _fmt(config.target_occupancy)]),
        "# status: ok",
    ]
    return lines, 0


def _run_oracle_check(config: RunConfig) -> tuple:
    """Compare Wick-path moments and rho against the dense Fock oracle."""
    if config.topology.n != 2:
        raise RangeError("oracle-check covers n=2 only")
    spectrum = _spectrum(config)
    drive = _resolve_drive(config, spectrum)
    modes = mode_response(
        replace(drive, theta=float(config.thetas[0])), config.line, spectrum
    )
    temp = config.temperatures[0]
    state = output_gaussian(modes, spectrum, temp)
    n_t = 0.0
    if temp > 0.0:
        from .quantum_state import thermal_occupation

        n_t = thermal_occupation(config.omega_d / 2.0, temp)
    ref = oracle.build_state(
        modes.eps, spectrum.modes, n_thermal=n_t, cutoff=16, deficit_tol=1e-6
    )

    moment_err = 0.0
    for word in (
        [(0, True), (0, False)],
        [(0, True), (1, False)],
        [(0, False), (1, False)],
        [(0, True), (0, True), (0, False), (0, False)],
        [(0, True), (1, True), (0, False), (1, False)],
    ):
        ours = wick_moment(state, word)
        theirs = oracle.moment(ref, word)
        moment_err = max(moment_err, abs(ours - theirs))

    tdm = density_matrix(state, post_select=False, max_degree=None)
    rho_ref = np.zeros((9, 9), dtype=complex)
    for n in range(3):
        for m in range(3):
            for n2 in range(3):
                for m2 in range(3):
                    rho_ref[3 * n + m, 3 * n2 + m2] = oracle.fock_element(
                        ref, (n, m), (n2, m2)
                    )
    rho_ref /= np.trace(rho_ref).real  # same qutrit-block normalization
    rho_err = float(np.max(np.abs(tdm.rho - rho_ref)))
    lines = [
        "# max_moment_error,max_rho_error",
        ",".join([_fmt(moment_err), _fmt(rho_err)]),
        "# status: ok",
    ]
    return lines, 0


SUBCOMMANDS = {
    "sweep": run_sweep,
    "spectrum": _run_spectrum,
    "time-delay": _run_time_delay,
    "broadband": _run_broadband,
    "entangle": _run_entangle,
    "calibrate": _run_calibrate,
    "oracle-check": _run_oracle_check,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcearray",
        description="Photon statistics of parametrically modulated waveguide arrays",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="path to a key=value config file")
        for key in CONFIG_KEYS:
            p.add_argument("--" + key.replace("_", "-"), dest=key)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    overrides = {key: getattr(args, key) for key in CONFIG_KEYS}
    try:
        text = ""
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        config = parse_config(text, overrides)
        lines, failures = SUBCOMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DceArrayError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    payload = "\n".join(lines) + "\n"
    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(payload)
    else:
        try:
            sys.stdout.write(payload)
        except BrokenPipeError:
            pass
    return 2 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
