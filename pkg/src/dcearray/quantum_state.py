"""Gaussian output state, Wick moments, qutrit density matrix, entanglement.

The degenerate-band input-output relation mixes each normal mode with its
own conjugate.  We embed it as an exact single-mode Bogoliubov transform
with u_n = sqrt(1 + eps_n^2), v_n = -i eps_n, which agrees with the
perturbative relation to first order in eps and keeps the output state a
physical Gaussian state at any amplitude.  With a thermal input of
occupation N_T per mode the second moments in the waveguide basis are

    <a_i^dag a_j> = sum_n c_n^i c_n^j [N_T + |v_n|^2 (1 + 2 N_T)]
    <a_i a_j>     = sum_n c_n^i c_n^j u_n v_n (1 + 2 N_T)

All higher moments follow from Wick's theorem; the truncated two-qutrit
density matrix is assembled from normal-ordered moments via the
vacuum-projector expansion  |0><0| = :exp(-sum a^dag a):.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import product

import numpy as np

from .drive import ModeResponse
from .errors import (
    NotNormalized,
    NotNormalOrdered,
    TruncationUnreliable,
    ZeroIntensity,
)
from .lattice import LaplacianSpectrum

__all__ = [
    "GaussianOutputState",
    "TruncatedDensityMatrix",
    "thermal_occupation",
    "output_gaussian",
    "wick_moment",
    "density_matrix",
    "perturbative_pure_state",
    "perturbative_density_matrix",
    "von_neumann_entropy",
    "noon_fidelity",
    "maximally_entangled_fidelity",
]

QUTRIT_LEVELS = 3  # each waveguide holds 0, 1 or 2 photons


def thermal_occupation(omega: float, temperature: float) -> float:
    """Bose-Einstein occupation of a mode at angular frequency omega."""
    from .constants import HBAR, K_B

    if temperature < 0:
        raise ValueError("temperature must be non-negative")
    if temperature == 0.0 or omega <= 0.0:
        return 0.0
    x = HBAR * omega / (K_B * temperature)
    if x > 700.0:
        return 0.0
    return 1.0 / math.expm1(x)


@dataclass(frozen=True)
class GaussianOutputState:
    """Normal and anomalous second moments of the output waveguide modes."""

    number: np.ndarray      # <a_i^dag a_j>, Hermitian
    anomalous: np.ndarray   # <a_i a_j>, symmetric
    temperature: float      # K

    @property
    def n_modes(self) -> int:
        return self.number.shape[0]


def output_gaussian(
    modes: ModeResponse, spectrum: LaplacianSpectrum, temperature: float = 0.0
) -> GaussianOutputState:
    """Exact Gaussian description of the emitted field at the band centre."""
    c = spectrum.modes  # c[n, i]
    eps = modes.eps
    n_t = thermal_occupation(modes.omega_d / 2.0, temperature)
    u = np.sqrt(1.0 + eps**2)
    v = -1j * eps
    occ = n_t + np.abs(v) ** 2 * (1.0 + 2.0 * n_t)
    pair = u * v * (1.0 + 2.0 * n_t)
    number = c.T @ np.diag(occ) @ c
    anomalous = c.T @ np.diag(pair) @ c
    return GaussianOutputState(
        number=number.astype(complex),
        anomalous=anomalous.astype(complex),
        temperature=temperature,
    )


def _wick_counts(state: GaussianOutputState, dag, ann) -> complex:
    """Sum over perfect matchings for a normal-ordered word given as counts.

    ``dag[m]`` / ``ann[m]`` count daggered / undaggered operators of mode m.
    Contraction values: two daggers -> conj(<a a>), dagger-annihilator ->
    <a^dag a>, two annihilators -> <a a>.  Memoized recursion; zero-mean
    Gaussian states have no odd moments.
    """
    number = state.number
    anomalous = state.anomalous
    anomalous_dag = np.conj(anomalous)
    memo: dict = {}

    def rec(d: tuple, a: tuple) -> complex:
        total = sum(d) + sum(a)
        if total == 0:
            return 1.0 + 0.0j
        if total % 2 == 1:
            return 0.0j
        key = (d, a)
        cached = memo.get(key)
        if cached is not None:
            return cached
        result = 0.0j
        if any(d):
            m = next(k for k, cnt in enumerate(d) if cnt > 0)
            d1 = list(d)
            d1[m] -= 1
            # contract with remaining daggers
            for k, cnt in enumerate(d1):
                if cnt > 0:
                    d2 = list(d1)
                    d2[k] -= 1
                    result += cnt * anomalous_dag[m, k] * rec(tuple(d2), a)
            # contract with annihilators
            for k, cnt in enumerate(a):
                if cnt > 0:
                    a2 = list(a)
                    a2[k] -= 1
                    result += cnt * number[m, k] * rec(tuple(d1), tuple(a2))
        else:
            m = next(k for k, cnt in enumerate(a) if cnt > 0)
            a1 = list(a)
            a1[m] -= 1
            for k, cnt in enumerate(a1):
                if cnt > 0:
                    a2 = list(a1)
                    a2[k] -= 1
                    result += cnt * anomalous[m, k] * rec(d, tuple(a2))
        memo[key] = result
        return result

    return rec(tuple(dag), tuple(ann))


def wick_moment(state: GaussianOutputState, word) -> complex:
    """Normal-ordered Gaussian moment of a word of ladder operators.

    ``word`` is a sequence of ``(mode_index, dagger)`` pairs with every
    daggered operator preceding every undaggered one.
    """
    n = state.n_modes
    seen_annihilator = False
    dag = [0] * n
    ann = [0] * n
    for mode, is_dag in word:
        if not 0 <= mode < n:
            raise ValueError(f"mode index {mode} outside 0..{n - 1}")
        if is_dag:
            if seen_annihilator:
                raise NotNormalOrdered(
                    "daggered operator found right of an undaggered one"
                )
            dag[mode] += 1
        else:
            seen_annihilator = True
            ann[mode] += 1
    if (sum(dag) + sum(ann)) % 2 == 1:
        return 0.0j
    return _wick_counts(state, dag, ann)


@dataclass(frozen=True)
class TruncatedDensityMatrix:
    """Two-qutrit density matrix over |n1 n2>, n in {0,1,2}.

    ``rho[3*n+m, 3*n'+m']`` = <n m| rho |n' m'>.
    """

    rho: np.ndarray
    post_selected: bool


def _projector_moments(state: GaussianOutputState, pq_top: int):
    """Wick moments feeding the two-qutrit vacuum-projector expansion.

    ``moments[np_, mp_, n, m][p, q]`` is the Wick sum for the word with
    (np_+p, mp_+q) daggered and (n+p, m+q) undaggered operators of the two
    modes, for all qutrit labels and series orders p, q <= ``pq_top``.
    Same recursion as :func:`wick_moment`, vectorized over the annihilator
    axes and streamed over the mode-1 dagger count so only three
    (d2, a1, a2) slices are alive at once.
    """
    num = state.number
    ano = state.anomalous
    ano_dag = np.conj(ano)
    levels = QUTRIT_LEVELS
    top = levels - 1 + pq_top
    shape = (top + 1, top + 1, top + 1)  # (d2, a1, a2)
    mult1 = np.arange(1, top + 1)[:, None]
    mult2 = np.arange(1, top + 1)[None, :]
    q_idx = np.arange(pq_top + 1)

    moments = np.zeros((levels,) * 4 + (pq_top + 1, pq_top + 1), dtype=complex)

    def harvest(slice_d1, d1):
        for np_ in range(levels):
            p = d1 - np_
            if not 0 <= p <= pq_top:
                continue
            for mp_, n, m in product(range(levels), repeat=3):
                moments[np_, mp_, n, m][p, :] = slice_d1[
                    mp_ + q_idx, n + p, m + q_idx
                ]

    # only words with at most `budget` operators in total are ever read, so
    # each (d1, d2) plane is filled on the rectangle a1, a2 < cap only
    budget = 4 * (levels - 1) + 2 * pq_top

    def cap(d1, d2):
        return min(top, budget - d1 - d2) + 1

    # d1 = 0 slice: annihilator-only base, then the mode-2 dagger recursion
    cur = np.zeros(shape, dtype=complex)
    base = cur[0]
    base[0, 0] = 1.0
    k = cap(0, 0)
    for a1 in range(k):
        for a2 in range(min(k, budget - a1 + 1)):
            if a1 == 0 and a2 == 0:
                continue
            val = 0.0j
            if a1 > 0:
                if a1 > 1:
                    val += (a1 - 1) * ano[0, 0] * base[a1 - 2, a2]
                if a2 > 0:
                    val += a2 * ano[0, 1] * base[a1 - 1, a2 - 1]
            elif a2 > 1:
                val += (a2 - 1) * ano[1, 1] * base[a1, a2 - 2]
            base[a1, a2] = val
    for d2 in range(1, top + 1):
        k = cap(0, d2)
        if k <= 0:
            break
        plane = np.zeros((k, k), dtype=complex)
        if d2 > 1:
            plane += (d2 - 1) * ano_dag[1, 1] * cur[d2 - 2, :k, :k]
        prev = cur[d2 - 1]
        plane[1:, :] += mult1[: k - 1] * num[1, 0] * prev[: k - 1, :k]
        plane[:, 1:] += mult2[:, : k - 1] * num[1, 1] * prev[:k, : k - 1]
        cur[d2, :k, :k] = plane
    harvest(cur, 0)

    # stream over the mode-1 dagger count, keeping two previous slices
    slice_prev2 = None
    slice_prev = cur
    for d1 in range(1, top + 1):
        cur = np.zeros(shape, dtype=complex)
        for d2 in range(top + 1):
            k = cap(d1, d2)
            if k <= 0:
                break
            plane = np.zeros((k, k), dtype=complex)
            if d1 > 1:
                plane += (d1 - 1) * ano_dag[0, 0] * slice_prev2[d2, :k, :k]
            if d2 > 0:
                plane += d2 * ano_dag[0, 1] * slice_prev[d2 - 1, :k, :k]
            prev = slice_prev[d2]
            plane[1:, :] += mult1[: k - 1] * num[0, 0] * prev[: k - 1, :k]
            plane[:, 1:] += mult2[:, : k - 1] * num[0, 1] * prev[:k, : k - 1]
            cur[d2, :k, :k] = plane
        harvest(cur, d1)
        slice_prev2, slice_prev = slice_prev, cur
    return moments


def _element_series(moments, n, m, np_, mp_, pq_max):
    """Vacuum-projector series for <|np_ mp_><n m|> split by order p+q.

    Returns a list indexed by s = p+q with the total contribution of that
    order; the caller sums and uses the tail for the remainder estimate.
    """
    norm = math.sqrt(
        math.factorial(n) * math.factorial(m)
        * math.factorial(np_) * math.factorial(mp_)
    )
    block = moments[np_, mp_, n, m]
    orders = []
    for s in range(pq_max + 1):
        term = 0.0j
        for p in range(s + 1):
            q = s - p
            coeff = (-1.0) ** s / (math.factorial(p) * math.factorial(q) * norm)
            term += coeff * block[p, q]
        orders.append(term)
    return orders


def _series_ratio(state: GaussianOutputState) -> float:
    """Asymptotic per-order decay of the vacuum-projector series.

    Largest eigenvalue of the doubled second-moment matrix; for a single
    squeezed thermal mode this is (1 + 2 N_T) e^{2r} / 2 - 1/2.  The series
    converges iff the ratio is below one.
    """
    num = state.number
    ano = state.anomalous
    doubled = np.block([[num, ano], [np.conj(ano), np.conj(num)]])
    return float(np.max(np.abs(np.linalg.eigvals(doubled))))


def density_matrix(
    state: GaussianOutputState,
    post_select: bool = True,
    max_degree: int | None = 8,
    remainder_tol: float = 1e-4,
) -> TruncatedDensityMatrix:
    """Two-qutrit density matrix of a two-waveguide Gaussian output state.

    Each element <n'm'| projector |nm> is expanded through the normal-ordered
    vacuum projector and truncated at total operator degree ``max_degree``.
    The first omitted order of the trace elements estimates the remainder;
    if it exceeds ``remainder_tol`` of the trace the truncation is refused.
    ``max_degree=None`` picks the degree from the series decay ratio and
    retries with more terms while the remainder check trips.
    """
    if state.n_modes != 2:
        raise ValueError("density_matrix covers the two-waveguide case only")
    if max_degree is None:
        ratio = _series_ratio(state)
        if ratio >= 0.95:
            raise TruncationUnreliable(
                f"projector series decays at ratio {ratio:.3g}; too close to "
                "divergence for a reliable truncation"
            )
        guess = 12
        if ratio > 0.0:
            guess = 2 * math.ceil(
                1.4 * math.log(1e4 / remainder_tol) / -math.log(ratio)
            )
        degree = min(400, max(12, guess))
        while True:
            try:
                return density_matrix(state, post_select, degree, remainder_tol)
            except TruncationUnreliable:
                if degree >= 400:
                    raise
                degree = min(400, int(degree * 1.5))
    mean_occ = float(np.max(np.real(np.diag(state.number))))
    if mean_occ > 0.5:
        warnings.warn(
            f"mean photon number {mean_occ:.3g} > 0.5; qutrit truncation "
            "and the projector series may be inaccurate",
            stacklevel=2,
        )

    dim = QUTRIT_LEVELS * QUTRIT_LEVELS
    rho = np.zeros((dim, dim), dtype=complex)
    pq_top = max(1, max_degree // 2) + 1
    moments = _projector_moments(state, pq_top)
    remainder = 0.0
    trace = 0.0
    for n, m, np_, mp_ in product(range(QUTRIT_LEVELS), repeat=4):
        base = n + m + np_ + mp_
        pq_max = max(0, (max_degree - base) // 2)
        orders = _element_series(moments, n, m, np_, mp_, pq_max + 1)
        value = sum(orders[: pq_max + 1])
        rho[3 * n + m, 3 * np_ + mp_] = value
        if (n, m) == (np_, mp_):
            trace += value.real
            remainder += abs(orders[pq_max + 1])
    if trace > 0 and remainder > remainder_tol * trace:
        raise TruncationUnreliable(
            f"series remainder {remainder:.3g} exceeds {remainder_tol:g} "
            f"of trace {trace:.3g}; raise max_degree"
        )

    rho = 0.5 * (rho + rho.conj().T)
    if post_select:
        rho[0, :] = 0.0
        rho[:, 0] = 0.0
        norm = np.trace(rho).real
        if norm <= 0.0:
            raise ZeroIntensity("no photons emitted; nothing to post-select")
        rho = rho / norm
    else:
        norm = np.trace(rho).real
        if norm <= 0.0:
            raise ZeroIntensity("state has no weight in the qutrit block")
        rho = rho / norm
    return TruncatedDensityMatrix(rho=rho, post_selected=post_select)


def perturbative_pure_state(modes: ModeResponse, spectrum: LaplacianSpectrum):
    """Leading-order two-photon amplitudes at zero temperature.

    Returns ``(beta, amplitudes)`` where ``beta = (i/2) C^T diag(eps) C`` is
    the symmetric pair-amplitude matrix and ``amplitudes`` maps a pair
    ``(i, j)`` with i <= j to the normalized post-selected amplitude of one
    photon in waveguide i and one in j (two in i when i == j).
    """
    c = spectrum.modes
    beta = 0.5j * (c.T @ np.diag(modes.eps) @ c)
    n = beta.shape[0]
    amps = {}
    for i in range(n):
        amps[(i, i)] = math.sqrt(2.0) * beta[i, i]
        for j in range(i + 1, n):
            amps[(i, j)] = 2.0 * beta[i, j]
    norm = math.sqrt(sum(abs(a) ** 2 for a in amps.values()))
    if norm == 0.0:
        raise ZeroIntensity("no pair amplitude; nothing to post-select")
    amps = {k: a / norm for k, a in amps.items()}
    return beta, amps


def perturbative_density_matrix(
    modes: ModeResponse, spectrum: LaplacianSpectrum
) -> TruncatedDensityMatrix:
    """Pure post-selected qutrit density matrix from the leading-order state.

    Two-waveguide arrays only; the N > 2 case is served by the amplitude
    dictionary of :func:`perturbative_pure_state`.
    """
    if spectrum.n != 2:
        raise ValueError("qutrit density matrix covers two waveguides only")
    _, amps = perturbative_pure_state(modes, spectrum)
    psi = np.zeros(9, dtype=complex)
    psi[3 * 2 + 0] = amps[(0, 0)]  # |20>
    psi[3 * 0 + 2] = amps[(1, 1)]  # |02>
    psi[3 * 1 + 1] = amps[(0, 1)]  # |11>
    return TruncatedDensityMatrix(rho=np.outer(psi, psi.conj()), post_selected=True)


def von_neumann_entropy(
    tdm: TruncatedDensityMatrix, traced_subsystem: int = 1
) -> float:
    """Base-3 von Neumann entropy of the reduced single-qutrit state.

    Eigenvalues are clipped at zero with tolerance 1e-12 and 0*log(0) := 0;
    the maximally entangled two-qutrit state gives exactly 1.
    """
    if traced_subsystem not in (0, 1):
        raise ValueError("traced_subsystem must be 0 or 1")
    trace = np.trace(tdm.rho).real
    if abs(trace - 1.0) > 1e-9:
        raise NotNormalized(f"density matrix trace is {trace:.12g}, expected 1")
    blocks = tdm.rho.reshape(3, 3, 3, 3)  # [n, m, n', m']
    if traced_subsystem == 1:
        reduced = np.einsum("nkpk->np", blocks)
    else:
        reduced = np.einsum("knkp->np", blocks)
    eigs = np.linalg.eigvalsh(reduced)
    if eigs.min() < -1e-12:
        raise ValueError(f"reduced state has eigenvalue {eigs.min():.3g} < 0")
    eigs = np.clip(eigs, 0.0, None)
    entropy = -sum(p * math.log(p, 3) for p in eigs if p > 0.0)
    return float(entropy)


def _fidelity_to(tdm: TruncatedDensityMatrix, psi: np.ndarray) -> float:
    overlap = np.real(psi.conj() @ tdm.rho @ psi)
    return float(math.sqrt(max(0.0, min(1.0, overlap))))


def noon_fidelity(tdm: TruncatedDensityMatrix) -> float:
    """F = sqrt(<psi|rho|psi>) against the two-photon NOON state."""
    if not tdm.post_selected:
        raise ValueError("NOON fidelity expects a post-selected state")
    psi = np.zeros(9, dtype=complex)
    psi[3 * 2 + 0] = 1.0 / math.sqrt(2.0)
    psi[3 * 0 + 2] = 1.0 / math.sqrt(2.0)
    return _fidelity_to(tdm, psi)


def maximally_entangled_fidelity(tdm: TruncatedDensityMatrix) -> float:
    """Fidelity against (|11> + |20> + |02>)/sqrt(3)."""
    if not tdm.post_selected:
        raise ValueError("fidelity expects a post-selected state")
    psi = np.zeros(9, dtype=complex)
    psi[3 * 1 + 1] = 1.0 / math.sqrt(3.0)
    psi[3 * 2 + 0] = 1.0 / math.sqrt(3.0)
    psi[3 * 0 + 2] = 1.0 / math.sqrt(3.0)
    return _fidelity_to(tdm, psi)
