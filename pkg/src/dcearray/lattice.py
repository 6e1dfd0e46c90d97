"""Coupling graph of the waveguide array and its normal-mode decomposition.

The array of waveguides coupled nearest-neighbour maps onto a graph
Laplacian: open chains give the path graph, rings the cycle graph, and
arbitrary weighted graphs are accepted for defect studies.  Normal modes
of the boundary dynamics are the Laplacian eigenvectors; every downstream
observable is a function of the eigenvalues ``lambda_n`` and the real
orthogonal mode coefficients ``c[n][i]``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NegativeWeight,
    NoConvergence,
    NotSymmetric,
    RingTooSmall,
    UnsupportedTopology,
)

__all__ = [
    "TopologyKind",
    "ArrayTopology",
    "LaplacianSpectrum",
    "build_laplacian",
    "eigendecompose",
    "analytic_spectrum",
]


class TopologyKind(enum.Enum):
    OPEN_CHAIN = "open_chain"
    RING = "ring"
    CUSTOM_GRAPH = "custom_graph"


@dataclass(frozen=True)
class ArrayTopology:
    """Coupling layout of the waveguide array.

    ``edges`` is only consulted for CUSTOM_GRAPH and holds ``(i, j, weight)``
    triples with 0-based node indices.
    """

    kind: TopologyKind
    n: int
    edges: tuple = field(default=())

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one waveguide, got n={self.n}")
        if self.kind is TopologyKind.RING and self.n < 3:
            raise RingTooSmall(f"ring topology needs n >= 3, got n={self.n}")
        for i, j, w in self.edges:
            if i == j:
                raise ValueError(f"self-loop on node {i} is not allowed")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i},{j}) outside 0..{self.n - 1}")
            if w < 0:
                raise NegativeWeight(f"edge ({i},{j}) has weight {w} < 0")

    @classmethod
    def open_chain(cls, n: int) -> "ArrayTopology":
        return cls(TopologyKind.OPEN_CHAIN, n)

    @classmethod
    def ring(cls, n: int) -> "ArrayTopology":
        return cls(TopologyKind.RING, n)

    @classmethod
    def custom(cls, n: int, edges) -> "ArrayTopology":
        return cls(TopologyKind.CUSTOM_GRAPH, n, tuple(tuple(e) for e in edges))


@dataclass(frozen=True)
class LaplacianSpectrum:
    """Eigenvalues (ascending) and row-wise orthonormal eigenvectors.

    ``modes[n, i]`` is the coefficient c_n^i of waveguide ``i`` in normal
    mode ``n``.  Signs follow a fixed convention: in each eigenvector the
    entry of largest magnitude is positive (first such index on ties).
    """

    lambdas: np.ndarray
    modes: np.ndarray

    @property
    def n(self) -> int:
        return len(self.lambdas)


def build_laplacian(topology: ArrayTopology) -> np.ndarray:
    """Weighted graph Laplacian of the coupling topology."""
    n = topology.n
    lap = np.zeros((n, n))
    if topology.kind is TopologyKind.OPEN_CHAIN:
        edges = [(i, i + 1, 1.0) for i in range(n - 1)]
    elif topology.kind is TopologyKind.RING:
        edges = [(i, (i + 1) % n, 1.0) for i in range(n)]
    else:
        edges = list(topology.edges)
    for i, j, w in edges:
        lap[i, i] += w
        lap[j, j] += w
        lap[i, j] -= w
        lap[j, i] -= w
    return lap


def _fix_signs(modes: np.ndarray) -> np.ndarray:
    """Flip eigenvector signs so the largest-magnitude entry is positive."""
    out = modes.copy()
    for k in range(out.shape[0]):
        idx = int(np.argmax(np.abs(out[k])))
        if out[k, idx] < 0:
            out[k] = -out[k]
    return out


def eigendecompose(
    lap: np.ndarray,
    tol_factor: float = 1e-14,
    max_sweeps: int = 100,
) -> LaplacianSpectrum:
    """Diagonalize a symmetric matrix with cyclic Jacobi rotations.

    Stops when the off-diagonal Frobenius norm drops below
    ``tol_factor * ||L||_F``.  Small and dense by design; the arrays in
    scope have at most a few hundred modes.
    """
    lap = np.asarray(lap, dtype=float)
    n = lap.shape[0]
    scale = max(1.0, float(np.abs(lap).max()))
    if lap.shape != (n, n) or np.abs(lap - lap.T).max() > 1e-12 * scale:
        raise NotSymmetric("input matrix is not symmetric within 1e-12")

    a = lap.copy()
    vecs = np.eye(n)
    norm = np.linalg.norm(lap)
    if norm == 0.0:
        norm = 1.0
    thresh = tol_factor * norm

    def off_norm(mat):
        # direct sum over off-diagonal entries; the subtraction form
        # sum(a^2) - sum(diag^2) bottoms out at sqrt(eps)*||A|| from
        # cancellation and stalls the convergence test
        strict = mat - np.diag(np.diag(mat))
        return float(np.linalg.norm(strict))

    converged = n == 1
    for _ in range(max_sweeps):
        off = off_norm(a)
        if off <= thresh:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= thresh / (n * n):
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (
                    abs(theta) + math.sqrt(theta * theta + 1.0)
                )
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
                rot_p = c * vecs[:, p] - s * vecs[:, q]
                rot_q = s * vecs[:, p] + c * vecs[:, q]
                vecs[:, p], vecs[:, q] = rot_p, rot_q
    else:
        converged = False
    if not converged:
        off = off_norm(a)
        if off > thresh:
            raise NoConvergence(
                f"Jacobi did not converge in {max_sweeps} sweeps (off={off:g})"
            )

    lambdas = np.diag(a).copy()
    order = np.argsort(lambdas, kind="stable")
    lambdas = lambdas[order]
    modes = _fix_signs(vecs[:, order].T)
    return LaplacianSpectrum(lambdas=lambdas, modes=modes)


def analytic_spectrum(topology: ArrayTopology) -> LaplacianSpectrum:
    """Closed-form Laplacian spectrum for open chains and rings.

    Open chain: lambda_k = 2 - 2 cos(k pi / N) with cosine eigenvectors.
    Ring: lambda_k = 2 - 2 cos(2 pi k / N) with cosine/sine pairs.
    Serves as the independent cross-check for the Jacobi solver.
    """
    n = topology.n
    if topology.kind is TopologyKind.OPEN_CHAIN:
        lambdas = np.array([2.0 - 2.0 * math.cos(k * math.pi / n) for k in range(n)])
        modes = np.zeros((n, n))
        i = np.arange(n)
        for k in range(n):
            if k == 0:
                modes[k] = 1.0 / math.sqrt(n)
            else:
                modes[k] = math.sqrt(2.0 / n) * np.cos(
                    k * math.pi * (2 * i + 1) / (2.0 * n)
                )
        order = np.argsort(lambdas, kind="stable")
    elif topology.kind is TopologyKind.RING:
        i = np.arange(n)
        rows = []
        lams = []
        rows.append(np.full(n, 1.0 / math.sqrt(n)))
        lams.append(0.0)
        for k in range(1, n // 2 + 1):
            lam = 2.0 - 2.0 * math.cos(2.0 * math.pi * k / n)
            if 2 * k == n:  # alternating mode, only for even n
                rows.append(np.array([(-1.0) ** ii for ii in i]) / math.sqrt(n))
                lams.append(lam)
            else:
                rows.append(math.sqrt(2.0 / n) * np.cos(2.0 * math.pi * k * i / n))
                lams.append(lam)
                rows.append(math.sqrt(2.0 / n) * np.sin(2.0 * math.pi * k * i / n))
                lams.append(lam)
        lambdas = np.array(lams)
        modes = np.array(rows)
        order = np.argsort(lambdas, kind="stable")
    else:
        raise UnsupportedTopology("no closed-form spectrum for custom graphs")
    return LaplacianSpectrum(lambdas=lambdas[order], modes=_fix_signs(modes[order]))
