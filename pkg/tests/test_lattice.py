import math

import numpy as np
import pytest

from dcearray.errors import (
    NegativeWeight,
    NotSymmetric,
    RingTooSmall,
    UnsupportedTopology,
)
from dcearray.lattice import (
    ArrayTopology,
    analytic_spectrum,
    build_laplacian,
    eigendecompose,
)


def test_open_chain_two_laplacian():
    lap = build_laplacian(ArrayTopology.open_chain(2))
    assert np.array_equal(lap, [[1.0, -1.0], [-1.0, 1.0]])


def test_ring_three_laplacian():
    lap = build_laplacian(ArrayTopology.ring(3))
    assert np.array_equal(lap, [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]])


def test_open_chain_three_laplacian():
    lap = build_laplacian(ArrayTopology.open_chain(3))
    assert np.array_equal(lap, [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])


def test_custom_graph_laplacian_row_sums():
    top = ArrayTopology.custom(4, [(0, 1, 2.0), (1, 2, 0.5), (2, 3, 1.0)])
    lap = build_laplacian(top)
    assert np.allclose(lap.sum(axis=1), 0.0)
    assert np.allclose(lap, lap.T)
    assert lap[0, 1] == -2.0


def test_ring_needs_three_nodes():
    with pytest.raises(RingTooSmall):
        ArrayTopology.ring(2)


def test_negative_weight_rejected():
    with pytest.raises(NegativeWeight):
        ArrayTopology.custom(3, [(0, 1, -1.0)])


def test_self_loop_rejected():
    with pytest.raises(ValueError):
        ArrayTopology.custom(3, [(1, 1, 1.0)])


def test_two_waveguide_modes_match_closed_form():
    spec = eigendecompose(build_laplacian(ArrayTopology.open_chain(2)))
    assert np.allclose(spec.lambdas, [0.0, 2.0], atol=1e-14)
    s = 1.0 / math.sqrt(2.0)
    assert np.allclose(spec.modes[0], [s, s], atol=1e-14)
    assert np.allclose(spec.modes[1], [s, -s], atol=1e-14)


def test_open_chain_three_eigenvalues():
    spec = eigendecompose(build_laplacian(ArrayTopology.open_chain(3)))
    assert np.allclose(spec.lambdas, [0.0, 1.0, 3.0], atol=1e-12)


def test_ring_three_eigenvalues():
    spec = eigendecompose(build_laplacian(ArrayTopology.ring(3)))
    assert np.allclose(spec.lambdas, [0.0, 3.0, 3.0], atol=1e-12)


def test_not_symmetric_rejected():
    with pytest.raises(NotSymmetric):
        eigendecompose(np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_analytic_open_chain_two():
    spec = analytic_spectrum(ArrayTopology.open_chain(2))
    assert np.allclose(spec.lambdas, [0.0, 2.0])


def test_analytic_ring_31_top_eigenvalue():
    spec = analytic_spectrum(ArrayTopology.ring(31))
    expected = 2.0 - 2.0 * math.cos(30.0 * math.pi / 31.0)
    assert abs(spec.lambdas[-1] - expected) < 1e-12
    assert abs(expected - 3.9897) < 5e-4


def test_analytic_ring_four():
    spec = analytic_spectrum(ArrayTopology.ring(4))
    assert np.allclose(spec.lambdas, [0.0, 2.0, 2.0, 4.0], atol=1e-12)


def test_analytic_rejects_custom_graph():
    with pytest.raises(UnsupportedTopology):
        analytic_spectrum(ArrayTopology.custom(3, [(0, 1, 1.0)]))


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 13, 31, 64])
@pytest.mark.parametrize("kind", ["open_chain", "ring"])
def test_jacobi_matches_analytic_eigenvalues(kind, n):
    if kind == "ring" and n < 3:
        pytest.skip("ring needs n >= 3")
    maker = getattr(ArrayTopology, kind)
    top = maker(n)
    jac = eigendecompose(build_laplacian(top))
    ana = analytic_spectrum(top)
    assert np.max(np.abs(jac.lambdas - ana.lambdas)) < 1e-10


@pytest.mark.parametrize("n", [2, 5, 17])
def test_spectrum_invariants(n):
    lap = build_laplacian(ArrayTopology.open_chain(n))
    spec = eigendecompose(lap)
    assert np.allclose(spec.modes @ spec.modes.T, np.eye(n), atol=1e-12)
    rebuilt = spec.modes.T @ np.diag(spec.lambdas) @ spec.modes
    assert np.max(np.abs(rebuilt - lap)) < 1e-12
    assert spec.lambdas.min() > -1e-12
    assert np.all(np.diff(spec.lambdas) >= -1e-13)


def test_zero_mode_is_uniform():
    spec = eigendecompose(build_laplacian(ArrayTopology.ring(7)))
    assert abs(spec.lambdas[0]) < 1e-12
    assert np.allclose(spec.modes[0], np.full(7, 1.0 / math.sqrt(7)), atol=1e-10)


def test_sign_convention_largest_entry_positive():
    rng = np.random.default_rng(11)
    for _ in range(20):
        m = rng.normal(size=(6, 6))
        lap = m + m.T
        spec = eigendecompose(lap)
        for row in spec.modes:
            assert row[int(np.argmax(np.abs(row)))] > 0


def test_jacobi_agrees_with_numpy_on_random_symmetric():
    rng = np.random.default_rng(3)
    for _ in range(10):
        m = rng.normal(size=(8, 8))
        sym = m + m.T
        spec = eigendecompose(sym)
        ref = np.sort(np.linalg.eigvalsh(sym))
        assert np.max(np.abs(spec.lambdas - ref)) < 1e-10
