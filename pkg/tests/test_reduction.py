import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kronnet import (
    NotReducible,
    VertexPartition,
    build_incidence,
    injection_map,
    kron_reduce,
    laplacian_to_graph,
    schur_complement,
    weighted_laplacian,
)
from kronnet.reduction import NotALaplacian, SingularInternalBlock
import properties
from networks import (
    eliminate_one_by_one,
    example1,
    example2,
    laplacian_of,
    path_132,
    random_network,
    resistive,
    series_rl,
    y_network,
    y_to_delta_conductances,
)


def test_schur_path_matches_elimination_oracle():
    L = laplacian_of(path_132())
    S = schur_complement(L, VertexPartition.from_boundary(3, [1, 2]))
    np.testing.assert_allclose(S, eliminate_one_by_one(L, keep=[0, 1]), atol=1e-15)
    np.testing.assert_allclose(S, [[0.5, -0.5], [-0.5, 0.5]], atol=1e-15)


def test_schur_no_internal_is_identity():
    L = laplacian_of(path_132())
    S = schur_complement(L, VertexPartition.from_boundary(3, [1, 2, 3]))
    np.testing.assert_array_equal(S, L)


def test_schur_y_matches_y_delta_oracle():
    L = laplacian_of(y_network())
    S = schur_complement(L, VertexPartition.from_boundary(4, [1, 2, 3]))
    g = y_to_delta_conductances(1, 1, 1)
    np.testing.assert_allclose(-S[[0, 0, 1], [1, 2, 2]], g, atol=1e-15)
    np.testing.assert_allclose(np.diag(S), [2 / 3] * 3, atol=1e-15)


def test_schur_singular_internal_block():
    L = np.array([[1.0, -1.0, 0.0], [-1.0, 1.0, 0.0], [0.0, 0.0, 0.0]])
    with pytest.raises(SingularInternalBlock):
        schur_complement(L, VertexPartition.from_boundary(3, [1, 2]))


@pytest.mark.parametrize("w", [0.5, 1.0])
def test_laplacian_to_graph_single_edge(w):
    g, weights = laplacian_to_graph(np.array([[w, -w], [-w, w]]))
    assert g.edges == ((1, 2),)
    np.testing.assert_allclose(weights, [w])


def test_laplacian_to_graph_triangle():
    S = schur_complement(laplacian_of(y_network()), VertexPartition.from_boundary(4, [1, 2, 3]))
    g, weights = laplacian_to_graph(S)
    assert g.edges == ((1, 2), (1, 3), (2, 3))
    np.testing.assert_allclose(weights, [1 / 3] * 3, atol=1e-15)


def test_laplacian_to_graph_rejects_positive_offdiagonal():
    with pytest.raises(NotALaplacian):
        laplacian_to_graph(np.array([[1.0, 0.5], [0.5, 1.0]]))


def test_laplacian_to_graph_rejects_disconnected():
    with pytest.raises(NotALaplacian):
        laplacian_to_graph(np.zeros((2, 2)))


def test_kron_reduce_rl_path_series_sum():
    net = series_rl(3, [(1, 3), (3, 2)], [1, 2], [(1, 2), (2, 4)])
    red = kron_reduce(net)
    assert red.network.graph.edges == ((1, 2),)
    p, q = np.array(red.network.P[0]), np.array(red.network.Q[0])
    # r I + l I' = V  <=>  (p / q0) I = V
    np.testing.assert_allclose(p / q[0], [3, 6], rtol=1e-12)
    assert q[1] == 0
    np.testing.assert_allclose(red.gamma_hat, [1 / 6], rtol=1e-12)
    assert red.network.boundary == (1, 2) and red.network.internal == ()


def test_kron_reduce_y_to_delta():
    red = kron_reduce(y_network())
    assert red.network.graph.edges == ((1, 2), (1, 3), (2, 3))
    resist = [p[0] / q[0] for p, q in zip(red.network.P, red.network.Q)]
    np.testing.assert_allclose(resist, [3, 3, 3], rtol=1e-12)
    assert red.schur_residual() <= 1e-12
    assert red.eliminated == (4,)


def test_kron_reduce_without_internal_keeps_graph():
    net = series_rl(2, [(2, 1), (1, 2)], [1, 2], [(1, 2), (2, 4)])
    red = kron_reduce(net)
    assert red.network.graph == net.graph
    np.testing.assert_allclose(red.gamma_hat, [0.5, 0.25])
    again = kron_reduce(red.network)
    np.testing.assert_allclose(again.gamma_hat, red.gamma_hat, rtol=1e-12)
    assert again.network.graph == red.network.graph


@pytest.mark.parametrize("net", [example1(), example2()])
def test_kron_reduce_rejects_examples(net):
    with pytest.raises(NotReducible, match="rank 2"):
        kron_reduce(net)


def test_kron_reduce_non_contiguous_boundary_ids():
    net = resistive(4, [(1, 2), (2, 3), (3, 4)], [2, 4], [1, 1, 1])
    red = kron_reduce(net)
    assert red.vertex_ids == (2, 4)
    assert red.network.graph.edges == ((1, 2),)
    np.testing.assert_allclose(red.gamma_hat, [0.5])


def test_parallel_edges_merge():
    net = resistive(3, [(1, 3), (3, 1), (3, 2)], [1, 2], [2.0, 2.0, 1.0])
    red = kron_reduce(net)
    # 2 || 2 = 1 ohm in series with 1 ohm
    assert red.network.graph.edge_count == 1
    np.testing.assert_allclose(red.gamma_hat, [0.5], rtol=1e-12)


def test_injection_map_path_unit():
    np.testing.assert_allclose(injection_map(path_132()), [[0.5], [0.5]], atol=1e-15)


def test_injection_map_current_divider():
    # Gamma = diag(1, 3): r = (1, 1/3)
    F = injection_map(path_132(r=(1.0, 1 / 3)))
    np.testing.assert_allclose(F, [[1 / 4], [3 / 4]], atol=1e-15)


def test_injection_map_sums_to_one_by_elimination():
    net = series_rl(5, [(1, 3), (3, 4), (4, 2), (3, 5), (5, 2)], [1, 2], [(1, 2), (2, 4), (3, 6), (1, 2), (5, 10)])
    F = injection_map(net)
    np.testing.assert_allclose(F.sum(axis=0), 1.0, atol=1e-12)
    # brute force: inject unit current at each internal vertex, solve with boundary grounded
    L = laplacian_of(net)
    for col, vid in enumerate(net.internal):
        rhs = np.zeros(5)
        rhs[vid - 1] = 1.0
        keep = [v - 1 for v in net.internal]
        psi = np.zeros(5)
        psi[keep] = np.linalg.solve(L[np.ix_(keep, keep)], rhs[keep])
        currents = L @ psi
        np.testing.assert_allclose(-currents[[0, 1]], F[:, col], atol=1e-12)


def test_injection_map_needs_internal():
    with pytest.raises(ValueError):
        injection_map(resistive(2, [(1, 2)], [1, 2], [1.0]))


# ---------------------------------------------------------------------------
# properties over random networks


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_laplacian_closure_and_eq16(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    L = laplacian_of(net)
    S = schur_complement(L, net.partition)
    scale = max(1.0, np.abs(S).max())
    assert np.max(np.abs(S.sum(axis=1))) <= 1e-11 * scale
    assert np.max(np.abs(S - S.T)) <= 1e-11 * scale
    assert np.max(S - np.diag(np.diag(S))) <= 1e-11 * scale
    if S.shape[0] > 1:
        ev = np.linalg.eigvalsh(S)
        assert ev[1] > 1e-9 * ev[-1]
    red = kron_reduce(net)
    assert red.schur_residual() <= 1e-10 * scale
    g, w = laplacian_to_graph(S) if S.shape[0] > 1 else (None, None)
    if g is not None:
        rebuilt = weighted_laplacian(build_incidence(g), w)
        assert np.max(np.abs(rebuilt - S)) <= 1e-10 * scale


@pytest.mark.parametrize(
    "check",
    [
        properties.check_scale_invariance,
        properties.check_relabel_invariance,
        properties.check_reorient_invariance,
        properties.check_sequential_elimination,
    ],
)
@settings(max_examples=100, deadline=None)
@given(seed=seeds)
def test_reduction_properties(check, seed):
    check(seed)
