"""Kron reduction: eliminate internal vertices of a rank-1 network.

The pipeline is homogeneous form -> weighted Laplacian ``B Gamma B^T`` ->
Schur complement onto the boundary -> read the reduced graph off the
off-diagonal entries. Every reduced edge shares the original ``p_tilde``
and carries ``q = weight * q_tilde``, so it obeys the same kind of
constitutive relation with the same order ``nu``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .graph import DirectedGraph, GraphError, VertexPartition, build_incidence, is_connected, weighted_laplacian
from .network import DEFAULT_RTOL, GeneralizedNetwork, HomogeneousForm, homogeneous_form

COND_LIMIT = 1e12
EDGE_EPS = 1e-12


class SingularInternalBlock(ArithmeticError):
    """The internal Laplacian block cannot be safely inverted."""


class NotALaplacian(ValueError):
    pass


def _blocks(L: np.ndarray, part: VertexPartition):
    b = [v - 1 for v in part.boundary]
    i = [v - 1 for v in part.internal]
    return L[np.ix_(b, b)], L[np.ix_(b, i)], L[np.ix_(i, i)]


def _factor_internal(L_ii: np.ndarray):
    cond = np.linalg.cond(L_ii)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularInternalBlock(
            f"internal block has condition number {cond:.3e} (limit {COND_LIMIT:.0e}); "
            "check connectivity and edge weights"
        )
    try:
        return scipy.linalg.cho_factor(L_ii)
    except np.linalg.LinAlgError as exc:
        raise SingularInternalBlock(f"internal block is not positive definite: {exc}") from exc


def schur_complement(L: np.ndarray, part: VertexPartition) -> np.ndarray:
    """``L_bb - L_bi L_ii^{-1} L_ib`` for a weighted Laplacian ``L``."""
    L_bb, L_bi, L_ii = _blocks(np.asarray(L, dtype=float), part)
    if L_ii.shape[0] == 0:
        return L_bb.copy()
    S = L_bb - L_bi @ scipy.linalg.cho_solve(_factor_internal(L_ii), L_bi.T)
    return 0.5 * (S + S.T)


def injection_matrix(L: np.ndarray, part: VertexPartition) -> np.ndarray:
    """``-L_bi L_ii^{-1}``: boundary share of unit currents injected internally."""
    _, L_bi, L_ii = _blocks(np.asarray(L, dtype=float), part)
    if L_ii.shape[0] == 0:
        raise ValueError("network has no internal vertices to inject into")
    return -scipy.linalg.cho_solve(_factor_internal(L_ii), L_bi.T).T


def laplacian_to_graph(L_red: np.ndarray) -> tuple[DirectedGraph, np.ndarray]:
    """Recover the graph and edge weights realizing a Laplacian matrix.

    One edge per vertex pair ``i < j`` whose off-diagonal entry is below
    ``-EDGE_EPS`` times the largest off-diagonal magnitude, oriented from the
    smaller index to the larger. Vertices are numbered ``1..n`` by row.
    """
    L_red = np.asarray(L_red, dtype=float)
    n = L_red.shape[0]
    if L_red.shape != (n, n):
        raise NotALaplacian("matrix must be square")
    iu, ju = np.triu_indices(n, k=1)
    off = L_red[iu, ju]
    scale = float(np.max(np.abs(off))) if off.size else 0.0
    eps = EDGE_EPS * scale
    if np.any(off > eps):
        k = int(np.argmax(off))
        raise NotALaplacian(f"positive off-diagonal entry {off[k]:.3e} at ({iu[k] + 1}, {ju[k] + 1})")
    keep = off < -eps
    edges = tuple((int(i) + 1, int(j) + 1) for i, j in zip(iu[keep], ju[keep]))
    graph = DirectedGraph(n, edges)
    if not is_connected(graph):
        raise NotALaplacian("reduced Laplacian describes a disconnected graph")
    return graph, -off[keep]


@dataclass(frozen=True)
class ReducedNetwork:
    """Kron-reduced network on the boundary vertices of the original.

    ``network`` numbers its vertices ``1..nb``; ``vertex_ids[k]`` is the
    original id of reduced vertex ``k + 1``.
    """

    network: GeneralizedNetwork
    gamma_hat: np.ndarray
    schur: np.ndarray
    vertex_ids: tuple[int, ...]
    p_tilde: np.ndarray
    q_tilde: np.ndarray
    eliminated: tuple[int, ...]

    @property
    def incidence(self) -> np.ndarray:
        return build_incidence(self.network.graph)

    def realized_laplacian(self) -> np.ndarray:
        B = self.incidence.astype(float)
        return (B * self.gamma_hat) @ B.T

    def schur_residual(self) -> float:
        """Max-norm gap between ``B^ Gamma^ B^T`` and the stored Schur complement."""
        if self.schur.size == 0:
            return 0.0
        return float(np.max(np.abs(self.realized_laplacian() - self.schur)))


def _assemble(form: HomogeneousForm, graph: DirectedGraph, weights: np.ndarray, nu: int) -> GeneralizedNetwork:
    p = tuple(form.p_tilde)
    P = tuple(p for _ in weights)
    Q = tuple(tuple(w * form.q_tilde) for w in weights)
    return GeneralizedNetwork(
        graph, VertexPartition(tuple(graph.vertices), ()), nu, P, Q
    )


def kron_reduce(net: GeneralizedNetwork, rtol: float = DEFAULT_RTOL) -> ReducedNetwork:
    """Eliminate all internal vertices while keeping the terminal behavior.

    Raises :class:`~kronnet.network.NotReducible` when the coefficient vectors
    are not rank-1. A network without internal vertices comes back on its
    own graph with edges rewritten in homogeneous form.
    """
    form = homogeneous_form(net, rtol)
    B = build_incidence(net.graph)
    L = weighted_laplacian(B, form.weights)
    S = schur_complement(L, net.partition)
    if not net.internal:
        graph, weights = net.graph, form.weights.copy()
    else:
        try:
            graph, weights = laplacian_to_graph(S)
        except NotALaplacian as exc:
            raise GraphError(f"Schur complement is not a connected-graph Laplacian: {exc}") from exc
    return ReducedNetwork(
        network=_assemble(form, graph, weights, net.nu),
        gamma_hat=weights,
        schur=S,
        vertex_ids=net.boundary,
        p_tilde=form.p_tilde,
        q_tilde=form.q_tilde,
        eliminated=net.internal,
    )


def injection_map(net: GeneralizedNetwork, rtol: float = DEFAULT_RTOL) -> np.ndarray:
    """Matrix ``F`` (boundary x internal) mapping internal injections to boundary ones.

    A current ``I`` injected at the internal vertices acts on the terminals
    like the boundary injection ``F @ I``. Columns of ``F`` sum to one.
    """
    form = homogeneous_form(net, rtol)
    L = weighted_laplacian(build_incidence(net.graph), form.weights)
    return injection_matrix(L, net.partition)
