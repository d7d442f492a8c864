"""Generalized electrical networks and their homogeneous normal form.

Every edge ``k`` obeys the linear constitutive relation

    sum_j p[k][j] * d^j I_k / dt^j  =  sum_j q[k][j] * d^j V_k / dt^j

with nonnegative coefficient vectors of common length ``nu + 1``. When all
``p`` vectors are positive multiples of one vector and likewise all ``q``
vectors, the network can be Kron-reduced (see :mod:`kronnet.reduction`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .graph import DirectedGraph, VertexPartition, is_connected

DEFAULT_RTOL = 1e-9


class NotReducible(Exception):
    """The coefficient vectors of one family span more than one dimension."""

    def __init__(self, which: str, rank: int, second_singular_ratio: float):
        self.which = which
        self.rank = rank
        self.second_singular_ratio = second_singular_ratio
        super().__init__(
            f"coefficient family {which} has numerical rank {rank} "
            f"(sigma2/sigma1 = {second_singular_ratio:.3e}); "
            "the rank-1 reducibility condition does not hold"
        )


class InvalidNetwork(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


def _as_vectors(rows) -> tuple[tuple[float, ...], ...]:
    return tuple(tuple(float(x) for x in row) for row in rows)


@dataclass(frozen=True)
class GeneralizedNetwork:
    """The five-tuple (graph, boundary, nu, P, Q).

    ``P[k]`` and ``Q[k]`` are the coefficient vectors of edge ``k`` (0-based,
    in graph edge order), indexed by derivative order. Construction does not
    validate; call :func:`validate` for a report.
    """

    graph: DirectedGraph
    partition: VertexPartition
    nu: int
    P: tuple[tuple[float, ...], ...]
    Q: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "nu", int(self.nu))
        object.__setattr__(self, "P", _as_vectors(self.P))
        object.__setattr__(self, "Q", _as_vectors(self.Q))

    @classmethod
    def build(cls, vertex_count: int, edges, boundary, nu: int, P, Q) -> GeneralizedNetwork:
        return cls(
            DirectedGraph(vertex_count, tuple(edges)),
            VertexPartition.from_boundary(vertex_count, boundary),
            nu,
            P,
            Q,
        )

    @property
    def P_matrix(self) -> np.ndarray:
        """Coefficient matrix with one row per edge, shape ``(e, nu + 1)``."""
        return np.array(self.P, dtype=float).reshape(len(self.P), self.nu + 1)

    @property
    def Q_matrix(self) -> np.ndarray:
        return np.array(self.Q, dtype=float).reshape(len(self.Q), self.nu + 1)

    @property
    def boundary(self) -> tuple[int, ...]:
        return self.partition.boundary

    @property
    def internal(self) -> tuple[int, ...]:
        return self.partition.internal

    def with_edges(self, edges, P, Q) -> GeneralizedNetwork:
        return GeneralizedNetwork(
            DirectedGraph(self.graph.vertex_count, tuple(edges)), self.partition, self.nu, P, Q
        )


def validate(net: GeneralizedNetwork) -> list[str]:
    """List every violated network invariant. An empty list means valid."""
    problems: list[str] = []
    g = net.graph
    if net.nu < 0:
        problems.append(f"nu must be nonnegative, got {net.nu}")
    for k, (t, h) in enumerate(g.edges):
        if t == h:
            problems.append(f"self-loop edge {k + 1}")
    if not is_connected(g):
        problems.append("disconnected graph")
    problems.extend(net.partition.problems(g.vertex_count))
    for name, family in (("P", net.P), ("Q", net.Q)):
        if len(family) != g.edge_count:
            problems.append(f"{name} has {len(family)} vectors for {g.edge_count} edges")
    for name, family, zero_label in (("p", net.P, "short-circuit"), ("q", net.Q, "open-circuit")):
        for k, vec in enumerate(family):
            if len(vec) != net.nu + 1:
                problems.append(f"length mismatch: {name} of edge {k + 1} has {len(vec)} entries, expected {net.nu + 1}")
            if not all(math.isfinite(x) for x in vec):
                problems.append(f"non-finite coefficient in {name} of edge {k + 1}")
                continue
            if any(x < 0 for x in vec):
                problems.append(f"negative coefficient in {name} of edge {k + 1}")
            if all(x == 0 for x in vec):
                problems.append(f"{zero_label} edge {k + 1}: {name} is all zero")
    return problems


def ensure_valid(net: GeneralizedNetwork) -> None:
    problems = validate(net)
    if problems:
        raise InvalidNetwork(problems)


class Rank1(NamedTuple):
    basis: np.ndarray
    scales: np.ndarray


def _singular_ratio(M: np.ndarray) -> tuple[np.ndarray, float]:
    s = np.linalg.svd(M, compute_uv=False)
    ratio = float(s[1] / s[0]) if s.size > 1 and s[0] > 0 else 0.0
    return s, ratio


def rank1_check(vectors, rtol: float = DEFAULT_RTOL) -> Rank1 | None:
    """Test whether nonnegative ``vectors`` span a one-dimensional space.

    Returns the basis vector (nonnegative, largest entry 1) and positive
    scale factors with ``vectors[k] ~= scales[k] * basis``, or ``None`` when
    the second singular value exceeds ``rtol`` times the first or a
    reconstruction residual exceeds ``rtol``.
    """
    M = np.atleast_2d(np.asarray(vectors, dtype=float))
    if M.size == 0 or not np.all(np.isfinite(M)) or np.any(M < 0):
        return None
    tol = max(rtol, 16 * np.finfo(float).eps * max(M.shape))
    _, s, vt = np.linalg.svd(M, full_matrices=False)
    if s[0] == 0 or (s.size > 1 and s[1] > tol * s[0]):
        return None
    basis = vt[0]
    if basis.sum() < 0:
        basis = -basis
    basis = np.clip(basis, 0.0, None)
    basis = basis / basis.max()
    # SVD roundoff leaves ~eps entries where every vector has an exact zero
    basis[(basis < 8 * np.finfo(float).eps) & np.all(M == 0, axis=0)] = 0.0
    scales = M @ basis / (basis @ basis)
    norms = np.linalg.norm(M, axis=1)
    resid = np.linalg.norm(M - np.outer(scales, basis), axis=1)
    if np.any(scales <= 0) or np.any(resid > tol * norms):
        return None
    return Rank1(basis, scales)


def numerical_rank(vectors, rtol: float = DEFAULT_RTOL) -> tuple[int, float]:
    M = np.atleast_2d(np.asarray(vectors, dtype=float))
    s, ratio = _singular_ratio(M)
    if s.size == 0 or s[0] == 0:
        return 0, 0.0
    return int(np.sum(s > rtol * s[0])), ratio


@dataclass(frozen=True)
class HomogeneousForm:
    """Shared basis vectors and per-edge scales of a rank-1 network.

    ``p[k] = lam[k] * p_tilde`` and ``q[k] = gamma[k] * q_tilde``; the edge
    weights are ``weights[k] = gamma[k] / lam[k]``.
    """

    p_tilde: np.ndarray
    q_tilde: np.ndarray
    lam: np.ndarray
    gamma: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return self.gamma / self.lam

    @property
    def Gamma(self) -> np.ndarray:
        return np.diag(self.weights)


def homogeneous_form(net: GeneralizedNetwork, rtol: float = DEFAULT_RTOL) -> HomogeneousForm:
    """Factor the network's coefficient families, or raise :class:`NotReducible`."""
    ensure_valid(net)
    pr = rank1_check(net.P_matrix, rtol)
    if pr is None:
        rank, ratio = numerical_rank(net.P_matrix, rtol)
        raise NotReducible("P", max(rank, 2), ratio)
    qr = rank1_check(net.Q_matrix, rtol)
    if qr is None:
        rank, ratio = numerical_rank(net.Q_matrix, rtol)
        raise NotReducible("Q", max(rank, 2), ratio)
    return HomogeneousForm(pr.basis, qr.basis, pr.scales, qr.scales)


def is_homogeneous(net: GeneralizedNetwork, rtol: float = DEFAULT_RTOL) -> bool:
    try:
        homogeneous_form(net, rtol)
    except NotReducible:
        return False
    return True


# Element kind -> (required values, minimum nu).
ELEMENT_KINDS: dict[str, tuple[tuple[str, ...], int]] = {
    "R": (("r",), 0),
    "L": (("l",), 1),
    "C": (("c",), 1),
    "series-RL": (("r", "l"), 1),
    "series-RC": (("r", "c"), 1),
    "series-LC": (("l", "c"), 2),
    "series-RLC": (("r", "l", "c"), 2),
}


def _pad(vec: Sequence[float], nu: int) -> tuple[float, ...]:
    return tuple(float(x) for x in vec) + (0.0,) * (nu + 1 - len(vec))


def element(kind: str, values: Mapping[str, float], nu: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Coefficient pair ``(p, q)`` for a standard two-terminal element.

    Series strings containing a capacitor are differentiated once so the
    integral term disappears, e.g. series RLC gives
    ``l I'' + r I' + I / c = V'``.
    """
    if kind not in ELEMENT_KINDS:
        raise ValueError(f"unknown element kind {kind!r}; expected one of {sorted(ELEMENT_KINDS)}")
    names, min_nu = ELEMENT_KINDS[kind]
    missing = [n for n in names if n not in values]
    if missing:
        raise ValueError(f"element {kind} needs values {list(names)}, missing {missing}")
    vals = {n: float(values[n]) for n in names}
    for n, x in vals.items():
        if not (x > 0 and math.isfinite(x)):
            raise ValueError(f"element {kind}: value {n}={x!r} must be strictly positive")
    if nu < min_nu:
        raise ValueError(f"element {kind} needs nu >= {min_nu}, got nu={nu}")
    r, l, c = vals.get("r"), vals.get("l"), vals.get("c")
    if kind == "R":
        p, q = (r,), (1.0,)
    elif kind == "L":
        p, q = (0.0, l), (1.0,)
    elif kind == "C":
        p, q = (1.0,), (0.0, c)
    elif kind == "series-RL":
        p, q = (r, l), (1.0,)
    elif kind == "series-RC":
        p, q = (1.0 / c, r), (0.0, 1.0)
    elif kind == "series-LC":
        p, q = (1.0 / c, 0.0, l), (0.0, 1.0)
    else:
        p, q = (1.0 / c, r, l), (0.0, 1.0)
    return _pad(p, nu), _pad(q, nu)
