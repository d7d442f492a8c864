"""Time-domain simulation of original and reduced networks.

Both paths start from rest at ``t0`` and integrate scalar linear
constant-coefficient ODEs with fixed-step classical RK4. Excitation
derivatives come from the closed-form :class:`~kronnet.signals.Signal`
trees, never from differencing.

Sign conventions follow the incidence matrix: edge voltages are
``V = B^T psi`` and vertex currents are ``I0 = B I1``, so for a purely
resistive network ``I0 = L psi`` with ``L`` the conductance Laplacian.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg
from numpy.polynomial import polynomial as npoly

from .graph import build_incidence, weighted_laplacian
from .network import DEFAULT_RTOL, GeneralizedNetwork, homogeneous_form
from .reduction import ReducedNetwork, _blocks, _factor_internal, injection_map, kron_reduce, schur_complement
from .signals import ZERO, Signal, linear_combination

ORDER_EPS = 1e-12
MIN_STEPS_PER_PERIOD = 20


class CoarseGridWarning(UserWarning):
    pass


class PoleError(ArithmeticError):
    def __init__(self, s: complex, roots: np.ndarray):
        self.s = s
        self.roots = roots
        super().__init__(f"s = {s} is a pole: p(s) = 0 near roots {np.round(roots, 12).tolist()}")


@dataclass(frozen=True)
class Grid:
    """Uniform time grid ``t0, t0 + dt, ..., t_end``."""

    t0: float
    t_end: float
    dt: float

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_end > self.t0:
            raise ValueError(f"t_end must exceed t0, got [{self.t0}, {self.t_end}]")
        steps = (self.t_end - self.t0) / self.dt
        if abs(steps - round(steps)) > 1e-6 * max(1.0, steps):
            raise ValueError("horizon must be an integer number of steps")

    @property
    def n_samples(self) -> int:
        return int(round((self.t_end - self.t0) / self.dt)) + 1

    @property
    def horizon(self) -> float:
        return self.t_end - self.t0

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_samples)

    @property
    def half_times(self) -> np.ndarray:
        """Grid points and midpoints, as needed by RK4 stages."""
        return self.t0 + 0.5 * self.dt * np.arange(2 * self.n_samples - 1)


@dataclass(frozen=True)
class Trace:
    t0: float
    dt: float
    samples: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim == 1:
            samples = samples[:, None]
        if samples.shape[0] < 2:
            raise ValueError("a trace needs at least 2 samples")
        if samples.shape[1] != len(self.labels):
            raise ValueError(f"{samples.shape[1]} channels but {len(self.labels)} labels")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.samples.shape[0])

    def channel(self, label: str) -> np.ndarray:
        return self.samples[:, self.labels.index(label)]

    def join(self, other: Trace) -> Trace:
        if other.samples.shape[0] != self.samples.shape[0]:
            raise ValueError("traces have different lengths")
        return Trace(self.t0, self.dt, np.hstack([self.samples, other.samples]), self.labels + other.labels)


@dataclass
class EquivalenceReport:
    max_abs_error: float
    rms_error: float
    per_channel: dict[str, dict[str, float]]
    tolerance: float
    skip: float
    passed: bool
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "max_abs_error": self.max_abs_error,
            "rms_error": self.rms_error,
            "transient_skip": self.skip,
            "per_channel": self.per_channel,
            "warnings": list(self.warnings),
        }


# ---------------------------------------------------------------------------
# scalar linear ODE integration


def effective_coefficients(coeffs) -> np.ndarray:
    """Drop leading coefficients below ``ORDER_EPS`` times the largest one."""
    a = np.asarray(coeffs, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("coefficients must be a nonempty vector")
    top = np.max(np.abs(a))
    if not top > 0:
        raise ValueError("ODE coefficients are all zero")
    nz = np.flatnonzero(np.abs(a) > ORDER_EPS * top)
    return a[: nz[-1] + 1]


def _rk4_step_maps(A: np.ndarray, g: np.ndarray, h: float):
    """Linear maps of one RK4 step for ``x' = A x + g f``.

    Returns ``(Phi, G0, Gh, G1)`` with
    ``x_next = Phi x + G0 f(t) + Gh f(t + h/2) + G1 f(t + h)``.
    """
    m = A.shape[0]

    def step(x, f0, fh, f1):
        k1 = A @ x + g * f0
        k2 = A @ (x + 0.5 * h * k1) + g * fh
        k3 = A @ (x + 0.5 * h * k2) + g * fh
        k4 = A @ (x + h * k3) + g * f1
        return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    zero = np.zeros(m)
    Phi = np.column_stack([step(e, 0.0, 0.0, 0.0) for e in np.eye(m)])
    return Phi, step(zero, 1.0, 0.0, 0.0), step(zero, 0.0, 1.0, 0.0), step(zero, 0.0, 0.0, 1.0)


def solve_lcc_ode(coeffs, forcing, ic=None, *, dt: float, n_samples: int, t0: float = 0.0) -> np.ndarray:
    """Integrate ``sum_j coeffs[j] y^(j)(t) = forcing(t)`` on a uniform grid.

    ``forcing`` is either a vectorized callable of time or an array sampled
    on the half-step grid ``t0 + k*dt/2`` (``2*n_samples - 1`` rows, as RK4
    needs midpoint values). Multiple channels may be stacked along the last
    axis. ``ic`` holds ``y, y', ..., y^(m-1)`` at ``t0`` for the effective
    order ``m``; ``None`` means at rest. With ``m = 0`` the equation is
    algebraic and is solved pointwise.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    a = effective_coefficients(coeffs)
    m = a.size - 1
    n_half = 2 * n_samples - 1
    if callable(forcing):
        f = np.asarray(forcing(t0 + 0.5 * dt * np.arange(n_half)), dtype=float)
    else:
        f = np.asarray(forcing, dtype=float)
    if f.shape[0] != n_half:
        raise ValueError(f"forcing must have {n_half} half-step samples, got {f.shape[0]}")
    squeeze = f.ndim == 1
    f = f.reshape(n_half, -1)
    if m == 0:
        y = f[::2] / a[0]
        return y[:, 0] if squeeze else y
    channels = f.shape[1]
    x = np.zeros((m, channels)) if ic is None else np.array(ic, dtype=float).reshape(m, -1) * np.ones((1, channels))
    A = np.zeros((m, m))
    A[np.arange(m - 1), np.arange(1, m)] = 1.0
    A[-1, :] = -a[:m] / a[m]
    g = np.zeros(m)
    g[-1] = 1.0 / a[m]
    Phi, G0, Gh, G1 = _rk4_step_maps(A, g, dt)
    f0, fh, f1 = f[0:-1:2], f[1::2], f[2::2]
    drive = G0[None, :, None] * f0[:, None, :] + Gh[None, :, None] * fh[:, None, :] + G1[None, :, None] * f1[:, None, :]
    y = np.empty((n_samples, channels))
    y[0] = x[0]
    for n in range(n_samples - 1):
        x = Phi @ x + drive[n]
        y[n + 1] = x[0]
    return y[:, 0] if squeeze else y


def finite_derivative(y: np.ndarray, dt: float, order: int) -> np.ndarray:
    """Five-point central difference of ``y`` at the interior samples ``2..n-3``."""
    y = np.asarray(y, dtype=float)
    m2, m1, c, p1, p2 = y[:-4], y[1:-3], y[2:-2], y[3:-1], y[4:]
    if order == 0:
        return c.copy()
    if order == 1:
        return (m2 - 8 * m1 + 8 * p1 - p2) / (12 * dt)
    if order == 2:
        return (-m2 + 16 * m1 - 30 * c + 16 * p1 - p2) / (12 * dt**2)
    if order == 3:
        return (-m2 + 2 * m1 - 2 * p1 + p2) / (2 * dt**3)
    if order == 4:
        return (m2 - 4 * m1 + 6 * c - 4 * p1 + p2) / dt**4
    raise ValueError("five-point stencils go up to order 4")


def ode_residual(coeffs, y: np.ndarray, forcing_values: np.ndarray, dt: float) -> np.ndarray:
    """``sum_j coeffs[j] y^(j) - forcing`` at interior samples, by differencing ``y``."""
    res = -np.asarray(forcing_values, dtype=float)[2:-2]
    for j, c in enumerate(coeffs):
        if c != 0:
            res = res + c * finite_derivative(y, dt, j)
    return res


# ---------------------------------------------------------------------------
# network simulation


def _combined_derivatives(signals: Sequence[Signal], coeffs, t: np.ndarray) -> np.ndarray:
    """Columns ``sum_j coeffs[j] * s^(j)(t)`` for each signal ``s``."""
    out = np.zeros((t.size, len(signals)))
    for col, s in enumerate(signals):
        d = s
        for j, c in enumerate(coeffs):
            if j:
                d = d.derivative()
            if c != 0:
                out[:, col] += c * np.broadcast_to(d(t), t.shape)
    return out


def _signals_for(ids: Sequence[int], given: Mapping[int, Signal] | None, allowed: set[int], role: str) -> list[Signal]:
    given = dict(given or {})
    unknown = sorted(set(given) - allowed)
    if unknown:
        raise ValueError(f"{role} signals given for vertices {unknown}, which are not {role} vertices")
    return [given.get(v, ZERO) for v in ids]


def _grid_messages(grid: Grid, signals: Sequence[Signal]) -> list[str]:
    omega = max((s.max_frequency() for s in signals), default=0.0)
    if omega > 0:
        steps = 2 * math.pi / omega / grid.dt
        if steps < MIN_STEPS_PER_PERIOD:
            return [f"grid too coarse: {steps:.1f} steps per shortest period (need {MIN_STEPS_PER_PERIOD})"]
    return []


def _check_grid(grid: Grid, signals: Sequence[Signal]) -> None:
    for msg in _grid_messages(grid, signals):
        warnings.warn(msg, CoarseGridWarning, stacklevel=3)


def simulate_original(
    net: GeneralizedNetwork,
    excitations: Mapping[int, Signal],
    grid: Grid,
    injections: Mapping[int, Signal] | None = None,
    rtol: float = DEFAULT_RTOL,
) -> tuple[Trace, Trace]:
    """Boundary currents and internal potentials of the unreduced network.

    The internal potentials solve ``q~(D) psi_i = L_ii^{-1}(p~(D) I_i - L_ib q~(D) psi_b)``
    and the boundary currents are ``I_b = J - F I_i`` where
    ``p~(D) J = S q~(D) psi_b``, with ``S`` the Schur complement and ``F``
    the injection map, both from the original Laplacian blocks. ``J`` and
    ``psi_i`` start at rest; splitting off ``F I_i`` keeps total current
    conserved at every sample even for injections that start nonzero.
    """
    form = homogeneous_form(net, rtol)
    L = weighted_laplacian(build_incidence(net.graph), form.weights)
    b_sig = _signals_for(net.boundary, excitations, set(net.boundary), "boundary")
    i_sig = _signals_for(net.internal, injections, set(net.internal), "internal")
    _check_grid(grid, b_sig + i_sig)

    th = grid.half_times
    U = _combined_derivatives(b_sig, form.q_tilde, th)
    W = _combined_derivatives(i_sig, form.p_tilde, th)
    S = schur_complement(L, net.partition)
    rhs_b = U @ S.T
    n = grid.n_samples
    if net.internal:
        _, L_bi, L_ii = _blocks(L, net.partition)
        chol = _factor_internal(L_ii)
        injected = _combined_derivatives(i_sig, (1.0,), grid.times) @ scipy.linalg.cho_solve(chol, L_bi.T)
        rhs_i = scipy.linalg.cho_solve(chol, (W - U @ L_bi).T).T
        psi_i = solve_lcc_ode(form.q_tilde, rhs_i, dt=grid.dt, n_samples=n, t0=grid.t0)
    else:
        psi_i = np.zeros((n, 0))
        injected = 0.0
    I_b = solve_lcc_ode(form.p_tilde, rhs_b, dt=grid.dt, n_samples=n, t0=grid.t0).reshape(n, -1) + injected
    return (
        Trace(grid.t0, grid.dt, I_b, tuple(f"I0b_{v}" for v in net.boundary)),
        Trace(grid.t0, grid.dt, psi_i, tuple(f"psi0i_{v}" for v in net.internal)),
    )


def simulate_reduced(
    red: ReducedNetwork,
    excitations: Mapping[int, Signal],
    grid: Grid,
    injections: Mapping[int, Signal] | None = None,
    F: np.ndarray | None = None,
) -> Trace:
    """Boundary currents of the reduced network, computed edge by edge.

    Each reduced edge voltage is built symbolically from the terminal
    signals, its own constitutive ODE is integrated for the edge current,
    and the currents are gathered with the reduced incidence matrix.
    Internal injections ``I_i`` of the original network appear as the extra
    boundary term ``-F I_i``: the load current leaves through the terminals.
    """
    net = red.network
    ids = red.vertex_ids
    sig = _signals_for(ids, excitations, set(ids), "boundary")
    i_sig = _signals_for(red.eliminated, injections, set(red.eliminated), "internal")
    _check_grid(grid, sig + i_sig)
    th = grid.half_times
    n = grid.n_samples
    B = build_incidence(net.graph)
    P, Q = net.P_matrix, net.Q_matrix
    I_edges = np.zeros((n, net.graph.edge_count))
    for k, (t, h) in enumerate(net.graph.edges):
        v_edge = linear_combination([1.0, -1.0], [sig[h - 1], sig[t - 1]])
        rhs = _combined_derivatives([v_edge], Q[k], th)[:, 0]
        I_edges[:, k] = solve_lcc_ode(P[k], rhs, dt=grid.dt, n_samples=n, t0=grid.t0)
    I_b = I_edges @ B.T
    if injections:
        if F is None:
            raise ValueError("internal injections need the injection map F")
        F = np.asarray(F, dtype=float)
        if F.shape != (len(ids), len(red.eliminated)):
            raise ValueError(
                f"injection map has shape {F.shape}, expected {(len(ids), len(red.eliminated))}"
            )
        I_b = I_b - _combined_derivatives(i_sig, (1.0,), grid.times) @ F.T
    return Trace(grid.t0, grid.dt, I_b, tuple(f"I0b_{v}" for v in ids))


def transient_skip(p_tilde, horizon: float) -> float:
    """Ten times the slowest decay time of ``p~(D)``, capped at 20% of the horizon."""
    a = effective_coefficients(p_tilde)
    if a.size == 1:
        return 0.0
    roots = npoly.polyroots(a)
    cap = 0.2 * horizon
    if np.any(roots.real >= -1e-12):
        return cap
    return float(min(10.0 / np.min(-roots.real), cap))


def compare_traces(a: Trace, b: Trace, tol: float, skip: float = 0.0) -> EquivalenceReport:
    if a.samples.shape != b.samples.shape or a.labels != b.labels:
        raise ValueError("traces have different shapes or channels")
    if not math.isclose(a.dt, b.dt, rel_tol=1e-12) or not math.isclose(a.t0, b.t0, rel_tol=1e-12, abs_tol=1e-12):
        raise ValueError("traces are on different time grids")
    mask = a.times >= a.t0 + skip - 1e-9 * a.dt
    diff = a.samples[mask] - b.samples[mask]
    per = {}
    for k, label in enumerate(a.labels):
        col = diff[:, k]
        per[label] = {
            "max_abs_error": float(np.max(np.abs(col))) if col.size else 0.0,
            "rms_error": float(np.sqrt(np.mean(col**2))) if col.size else 0.0,
        }
    max_err = float(np.max(np.abs(diff))) if diff.size else 0.0
    rms = float(np.sqrt(np.mean(diff**2))) if diff.size else 0.0
    return EquivalenceReport(max_err, rms, per, float(tol), float(skip), max_err <= tol)


def check_equivalence(
    net: GeneralizedNetwork,
    excitations: Mapping[int, Signal],
    grid: Grid,
    tol: float = 1e-6,
    skip: float | str = "auto",
    injections: Mapping[int, Signal] | None = None,
    rtol: float = DEFAULT_RTOL,
    red: ReducedNetwork | None = None,
    F: np.ndarray | None = None,
) -> tuple[EquivalenceReport, Trace, Trace]:
    """Reduce ``net``, simulate both paths and compare boundary currents."""
    red = kron_reduce(net, rtol) if red is None else red
    if injections and F is None:
        F = injection_map(net, rtol)
    original, _ = simulate_original(net, excitations, grid, injections, rtol)
    reduced = simulate_reduced(red, excitations, grid, injections, F)
    if skip == "auto":
        skip = transient_skip(red.p_tilde, grid.horizon)
    report = compare_traces(original, reduced, tol, float(skip))
    report.warnings.extend(_grid_messages(grid, list(excitations.values()) + list((injections or {}).values())))
    return report, original, reduced


def simulate_with_injection(
    net: GeneralizedNetwork,
    excitations: Mapping[int, Signal],
    injections: Mapping[int, Signal],
    red: ReducedNetwork,
    F: np.ndarray,
    grid: Grid,
    tol: float = 1e-6,
    skip: float | str = "auto",
) -> EquivalenceReport:
    """Compare the original network with internal injections against the
    reduced network driven by the mapped boundary injections."""
    F = np.asarray(F, dtype=float)
    if F.shape != (len(red.vertex_ids), len(red.eliminated)):
        raise ValueError(f"injection map has shape {F.shape}, expected {(len(red.vertex_ids), len(red.eliminated))}")
    report, _, _ = check_equivalence(net, excitations, grid, tol, skip, injections, red=red, F=F)
    return report


# ---------------------------------------------------------------------------
# frequency domain


def _pole_guard(p_tilde, s: complex) -> complex:
    a = effective_coefficients(p_tilde)
    val = npoly.polyval(s, a)
    scale = float(np.sum(np.abs(a) * np.abs(s) ** np.arange(a.size)))
    if abs(val) <= 1e-12 * scale:
        raise PoleError(s, npoly.polyroots(a) if a.size > 1 else np.array([]))
    return val


def frequency_response(obj: GeneralizedNetwork | ReducedNetwork, s: complex, rtol: float = DEFAULT_RTOL) -> np.ndarray:
    """Boundary admittance matrix ``Y(s)`` with ``I_b(s) = Y(s) psi_b(s)``.

    For an original network this is ``q~(s)/p~(s)`` times the Schur
    complement of its Laplacian. For a reduced network it is assembled from
    the reduced edges' own relations, ``B^ diag(q_k(s)/p_k(s)) B^T``.
    """
    s = complex(s)
    if isinstance(obj, ReducedNetwork):
        net = obj.network
        B = build_incidence(net.graph).astype(complex)
        y = np.array(
            [npoly.polyval(s, q) / _pole_guard(p, s) for p, q in zip(net.P_matrix, net.Q_matrix)],
            dtype=complex,
        )
        return (B * y) @ B.T
    form = homogeneous_form(obj, rtol)
    L = weighted_laplacian(build_incidence(obj.graph), form.weights)
    S = schur_complement(L, obj.partition)
    return (npoly.polyval(s, form.q_tilde) / _pole_guard(form.p_tilde, s)) * S


def sample_frequencies(p_tilde, n: int, rng: np.random.Generator, r_min=0.1, r_max=10.0, exclusion=1e-3) -> np.ndarray:
    """``n`` points in the annulus ``r_min <= |s| <= r_max`` away from roots of ``p~``."""
    a = effective_coefficients(p_tilde)
    roots = npoly.polyroots(a) if a.size > 1 else np.array([])
    out = []
    while len(out) < n:
        s = rng.uniform(r_min, r_max) * np.exp(1j * rng.uniform(0.0, 2 * np.pi))
        if roots.size and np.min(np.abs(roots - s)) < exclusion:
            continue
        out.append(s)
    return np.array(out)


def max_relative_error(A: np.ndarray, B: np.ndarray) -> float:
    """Largest entrywise ``|A - B| / |B|``, treating exact zeros in both as equal."""
    num = np.abs(A - B)
    den = np.abs(B)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(den > 0, num / den, np.where(num > 0, np.inf, 0.0))
    return float(np.max(rel)) if rel.size else 0.0
