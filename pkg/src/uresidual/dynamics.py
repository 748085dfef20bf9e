"""Non-Hermitian evolution of normalized states and dissipative speed-limit checks.

The generator splits as H - i*Gamma with both parts Hermitian (hbar = 1). The
normalized state obeys

    d rho / dt = -i [H, rho] - {Gamma, rho} + 2 <Gamma> rho,

which reduces to the von Neumann equation when Gamma vanishes. A trajectory
records, per grid point, the state, its sorted spectrum, the mean and standard
deviation of Gamma, the accumulated dissipative action (the time integral of
that standard deviation), the purity, and the Fisher information of the
spectrum. The bound checks compare the action against the Bures angle to the
interaction-picture rotated initial state, against the residual Bures distance
between endpoint spectra, against the Fisher rate pointwise, and against the
purity change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .divergences import bures_angle
from .residual import residual_bures
from .spectral import (
    HERMITIAN_ATOL,
    DensityOperator,
    HermitianOperator,
    UnitaryOperator,
    eigendecompose,
    hermitian_defect,
    hermitian_part,
)

BOUND_ATOL = 1e-7          # slack allowed when testing the integral bounds
FISHER_RATE_ATOL = 1e-4    # slack allowed when testing the pointwise Fisher bound
FISHER_MODE_CUTOFF = 1e-10  # eigenvalues at or below this are dropped from the Fisher sum
TRACE_FLOOR = 1e-12        # unnormalized trace below this aborts the integration


class IntegrationAbort(RuntimeError):
    """Raised when the unnormalized trace collapses during integration."""

    def __init__(self, step: int, trace: float):
        super().__init__(f"state trace collapsed to {trace:.3e} at step {step}")
        self.step = step
        self.trace = trace


def _time_indexed(spec, dim: int, name: str) -> Callable[[float], np.ndarray]:
    """Normalize a constant matrix, a piecewise list, or a callable to t -> matrix."""
    if callable(spec):
        def from_callable(t: float) -> np.ndarray:
            return _checked(np.asarray(spec(t), dtype=complex), dim, name, t)

        return from_callable
    if isinstance(spec, (list, tuple)):
        edges = np.asarray([float(t0) for t0, _ in spec])
        if edges.size == 0 or edges[0] != 0.0 or np.any(np.diff(edges) <= 0):
            raise ValueError(f"{name} pieces must start at t = 0 with increasing onsets")
        mats = [_checked(np.asarray(m, dtype=complex), dim, name, t0) for t0, m in spec]

        def from_pieces(t: float) -> np.ndarray:
            return mats[int(np.searchsorted(edges, t, side="right")) - 1]

        return from_pieces
    mat = _checked(np.asarray(spec, dtype=complex), dim, name, 0.0)

    def constant(_: float) -> np.ndarray:
        return mat

    return constant


def _checked(mat: np.ndarray, dim: int, name: str, t: float) -> np.ndarray:
    if mat.shape != (dim, dim):
        raise ValueError(f"{name} has shape {mat.shape}, expected {(dim, dim)}")
    defect, idx = hermitian_defect(mat)
    if defect > HERMITIAN_ATOL:
        raise ValueError(f"{name}(t={t:g}) is not Hermitian: defect {defect:.3e} at {idx}")
    return hermitian_part(mat)


@dataclass(frozen=True)
class NonHermitianGenerator:
    """Time-indexed Hermitian pair (H, Gamma) of the generator H - i*Gamma."""

    h: Callable[[float], np.ndarray]
    gamma: Callable[[float], np.ndarray]
    dim: int

    @classmethod
    def build(cls, h_spec, gamma_spec, dim: int) -> "NonHermitianGenerator":
        """Accept constant matrices, [(t_start, matrix), ...] pieces, or callables."""
        return cls(
            h=_time_indexed(h_spec, dim, "H"),
            gamma=_time_indexed(gamma_spec, dim, "Gamma"),
            dim=dim,
        )

    @classmethod
    def constant(cls, h, gamma) -> "NonHermitianGenerator":
        h = np.asarray(h, dtype=complex)
        return cls.build(h, gamma, h.shape[0])


@dataclass(frozen=True)
class Trajectory:
    """Grid record of one integration run.

    fisher holds the central-difference Fisher information at interior points
    and NaN at the endpoints. crossings[k] flags grid points where the sorted
    eigenvalue branches swapped relative to point k - 1.
    """

    times: np.ndarray
    states: tuple
    spectra: np.ndarray
    gamma_mean: np.ndarray
    gamma_std: np.ndarray
    action: np.ndarray
    purity: np.ndarray
    fisher: np.ndarray
    gamma_diag: np.ndarray
    crossings: np.ndarray

    @property
    def dim(self) -> int:
        return self.spectra.shape[1]

    @property
    def grid_points(self) -> int:
        return self.times.size


def _deriv(h: np.ndarray, g: np.ndarray, rho: np.ndarray) -> np.ndarray:
    comm = h @ rho - rho @ h
    anti = g @ rho + rho @ g
    mean = np.trace(g @ rho).real
    return -1j * comm - anti + 2.0 * mean * rho


def integrate(gen: NonHermitianGenerator, rho0, t_end: float, steps: int) -> Trajectory:
    """Fixed-step fourth-order Runge-Kutta on the normalized evolution equation.

    The trace is renormalized after every step as a drift guard; a trace below
    TRACE_FLOOR before renormalization raises IntegrationAbort with the step
    index. All trajectory statistics are evaluated on the renormalized states.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    rho0 = rho0 if isinstance(rho0, DensityOperator) else DensityOperator(HermitianOperator(rho0))
    if rho0.dim != gen.dim:
        raise ValueError(f"dimension mismatch: state {rho0.dim}, generator {gen.dim}")
    n = gen.dim
    dt = t_end / steps
    times = np.linspace(0.0, t_end, steps + 1)

    spectra = np.empty((steps + 1, n))
    gamma_mean = np.empty(steps + 1)
    gamma_std = np.empty(steps + 1)
    purity = np.empty(steps + 1)
    gamma_diag = np.empty((steps + 1, n))
    crossings = np.zeros(steps + 1, dtype=bool)
    mats = []

    rho = hermitian_part(rho0.mat)
    rho = rho / np.trace(rho).real
    prev_vectors = None
    for k in range(steps + 1):
        t = times[k]
        h_t = gen.h(t)
        g_t = gen.gamma(t)

        ed = eigendecompose(HermitianOperator(rho))
        clamped = np.clip(ed.values, 0.0, None)
        spectra[k] = clamped / clamped.sum()
        mean = np.trace(g_t @ rho).real
        second = np.trace(g_t @ g_t @ rho).real
        gamma_mean[k] = mean
        gamma_std[k] = math.sqrt(max(second - mean * mean, 0.0))
        purity[k] = float(np.sum(spectra[k] ** 2))
        gamma_diag[k] = np.real(np.einsum("ij,jk,ki->i", ed.vectors.conj().T, g_t, ed.vectors))
        if prev_vectors is not None:
            overlap = np.abs(prev_vectors.conj().T @ ed.vectors) ** 2
            crossings[k] = bool(np.any(np.argmax(overlap, axis=0) != np.arange(n)))
        prev_vectors = ed.vectors
        mats.append(rho)

        if k == steps:
            break
        h_m = gen.h(t + 0.5 * dt)
        g_m = gen.gamma(t + 0.5 * dt)
        h_n = gen.h(t + dt)
        g_n = gen.gamma(t + dt)
        k1 = _deriv(h_t, g_t, rho)
        k2 = _deriv(h_m, g_m, rho + 0.5 * dt * k1)
        k3 = _deriv(h_m, g_m, rho + 0.5 * dt * k2)
        k4 = _deriv(h_n, g_n, rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        trace = np.trace(rho).real
        if trace < TRACE_FLOOR:
            raise IntegrationAbort(k + 1, trace)
        rho = hermitian_part(rho / trace)

    action = np.concatenate(([0.0], np.cumsum(0.5 * dt * (gamma_std[1:] + gamma_std[:-1]))))
    fisher = np.full(steps + 1, np.nan)
    traj = Trajectory(
        times=times,
        states=tuple(_clean_state(m) for m in mats),
        spectra=spectra,
        gamma_mean=gamma_mean,
        gamma_std=gamma_std,
        action=action,
        purity=purity,
        fisher=fisher,
        gamma_diag=gamma_diag,
        crossings=crossings,
    )
    for k in range(1, steps):
        fisher[k] = fisher_information(traj, k)
    return traj


def _clean_state(mat: np.ndarray) -> DensityOperator:
    ed = eigendecompose(HermitianOperator(mat))
    w = np.clip(ed.values, 0.0, None)
    clean = hermitian_part((ed.vectors * (w / w.sum())) @ ed.vectors.conj().T)
    return DensityOperator(HermitianOperator(clean))


def fisher_information(traj: Trajectory, step_index: int) -> float:
    """sum_i p_i (d ln p_i / dt)^2 by central differences on the sorted spectra.

    Modes at or below FISHER_MODE_CUTOFF at the point or its neighbors are
    dropped from the sum. Crossing grid points are still evaluated; consult
    traj.crossings to skip them, since the sorted branches swap there.
    """
    if not 0 < step_index < traj.grid_points - 1:
        raise ValueError(f"step_index must be interior, got {step_index}")
    dt = traj.times[step_index + 1] - traj.times[step_index]
    prev = traj.spectra[step_index - 1]
    here = traj.spectra[step_index]
    nxt = traj.spectra[step_index + 1]
    keep = (here > FISHER_MODE_CUTOFF) & (prev > FISHER_MODE_CUTOFF) & (nxt > FISHER_MODE_CUTOFF)
    if not np.any(keep):
        return 0.0
    rate = (np.log(nxt[keep]) - np.log(prev[keep])) / (2.0 * dt)
    return float(np.sum(here[keep] * rate**2))


def interaction_unitary(gen: NonHermitianGenerator, t: float, steps: int) -> UnitaryOperator:
    """Time-ordered exponential of -i H over [0, t] by a midpoint-rule product.

    Each factor exp(-i H(t_mid) dt) is unitary by construction; later factors
    multiply on the left.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    dt = t / steps
    u = np.eye(gen.dim, dtype=complex)
    for k in range(steps):
        h_mid = gen.h((k + 0.5) * dt)
        w, v = np.linalg.eigh(h_mid)
        u = ((v * np.exp(-1j * w * dt)) @ v.conj().T) @ u
    return UnitaryOperator(u)


@dataclass(frozen=True)
class BoundReport:
    """One inequality check: holds means lhs >= rhs - atol."""

    name: str
    lhs: float
    rhs: float
    holds: bool
    applicable: bool

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs


def check_bound_state(gen: NonHermitianGenerator, traj: Trajectory, atol: float = BOUND_ATOL) -> BoundReport:
    """Dissipative action vs. Bures angle between the rotated start and the end state.

    Applicable only while the action stays at or below pi/2.
    """
    lhs = float(traj.action[-1])
    v = interaction_unitary(gen, float(traj.times[-1]), traj.grid_points - 1)
    rho0 = traj.states[0].mat
    moved = _clean_state(v.mat @ rho0 @ v.mat.conj().T)
    rhs = bures_angle(moved, traj.states[-1])
    return BoundReport(
        name="bures_state_bound",
        lhs=lhs,
        rhs=rhs,
        holds=bool(lhs >= rhs - atol),
        applicable=bool(lhs <= math.pi / 2),
    )


def check_bound_residual(
    traj: Trajectory,
    start_index: int = 0,
    stop_index: int = -1,
    atol: float = BOUND_ATOL,
) -> BoundReport:
    """Action accumulated over a grid sub-interval vs. the residual Bures distance.

    Valid on any sub-interval because the start time is arbitrary.
    """
    start_index = range(traj.grid_points)[start_index]
    stop_index = range(traj.grid_points)[stop_index]
    if stop_index <= start_index:
        raise ValueError("stop_index must come after start_index")
    lhs = float(traj.action[stop_index] - traj.action[start_index])
    rhs = residual_bures(traj.spectra[start_index], traj.spectra[stop_index])
    return BoundReport(
        name="bures_residual_bound",
        lhs=lhs,
        rhs=rhs,
        holds=bool(lhs >= rhs - atol),
        applicable=bool(lhs <= math.pi / 2),
    )


def check_fisher_rate(traj: Trajectory, atol: float = FISHER_RATE_ATOL) -> BoundReport:
    """Pointwise bound gamma_std >= sqrt(fisher)/2 at interior, non-crossing points.

    Reports the worst point; lhs/rhs are the values there.
    """
    worst_margin = math.inf
    lhs = rhs = 0.0
    seen = False
    for k in range(1, traj.grid_points - 1):
        if traj.crossings[k] or traj.crossings[k + 1]:
            continue
        rate = 0.5 * math.sqrt(max(traj.fisher[k], 0.0))
        margin = traj.gamma_std[k] - rate
        seen = True
        if margin < worst_margin:
            worst_margin = margin
            lhs, rhs = float(traj.gamma_std[k]), float(rate)
    return BoundReport(
        name="fisher_rate_bound",
        lhs=lhs,
        rhs=rhs,
        holds=bool(seen and worst_margin >= -atol),
        applicable=seen,
    )


def check_purity_bound(traj: Trajectory, atol: float = BOUND_ATOL) -> BoundReport:
    """2 sin(action) vs. |purity(end) - purity(start)|; applicable for action < pi/2."""
    action = float(traj.action[-1])
    lhs = 2.0 * math.sin(action)
    rhs = float(abs(traj.purity[-1] - traj.purity[0]))
    return BoundReport(
        name="purity_bound",
        lhs=lhs,
        rhs=rhs,
        holds=bool(lhs >= rhs - atol),
        applicable=bool(action < math.pi / 2),
    )


def eigenvalue_flow(traj: Trajectory) -> np.ndarray:
    """Re-integrate d ln p_i = -2 (<p_i|Gamma|p_i> - <Gamma>) dt along the trajectory.

    Trapezoid rule on the stored per-step rates; an independent reconstruction
    of the sorted spectra that is meaningful on crossing-free segments.
    """
    rates = -2.0 * (traj.gamma_diag - traj.gamma_mean[:, None])
    dt = np.diff(traj.times)[:, None]
    log_p = np.log(np.clip(traj.spectra[0], 1e-300, None))[None, :] + np.concatenate(
        (np.zeros((1, traj.dim)), np.cumsum(0.5 * dt * (rates[1:] + rates[:-1]), axis=0))
    )
    return np.exp(log_p)
