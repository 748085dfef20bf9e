"""Quantum divergences between density operators behind one common kind tag.

All divergences here are unitarily invariant: d(U rho U^dag, U sigma U^dag) =
d(rho, sigma). Matrix functions (square roots, powers, logarithms) are taken
through the eigendecomposition with eigenvalues clamped at zero; logarithms and
negative powers are restricted to the support, and support violations yield
+infinity as a regular return value rather than an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import (
    SUPPORT_CUTOFF,
    DensityOperator,
    as_density,
    eigendecompose,
    singular_values,
)

KERNEL_MASS_TOL = 1e-10  # weight on the other state's kernel that counts as a violation

_KIND_NAMES = ("bures-angle", "trace-distance", "petz-renyi", "relative-entropy")


@dataclass(frozen=True)
class DivergenceKind:
    """Tag selecting one divergence; petz-renyi carries its order alpha."""

    name: str
    alpha: float | None = None

    def __post_init__(self):
        if self.name not in _KIND_NAMES:
            raise ValueError(f"unknown divergence kind {self.name!r}; expected one of {_KIND_NAMES}")
        if self.name == "petz-renyi":
            if self.alpha is None:
                raise ValueError("petz-renyi requires alpha")
            _validate_alpha(self.alpha)
        elif self.alpha is not None:
            raise ValueError(f"{self.name} does not take alpha")

    def label(self) -> str:
        if self.name == "petz-renyi":
            return f"petz-renyi({self.alpha:g})"
        return self.name


BURES_ANGLE = DivergenceKind("bures-angle")
TRACE_DISTANCE = DivergenceKind("trace-distance")
RELATIVE_ENTROPY = DivergenceKind("relative-entropy")


def petz_renyi_kind(alpha: float) -> DivergenceKind:
    return DivergenceKind("petz-renyi", float(alpha))


def _validate_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if alpha == 1.0:
        raise ValueError("alpha = 1 is the relative-entropy limit; use relative_entropy")
    return alpha


def _check_dims(rho: DensityOperator, sigma: DensityOperator) -> None:
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")


def _psd_sqrt(rho: DensityOperator) -> np.ndarray:
    ed = eigendecompose(rho.op)
    w = np.sqrt(np.clip(ed.values, 0.0, None))
    return (ed.vectors * w) @ ed.vectors.conj().T


def fidelity(rho, sigma) -> float:
    """Quantum fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, clamped to [0, 1].

    Computed as the squared nuclear norm of sqrt(rho) sqrt(sigma), which avoids
    the nested square root and is better conditioned.
    """
    rho, sigma = as_density(rho), as_density(sigma)
    _check_dims(rho, sigma)
    root = float(singular_values(_psd_sqrt(rho) @ _psd_sqrt(sigma)).sum())
    return min(1.0, max(0.0, root * root))


def bures_angle(rho, sigma) -> float:
    """arccos of the square-root fidelity; a metric on density operators."""
    return float(np.arccos(np.clip(math.sqrt(fidelity(rho, sigma)), -1.0, 1.0)))


def trace_distance(rho, sigma) -> float:
    """Half the trace norm of rho - sigma."""
    rho, sigma = as_density(rho), as_density(sigma)
    _check_dims(rho, sigma)
    eigs = np.linalg.eigvalsh(rho.mat - sigma.mat)
    return float(0.5 * np.sum(np.abs(eigs)))


def relative_entropy(rho, sigma) -> float:
    """Tr[rho ln rho - rho ln sigma] on the supports; +inf outside sigma's support.

    Uses the convention 0 ln 0 = 0. The weight of rho on sigma's kernel is
    compared against KERNEL_MASS_TOL to decide the infinite case.
    """
    rho, sigma = as_density(rho), as_density(sigma)
    _check_dims(rho, sigma)
    ed_r, ed_s = eigendecompose(rho.op), eigendecompose(sigma.op)
    p = np.clip(ed_r.values, 0.0, None)
    q = np.clip(ed_s.values, 0.0, None)
    overlap = np.abs(ed_r.vectors.conj().T @ ed_s.vectors) ** 2  # (i, j) = |<p_i|q_j>|^2
    kernel = q <= SUPPORT_CUTOFF
    if np.any(kernel):
        mass = float(p @ overlap[:, kernel].sum(axis=1))
        if mass > KERNEL_MASS_TOL:
            return math.inf
    p_supp = p > SUPPORT_CUTOFF
    entropy = float(np.sum(p[p_supp] * np.log(p[p_supp])))
    weights = p @ overlap[:, ~kernel]
    cross = float(np.sum(weights * np.log(q[~kernel])))
    return entropy - cross


def petz_renyi(rho, sigma, alpha: float) -> float:
    """(alpha - 1)^-1 ln Tr[rho^alpha sigma^(1-alpha)] with powers on the support.

    For alpha > 1 the value is +inf unless the support of rho lies inside the
    support of sigma. For alpha in (0, 1) the value is finite whenever the
    trace overlap is positive, and +inf on orthogonal supports.
    """
    alpha = _validate_alpha(alpha)
    rho, sigma = as_density(rho), as_density(sigma)
    _check_dims(rho, sigma)
    ed_r, ed_s = eigendecompose(rho.op), eigendecompose(sigma.op)
    p = np.clip(ed_r.values, 0.0, None)
    q = np.clip(ed_s.values, 0.0, None)
    if alpha > 1:
        kernel = q <= SUPPORT_CUTOFF
        if np.any(kernel):
            overlap = np.abs(ed_r.vectors.conj().T @ ed_s.vectors) ** 2
            mass = float(p @ overlap[:, kernel].sum(axis=1))
            if mass > KERNEL_MASS_TOL:
                return math.inf
        q_pow = np.where(kernel, 0.0, np.where(kernel, 1.0, q) ** (1.0 - alpha))
    else:
        q_pow = q ** (1.0 - alpha)
    rho_pow = (ed_r.vectors * p**alpha) @ ed_r.vectors.conj().T
    sigma_pow = (ed_s.vectors * q_pow) @ ed_s.vectors.conj().T
    tr = float(np.trace(rho_pow @ sigma_pow).real)
    if tr <= 0.0:
        return math.inf
    return math.log(tr) / (alpha - 1.0)


def divergence(kind: DivergenceKind, rho, sigma) -> float:
    """Evaluate the divergence selected by kind."""
    if kind.name == "bures-angle":
        return bures_angle(rho, sigma)
    if kind.name == "trace-distance":
        return trace_distance(rho, sigma)
    if kind.name == "relative-entropy":
        return relative_entropy(rho, sigma)
    return petz_renyi(rho, sigma, kind.alpha)
