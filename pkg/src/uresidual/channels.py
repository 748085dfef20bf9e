"""Stochastic maps on spectra, their Kraus lifts, and seeded random ensembles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import (
    UNITARY_ATOL,
    DensityOperator,
    HermitianOperator,
    SortedSpectrum,
    UnitaryOperator,
    as_density,
    as_spectrum,
    hermitian_part,
)

COLUMN_SUM_ATOL = 1e-12
COMPLETENESS_ATOL = 1e-10
ENTRY_NEG_ATOL = 1e-12


def as_rng(seed) -> np.random.Generator:
    """Accept an int seed, a seed sequence list, or a ready Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class StochasticMatrix:
    """Nonnegative matrix whose columns each sum to 1 within COLUMN_SUM_ATOL."""

    mat: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.mat, dtype=float)
        if mat.ndim != 2 or mat.shape[0] < 1 or mat.shape[1] < 1:
            raise ValueError(f"expected a matrix, got shape {mat.shape}")
        if np.min(mat) < -ENTRY_NEG_ATOL:
            raise ValueError(f"negative entry {np.min(mat):.3e} in stochastic matrix")
        mat = np.clip(mat, 0.0, None)
        col_sums = mat.sum(axis=0)
        worst = float(np.max(np.abs(col_sums - 1.0)))
        if worst > COLUMN_SUM_ATOL:
            raise ValueError(f"column sums deviate from 1 by {worst:.3e}")
        object.__setattr__(self, "mat", mat)

    @property
    def rows(self) -> int:
        return self.mat.shape[0]

    @property
    def cols(self) -> int:
        return self.mat.shape[1]


@dataclass(frozen=True)
class KrausSet:
    """Operators K_i with sum_i K_i^dag K_i = I on the input space."""

    operators: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        if not ops:
            raise ValueError("empty Kraus set")
        shape = ops[0].shape
        if len(shape) != 2 or any(k.shape != shape for k in ops):
            raise ValueError("Kraus operators must share one rows x cols shape")
        total = sum(k.conj().T @ k for k in ops)
        defect = float(np.max(np.abs(total - np.eye(shape[1]))))
        if defect > COMPLETENESS_ATOL:
            raise ValueError(f"incomplete Kraus set: ||sum K^dag K - I||_max = {defect:.3e}")
        object.__setattr__(self, "operators", ops)

    @property
    def in_dim(self) -> int:
        return self.operators[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.operators[0].shape[0]


def as_stochastic(t) -> StochasticMatrix:
    if isinstance(t, StochasticMatrix):
        return t
    return StochasticMatrix(t)


def apply_stochastic(t, p) -> SortedSpectrum:
    """Map a sorted spectrum through a column-stochastic matrix and re-sort.

    The re-sort is part of the map itself: the codomain is the set of sorted
    vectors, not a presentation choice.
    """
    t = as_stochastic(t)
    p = as_spectrum(p)
    if t.cols != len(p):
        raise ValueError(f"dimension mismatch: matrix has {t.cols} columns, spectrum has {len(p)}")
    return SortedSpectrum(np.sort(t.mat @ p.values))


def _require_orthonormal(basis: np.ndarray, name: str) -> np.ndarray:
    basis = np.asarray(basis, dtype=complex)
    if basis.ndim != 2 or basis.shape[0] != basis.shape[1]:
        raise ValueError(f"{name} must be a square matrix of column vectors")
    defect = float(np.max(np.abs(basis.conj().T @ basis - np.eye(basis.shape[0]))))
    if defect > UNITARY_ATOL:
        raise ValueError(f"{name} columns are not orthonormal: defect {defect:.3e}")
    return basis


def kraus_from_stochastic(t, in_basis, out_basis) -> KrausSet:
    """Kraus lift of a column-stochastic matrix between two orthonormal bases.

    One operator sqrt(T_ij) |out_i><in_j| per matrix entry. Column sums equal
    to 1 make the set complete, and on a state diagonal in in_basis with sorted
    weights p the channel produces sum_i (T p)_i |out_i><out_i|.
    """
    t = as_stochastic(t)
    in_basis = _require_orthonormal(in_basis, "in_basis")
    out_basis = _require_orthonormal(out_basis, "out_basis")
    if in_basis.shape[0] != t.cols or out_basis.shape[0] != t.rows:
        raise ValueError("basis dimensions do not match the stochastic matrix")
    ops = []
    for i in range(t.rows):
        for j in range(t.cols):
            if t.mat[i, j] > 0.0:
                ops.append(np.sqrt(t.mat[i, j]) * np.outer(out_basis[:, i], in_basis[:, j].conj()))
    return KrausSet(tuple(ops))


def apply_cptp(kraus: KrausSet, rho) -> DensityOperator:
    """sum_i K_i rho K_i^dag as a validated density operator."""
    rho = as_density(rho)
    if kraus.in_dim != rho.dim:
        raise ValueError(f"dimension mismatch: Kraus input {kraus.in_dim}, state {rho.dim}")
    out = np.zeros((kraus.out_dim, kraus.out_dim), dtype=complex)
    for k in kraus.operators:
        out += k @ rho.mat @ k.conj().T
    return DensityOperator(HermitianOperator(hermitian_part(out)))


def random_haar_unitary(dim: int, seed) -> UnitaryOperator:
    """Haar-distributed unitary: QR of a complex Gaussian with column phases fixed.

    The R-diagonal phase correction makes the distribution Haar and the output
    a deterministic function of the seed.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = as_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return UnitaryOperator(q * (d / np.abs(d)))


def random_density(dim: int, rank: int, seed) -> DensityOperator:
    """Normalized Wishart state G G^dag / Tr with G a dim x rank complex Gaussian."""
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must be in [1, {dim}], got {rank}")
    rng = as_rng(seed)
    g = (rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))) / np.sqrt(2.0)
    m = g @ g.conj().T
    m = hermitian_part(m / np.trace(m).real)
    return DensityOperator(HermitianOperator(m))


def random_stochastic(rows: int, cols: int, seed) -> StochasticMatrix:
    """Column-normalized absolute Gaussians."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    rng = as_rng(seed)
    m = np.abs(rng.standard_normal((rows, cols)))
    return StochasticMatrix(m / m.sum(axis=0, keepdims=True))


def random_hermitian(dim: int, seed, scale: float = 1.0) -> HermitianOperator:
    """GUE-like Hermitian matrix with entries of standard deviation ~scale."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = as_rng(seed)
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return HermitianOperator(scale * hermitian_part(z) / np.sqrt(2.0))
