"""Operator types and the sorted-spectrum algebra of unitary equivalence classes.

The unitary orbit of a Hermitian operator is fully described by its eigenvalues
arranged in non-descending order. This module provides the operator types, the
spectral decomposition with a deterministic eigenbasis, the map from operators
to sorted spectra, the addition/scaling algebra on sorted spectra, and the
aligning unitary that moves one operator onto the eigenbasis of another.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Tolerance ladder shared across the package.
HERMITIAN_ATOL = 1e-12       # per-entry |A - A^dag| allowance
UNITARY_ATOL = 1e-10         # ||U^dag U - I||_max allowance
RECONSTRUCTION_ATOL = 1e-10  # V diag(w) V^dag vs. source
EIGENVALUE_CLAMP = 1e-12     # density eigenvalues in [-clamp, 0) are set to 0
TRACE_ATOL = 1e-12           # density trace vs. 1
SUPPORT_CUTOFF = 1e-12       # eigenvalues at or below this count as kernel
PROB_ATOL = 1e-9             # probability-vector sum allowance on user input

_TIE_REL = 1e-10             # eigenvalue gap (relative to scale) treated as degenerate
_PHASE_FLOOR = 1e-12         # smallest entry magnitude used for phase fixing


def _as_complex_matrix(entries) -> np.ndarray:
    mat = np.asarray(entries, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    return mat


def hermitian_defect(entries: np.ndarray) -> tuple[float, tuple[int, int]]:
    """Largest |A - A^dag| entry and its position."""
    gap = np.abs(entries - entries.conj().T)
    i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
    return float(gap[i, j]), (int(i), int(j))


def hermitian_part(entries: np.ndarray) -> np.ndarray:
    """Return (A + A^dag) / 2."""
    mat = np.asarray(entries, dtype=complex)
    return 0.5 * (mat + mat.conj().T)


@dataclass(frozen=True)
class HermitianOperator:
    """Square complex matrix equal to its conjugate transpose within HERMITIAN_ATOL."""

    mat: np.ndarray

    def __post_init__(self):
        mat = _as_complex_matrix(self.mat)
        defect, idx = hermitian_defect(mat)
        if defect > HERMITIAN_ATOL:
            raise ValueError(
                f"matrix is not Hermitian: |A - A^dag| = {defect:.3e} at entry {idx} "
                f"exceeds {HERMITIAN_ATOL:.0e}"
            )
        object.__setattr__(self, "mat", mat)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


@dataclass(frozen=True)
class UnitaryOperator:
    """Square complex matrix with U^dag U = I within UNITARY_ATOL."""

    mat: np.ndarray

    def __post_init__(self):
        mat = _as_complex_matrix(self.mat)
        defect = np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])))
        if defect > UNITARY_ATOL:
            raise ValueError(f"matrix is not unitary: ||U^dag U - I||_max = {defect:.3e}")
        object.__setattr__(self, "mat", mat)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, positive semidefinite (within EIGENVALUE_CLAMP), unit-trace operator."""

    op: HermitianOperator

    def __post_init__(self):
        op = self.op
        if not isinstance(op, HermitianOperator):
            op = HermitianOperator(op)
            object.__setattr__(self, "op", op)
        trace = float(np.trace(op.mat).real)
        if abs(trace - 1.0) > TRACE_ATOL:
            raise ValueError(f"density operator trace is {trace!r}, not 1 within {TRACE_ATOL:.0e}")
        lo = float(np.linalg.eigvalsh(hermitian_part(op.mat)).min())
        if lo < -EIGENVALUE_CLAMP:
            raise ValueError(
                f"density operator has eigenvalue {lo:.3e} below -{EIGENVALUE_CLAMP:.0e}"
            )

    @property
    def mat(self) -> np.ndarray:
        return self.op.mat

    @property
    def dim(self) -> int:
        return self.op.dim

    def spectrum(self) -> "SortedSpectrum":
        """Sorted eigenvalues, clamped to [0, 1] and renormalized to sum 1."""
        values = eigendecompose(self.op).values
        values = np.clip(values, 0.0, None)
        return SortedSpectrum(values / values.sum())

    def purity(self) -> float:
        return float(np.sum(self.spectrum().values ** 2))


@dataclass(frozen=True)
class SortedSpectrum:
    """Real vector in non-descending order, the canonical form of a unitary orbit."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise ValueError(f"expected a 1-D real vector, got shape {values.shape}")
        if np.any(np.diff(values) < 0):
            raise ValueError("values are not in non-descending order")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class EigenDecomposition:
    """Non-descending eigenvalues with an aligned orthonormal eigenvector matrix."""

    values: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        vectors = _as_complex_matrix(self.vectors)
        if values.shape != (vectors.shape[0],):
            raise ValueError("values/vectors shape mismatch")
        if np.any(np.diff(values) < 0):
            raise ValueError("eigenvalues are not in non-descending order")
        defect = np.max(np.abs(vectors.conj().T @ vectors - np.eye(vectors.shape[0])))
        if defect > UNITARY_ATOL:
            raise ValueError(f"eigenvector matrix is not orthonormal: defect {defect:.3e}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "vectors", vectors)

    @property
    def dim(self) -> int:
        return self.values.size

    def reconstruct(self) -> np.ndarray:
        """V diag(values) V^dag."""
        return (self.vectors * self.values) @ self.vectors.conj().T


def as_hermitian(a) -> HermitianOperator:
    """Coerce an array-like, HermitianOperator, or DensityOperator to HermitianOperator."""
    if isinstance(a, HermitianOperator):
        return a
    if isinstance(a, DensityOperator):
        return a.op
    return HermitianOperator(a)


def as_density(a) -> DensityOperator:
    """Coerce an array-like or DensityOperator to a validated DensityOperator."""
    if isinstance(a, DensityOperator):
        return a
    return DensityOperator(as_hermitian(a))


def as_spectrum(a) -> SortedSpectrum:
    """Coerce an array-like or SortedSpectrum to a validated SortedSpectrum."""
    if isinstance(a, SortedSpectrum):
        return a
    return SortedSpectrum(a)


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its first entry above _PHASE_FLOOR is real positive."""
    fixed = vectors.copy()
    for j in range(fixed.shape[1]):
        col = fixed[:, j]
        nz = np.nonzero(np.abs(col) > _PHASE_FLOOR)[0]
        if nz.size == 0:
            continue
        pivot = col[nz[0]]
        fixed[:, j] = col * (pivot.conjugate() / abs(pivot))
    return fixed


def _order_degenerate(values: np.ndarray, vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Within each degenerate group, order columns by the row index of their largest entry."""
    tie_tol = _TIE_REL * max(1.0, float(np.max(np.abs(values))) if values.size else 1.0)
    order = np.arange(values.size)
    start = 0
    for stop in range(1, values.size + 1):
        if stop == values.size or values[stop] - values[stop - 1] > tie_tol:
            if stop - start > 1:
                block = order[start:stop]
                keys = [int(np.argmax(np.abs(vectors[:, j]))) for j in block]
                block_sorted = [j for _, j in sorted(zip(keys, block), key=lambda kj: (kj[0], kj[1]))]
                order[start:stop] = block_sorted
            start = stop
    return values[order], vectors[:, order]


def eigendecompose(a) -> EigenDecomposition:
    """Spectral decomposition with non-descending eigenvalues and a deterministic basis.

    The input is symmetrized as (A + A^dag) / 2 before decomposition. Within a
    degenerate eigenspace, columns are ordered by the row index of their
    largest-magnitude entry and each column's first significant entry is
    rotated to be real positive, so repeated calls give identical output.
    """
    mat = hermitian_part(as_hermitian(a).mat)
    values, vectors = np.linalg.eigh(mat)
    vectors = _fix_phases(vectors)
    values, vectors = _order_degenerate(values, vectors)
    return EigenDecomposition(values=values, vectors=vectors)


def sorted_spectrum(a) -> SortedSpectrum:
    """Eigenvalues in non-descending order; the canonical image of a unitary orbit.

    For a DensityOperator the spectrum is clamped at 0 and renormalized to sum 1
    so downstream square roots and logarithms stay defined.
    """
    if isinstance(a, DensityOperator):
        return a.spectrum()
    return SortedSpectrum(eigendecompose(a).values)


def class_add(a, b) -> SortedSpectrum:
    """Componentwise sum of two sorted spectra (the quotient-set addition)."""
    av, bv = as_spectrum(a).values, as_spectrum(b).values
    if av.size != bv.size:
        raise ValueError(f"length mismatch: {av.size} vs {bv.size}")
    return SortedSpectrum(av + bv)


def class_scale(k: float, a) -> SortedSpectrum:
    """Scale a sorted spectrum by k >= 0 (the quotient-set scalar multiplication)."""
    k = float(k)
    if k < 0:
        raise ValueError(f"scale factor must be nonnegative, got {k}")
    return SortedSpectrum(k * as_spectrum(a).values)


def aligning_unitary(a, b) -> UnitaryOperator:
    """Unitary W pairing the i-th sorted eigenvector of A with the i-th of B.

    W A W^dag carries A's eigenvalues on B's eigenbasis, so it commutes with B
    and has the same sorted spectrum as A.
    """
    ha, hb = as_hermitian(a), as_hermitian(b)
    if ha.dim != hb.dim:
        raise ValueError(f"dimension mismatch: {ha.dim} vs {hb.dim}")
    va = eigendecompose(ha).vectors
    vb = eigendecompose(hb).vectors
    return UnitaryOperator(vb @ va.conj().T)


def singular_values(x) -> np.ndarray:
    """Singular values of an arbitrary complex matrix, in non-descending order."""
    mat = np.asarray(x, dtype=complex)
    if mat.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {mat.shape}")
    return np.linalg.svd(mat, compute_uv=False)[::-1]


def trace_norm(x) -> float:
    """Sum of singular values."""
    return float(singular_values(x).sum())
