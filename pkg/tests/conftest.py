"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import numpy as np

import uresidual as ur

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def density(diag_or_mat) -> ur.DensityOperator:
    mat = np.asarray(diag_or_mat, dtype=complex)
    if mat.ndim == 1:
        mat = np.diag(mat)
    return ur.DensityOperator(ur.HermitianOperator(mat))


def rotate(mat: np.ndarray, u: np.ndarray) -> np.ndarray:
    return u @ mat @ u.conj().T


def pure_state(vec) -> ur.DensityOperator:
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return density(np.outer(v, v.conj()))


def random_pair(dim: int, rng, rank: int | None = None):
    rank = dim if rank is None else rank
    return ur.random_density(dim, rank, rng), ur.random_density(dim, rank, rng)


def random_scenario(rng, dim: int, t_end: float = 0.7, steps: int = 1500, gamma_scale: float = 0.35):
    """Constant-generator scenario with generically non-commuting H and Gamma."""
    h = ur.random_hermitian(dim, rng).mat
    g = ur.random_hermitian(dim, rng, scale=gamma_scale).mat
    rho0 = ur.random_density(dim, dim, rng)
    gen = ur.NonHermitianGenerator.constant(h, g)
    return gen, rho0, t_end, steps
