"""JSON wire formats for operators, spectra, channels, and simulation scenarios.

Operators travel as {"dim": n, "re": [[...]], "im": [[...]]}, spectra as
{"values": [...]}. Stochastic matrices and Kraus operators reuse the same
re/im matrix scheme with explicit rows/cols. Floats round-trip through repr,
so serialization error stays below 1e-15 per entry.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channels import KrausSet, StochasticMatrix
from .dynamics import NonHermitianGenerator, Trajectory
from .spectral import DensityOperator, HermitianOperator, SortedSpectrum, as_density


def _matrix_payload(mat: np.ndarray) -> dict:
    arr = np.asarray(mat, dtype=complex)
    return {"re": arr.real.tolist(), "im": arr.imag.tolist()}


def _matrix_from_payload(obj: dict, what: str) -> np.ndarray:
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float) if "im" in obj else np.zeros_like(re)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed {what}: {exc}") from exc
    if re.shape != im.shape or re.ndim != 2:
        raise ValueError(f"malformed {what}: re/im shapes {re.shape} vs {im.shape}")
    return re + 1j * im


def operator_to_json(op) -> dict:
    mat = op.mat if hasattr(op, "mat") else np.asarray(op, dtype=complex)
    payload = _matrix_payload(mat)
    return {"dim": int(mat.shape[0]), **payload}


def operator_from_json(obj: dict) -> np.ndarray:
    mat = _matrix_from_payload(obj, "operator")
    if mat.shape[0] != mat.shape[1]:
        raise ValueError(f"operator matrix is not square: {mat.shape}")
    if "dim" in obj and int(obj["dim"]) != mat.shape[0]:
        raise ValueError(f"declared dim {obj['dim']} does not match matrix shape {mat.shape}")
    return mat


def density_from_json(obj: dict) -> DensityOperator:
    return as_density(operator_from_json(obj))


def spectrum_to_json(spectrum: SortedSpectrum) -> dict:
    return {"values": np.asarray(spectrum.values, dtype=float).tolist()}


def spectrum_from_json(obj: dict) -> SortedSpectrum:
    try:
        values = obj["values"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed spectrum: {exc}") from exc
    return SortedSpectrum(np.asarray(values, dtype=float))


def stochastic_to_json(t: StochasticMatrix) -> dict:
    return {"rows": t.rows, "cols": t.cols, **_matrix_payload(t.mat)}


def stochastic_from_json(obj: dict) -> StochasticMatrix:
    mat = _matrix_from_payload(obj, "stochastic matrix")
    if np.max(np.abs(mat.imag)) > 0.0:
        raise ValueError("stochastic matrix must be real")
    return StochasticMatrix(mat.real)


def kraus_to_json(kraus: KrausSet) -> dict:
    return {
        "operators": [
            {"rows": k.shape[0], "cols": k.shape[1], **_matrix_payload(k)}
            for k in kraus.operators
        ]
    }


def kraus_from_json(obj: dict) -> KrausSet:
    try:
        ops = obj["operators"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed Kraus set: {exc}") from exc
    return KrausSet(tuple(_matrix_from_payload(entry, "Kraus operator") for entry in ops))


def load_density(path) -> DensityOperator:
    with open(path) as handle:
        return density_from_json(json.load(handle))


@dataclass(frozen=True)
class Scenario:
    """Parsed simulation input: generator pieces, initial state, grid."""

    generator: NonHermitianGenerator
    rho0: DensityOperator
    t_end: float
    steps: int


def _generator_spec(obj, dim: int, what: str):
    """Constant operator payload or {"piecewise": [{"t": t0, "op": payload}, ...]}."""
    if isinstance(obj, dict) and "piecewise" in obj:
        pieces = []
        for entry in obj["piecewise"]:
            pieces.append((float(entry["t"]), operator_from_json(entry["op"])))
        return pieces
    mat = operator_from_json(obj)
    if mat.shape != (dim, dim):
        raise ValueError(f"{what} has shape {mat.shape}, expected {(dim, dim)}")
    return mat


def scenario_from_json(obj: dict) -> Scenario:
    try:
        rho0 = density_from_json(obj["rho0"])
        t_end = float(obj["t_end"])
        steps = int(obj["steps"])
        h_spec = _generator_spec(obj["h"], rho0.dim, "H")
        gamma_spec = _generator_spec(obj["gamma"], rho0.dim, "Gamma")
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed scenario: {exc}") from exc
    gen = NonHermitianGenerator.build(h_spec, gamma_spec, rho0.dim)
    return Scenario(generator=gen, rho0=rho0, t_end=t_end, steps=steps)


def load_scenario(path) -> Scenario:
    with open(path) as handle:
        return scenario_from_json(json.load(handle))


def trajectory_csv_header(dim: int) -> list[str]:
    return (
        ["t"]
        + [f"p_{i + 1}" for i in range(dim)]
        + ["gamma_mean", "gamma_std", "action", "purity", "fisher", "bound_lhs", "bound_rhs"]
    )


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """One row per grid point; bound columns track the running residual bound.

    bound_lhs is the action accumulated since t = 0 and bound_rhs the residual
    Bures distance between the initial and current sorted spectra.
    """
    from .residual import residual_bures

    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(trajectory_csv_header(traj.dim))
        for k in range(traj.grid_points):
            rhs = residual_bures(traj.spectra[0], traj.spectra[k]) if k else 0.0
            row = (
                [traj.times[k]]
                + list(traj.spectra[k])
                + [
                    traj.gamma_mean[k],
                    traj.gamma_std[k],
                    traj.action[k],
                    traj.purity[k],
                    traj.fisher[k],
                    traj.action[k],
                    rhs,
                ]
            )
            writer.writerow([repr(float(x)) for x in row])
