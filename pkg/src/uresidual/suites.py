"""Randomized verification campaigns behind the `verify` CLI command.

Each suite runs seeded independent trial units. A unit performs a bundle of
checks and reports, per check, the excess over its allowance (excess <= 0 is a
pass). Units derive their RNG from (suite, seed, unit index), so results are
reproducible and independent of worker count; the reduce is ordered by index.
"""

from __future__ import annotations

import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channels import (
    apply_cptp,
    apply_stochastic,
    kraus_from_stochastic,
    random_density,
    random_haar_unitary,
    random_hermitian,
    random_stochastic,
)
from .divergences import (
    BURES_ANGLE,
    RELATIVE_ENTROPY,
    TRACE_DISTANCE,
    DivergenceKind,
    divergence,
    petz_renyi_kind,
    relative_entropy,
    trace_distance,
)
from .residual import (
    minimize_over_unitaries,
    residual_bures,
    residual_kl,
    residual_measure,
    residual_trace,
)
from .spectral import (
    DensityOperator,
    HermitianOperator,
    aligning_unitary,
    class_add,
    class_scale,
    eigendecompose,
    hermitian_part,
    singular_values,
    sorted_spectrum,
    trace_norm,
)

SUITE_NAMES = (
    "isomorphism",
    "metric-axioms",
    "monotonicity",
    "convexity",
    "oracle",
    "inequalities",
)

_ORACLE_KINDS = ("bures-angle", "trace-distance", "petz-renyi", "relative-entropy")


@dataclass(frozen=True)
class UnitResult:
    index: int
    seed_key: tuple[int, ...]
    checks: tuple[tuple[str, float], ...]  # (label, excess); excess <= 0 passes

    @property
    def ok(self) -> bool:
        return all(excess <= 0.0 for _, excess in self.checks)

    @property
    def worst(self) -> tuple[str, float]:
        return max(self.checks, key=lambda item: item[1])


@dataclass
class SuiteReport:
    suite: str
    trials: int
    units: int
    dims: tuple[int, ...]
    seed: int
    passes: int = 0
    failures: int = 0
    worst_label: str = ""
    worst_excess: float = -np.inf
    counterexample: dict | None = None
    label_stats: dict = field(default_factory=dict)
    elapsed_s: float = 0.0

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "trials": self.trials,
            "units": self.units,
            "dims": list(self.dims),
            "seed": self.seed,
            "passes": self.passes,
            "failures": self.failures,
            "worst_label": self.worst_label,
            "worst_excess": self.worst_excess,
            "counterexample": self.counterexample,
            "ok": self.ok,
        }


def _unit_rng(suite: str, seed: int, index: int) -> tuple[np.random.Generator, tuple[int, ...]]:
    key = (zlib.crc32(suite.encode()), seed, index)
    return np.random.default_rng(key), key


def _four_kinds(rng: np.random.Generator) -> list[DivergenceKind]:
    alpha = float(rng.uniform(1.2, 2.0)) if rng.random() < 0.5 else float(rng.uniform(0.3, 0.8))
    return [BURES_ANGLE, TRACE_DISTANCE, petz_renyi_kind(alpha), RELATIVE_ENTROPY]


def _unit_isomorphism(rng: np.random.Generator, dim: int) -> list[tuple[str, float]]:
    a = random_hermitian(dim, rng)
    b = random_hermitian(dim, rng)
    u = random_haar_unitary(dim, rng).mat
    checks = []

    fa = sorted_spectrum(a).values
    fb = sorted_spectrum(b).values
    rotated = HermitianOperator(hermitian_part(u @ a.mat @ u.conj().T))
    checks.append(
        ("spectrum-unitary-invariance", float(np.max(np.abs(sorted_spectrum(rotated).values - fa))) - 1e-9)
    )

    va = eigendecompose(a).vectors
    summed = hermitian_part((va * (fa + fb)) @ va.conj().T)
    err = np.max(np.abs(sorted_spectrum(HermitianOperator(summed)).values - class_add(fa, fb).values))
    checks.append(("class-add-homomorphism", float(err) - 1e-9))

    k = float(rng.uniform(0.0, 3.0))
    scaled = hermitian_part((va * (k * fa)) @ va.conj().T)
    err = np.max(np.abs(sorted_spectrum(HermitianOperator(scaled)).values - class_scale(k, fa).values))
    checks.append(("class-scale-homomorphism", float(err) - 1e-9))

    w = aligning_unitary(a, rotated).mat
    vb = eigendecompose(rotated).vectors
    target = hermitian_part((vb * fa) @ vb.conj().T)
    moved = w @ a.mat @ w.conj().T
    checks.append(("aligning-unitary-witness", float(np.linalg.norm(moved - target)) - 1e-9))
    commutator = moved @ rotated.mat - rotated.mat @ moved
    checks.append(("aligning-unitary-commutes", float(np.linalg.norm(commutator)) - 1e-9))
    return checks


def _unit_metric_axioms(rng: np.random.Generator, dim: int) -> list[tuple[str, float]]:
    rho = random_density(dim, dim, rng)
    sigma = random_density(dim, dim, rng)
    chi = random_density(dim, dim, rng)
    u = random_haar_unitary(dim, rng).mat
    checks = []

    for kind in _four_kinds(rng):
        d0 = divergence(kind, rho, sigma)
        rho_u = DensityOperator(HermitianOperator(hermitian_part(u @ rho.mat @ u.conj().T)))
        sigma_u = DensityOperator(HermitianOperator(hermitian_part(u @ sigma.mat @ u.conj().T)))
        checks.append(
            (f"unitary-invariance[{kind.name}]", abs(divergence(kind, rho_u, sigma_u) - d0) - 1e-9)
        )

    p, q, c = (s.spectrum() for s in (rho, sigma, chi))
    metrics = [
        ("bures-angle", lambda x, y: divergence(BURES_ANGLE, x, y), (rho, sigma, chi), 1e-6),
        ("trace-distance", lambda x, y: divergence(TRACE_DISTANCE, x, y), (rho, sigma, chi), 1e-9),
        ("residual-bures", residual_bures, (p, q, c), 1e-6),
        ("residual-trace", residual_trace, (p, q, c), 1e-9),
    ]
    for name, fn, (x, y, z), id_tol in metrics:
        checks.append((f"symmetry[{name}]", abs(fn(x, y) - fn(y, x)) - 1e-9))
        checks.append((f"identity[{name}]", fn(x, x) - id_tol))
        checks.append((f"triangle[{name}]", fn(x, y) - fn(x, z) - fn(z, y) - 1e-10))
    return checks


def _unit_monotonicity(rng: np.random.Generator, dim: int) -> list[tuple[str, float]]:
    rho = random_density(dim, dim, rng)
    sigma = random_density(dim, dim, rng)
    p, q = rho.spectrum(), sigma.spectrum()
    out_dim = dim + 1 if rng.random() < 0.25 else dim
    t = random_stochastic(out_dim, dim, rng)
    checks = []
    for kind in _four_kinds(rng):
        before = residual_measure(kind, p, q)
        after = residual_measure(kind, apply_stochastic(t, p), apply_stochastic(t, q))
        checks.append((f"monotone[{kind.name}]", after - before - 1e-9))

    square = random_stochastic(dim, dim, rng)
    in_basis = eigendecompose(rho.op).vectors
    out_basis = random_haar_unitary(dim, rng).mat
    kraus = kraus_from_stochastic(square, in_basis, out_basis)
    channel_out = apply_cptp(kraus, rho)
    expected = apply_stochastic(square, p).values
    err = np.max(np.abs(channel_out.spectrum().values - expected))
    checks.append(("kraus-commuting-diagram", float(err) - 1e-9))
    return checks


def _unit_convexity(rng: np.random.Generator, dim: int) -> list[tuple[str, float]]:
    parts = [random_density(dim, dim, rng) for _ in range(3)]
    sigma = random_density(dim, dim, rng)
    lam = rng.dirichlet(np.ones(3))
    q = sigma.spectrum()
    spectra = [part.spectrum() for part in parts]
    checks = []

    mixed = class_scale(lam[0], spectra[0])
    for weight, spec in zip(lam[1:], spectra[1:]):
        mixed = class_add(mixed, class_scale(weight, spec))
    for name, fn in (("residual-trace", residual_trace), ("residual-kl", residual_kl)):
        lhs = float(sum(w * fn(spec, q) for w, spec in zip(lam, spectra)))
        checks.append((f"convexity[{name}]", fn(mixed, q) - lhs - 1e-9))

    lam2 = float(rng.uniform(0.0, 1.0))
    rho2 = random_density(dim, dim, rng)
    sigma2 = random_density(dim, dim, rng)
    p1, q1 = parts[0].spectrum(), sigma.spectrum()
    p2, q2 = rho2.spectrum(), sigma2.spectrum()
    mix_p = class_add(class_scale(lam2, p1), class_scale(1.0 - lam2, p2))
    mix_q = class_add(class_scale(lam2, q1), class_scale(1.0 - lam2, q2))
    for name, fn in (("residual-trace", residual_trace), ("residual-kl", residual_kl)):
        lhs = lam2 * fn(p1, q1) + (1.0 - lam2) * fn(p2, q2)
        checks.append((f"joint-convexity[{name}]", fn(mix_p, mix_q) - lhs - 1e-9))

    mixture = np.zeros((dim, dim), dtype=complex)
    for weight, part in zip(lam, parts):
        mixture += weight * part.mat
    mixed_state = DensityOperator(HermitianOperator(hermitian_part(mixture)))
    for name, fn in (("trace-distance", trace_distance), ("relative-entropy", relative_entropy)):
        lhs = float(sum(w * fn(part, sigma) for w, part in zip(lam, parts)))
        checks.append((f"quantum-convexity[{name}]", fn(mixed_state, sigma) - lhs - 1e-9))
    return checks


def _unit_oracle(rng: np.random.Generator, dim: int, kind_name: str) -> list[tuple[str, float]]:
    if kind_name == "petz-renyi":
        alpha = 2.0 if rng.random() < 0.5 else 0.5
        kind = petz_renyi_kind(alpha)
    else:
        kind = DivergenceKind(kind_name)
    rho = random_density(dim, dim, rng)
    sigma = random_density(dim, dim, rng)
    closed = residual_measure(kind, rho.spectrum(), sigma.spectrum())
    result = minimize_over_unitaries(kind, rho, sigma, seed=rng)
    return [(f"oracle[{kind.label()}]", abs(result.value - closed) - 1e-5)]


def _unit_inequalities(rng: np.random.Generator, dim: int) -> list[tuple[str, float]]:
    x = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    y = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    checks = []
    bound = float(np.sum(singular_values(x) * singular_values(y)))
    checks.append(("von-neumann-trace", abs(np.trace(x @ y)) - bound - 1e-10))

    a = random_hermitian(dim, rng)
    b = random_hermitian(dim, rng)
    spread = float(np.sum(np.abs(singular_values(a.mat) - singular_values(b.mat))))
    checks.append(("mirsky", spread - trace_norm(a.mat - b.mat) - 1e-10))

    rho = random_density(dim, dim, rng)
    sigma = random_density(dim, dim, rng)
    p, q = rho.spectrum(), sigma.spectrum()
    for kind in _four_kinds(rng):
        gap = residual_measure(kind, p, q) - divergence(kind, rho, sigma)
        checks.append((f"quotient[{kind.name}]", gap - 1e-9))
    return checks


def _run_unit(args: tuple) -> UnitResult:
    suite, seed, index, dims = args
    rng, key = _unit_rng(suite, seed, index)
    if suite == "oracle":
        kind_name = _ORACLE_KINDS[index % len(_ORACLE_KINDS)]
        dim = dims[(index // len(_ORACLE_KINDS)) % len(dims)]
        checks = _unit_oracle(rng, dim, kind_name)
    else:
        dim = dims[index % len(dims)]
        fn = {
            "isomorphism": _unit_isomorphism,
            "metric-axioms": _unit_metric_axioms,
            "monotonicity": _unit_monotonicity,
            "convexity": _unit_convexity,
            "inequalities": _unit_inequalities,
        }[suite]
        checks = fn(rng, dim)
    return UnitResult(index=index, seed_key=key, checks=tuple(checks))


def run_suite(
    suite: str,
    trials: int,
    dims=(2, 3),
    seed: int = 42,
    jobs: int = 1,
) -> SuiteReport:
    """Run a named verification suite.

    For the oracle suite, `trials` counts minimization problems per divergence
    kind; for the others, each trial is one unit covering all of the suite's
    checks. Results are deterministic for a fixed seed regardless of jobs.
    """
    if suite not in SUITE_NAMES:
        raise ValueError(f"unknown suite {suite!r}; expected one of {SUITE_NAMES}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    dims = tuple(int(d) for d in dims)
    units = trials * len(_ORACLE_KINDS) if suite == "oracle" else trials
    args = [(suite, seed, index, dims) for index in range(units)]

    started = time.perf_counter()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_unit, args, chunksize=max(1, units // (jobs * 4))))
    else:
        results = [_run_unit(arg) for arg in args]

    report = SuiteReport(suite=suite, trials=trials, units=units, dims=dims, seed=seed)
    for unit in results:
        if unit.ok:
            report.passes += 1
        else:
            report.failures += 1
        label, excess = unit.worst
        if excess > report.worst_excess:
            report.worst_excess, report.worst_label = excess, label
        if not unit.ok and report.counterexample is None:
            report.counterexample = {
                "index": unit.index,
                "seed_key": list(unit.seed_key),
                "label": label,
                "excess": excess,
            }
        for check_label, check_excess in unit.checks:
            prev = report.label_stats.get(check_label)
            if prev is None or check_excess > prev:
                report.label_stats[check_label] = check_excess
    report.elapsed_s = time.perf_counter() - started
    return report
