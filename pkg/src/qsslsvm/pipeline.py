"""End-to-end orchestration: training runs, channel benchmarks, the
complexity cost model, and structured JSON reports.

``run_pipeline`` executes the full quantum-simulated training pass --
density encodings, quantum matrix multiplication for |Ky>, eigenvalue-
filtered inversion for |alpha>, analytic swap-test classification -- and
verifies every stage against the classical solver on the identical
normalized matrix.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channels import (
    EvolutionConfig,
    exact_conjugation,
    glmr_step,
    make_program_state_k,
    make_program_state_kk,
    make_program_state_klk,
    simulate_evolution,
)
from .classical import (
    KernelSpec,
    assemble_system,
    kernel_matrix,
    objective_gradient,
    predict,
    solve_classical,
)
from .datasets import (
    SampleGraph,
    TrainingSet,
    build_knn_graph,
    laplacian,
    load_dataset,
    load_graph,
    load_points,
)
from .encodings import DensityMatrix, kernel_density, label_state, laplacian_density
from .errors import ConfigurationError, ParameterError
from .hhl import QPEConfig, hhl_solve, quantum_multiply
from .linalg import TensorLayout, state_fidelity
from .swap_test import classify

SCHEMA_VERSION = 1

#: Published schema for ``simulate`` reports (draft-07 subset).
REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": [
        "schema_version",
        "kind",
        "config",
        "dataset",
        "classical",
        "quantum",
        "classification",
        "lmr_slopes",
        "timings",
    ],
    "properties": {
        "schema_version": {"type": "integer"},
        "kind": {"const": "simulate"},
        "config": {"type": "object"},
        "dataset": {
            "type": "object",
            "required": ["m", "p", "labeled", "edges"],
            "properties": {
                "m": {"type": "integer"},
                "p": {"type": "integer"},
                "labeled": {"type": "integer"},
                "edges": {"type": "integer"},
            },
        },
        "classical": {
            "type": "object",
            "required": ["alpha", "residual_retained"],
            "properties": {
                "alpha": {"type": "array", "items": {"type": "number"}},
                "residual_retained": {"type": "number"},
                "gradient_norm": {"type": "number"},
            },
        },
        "quantum": {
            "type": "object",
            "required": [
                "solution_fidelity",
                "multiply_fidelity",
                "hhl_success_probability",
                "retained_eigenvalues",
                "a_hat_checksum_classical",
                "a_hat_checksum_quantum",
            ],
            "properties": {
                "solution_fidelity": {"type": "number", "minimum": 0, "maximum": 1},
                "multiply_fidelity": {"type": "number", "minimum": 0, "maximum": 1},
                "hhl_success_probability": {"type": "number", "minimum": 0, "maximum": 1},
                "retained_eigenvalues": {"type": "array", "items": {"type": "number"}},
                "a_hat_checksum_classical": {"type": "string"},
                "a_hat_checksum_quantum": {"type": "string"},
            },
        },
        "classification": {
            "type": "object",
            "required": ["agreement", "classical_labels", "quantum_labels"],
            "properties": {
                "agreement": {"type": "number", "minimum": 0, "maximum": 1},
                "classical_labels": {"type": "array", "items": {"type": "integer"}},
                "quantum_labels": {"type": "array", "items": {"type": "integer"}},
            },
        },
        "lmr_slopes": {
            "type": "object",
            "required": ["k", "kk", "klk"],
            "properties": {
                "k": {"type": "number"},
                "kk": {"type": "number"},
                "klk": {"type": "number"},
            },
        },
        "timings": {"type": "object"},
    },
}


@dataclass(frozen=True)
class RunConfig:
    """User-facing knobs of a pipeline run."""

    gamma: float = 1.0
    kernel: KernelSpec = field(default_factory=KernelSpec)
    knn_k: int = 3
    graph_path: str | None = None
    sigma_thresh: float = 0.05
    clock_qubits: int = 8
    delta: float = 1e-3
    shots: int = 0
    seed: int = 42
    laplacian_kind: str = "normalized"

    def __post_init__(self):
        if not self.gamma > 0:
            raise ParameterError(f"gamma must be positive, got {self.gamma}")
        if self.graph_path is None and self.knn_k < 1:
            raise ParameterError(f"knn_k must be >= 1, got {self.knn_k}")
        if not self.sigma_thresh > 0:
            raise ParameterError(f"sigma_thresh must be positive, got {self.sigma_thresh}")
        if not self.delta > 0:
            raise ParameterError(f"delta must be positive, got {self.delta}")
        if self.shots < 0:
            raise ParameterError(f"shots must be >= 0, got {self.shots}")
        if self.laplacian_kind not in ("normalized", "combinatorial"):
            raise ParameterError(f"unknown Laplacian kind {self.laplacian_kind!r}")
        # range checks for clock_qubits are enforced by QPEConfig
        QPEConfig(clock_qubits=self.clock_qubits)

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "kernel": {
                "kind": self.kernel.kind,
                "degree": self.kernel.degree,
                "offset": self.kernel.offset,
                "width": self.kernel.width,
            },
            "knn_k": self.knn_k,
            "graph_path": self.graph_path,
            "sigma_thresh": self.sigma_thresh,
            "clock_qubits": self.clock_qubits,
            "delta": self.delta,
            "shots": self.shots,
            "seed": self.seed,
            "laplacian_kind": self.laplacian_kind,
        }


@dataclass(frozen=True)
class RunReport:
    """Everything a ``simulate`` run measured, in stable key order."""

    config: dict
    dataset: dict
    classical: dict
    quantum: dict
    classification: dict
    lmr_slopes: dict
    timings: dict

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "simulate",
            "config": self.config,
            "dataset": self.dataset,
            "classical": self.classical,
            "quantum": self.quantum,
            "classification": self.classification,
            "lmr_slopes": self.lmr_slopes,
            "timings": self.timings,
        }

    @property
    def quantum_fidelity(self) -> float:
        return self.quantum["solution_fidelity"]

    @property
    def prediction_agreement(self) -> float:
        return self.classification["agreement"]

    @property
    def classical_alpha(self) -> np.ndarray:
        return np.array(self.classical["alpha"])

    @property
    def hhl_success_probability(self) -> float:
        return self.quantum["hhl_success_probability"]


class _Stages:
    """Per-stage wall-clock timing; errors propagate tagged with the stage."""

    def __init__(self):
        self.timings: dict[str, float] = {}

    def run(self, name: str, fn):
        start = time.perf_counter()
        try:
            result = fn()
        except Exception as exc:
            raise type(exc)(f"[{name}] {exc}") from exc
        self.timings[name] = time.perf_counter() - start
        return result


def _checksum(matrix: np.ndarray) -> str:
    data = np.ascontiguousarray(matrix)
    return hashlib.sha256(data.tobytes() + str(data.shape).encode()).hexdigest()


def _build_graph(cfg: RunConfig, training: TrainingSet) -> SampleGraph:
    if cfg.graph_path is not None:
        g = load_graph(cfg.graph_path)
        if g.vertex_count != training.sample_count:
            raise ParameterError(
                f"graph has {g.vertex_count} vertices, dataset has "
                f"{training.sample_count} samples"
            )
        return g
    return build_knn_graph(training, cfg.knn_k)


def _channel_slopes(k_density, l_density, seed: int, dts=(0.2, 0.1, 0.05, 0.025)) -> dict:
    """Log-log error slopes of one generalized step per channel."""
    rng = np.random.default_rng(seed)
    d = k_density.dim
    vec = rng.normal(size=d) + 1j * rng.normal(size=d)
    vec /= np.linalg.norm(vec)
    sigma = DensityMatrix(np.outer(vec, vec.conj()), TensorLayout((d,)))
    states = {
        "k": make_program_state_k(k_density),
        "kk": make_program_state_kk(k_density),
        "klk": make_program_state_klk(k_density, l_density),
    }
    out = {}
    for name, ps in states.items():
        errs = []
        for dt in dts:
            approx = glmr_step(ps, sigma, dt)
            exact = exact_conjugation(ps.generator, sigma, dt)
            errs.append(np.linalg.norm(approx.matrix - exact.matrix))
        slope = float(np.polyfit(np.log(np.asarray(dts)), np.log(errs), 1)[0])
        out[name] = slope
    return out


def run_pipeline(cfg: RunConfig, dataset: str | Path, testset: str | Path | None = None) -> RunReport:
    """Full quantum-simulated training run verified against the classical
    solver on the identical normalized system matrix."""
    if cfg.kernel.kind != "linear":
        raise ConfigurationError(
            "the quantum pipeline encodes the linear kernel only; "
            "use the classical trainer for polynomial or rbf kernels"
        )
    if cfg.laplacian_kind != "normalized":
        raise ConfigurationError(
            "the quantum graph input model produces the degree-normalized "
            "Laplacian; the combinatorial kind is classical-only"
        )
    stages = _Stages()
    training = stages.run("ingest", lambda: load_dataset(dataset))
    graph = stages.run("graph", lambda: _build_graph(cfg, training))

    k_density = stages.run("encode_kernel", lambda: kernel_density(training))
    l_density = stages.run("encode_laplacian", lambda: laplacian_density(graph))
    y_state = stages.run("encode_labels", lambda: label_state(training.labels))

    def _classical():
        sysq = assemble_system(
            k_density.matrix.real, l_density.matrix.real, training.labels, cfg.gamma
        )
        model = solve_classical(
            sysq, cfg.sigma_thresh, kernel=cfg.kernel, training_features=training.features
        )
        return sysq, model

    sysq, model = stages.run("classical", _classical)
    a_hat = sysq.normalized_matrix()
    checksum_classical = _checksum(a_hat)

    qpe_cfg = QPEConfig(clock_qubits=cfg.clock_qubits)
    ky_state = stages.run("multiply", lambda: quantum_multiply(k_density, y_state, qpe_cfg))
    ky_exact = k_density.matrix.real @ training.labels
    multiply_fidelity = state_fidelity(ky_state.amplitudes, ky_exact / np.linalg.norm(ky_exact))

    checksum_quantum = _checksum(a_hat)
    hhl_result = stages.run(
        "invert", lambda: hhl_solve(a_hat, ky_state, cfg.sigma_thresh, qpe_cfg)
    )
    alpha_classical = model.alpha
    alpha_unit = alpha_classical / np.linalg.norm(alpha_classical)
    solution_fidelity = state_fidelity(hhl_result.solution_state.amplitudes, alpha_unit)

    def _classify():
        points = training.features if testset is None else load_points(testset)
        # the solution state's global phase is unobservable; align it with
        # the classical reference before reading out labels
        amps = hhl_result.solution_state.amplitudes
        phase = np.vdot(amps, alpha_unit.astype(np.complex128))
        alpha_quantum = np.real(amps * np.exp(1j * np.angle(phase)))
        classical_labels, quantum_labels, p_estimates, ambiguous = [], [], [], 0
        for i, point in enumerate(points):
            classical_labels.append(predict(model, point)[1])
            result = classify(
                alpha_quantum, point, training, shots=cfg.shots, seed=cfg.seed + i
            )
            quantum_labels.append(result.label)
            p_estimates.append(result.p_estimate)
            ambiguous += int(result.ambiguous)
        agreement = float(
            np.mean([c == q for c, q in zip(classical_labels, quantum_labels)])
        )
        return {
            "agreement": agreement,
            "test_point_count": len(points),
            "classical_labels": classical_labels,
            "quantum_labels": quantum_labels,
            "p_estimates": p_estimates,
            "ambiguous_count": ambiguous,
        }

    classification = stages.run("classify", _classify)
    slopes = stages.run("bench", lambda: _channel_slopes(k_density, l_density, cfg.seed))

    # residual restricted to the retained eigenspace of A/tr(A)
    eigw, eigv = np.linalg.eigh(a_hat)
    keep = eigv[:, eigw >= cfg.sigma_thresh]
    resid_vec = sysq.a_matrix @ alpha_classical - sysq.rhs
    rhs_proj = keep.T @ sysq.rhs
    residual_retained = float(
        np.linalg.norm(keep.T @ resid_vec) / max(np.linalg.norm(rhs_proj), 1e-30)
    )

    report = RunReport(
        config={**cfg.to_dict(), "dataset": str(dataset),
                "testset": None if testset is None else str(testset)},
        dataset={
            "m": training.sample_count,
            "p": training.feature_count,
            "labeled": training.labeled_count,
            "edges": graph.edge_count,
        },
        classical={
            "alpha": [float(a) for a in alpha_classical],
            "residual_retained": residual_retained,
            "gradient_norm": float(np.linalg.norm(objective_gradient(sysq, alpha_classical))),
        },
        quantum={
            "solution_fidelity": float(solution_fidelity),
            "multiply_fidelity": float(multiply_fidelity),
            "hhl_success_probability": float(hhl_result.success_probability),
            "retained_eigenvalues": [float(v) for v in hhl_result.retained_eigenvalues],
            "a_hat_checksum_classical": checksum_classical,
            "a_hat_checksum_quantum": checksum_quantum,
        },
        classification=classification,
        lmr_slopes=slopes,
        timings=stages.timings,
    )
    if checksum_classical != checksum_quantum:
        raise ConfigurationError("classical and quantum paths saw different matrices")
    return report


def run_classical(cfg: RunConfig, dataset: str | Path, testset: str | Path | None = None) -> dict:
    """Classical-only training run (any kernel, either Laplacian kind)."""
    stages = _Stages()
    training = stages.run("ingest", lambda: load_dataset(dataset))
    graph = stages.run("graph", lambda: _build_graph(cfg, training))
    lap = stages.run("laplacian", lambda: laplacian(graph, cfg.laplacian_kind))

    def _train():
        k = kernel_matrix(training, cfg.kernel)
        sys = assemble_system(k, lap, training.labels, cfg.gamma)
        model = solve_classical(
            sys, cfg.sigma_thresh, kernel=cfg.kernel, training_features=training.features
        )
        return sys, model

    sys, model = stages.run("train", _train)
    resid = np.linalg.norm(sys.a_matrix @ model.alpha - sys.rhs)
    rhs_norm = np.linalg.norm(sys.rhs)
    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": "train",
        "config": {**cfg.to_dict(), "dataset": str(dataset),
                   "testset": None if testset is None else str(testset)},
        "dataset": {
            "m": training.sample_count,
            "p": training.feature_count,
            "labeled": training.labeled_count,
            "edges": graph.edge_count,
        },
        "alpha": [float(a) for a in model.alpha],
        "residual": float(resid / max(rhs_norm, 1e-30)),
        "gradient_norm": float(np.linalg.norm(objective_gradient(sys, model.alpha))),
    }
    if testset is not None:
        points = load_points(testset)
        scored = [predict(model, pt) for pt in points]
        report["predictions"] = {
            "scores": [float(s) for s, _ in scored],
            "labels": [int(l) for _, l in scored],
        }
    report["timings"] = stages.timings
    return report


def bench_lmr(
    cfg: RunConfig,
    dataset: str | Path,
    dts: tuple[float, ...] = (0.2, 0.1, 0.05, 0.025),
    total_time: float = 1.0,
) -> dict:
    """Channel error-scaling report: per-term one-step slopes and
    trajectory errors at n and 2n steps (n = ceil(t^2/delta))."""
    if len(dts) < 3:
        raise ParameterError(f"dt sweep needs at least 3 points, got {len(dts)}")
    stages = _Stages()
    training = stages.run("ingest", lambda: load_dataset(dataset))
    graph = stages.run("graph", lambda: _build_graph(cfg, training))
    k_density = kernel_density(training)
    l_density = laplacian_density(graph)

    rng = np.random.default_rng(cfg.seed)
    d = k_density.dim
    vec = rng.normal(size=d) + 1j * rng.normal(size=d)
    vec /= np.linalg.norm(vec)
    sigma0 = DensityMatrix(np.outer(vec, vec.conj()), TensorLayout((d,)))

    states = {
        "k": make_program_state_k(k_density),
        "kk": make_program_state_kk(k_density),
        "klk": make_program_state_klk(k_density, l_density),
    }
    slopes, sweeps, trajectory = {}, {}, {}
    for name, ps in states.items():
        errs = []
        for dt in dts:
            approx = glmr_step(ps, sigma0, dt)
            exact = exact_conjugation(ps.generator, sigma0, dt)
            errs.append(float(np.linalg.norm(approx.matrix - exact.matrix)))
        slopes[name] = float(np.polyfit(np.log(np.asarray(dts)), np.log(errs), 1)[0])
        sweeps[name] = errs

        n = int(math.ceil(total_time**2 / cfg.delta))
        exact_final = exact_conjugation(ps.generator, sigma0, total_time)
        errors = {}
        for steps in (n, 2 * n):
            run = simulate_evolution(
                [(1.0, ps)], sigma0, EvolutionConfig(total_time, cfg.delta, steps)
            )
            errors[steps] = float(np.linalg.norm(run.state.matrix - exact_final.matrix))
        trajectory[name] = {
            "steps": n,
            "error": errors[n],
            "error_double_steps": errors[2 * n],
            "halving_ratio": errors[n] / max(errors[2 * n], 1e-300),
        }

    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "bench",
        "config": {**cfg.to_dict(), "dataset": str(dataset)},
        "dt_values": list(dts),
        "errors": sweeps,
        "slopes": slopes,
        "trajectory": trajectory,
        "timings": stages.timings,
    }


@dataclass(frozen=True)
class CostModelParams:
    """Inputs of the asymptotic cost comparison.

    ``q`` is the retained rank of the normalized matrix (the filter
    threshold for the diagonal rank-q family is 1/q); ``eta`` and
    ``delta_fail`` only enter the sampling-based classical bound and
    default to neutral constants.
    """

    m: int
    p: int
    q: int
    epsilon: float
    eta: float = 1.0
    delta_fail: float = 1.0

    def __post_init__(self):
        if self.m < 1 or self.p < 1:
            raise ParameterError("m and p must be >= 1")
        if not 1 <= self.q <= self.m:
            raise ParameterError(f"q must be in [1, m={self.m}], got {self.q}")
        if not 0 < self.epsilon < 1:
            raise ParameterError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if not self.eta > 0 or not 0 < self.delta_fail <= 1:
            raise ParameterError("eta must be positive and delta_fail in (0, 1]")


def cost_model(params: CostModelParams) -> dict:
    """Asymptotic costs of the quantum trainer and its sampling-based
    classical counterpart on the diagonal rank-q family.

    quantum:      q^3 eps^-3 log(m p)
    dequantized:  q^9 eps^-6 eta^6 log^3(1/delta_fail)

    The log^3 factor is floored at 1 so the neutral default
    delta_fail = 1 contributes a constant instead of annihilating the
    bound.  Regimes: full rank (q = m), constant rank (q = 1), and slow
    growth in between.
    """
    q, eps = params.q, params.epsilon
    quantum = q**3 * eps**-3 * math.log(params.m * params.p)
    log_fail = max(1.0, math.log(1.0 / params.delta_fail) ** 3)
    dequantized = q**9 * eps**-6 * params.eta**6 * log_fail
    if params.q == params.m:
        regime = "full_rank"
    elif params.q == 1:
        regime = "constant_rank"
    else:
        regime = "slow_growth"
    return {
        "quantum_cost": float(quantum),
        "dequantized_cost": float(dequantized),
        "regime": regime,
    }


def emit_report(report: RunReport | dict, path: str | Path) -> Path:
    """Write a report as JSON with stable key order.

    ``simulate`` reports are validated against :data:`REPORT_SCHEMA`
    before writing.  I/O failures surface as ``OSError`` with the path.
    """
    doc = report.to_dict() if isinstance(report, RunReport) else report
    if doc.get("kind") == "simulate":
        import jsonschema

        jsonschema.validate(doc, REPORT_SCHEMA)
    path = Path(path)
    try:
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path


def load_report(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)
