"""Sample-based Hamiltonian simulation with density-matrix inputs.

The basic step consumes one auxiliary copy of a density K to advance a
target state sigma by exp(-i K dt) up to O(dt^2), using only a partial
swap and a partial trace:

    Tr_1{ exp(-iS dt) (K (x) sigma) exp(iS dt) }
        = sigma - i dt [K, sigma] + O(dt^2).

The generalized form replaces the auxiliary copy by a two-block program
state rho' = |0><0| (x) rho'' + |1><1| (x) rho''' with tr(rho'' + rho''') = 1
and evolves with a control-signed partial swap; the simulated generator is
B = rho'' - rho'''.  Program states are built here for B = K (plain step
embedded), B = K K (two copies cycled by a swap), and B = K L K (three
copies cycled by a cyclic permutation, Hadamard and dephasing on the
control).  Weighted mixtures of program states simulate weighted sums of
generators, which is how the full training matrix
gamma^-1 K + K K + gamma^-1 K L K is exponentiated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .encodings import DensityMatrix
from .errors import LayoutError, ParameterError
from .linalg import (
    DEFAULT_MAX_DIM,
    TensorLayout,
    as_complex_matrix,
    check_dim,
    hermitian_part,
    kron,
    partial_trace,
)

#: Tolerances for channel outputs; trajectories accumulate roundoff beyond
#: the strict single-construction bounds.
_CHANNEL_TOLS = dict(hermitian_tol=1e-9, psd_tol=1e-8, trace_tol=1e-9)

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


def swap_operator(d: int, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """S = sum_{ij} |i><j| (x) |j><i| on two d-dimensional registers."""
    if d < 1:
        raise ParameterError(f"dimension must be >= 1, got {d}")
    check_dim(d * d, max_dim)
    s = np.zeros((d * d, d * d), dtype=np.complex128)
    idx = np.arange(d * d)
    i, j = idx // d, idx % d
    s[j * d + i, idx] = 1.0
    return s


def _swap_perm(d: int) -> np.ndarray:
    """Index permutation realizing S: basis (i, j) -> (j, i)."""
    idx = np.arange(d * d)
    i, j = idx // d, idx % d
    return j * d + i


def cyclic_permutation(d: int, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """P |j1, j2, j3> = |j3, j1, j2> on three d-dimensional registers.

    P is unitary with P^3 = I.
    """
    if d < 1:
        raise ParameterError(f"dimension must be >= 1, got {d}")
    check_dim(d**3, max_dim)
    p = np.zeros((d**3, d**3), dtype=np.complex128)
    idx = np.arange(d**3)
    a, b, c = idx // (d * d), (idx // d) % d, idx % d
    p[c * d * d + a * d + b, idx] = 1.0
    return p


def _cyclic_perm_inverse(d: int) -> np.ndarray:
    """Index array q with (P M)[x, :] = M[q[x], :] and (M P^dag)[:, x] = M[:, q[x]]."""
    idx = np.arange(d**3)
    a, b, c = idx // (d * d), (idx // d) % d, idx % d
    # inverse of (a,b,c) -> (c,a,b) is (a,b,c) -> (b,c,a)
    return b * d * d + c * d + a


def _partial_swap_unitary(d: int, dt: float) -> np.ndarray:
    """exp(-i S dt) = cos(dt) I - i sin(dt) S, using S^2 = I."""
    s = swap_operator(d)
    return math.cos(dt) * np.eye(d * d, dtype=np.complex128) - 1j * math.sin(dt) * s


def lmr_step(k: DensityMatrix, sigma: DensityMatrix, dt: float) -> DensityMatrix:
    """One density-exponentiation step: consume a copy of ``k`` to rotate
    ``sigma`` by exp(-i k dt) up to O(dt^2)."""
    if k.dim != sigma.dim:
        raise LayoutError(f"dimension mismatch: {k.dim} vs {sigma.dim}")
    d = k.dim
    u = _partial_swap_unitary(d, dt)
    joint = u @ kron(k.matrix, sigma.matrix) @ u.conj().T
    out = partial_trace(joint, TensorLayout((d, d)), 0)
    return DensityMatrix(hermitian_part(out), sigma.layout, **_CHANNEL_TOLS)


@dataclass(frozen=True)
class ProgramState:
    """Block-diagonal control (x) system state encoding a generator.

    The two control blocks rho'' and rho''' satisfy tr(rho'' + rho''') = 1;
    the intended Hermitian generator is ``scale * (rho'' - rho''')``.  For
    the single-term constructions the scale is 1; mixtures record the total
    weight there so consumers can undo the normalization.
    """

    rho_prime: DensityMatrix
    scale: float = 1.0

    def __post_init__(self):
        if self.rho_prime.layout.factors != 2 or self.rho_prime.layout.factor_dims[0] != 2:
            raise LayoutError("program state needs layout (2, d)")
        if self.scale <= 0:
            raise ParameterError(f"scale must be positive, got {self.scale}")
        d = self.system_dim
        off = self.rho_prime.matrix[:d, d:]
        if np.max(np.abs(off)) > 1e-12:
            raise LayoutError("program state has off-diagonal control blocks")

    @property
    def system_dim(self) -> int:
        return self.rho_prime.layout.factor_dims[1]

    def block(self, control: int) -> np.ndarray:
        d = self.system_dim
        return self.rho_prime.matrix[control * d : (control + 1) * d,
                                     control * d : (control + 1) * d]

    @property
    def generator(self) -> np.ndarray:
        """scale * (rho'' - rho''')."""
        return self.scale * (self.block(0) - self.block(1))


def _dephase_control(rho: np.ndarray, d: int) -> np.ndarray:
    """Zero the off-diagonal control blocks (measurement kept as a mixture)."""
    out = rho.copy()
    out[:d, d:] = 0.0
    out[d:, :d] = 0.0
    return out


def _assemble_program_state(rho00: np.ndarray, rho11: np.ndarray, d: int) -> ProgramState:
    rho = np.zeros((2 * d, 2 * d), dtype=np.complex128)
    rho[:d, :d] = rho00
    rho[d:, d:] = rho11
    return ProgramState(DensityMatrix(rho, TensorLayout((2, d)), **_CHANNEL_TOLS))


def make_program_state_k(k: DensityMatrix) -> ProgramState:
    """Plain density-exponentiation term in program-state form:
    rho'' = k, rho''' = 0, so the generator is exactly k."""
    d = k.dim
    return _assemble_program_state(k.matrix, np.zeros((d, d)), d)


def make_program_state_kk(k: DensityMatrix) -> ProgramState:
    """Program state whose generator is K K.

    Two copies of K enter with a |+> control; a controlled swap, a partial
    trace over the second copy, a Hadamard on the control and dephasing
    leave rho'' - rho''' = K K with tr(rho'' + rho''') = 1.
    """
    d = k.dim
    t = kron(k.matrix, k.matrix)
    perm = _swap_perm(d)
    layout = TensorLayout((d, d))
    # control blocks after the controlled swap: T, T S, S T, S T S
    m00 = partial_trace(t, layout, 1)
    m01 = partial_trace(t[:, perm], layout, 1)
    m10 = partial_trace(t[perm, :], layout, 1)
    m11 = partial_trace(t[np.ix_(perm, perm)], layout, 1)
    return _finish_two_block(m00, m01, m10, m11, d)


def make_program_state_klk(
    k: DensityMatrix, l: DensityMatrix, max_dim: int = DEFAULT_MAX_DIM
) -> ProgramState:
    """Program state whose generator is (K^dag L K + K L K^dag) / 2.

    Faithful block evaluation of the three-register circuit: |+> control,
    controlled cyclic permutation over the registers holding K, L, K,
    partial traces over the third and second registers, Hadamard on the
    control, and dephasing.  For Hermitian inputs the generator equals
    K L K.
    """
    if k.dim != l.dim:
        raise LayoutError(f"dimension mismatch: K is {k.dim}, L is {l.dim}")
    d = k.dim
    check_dim(2 * d**3, max_dim)
    t = kron(kron(k.matrix, l.matrix, max_dim), k.matrix, max_dim)
    q = _cyclic_perm_inverse(d)
    layout3 = TensorLayout((d, d, d))

    def tr23(m):
        return partial_trace(partial_trace(m, layout3, 2), TensorLayout((d, d)), 1)

    # control blocks after the controlled permutation: T, T P^dag, P T, P T P^dag
    m00 = tr23(t)
    m01 = tr23(t[:, q])
    m10 = tr23(t[q, :])
    m11 = tr23(t[np.ix_(q, q)])
    return _finish_two_block(m00, m01, m10, m11, d)


def _finish_two_block(m00, m01, m10, m11, d: int) -> ProgramState:
    """Hadamard on the control of (1/2) sum_{ab} |a><b| (x) m_ab, then dephase."""
    rho = np.zeros((2 * d, 2 * d), dtype=np.complex128)
    rho[:d, :d] = m00
    rho[:d, d:] = m01
    rho[d:, :d] = m10
    rho[d:, d:] = m11
    rho /= 2.0
    h = kron(_HADAMARD, np.eye(d))
    rho = h @ rho @ h
    rho = _dephase_control(rho, d)
    return ProgramState(DensityMatrix(hermitian_part(rho), TensorLayout((2, d)), **_CHANNEL_TOLS))


def mix_program_states(sources: Sequence[tuple[float, ProgramState]]) -> ProgramState:
    """Weighted mixture rho'_joint = sum_i w_i rho'_i / sum_i w_i.

    The mixture's generator is (sum_i w_i B_i) / sum_i w_i; the total
    weight is recorded as the scale so the unnormalized sum is
    ``scale * (rho'' - rho''')``.
    """
    if not sources:
        raise ParameterError("at least one program state is required")
    weights = np.array([w for w, _ in sources], dtype=np.float64)
    if np.any(weights <= 0):
        raise ParameterError("mixture weights must be positive")
    dims = {ps.system_dim for _, ps in sources}
    if len(dims) != 1:
        raise LayoutError(f"program states have mixed dimensions {sorted(dims)}")
    if any(ps.scale != 1.0 for _, ps in sources):
        raise ParameterError("only unit-scale program states can be mixed")
    total = float(weights.sum())
    rho = sum(w * ps.rho_prime.matrix for w, ps in sources) / total
    d = dims.pop()
    return ProgramState(
        DensityMatrix(rho, TensorLayout((2, d)), **_CHANNEL_TOLS), scale=total
    )


def controlled_partial_swap_evolution(
    dt: float, d: int, max_dim: int = DEFAULT_MAX_DIM
) -> np.ndarray:
    """exp(-i S' dt) with S' = |0><0| (x) S + |1><1| (x) (-S).

    The control-0 block evolves forward, the control-1 block backward.
    """
    if d < 1:
        raise ParameterError(f"dimension must be >= 1, got {d}")
    check_dim(2 * d * d, max_dim)
    fwd = _partial_swap_unitary(d, dt)
    out = np.zeros((2 * d * d, 2 * d * d), dtype=np.complex128)
    out[: d * d, : d * d] = fwd
    out[d * d :, d * d :] = fwd.conj()
    return out


def _glmr_apply(u: np.ndarray, ps: ProgramState, sigma_matrix: np.ndarray, d: int) -> np.ndarray:
    """One generalized step: conjugate rho' (x) sigma by u, keep the target."""
    joint = u @ np.kron(ps.rho_prime.matrix, sigma_matrix) @ u.conj().T
    layout = TensorLayout((2, d, d))
    out = partial_trace(joint, layout, 0)
    out = partial_trace(out, TensorLayout((d, d)), 0)
    return hermitian_part(out)


def glmr_step(ps: ProgramState, sigma: DensityMatrix, dt: float) -> DensityMatrix:
    """One program-state step: sigma -> sigma - i dt [B, sigma] + O(dt^2)
    with B = rho'' - rho'''."""
    d = ps.system_dim
    if sigma.dim != d:
        raise LayoutError(f"dimension mismatch: program {d}, target {sigma.dim}")
    u = controlled_partial_swap_evolution(dt, d)
    out = _glmr_apply(u, ps, sigma.matrix, d)
    return DensityMatrix(out, sigma.layout, **_CHANNEL_TOLS)


@dataclass(frozen=True)
class EvolutionConfig:
    """Total time, error budget, and step count for a repeated-step run.

    When ``steps`` is omitted it is derived as ceil(t^2 / delta), the copy
    count that brings the accumulated second-order error down to O(delta).
    """

    total_time: float
    error_budget: float = 1e-3
    steps: int | None = None

    def __post_init__(self):
        if not self.error_budget > 0:
            raise ParameterError(f"error budget must be positive, got {self.error_budget}")
        if self.steps is not None and self.steps < 1:
            raise ParameterError(f"step count must be >= 1, got {self.steps}")

    def resolved_steps(self) -> int:
        if self.steps is not None:
            return int(self.steps)
        if self.total_time == 0.0:
            return 0
        return int(math.ceil(self.total_time**2 / self.error_budget))


@dataclass(frozen=True)
class EvolutionResult:
    """Final state of a trajectory plus what it simulated.

    ``generator`` is the normalized mixture generator B_joint; the
    trajectory approximates exp(-i B_joint t) sigma0 exp(i B_joint t).
    ``weight_total`` is the scale factor relating B_joint to the
    unnormalized weighted sum of the source generators.
    """

    state: DensityMatrix
    generator: np.ndarray
    weight_total: float
    steps: int
    dt: float


def simulate_evolution(
    sources: Sequence[tuple[float, ProgramState]],
    sigma0: DensityMatrix,
    cfg: EvolutionConfig,
    rng: np.random.Generator | None = None,
) -> EvolutionResult:
    """Repeated program-state steps under a weighted source mixture.

    By default each step consumes the deterministic mixture state; passing
    ``rng`` switches to the sampled protocol in which each step draws one
    source with probability proportional to its weight (equivalent in
    expectation, useful for shot-noise experiments).
    """
    mixture = mix_program_states(sources)
    d = mixture.system_dim
    if sigma0.dim != d:
        raise LayoutError(f"dimension mismatch: program {d}, target {sigma0.dim}")
    n = cfg.resolved_steps()
    generator = mixture.generator / mixture.scale
    if n == 0:
        return EvolutionResult(sigma0, generator, mixture.scale, 0, 0.0)
    dt = cfg.total_time / n
    u = controlled_partial_swap_evolution(dt, d)
    weights = np.array([w for w, _ in sources], dtype=np.float64)
    probs = weights / weights.sum()
    state = sigma0.matrix
    for _ in range(n):
        if rng is None:
            ps = mixture
        else:
            ps = sources[int(rng.choice(len(sources), p=probs))][1]
        state = _glmr_apply(u, ps, state, d)
    return EvolutionResult(
        DensityMatrix(state, sigma0.layout, **_CHANNEL_TOLS),
        generator,
        mixture.scale,
        n,
        dt,
    )


def exact_conjugation(generator: np.ndarray, sigma: DensityMatrix, t: float) -> DensityMatrix:
    """Reference evolution exp(-i G t) sigma exp(i G t) for comparisons."""
    from .linalg import hermitian_exp

    u = hermitian_exp(as_complex_matrix(generator), t)
    return DensityMatrix(u @ sigma.matrix @ u.conj().T, sigma.layout, **_CHANNEL_TOLS)
