"""Classical construction of the quantum data encodings.

Oracle and QRAM access are emulated by building the corresponding state
vectors and density matrices directly: the data superposition |X>, the
label state |y>, the incidence-row superposition |G_I>, and the reduced
densities obtained from them by partial trace (the trace-normalized kernel
matrix and the normalized-Laplacian density).
"""

from __future__ import annotations

import numpy as np

from .datasets import SampleGraph, TrainingSet, incidence_matrix
from .errors import DegreeError, EncodingError, LayoutError
from .linalg import (
    TensorLayout,
    as_complex_matrix,
    hermitian_deviation,
    hermitian_part,
    partial_trace,
)

#: Default validation tolerances for quantum objects.
STATE_NORM_TOL = 1e-12
DENSITY_HERMITIAN_TOL = 1e-10
DENSITY_PSD_TOL = 1e-10
DENSITY_TRACE_TOL = 1e-10


class StateVector:
    """Unit-norm complex amplitude vector with a tensor-register layout."""

    __slots__ = ("amplitudes", "layout")

    def __init__(self, amplitudes: np.ndarray, layout: TensorLayout | tuple[int, ...],
                 norm_tol: float = STATE_NORM_TOL):
        if not isinstance(layout, TensorLayout):
            layout = TensorLayout(tuple(layout))
        amp = np.ascontiguousarray(amplitudes, dtype=np.complex128).reshape(-1)
        layout.check_matches(amp.shape[0])
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > norm_tol:
            raise EncodingError(f"state norm {norm!r} deviates from 1 beyond {norm_tol}")
        amp.setflags(write=False)
        self.amplitudes = amp
        self.layout = layout

    @classmethod
    def normalized(cls, vector: np.ndarray, layout: TensorLayout | tuple[int, ...]) -> "StateVector":
        v = np.ascontiguousarray(vector, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(v)
        if norm == 0.0 or not np.isfinite(norm):
            raise EncodingError("cannot encode a zero or non-finite vector")
        return cls(v / norm, layout)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def overlap(self, other: "StateVector") -> complex:
        """<self|other>."""
        if self.dim != other.dim:
            raise LayoutError(f"state dimensions differ: {self.dim} vs {other.dim}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def density(self) -> "DensityMatrix":
        """Rank-1 projector |psi><psi| as a density matrix."""
        outer = np.outer(self.amplitudes, self.amplitudes.conj())
        return DensityMatrix(outer, self.layout)


class DensityMatrix:
    """Hermitian, PSD, unit-trace matrix with a tensor-register layout.

    The stored matrix is the symmetrized input; validation tolerances can
    be widened for long channel trajectories where roundoff accumulates.
    """

    __slots__ = ("matrix", "layout")

    def __init__(
        self,
        matrix: np.ndarray,
        layout: TensorLayout | tuple[int, ...],
        hermitian_tol: float = DENSITY_HERMITIAN_TOL,
        psd_tol: float = DENSITY_PSD_TOL,
        trace_tol: float = DENSITY_TRACE_TOL,
    ):
        if not isinstance(layout, TensorLayout):
            layout = TensorLayout(tuple(layout))
        m = as_complex_matrix(matrix)
        if m.shape[0] != m.shape[1]:
            raise LayoutError(f"density matrix must be square, got {m.shape}")
        layout.check_matches(m.shape[0])
        dev = hermitian_deviation(m)
        if dev > hermitian_tol:
            raise EncodingError(f"density deviates from Hermitian by {dev:.3e}")
        m = hermitian_part(m)
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > trace_tol:
            raise EncodingError(f"density trace {tr!r} deviates from 1 beyond {trace_tol}")
        lam_min = float(np.linalg.eigvalsh(m)[0])
        if lam_min < -psd_tol:
            raise EncodingError(f"density is not PSD (min eigenvalue {lam_min:.3e})")
        m.setflags(write=False)
        self.matrix = m
        self.layout = layout

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def reduced(self, traced_factor: int, **tols) -> "DensityMatrix":
        """Partial trace over one register."""
        out = partial_trace(self.matrix, self.layout, traced_factor)
        return DensityMatrix(out, self.layout.without(traced_factor), **tols)


def _row_norms(x: TrainingSet) -> np.ndarray:
    norms = np.linalg.norm(x.features, axis=1)
    if np.any(norms == 0.0):
        bad = int(np.flatnonzero(norms == 0.0)[0])
        raise EncodingError(f"sample {bad} has zero norm and cannot be encoded")
    return norms


def data_state(x: TrainingSet) -> StateVector:
    """Superposition (1/sqrt(sum ||x_i||^2)) sum_i |i> (x) ||x_i|| |x_i>.

    Block i of the amplitude vector is simply row x_i, so the state is the
    flattened feature matrix normalized to unit Frobenius norm.
    """
    _row_norms(x)
    return StateVector.normalized(
        x.features.reshape(-1), TensorLayout((x.sample_count, x.feature_count))
    )


def kernel_density(x: TrainingSet) -> DensityMatrix:
    """Trace-normalized linear-kernel density: Tr_2 |X><X| = X X^T / tr(X X^T)."""
    return data_state(x).density().reduced(1)


def label_state(y: np.ndarray) -> StateVector:
    """|y> = y / ||y||; all-zero label vectors cannot be encoded."""
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    return StateVector.normalized(y, TensorLayout((y.shape[0],)))


def incidence_state(g: SampleGraph) -> StateVector:
    """(1/sqrt(m)) sum_i |i> (x) |v_i> over unit incidence-matrix rows."""
    if np.any(g.degrees == 0):
        raise DegreeError("graph has an isolated vertex")
    gi = incidence_matrix(g)
    return StateVector.normalized(
        gi.reshape(-1), TensorLayout((g.vertex_count, g.edge_count))
    )


def laplacian_density(g: SampleGraph) -> DensityMatrix:
    """Tr_2 |G_I><G_I|: the degree-normalized Laplacian divided by m."""
    return incidence_state(g).density().reduced(1)


def maximally_mixed(dim: int) -> DensityMatrix:
    """I/d on a single register."""
    return DensityMatrix(np.eye(dim) / dim, TensorLayout((dim,)))

