"""Dense states, channels and superoperators.

Vectorization is column stacking throughout: vec(A rho B) = (B^T kron A) vec(rho),
so a Kraus operator M acts as conj(M) kron M. Qubit 0 is the most significant factor
of every tensor product.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from qnoise.config import ExperimentConfig
from qnoise.exceptions import InvalidArgumentError, UnsupportedDimensionError

logger = logging.getLogger(__name__)

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def vec(matrix: np.ndarray) -> np.ndarray:
    return np.asarray(matrix).T.reshape(-1)


def unvec(vector: np.ndarray) -> np.ndarray:
    vector = np.asarray(vector)
    dim = int(round(np.sqrt(vector.size)))
    return vector.reshape(dim, dim).T


@dataclass(frozen=True)
class DensityMatrix:
    data: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.data, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise InvalidArgumentError("Density matrix must be square", {'shape': rho.shape})
        if np.max(np.abs(rho - rho.conj().T)) > ExperimentConfig.HERMITIAN_TOL:
            raise InvalidArgumentError("Density matrix is not Hermitian")
        trace = np.trace(rho).real
        if abs(trace - 1.0) > ExperimentConfig.TRACE_TOL:
            raise InvalidArgumentError("Density matrix trace is not 1", {'trace': trace})
        min_eig = np.linalg.eigvalsh(rho).min()
        if min_eig < -ExperimentConfig.TRACE_TOL:
            raise InvalidArgumentError("Density matrix has a negative eigenvalue",
                                       {'min_eigenvalue': float(min_eig)})
        object.__setattr__(self, 'data', rho)

    @property
    def dimension(self) -> int:
        return self.data.shape[0]

    @classmethod
    def from_state(cls, psi) -> 'DensityMatrix':
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))


@dataclass(frozen=True)
class KrausSet:
    operators: np.ndarray

    def __post_init__(self):
        ops = np.asarray(self.operators, dtype=complex)
        if ops.ndim == 2:
            ops = ops[np.newaxis]
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
            raise InvalidArgumentError("Kraus operators must be a stack of square matrices",
                                       {'shape': ops.shape})
        n = ops.shape[1]
        if ops.shape[0] > n * n:
            raise InvalidArgumentError("More than N^2 Kraus operators", {'K': ops.shape[0], 'N': n})
        completeness = np.einsum('kji,kjl->il', ops.conj(), ops)
        residual = np.max(np.abs(completeness - np.eye(n)))
        if residual > ExperimentConfig.TP_TOL:
            raise InvalidArgumentError("Kraus operators are not trace preserving",
                                       {'residual': float(residual)})
        object.__setattr__(self, 'operators', ops)

    @property
    def dimension(self) -> int:
        return self.operators.shape[1]

    def __len__(self):
        return self.operators.shape[0]

    def compact(self, tol: float = 1e-15) -> 'KrausSet':
        """Drop operators that are identically zero."""
        norms = np.max(np.abs(self.operators), axis=(1, 2))
        keep = norms > tol
        if not np.any(keep):
            keep[0] = True
        return KrausSet(self.operators[keep])

    def to_stiefel(self) -> 'StiefelPoint':
        return StiefelPoint(self.operators.reshape(-1, self.dimension))


@dataclass(frozen=True)
class StiefelPoint:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        rows, cols = m.shape
        if rows % cols:
            raise InvalidArgumentError("Stiefel point height must be a multiple of its width",
                                       {'shape': m.shape})
        residual = np.max(np.abs(m.conj().T @ m - np.eye(cols)))
        if residual > ExperimentConfig.ORTHONORMAL_TOL:
            raise InvalidArgumentError("Stiefel point columns are not orthonormal",
                                       {'residual': float(residual)})
        object.__setattr__(self, 'matrix', m)

    def to_kraus(self) -> KrausSet:
        n = self.matrix.shape[1]
        return KrausSet(self.matrix.reshape(-1, n, n))


@dataclass(frozen=True)
class SuperOperator:
    data: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.data, dtype=complex)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise InvalidArgumentError("Superoperator must be square", {'shape': s.shape})
        dim = int(round(np.sqrt(s.shape[0])))
        if dim * dim != s.shape[0]:
            raise InvalidArgumentError("Superoperator size must be N^2", {'shape': s.shape})
        object.__setattr__(self, 'data', s)

    @property
    def dimension(self) -> int:
        return int(round(np.sqrt(self.data.shape[0])))

    @classmethod
    def identity(cls, dim: int) -> 'SuperOperator':
        return cls(np.eye(dim * dim, dtype=complex))

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        return apply_superoperator(self, rho)


def kraus_to_superoperator(kraus: KrausSet) -> SuperOperator:
    ops = kraus.operators
    return SuperOperator(sum(np.kron(m.conj(), m) for m in ops))


def unitary_to_superoperator(u: np.ndarray) -> SuperOperator:
    u = np.asarray(u, dtype=complex)
    return SuperOperator(np.kron(u.conj(), u))


def superoperator_to_choi(s: SuperOperator) -> np.ndarray:
    dim = s.dimension
    return np.reshape(s.data, [dim] * 4).swapaxes(0, 3).reshape(dim * dim, dim * dim)


def apply_channel(kraus: KrausSet, rho: DensityMatrix) -> DensityMatrix:
    """rho -> sum_k M_k rho M_k^dagger"""
    if kraus.dimension != rho.dimension:
        raise InvalidArgumentError("Channel and state dimensions differ",
                                   {'channel': kraus.dimension, 'state': rho.dimension})
    ops = kraus.operators
    out = np.einsum('kij,jl,kml->im', ops, rho.data, ops.conj())
    return DensityMatrix(0.5 * (out + out.conj().T))


def apply_superoperator(s: SuperOperator, rho: DensityMatrix) -> DensityMatrix:
    if s.dimension != rho.dimension:
        raise InvalidArgumentError("Superoperator and state dimensions differ",
                                   {'channel': s.dimension, 'state': rho.dimension})
    out = unvec(s.data @ vec(rho.data))
    return DensityMatrix(0.5 * (out + out.conj().T))


def process_fidelity(u_ideal: np.ndarray, s: SuperOperator) -> float:
    """(1/N^2) Re Tr[(U^T kron U^dagger) S]"""
    u = np.asarray(u_ideal, dtype=complex)
    n = u.shape[0]
    if s.dimension != n:
        raise InvalidArgumentError("Unitary and superoperator dimensions differ",
                                   {'unitary': n, 'channel': s.dimension})
    # Tr[(U^T kron U^dag) S] = sum_ij conj(kron(conj U, U))_ij S_ij
    ideal = np.kron(u.conj(), u)
    value = np.vdot(ideal, s.data) / (n * n)
    if abs(value.imag) > ExperimentConfig.FIDELITY_IMAG_TOL:
        logger.warning("Process fidelity has imaginary residue %.3e", value.imag)
    return float(value.real)


def nonunital_shift(s: SuperOperator) -> Tuple[np.ndarray, float]:
    """Bloch-vector shift beta of the image of I/2, and unitality 1 - |beta|."""
    if s.dimension != 2:
        raise UnsupportedDimensionError("Non-unital shift is defined for single qubits",
                                        {'dimension': s.dimension})
    image = unvec(s.data @ vec(IDENTITY)) / 2.0
    beta = np.array([np.trace(p @ image).real for p in PAULIS])
    return beta, float(1.0 - np.linalg.norm(beta))


def is_cptp(s: SuperOperator) -> Tuple[bool, Dict[str, float]]:
    """Choi PSD to 1e-8 and vec(I)^dagger S = vec(I)^dagger to 1e-10, with diagnostics."""
    dim = s.dimension
    choi = superoperator_to_choi(s)
    hermitian_residual = float(np.max(np.abs(choi - choi.conj().T)))
    min_eig = float(np.linalg.eigvalsh(0.5 * (choi + choi.conj().T)).min())
    identity = vec(np.eye(dim))
    tp_residual = float(np.linalg.norm(identity.conj() @ s.data - identity.conj()))
    ok = (min_eig >= -ExperimentConfig.CHOI_PSD_TOL
          and tp_residual <= ExperimentConfig.TP_TOL
          and hermitian_residual <= ExperimentConfig.CHOI_PSD_TOL)
    return ok, {
        'min_choi_eigenvalue': min_eig,
        'tp_residual': tp_residual,
        'hermitian_residual': hermitian_residual,
    }


def compose(a: SuperOperator, b: SuperOperator) -> SuperOperator:
    """a after b"""
    if a.dimension != b.dimension:
        raise InvalidArgumentError("Cannot compose superoperators of different dimension",
                                   {'a': a.dimension, 'b': b.dimension})
    return SuperOperator(a.data @ b.data)


def average(superoperators: Sequence[SuperOperator]) -> Tuple[SuperOperator, np.ndarray]:
    """Elementwise mean and standard error (zero for a single element)."""
    if len(superoperators) == 0:
        raise InvalidArgumentError("Cannot average an empty list")
    dims = {s.dimension for s in superoperators}
    if len(dims) != 1:
        raise InvalidArgumentError("Superoperators have mixed dimensions", {'dimensions': sorted(dims)})
    stack = np.stack([s.data for s in superoperators])
    mean = stack.mean(axis=0)
    if len(stack) < 2:
        return SuperOperator(mean), np.zeros(mean.shape)
    variance = np.var(stack.real, axis=0, ddof=1) + np.var(stack.imag, axis=0, ddof=1)
    return SuperOperator(mean), np.sqrt(variance / len(stack))


def embed_operator(op: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """Full 2^n matrix acting as ``op`` on ``targets`` (in the given order)."""
    dim = 2 ** n_qubits
    basis = np.eye(dim, dtype=complex).reshape([2] * n_qubits + [dim])
    out = apply_local(basis, op, targets, n_qubits)
    return out.reshape(dim, dim)


def apply_local(tensor: np.ndarray, op: np.ndarray, targets: Sequence[int], n_qubits: int,
                offset: int = 0) -> np.ndarray:
    """Contract ``op`` into the qubit axes ``offset + targets`` of ``tensor``."""
    k = len(targets)
    op_tensor = np.asarray(op).reshape([2] * (2 * k))
    axes = [offset + t for t in targets]
    out = np.tensordot(op_tensor, tensor, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def superoperator_to_csv(path: str, s: SuperOperator):
    """Rows of interleaved re,im pairs after a ``dim,N`` header line."""
    rows = s.data.shape[0]
    interleaved = np.empty((rows, 2 * rows))
    interleaved[:, 0::2] = s.data.real
    interleaved[:, 1::2] = s.data.imag
    np.savetxt(path, interleaved, delimiter=',', fmt='%.17g',
               header=f'dim,{s.dimension}', comments='')


def superoperator_from_csv(path: str) -> SuperOperator:
    with open(path, 'r', encoding='utf-8') as f:
        header = f.readline().strip().split(',')
    if len(header) != 2 or header[0] != 'dim':
        raise InvalidArgumentError("Missing 'dim,N' header in superoperator CSV", {'path': path})
    dim = int(header[1])
    data = np.loadtxt(path, delimiter=',', skiprows=1, ndmin=2)
    if data.shape != (dim * dim, 2 * dim * dim):
        raise InvalidArgumentError("Superoperator CSV has the wrong shape",
                                   {'expected': (dim * dim, 2 * dim * dim), 'found': data.shape})
    return SuperOperator(data[:, 0::2] + 1j * data[:, 1::2])


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def kraus_from_unitaries(unitaries: List[np.ndarray], probabilities: Sequence[float]) -> KrausSet:
    """Mixed-unitary channel sum_i p_i U_i rho U_i^dagger."""
    return KrausSet(np.stack([np.sqrt(p) * np.asarray(u, dtype=complex)
                              for u, p in zip(unitaries, probabilities)]))
