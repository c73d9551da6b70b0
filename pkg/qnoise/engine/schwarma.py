"""SchWARMA steps: ARMA outputs scale tangent directions that are exponentiated onto
the Stiefel manifold of stacked Kraus operators.

The orthogonal complement is fixed to [0; I], so a tangent (A, B) exponentiates to
blockdiag(U, I) expm([[A, -B^dag], [B, 0]]) restricted to its first N columns.
"""
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy import linalg

from qnoise.config import ExperimentConfig
from qnoise.engine.arma import ArmaModel
from qnoise.engine.quantum_core import (
    IDENTITY, PAULIS, SIGMA_Z, KrausSet, StiefelPoint, SuperOperator, kraus_to_superoperator,
)
from qnoise.exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

StepFn = Callable[[np.ndarray], KrausSet]
UnitaryProvider = Callable[[int], np.ndarray]


@dataclass(frozen=True)
class TangentVector:
    a_block: np.ndarray
    b_block: np.ndarray
    K: int

    def __post_init__(self):
        a = np.asarray(self.a_block, dtype=complex)
        b = np.asarray(self.b_block, dtype=complex)
        n = a.shape[0]
        if a.shape != (n, n):
            raise InvalidArgumentError("A block must be square", {'shape': a.shape})
        if b.ndim != 2 or b.shape[1] != n or b.shape[0] != (self.K - 1) * n:
            raise InvalidArgumentError("B block must be (K-1)N x N",
                                       {'shape': b.shape, 'K': self.K, 'N': n})
        skew = np.max(np.abs(a + a.conj().T)) if a.size else 0.0
        if skew > ExperimentConfig.SKEW_TOL * max(1.0, np.linalg.norm(a)):
            raise InvalidArgumentError("A block is not skew-Hermitian", {'residual': float(skew)})
        object.__setattr__(self, 'a_block', a)
        object.__setattr__(self, 'b_block', b)

    @property
    def dimension(self) -> int:
        return self.a_block.shape[0]

    @classmethod
    def hamiltonian(cls, op: np.ndarray, K: int = 1) -> 'TangentVector':
        """A = -i S for a Hermitian generator S."""
        op = np.asarray(op, dtype=complex)
        n = op.shape[0]
        return cls(-1j * op, np.zeros(((K - 1) * n, n), dtype=complex), K)

    @classmethod
    def dissipative(cls, blocks: Sequence[np.ndarray]) -> 'TangentVector':
        """A = 0 with B stacked from ``blocks`` (one per extra Kraus operator)."""
        blocks = [np.asarray(b, dtype=complex) for b in blocks]
        n = blocks[0].shape[0]
        return cls(np.zeros((n, n), dtype=complex), np.vstack(blocks), len(blocks) + 1)

    def __add__(self, other: 'TangentVector') -> 'TangentVector':
        return TangentVector(self.a_block + other.a_block, self.b_block + other.b_block, self.K)

    def scale(self, y: complex) -> 'TangentVector':
        return TangentVector(y * self.a_block, y * self.b_block, self.K)

    def generator(self) -> np.ndarray:
        n = self.dimension
        size = self.K * n
        x = np.zeros((size, size), dtype=complex)
        x[:n, :n] = self.a_block
        x[n:, :n] = self.b_block
        x[:n, n:] = -self.b_block.conj().T
        return x


def stiefel_exp(base_u: np.ndarray, x: TangentVector) -> StiefelPoint:
    n = x.dimension
    columns = linalg.expm(x.generator())[:, :n]
    columns[:n] = np.asarray(base_u, dtype=complex) @ columns[:n]
    return StiefelPoint(columns)


def z_dephasing_step(y: float) -> KrausSet:
    return KrausSet(np.diag([np.exp(-1j * y), np.exp(1j * y)]))


def multiaxis_unitaries(y: np.ndarray) -> np.ndarray:
    """exp(-i y.sigma) for y of shape (..., 3), closed form with the sinc limit at 0."""
    y = np.asarray(y, dtype=float)
    g = np.sqrt(np.sum(y ** 2, axis=-1))
    cos = np.cos(g)[..., None, None]
    sinc = np.sinc(g / np.pi)[..., None, None]
    generator = np.einsum('...m,mij->...ij', y, np.stack(PAULIS))
    return cos * IDENTITY - 1j * sinc * generator


def multiaxis_step(yx: float, yy: float, yz: float) -> KrausSet:
    return KrausSet(multiaxis_unitaries(np.array([yx, yy, yz])))


def amplitude_damping_step(y: complex) -> KrausSet:
    magnitude = abs(y)
    if magnitude >= np.pi / 2:
        logger.warning("Amplitude damping step |y| = %.4f is outside [0, pi/2)", magnitude)
    phase = np.exp(1j * np.angle(y))
    m1 = np.diag([1.0, np.cos(magnitude)]).astype(complex)
    m2 = np.array([[0.0, phase * np.sin(magnitude)], [0.0, 0.0]], dtype=complex)
    return KrausSet(np.stack([m1, m2]))


def lindblad_depolarizing_step(yx: complex, yy: complex, yz: complex,
                               compact: bool = False) -> KrausSet:
    """Kraus operators from one 8x8 exponential with Pauli B blocks.

    Returns all four operators by default, so the set has the same length for every
    input. ``compact=True`` drops the all-zero ones, e.g. when only yx is nonzero.
    """
    tangent = TangentVector.dissipative([yx * PAULIS[0], yy * PAULIS[1], yz * PAULIS[2]])
    kraus = stiefel_exp(IDENTITY, tangent).to_kraus()
    return kraus.compact() if compact else kraus


def lindblad_dephasing_step(yz: complex) -> KrausSet:
    """Compacted z-only form: a 4x2 Stiefel point."""
    tangent = TangentVector.dissipative([yz * SIGMA_Z])
    return stiefel_exp(IDENTITY, tangent).to_kraus()


def lindblad_liouvillian_step(h: np.ndarray, lindblad_ops: Sequence[np.ndarray],
                              rates: Sequence[float]) -> SuperOperator:
    """exp of the column-stacked Lindbladian with rates |y|^2."""
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    if np.max(np.abs(h - h.conj().T)) > ExperimentConfig.HERMITIAN_TOL * max(1.0, np.linalg.norm(h)):
        raise InvalidArgumentError("Hamiltonian is not Hermitian")
    if len(lindblad_ops) != len(rates):
        raise InvalidArgumentError("Need one rate per Lindblad operator",
                                   {'ops': len(lindblad_ops), 'rates': len(rates)})
    if any(r < 0 for r in rates):
        raise InvalidArgumentError("Lindblad rates must be nonnegative", {'rates': list(rates)})

    eye = np.eye(n)
    generator = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for op, rate in zip(lindblad_ops, rates):
        op = np.asarray(op, dtype=complex)
        decay = op.conj().T @ op
        generator += rate * (np.kron(op.conj(), op)
                             - 0.5 * np.kron(eye, decay)
                             - 0.5 * np.kron(decay.T, eye))
    return SuperOperator(linalg.expm(generator))


def lindblad_gap(kraus: KrausSet, lindblad_ops: Sequence[np.ndarray], rates: Sequence[float]) -> float:
    """Largest superoperator element gap between a step and the H = 0 Lindblad step."""
    n = kraus.dimension
    reference = lindblad_liouvillian_step(np.zeros((n, n)), lindblad_ops, rates)
    return float(np.max(np.abs(kraus_to_superoperator(kraus).data - reference.data)))


class SchwarmaModel:
    """L ARMA processes driving L tangent directions; one Kraus set per step.

    Family constructors attach the closed-form step for their channel; the general
    path exponentiates sum_l y_l X_l at the current base unitary.
    """

    def __init__(self, arma_models: Sequence[ArmaModel], directions: Sequence[TangentVector],
                 base_unitary_provider: Optional[UnitaryProvider] = None,
                 step_fn: Optional[StepFn] = None):
        if len(arma_models) == 0 or len(arma_models) != len(directions):
            raise InvalidArgumentError("Need L >= 1 ARMA models and one direction each",
                                       {'models': len(arma_models), 'directions': len(directions)})
        dims = {(d.dimension, d.K) for d in directions}
        if len(dims) != 1:
            raise InvalidArgumentError("Directions must share N and K", {'found': sorted(dims)})
        for model, direction in zip(arma_models, directions):
            if model.is_complex and np.any(direction.a_block != 0):
                raise InvalidArgumentError(
                    "Complex-valued driving requires a purely dissipative direction (A = 0)")
        self.arma_models: List[ArmaModel] = list(arma_models)
        self.directions: List[TangentVector] = list(directions)
        self.base_unitary_provider = base_unitary_provider
        self.step_fn = step_fn
        self.step_index = 0

    @property
    def dimension(self) -> int:
        return self.directions[0].dimension

    @property
    def K(self) -> int:
        return self.directions[0].K

    @property
    def n_axes(self) -> int:
        return len(self.arma_models)

    @property
    def is_unitary(self) -> bool:
        return self.K == 1

    def clone(self) -> 'SchwarmaModel':
        return SchwarmaModel([m.clone() for m in self.arma_models], self.directions,
                             self.base_unitary_provider, self.step_fn)

    def base_unitary(self, k: int) -> np.ndarray:
        if self.base_unitary_provider is None:
            return np.eye(self.dimension, dtype=complex)
        return np.asarray(self.base_unitary_provider(k), dtype=complex)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """ARMA outputs for the next n steps, shape (n, L)."""
        outputs = [m.generate(n, rng) for m in self.arma_models]
        return np.stack(outputs, axis=-1)

    def sample_batch(self, n_traj: int, n: int, rng: np.random.Generator) -> np.ndarray:
        """n_traj independent output sequences, shape (n_traj, n, L); histories untouched."""
        outputs = [m.generate_batch(n_traj, n, rng) for m in self.arma_models]
        return np.stack(outputs, axis=-1)

    def noise_unitaries(self, y: np.ndarray, k: Optional[int] = None) -> np.ndarray:
        """exp(-i sum_l y_l S_l) for outputs of shape (..., L), at the base unitary of step k.

        Only for unitary models; complex outputs contribute their real part.
        """
        if not self.is_unitary:
            raise InvalidArgumentError("Noise unitaries need a unitary (K = 1) model", {'K': self.K})
        y = np.real(np.asarray(y))
        if y.shape[-1] != self.n_axes:
            raise InvalidArgumentError("Outputs must end in one value per axis",
                                       {'expected': self.n_axes, 'found': y.shape})
        generators = np.stack([1j * d.a_block for d in self.directions])
        if self.n_axes == 1:
            # one fixed eigenbasis serves every sample
            levels, vectors = np.linalg.eigh(generators[0])
            phases = np.exp(-1j * y[..., :1] * levels)
        else:
            levels, vectors = np.linalg.eigh(np.einsum('...l,lij->...ij', y, generators))
            phases = np.exp(-1j * levels)
        u = np.einsum('...ij,...j,...kj->...ik', vectors, phases, vectors.conj())
        if self.base_unitary_provider is None:
            return u
        return self.base_unitary(self.step_index if k is None else k) @ u

    def kraus_from_outputs(self, y: np.ndarray, k: Optional[int] = None) -> KrausSet:
        y = np.asarray(y)
        if self.step_fn is not None and self.base_unitary_provider is None:
            return self.step_fn(y)
        tangent = self.directions[0].scale(y[0])
        for value, direction in zip(y[1:], self.directions[1:]):
            tangent = tangent + direction.scale(value)
        index = self.step_index if k is None else k
        return stiefel_exp(self.base_unitary(index), tangent).to_kraus()

    def step(self, rng: np.random.Generator) -> KrausSet:
        """Advance every ARMA model one tick and return the step's Kraus set."""
        y = np.array([m.generate(1, rng)[0] for m in self.arma_models])
        kraus = self.kraus_from_outputs(y, self.step_index)
        self.step_index += 1
        return kraus

    @classmethod
    def z_dephasing(cls, arma: ArmaModel) -> 'SchwarmaModel':
        return cls([arma], [TangentVector.hamiltonian(SIGMA_Z)],
                   step_fn=lambda y: z_dephasing_step(float(np.real(y[0]))))

    @classmethod
    def multiaxis(cls, arma_x: ArmaModel, arma_y: ArmaModel, arma_z: ArmaModel) -> 'SchwarmaModel':
        return cls([arma_x, arma_y, arma_z], [TangentVector.hamiltonian(p) for p in PAULIS],
                   step_fn=lambda y: multiaxis_step(*np.real(y)))

    @classmethod
    def amplitude_damping(cls, arma: ArmaModel) -> 'SchwarmaModel':
        lowering = np.array([[0, 1], [0, 0]], dtype=complex)
        return cls([arma], [TangentVector.dissipative([lowering])],
                   step_fn=lambda y: amplitude_damping_step(complex(y[0])))

    @classmethod
    def lindblad_depolarizing(cls, arma_x: ArmaModel, arma_y: ArmaModel,
                              arma_z: ArmaModel) -> 'SchwarmaModel':
        zero = np.zeros((2, 2), dtype=complex)
        directions = []
        for axis, pauli in enumerate(PAULIS):
            blocks = [zero, zero, zero]
            blocks[axis] = pauli
            directions.append(TangentVector.dissipative(blocks))
        return cls([arma_x, arma_y, arma_z], directions,
                   step_fn=lambda y: lindblad_depolarizing_step(*y))

    @classmethod
    def lindblad_dephasing(cls, arma: ArmaModel) -> 'SchwarmaModel':
        return cls([arma], [TangentVector.dissipative([SIGMA_Z])],
                   step_fn=lambda y: lindblad_dephasing_step(y[0]))

    @classmethod
    def hamiltonian_noise(cls, arma_models: Sequence[ArmaModel],
                          ops: Sequence[np.ndarray]) -> 'SchwarmaModel':
        """U_E = exp(-i sum_l y_l S_l) for Hermitian S_l."""
        ops = [np.asarray(op, dtype=complex) for op in ops]
        stacked = np.stack(ops)

        def step_fn(y):
            return KrausSet(linalg.expm(-1j * np.einsum('l,lij->ij', np.real(y), stacked)))

        return cls(list(arma_models), [TangentVector.hamiltonian(op) for op in ops],
                   step_fn=step_fn)
