"""
Construção circuito -> Hamiltoniano (Kitaev) com relógio de 3T+1 valores

H(x) = H_init + H_clock + sum_{t=1}^{3T} H_t, sobre o circuito acrescido de 2T
identidades. O estado de história
    |psi(x)> = 1/sqrt(3T+1) sum_{t=0}^{3T} U_t...U_1 |x> (x) |t>
é estado fundamental de energia zero; todos os ramos t >= T carregam a
computação completa.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List
import logging
import math

import numpy as np
from scipy import sparse

from core.circuit import Circuit, Gate, StateVector, gate_sparse, run_circuit, site_operator
from core.clockham import clock_isometry, clock_transition, unary_clock_ops
from core.config_store import qubit_cap
from core.constants import Representation
from core.errors import DimensionMismatchError, ResourceLimitError, ValidationError
from core.spectral import GroundStateResult, SparseHermitian, ground_state, spectral_gap
from utils.bit_utils import validate_bitstring

logger = logging.getLogger(__name__)

_P0 = np.array([[1, 0], [0, 0]], dtype=complex)
_P1 = np.array([[0, 0], [0, 1]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def padded_circuit(c: Circuit) -> Circuit:
    """Circuito seguido de 2T identidades (no qubit 0)."""
    pad = tuple(Gate.custom_gate(np.eye(2), 0) for _ in range(2 * c.k))
    return Circuit(c.n, c.gates + pad)


def _prop_clock_ops(k: int, t: int, bit: int) -> Dict[int, np.ndarray]:
    """
    Projetor sobre a tripla (c_{t-1}, c_t, c_{t+1}) = (1, bit, 0) na codificação
    unária: |100> para bit 0 (relógio t-1) e |110> para bit 1 (relógio t).
    """
    ops: Dict[int, np.ndarray] = {}
    if t >= 2:
        ops[t - 2] = _P1
    ops[t - 1] = _P1 if bit else _P0
    if t < k:
        ops[t] = _P0
    return ops


# ============================================================
# TIPOS
# ============================================================
@dataclass(frozen=True)
class KitaevHamiltonian:
    """
    Hamiltoniano de Kitaev para (circuito, entrada)

    Attributes:
        circuit: Circuito original de T portas sobre N qubits
        x: Entrada de N bits (ancilas completadas com zero)
        representation: Relógio abstrato (3T+1 níveis) ou unário (3T qubits)
    """
    circuit: Circuit
    x: str
    representation: Representation = Representation.ABSTRACT

    def __post_init__(self):
        if self.circuit.k < 1:
            raise ValidationError("Construção de Kitaev exige T >= 1 portas")
        validate_bitstring(self.x)
        if len(self.x) > self.circuit.n:
            raise DimensionMismatchError(f"Entrada de {len(self.x)} bits para circuito de {self.circuit.n} qubits")
        object.__setattr__(self, "x", self.x + "0" * (self.circuit.n - len(self.x)))
        representation = Representation(self.representation)
        object.__setattr__(self, "representation", representation)

        cap = qubit_cap()
        if self.total_qubits > cap:
            raise ResourceLimitError(f"Instância de Kitaev exige {self.total_qubits} qubits, limite {cap}")

    @property
    def N(self) -> int:
        return self.circuit.n

    @property
    def T(self) -> int:
        return self.circuit.k

    @property
    def padded_T(self) -> int:
        return 3 * self.T

    @property
    def levels(self) -> int:
        return self.padded_T + 1

    @property
    def unary(self) -> bool:
        return self.representation is Representation.UNARY

    @property
    def total_qubits(self) -> int:
        return self.N + (self.padded_T if self.unary else 0)

    @cached_property
    def padded(self) -> Circuit:
        return padded_circuit(self.circuit)

    # ------------------------------------------------------------
    # Termos
    # ------------------------------------------------------------
    def _wrap(self, m: sparse.csr_matrix) -> SparseHermitian:
        if self.unary:
            return SparseHermitian(m, self.total_qubits)
        return SparseHermitian(m, self.N, self.levels)

    def _clock_op(self, t_to: int, t_from: int) -> sparse.csr_matrix:
        if self.unary:
            return site_operator(unary_clock_ops(self.padded_T, t_to, t_from), self.padded_T)
        return clock_transition(self.levels, t_to, t_from)

    def _clock_dim(self) -> int:
        return 2 ** self.padded_T if self.unary else self.levels

    def _init_term(self) -> SparseHermitian:
        wrong = sum(
            site_operator({i: _P0 if b == "1" else _P1}, self.N) for i, b in enumerate(self.x)
        )
        return self._wrap(sparse.kron(wrong, self._clock_op(0, 0), format="csr"))

    def _clock_term(self) -> SparseHermitian:
        dim = 2 ** self.N * self._clock_dim()
        if not self.unary:
            return self._wrap(sparse.csr_matrix((dim, dim), dtype=complex))
        k = self.padded_T
        penalty = sparse.csr_matrix((2 ** k, 2 ** k), dtype=complex)
        for j in range(1, k):
            # padrão ilegal c_j c_{j+1} = 01
            penalty = penalty + site_operator({j - 1: _P0, j: _P1}, k)
        eye = sparse.identity(2 ** self.N, dtype=complex, format="csr")
        return self._wrap(sparse.kron(eye, penalty, format="csr"))

    def _prop_term(self, t: int) -> SparseHermitian:
        g = self.padded.gates[t - 1]
        u = gate_sparse(g, self.N)
        eye = sparse.identity(2 ** self.N, dtype=complex, format="csr")
        if self.unary:
            k = self.padded_T
            before = site_operator(_prop_clock_ops(k, t, 0), k)
            after = site_operator(_prop_clock_ops(k, t, 1), k)
            forward = sparse.kron(u, site_operator(unary_clock_ops(k, t, t - 1), k), format="csr")
        else:
            before = clock_transition(self.levels, t - 1, t - 1)
            after = clock_transition(self.levels, t, t)
            forward = sparse.kron(u, clock_transition(self.levels, t, t - 1), format="csr")
        diag = sparse.kron(eye, before + after, format="csr")
        return self._wrap(0.5 * (diag - forward - forward.conj().T))

    @cached_property
    def terms(self) -> Dict[str, object]:
        """{"init": H_init, "clock": H_clock, "prop": [H_1, ..., H_3T]}"""
        return {
            "init": self._init_term(),
            "clock": self._clock_term(),
            "prop": [self._prop_term(t) for t in range(1, self.padded_T + 1)],
        }

    def term_list(self) -> List[SparseHermitian]:
        return [self.terms["init"], self.terms["clock"]] + list(self.terms["prop"])

    @cached_property
    def operator(self) -> SparseHermitian:
        total = self.terms["init"].matrix + self.terms["clock"].matrix
        for term in self.terms["prop"]:
            total = total + term.matrix
        return self._wrap(total)

    def term_norms(self, state: StateVector) -> List[float]:
        """||term psi|| para cada termo (zero para o estado de história)."""
        return [float(np.linalg.norm(term.apply(state.amplitudes))) for term in self.term_list()]


@dataclass(frozen=True)
class GroundReport:
    """Diagnóstico do estado fundamental de uma instância de Kitaev"""
    N: int
    T: int
    representation: str
    energy: float
    residual: float
    gap: float
    decision_value: float
    output_overlap: float
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "T": self.T,
            "representation": self.representation,
            "energy": self.energy,
            "residual": self.residual,
            "gap": self.gap,
            "decision_value": self.decision_value,
            "output_overlap": self.output_overlap,
            "tol": self.tol,
            "passed": self.passed,
        }


# ============================================================
# OPERAÇÕES
# ============================================================
def build_kitaev(c: Circuit, x: str, representation: Representation = Representation.ABSTRACT) -> KitaevHamiltonian:
    """
    Monta H(x) = H_init + H_clock + sum_t H_t(x)

    Args:
        c: Circuito de T >= 1 portas
        x: Entrada (bits faltantes viram ancilas em 0)
        representation: "abstract" ou "unary"

    Returns:
        KitaevHamiltonian
    """
    h = KitaevHamiltonian(c, x, Representation(representation))
    logger.debug("Kitaev N=%d T=%d (%s): dimensão %d", h.N, h.T, h.representation.value, h.operator.dim)
    return h


def _branches(c: Circuit, x: str) -> List[StateVector]:
    padded = padded_circuit(c)
    full = x + "0" * (c.n - len(x))
    state = StateVector.basis(full)
    out = [state]
    for g in padded.gates:
        state = run_circuit(Circuit(c.n, (g,)), state)
        out.append(state)
    return out


def _to_unary(amplitudes: np.ndarray, N: int, k: int) -> np.ndarray:
    return clock_isometry(N, k) @ amplitudes


def history_state(c: Circuit, x: str, representation: Representation = Representation.ABSTRACT) -> StateVector:
    """
    Superposição uniforme das computações parciais sobre t = 0..3T

    Returns:
        StateVector com relógio abstrato (aux_dim = 3T+1) ou unário (N + 3T qubits)
    """
    if c.k < 1:
        raise ValidationError("Estado de história exige T >= 1 portas")
    validate_bitstring(x)
    if len(x) > c.n:
        raise DimensionMismatchError(f"Entrada de {len(x)} bits para circuito de {c.n} qubits")
    branches = _branches(c, x)
    levels = len(branches)
    amps = sum(b.with_register(levels, t).amplitudes for t, b in enumerate(branches)) / math.sqrt(levels)
    if Representation(representation) is Representation.UNARY:
        return StateVector(_to_unary(amps, c.n, levels - 1), c.n + levels - 1)
    return StateVector(amps, c.n, levels)


def decision_observable(N: int, T: int, representation: Representation = Representation.ABSTRACT) -> SparseHermitian:
    """
    Z no qubit 0 vezes o projetor do relógio em t >= T

    Na codificação unária é Z_0 (x) |1><1| no qubit de relógio c_T.
    """
    if N < 1 or T < 1:
        raise ValidationError(f"N={N} e T={T} devem ser >= 1")
    z0 = site_operator({0: _Z}, N)
    k = 3 * T
    if Representation(representation) is Representation.UNARY:
        return SparseHermitian(sparse.kron(z0, site_operator({T - 1: _P1}, k), format="csr"), N + k)
    finished = sparse.diags([1.0 if t >= T else 0.0 for t in range(k + 1)]).astype(complex)
    return SparseHermitian(sparse.kron(z0, finished, format="csr"), N, k + 1)


def output_overlap(h: KitaevHamiltonian, state: StateVector) -> float:
    """Peso de |psi> em span{U|x> (x) |t> : t >= T}."""
    branches = _branches(h.circuit, h.x)
    finished = branches[h.T]
    weight = 0.0
    for t in range(h.T, h.levels):
        v = finished.with_register(h.levels, t).amplitudes
        if h.unary:
            v = _to_unary(v, h.N, h.padded_T)
        weight += abs(np.vdot(v, state.amplitudes)) ** 2
    return float(weight)


def kitaev_ground(h: KitaevHamiltonian) -> GroundStateResult:
    return ground_state(h.operator)


def verify_ground(h: KitaevHamiltonian, state: StateVector, tol: float = 1e-9) -> GroundReport:
    """
    Confere se `state` é estado fundamental de energia zero

    Args:
        h: Instância de Kitaev
        state: Candidato (mesma representação de h)
        tol: Tolerância para energia e resíduo

    Returns:
        GroundReport; passa se energia <= tol, resíduo <= tol e gap > 0
    """
    if not tol > 0:
        raise ValidationError(f"Tolerância deve ser positiva, recebido {tol}")
    op = h.operator
    energy = op.expectation(state)
    residual = op.residual(state, energy)
    gap = spectral_gap(op)
    decision = decision_observable(h.N, h.T, h.representation).expectation(state)
    overlap = output_overlap(h, state)
    passed = energy <= tol and residual <= tol and gap > 0
    logger.info("Kitaev N=%d T=%d: energia %.3e resíduo %.3e gap %.4f", h.N, h.T, energy, residual, gap)
    return GroundReport(
        N=h.N,
        T=h.T,
        representation=h.representation.value,
        energy=energy,
        residual=residual,
        gap=gap,
        decision_value=decision,
        output_overlap=overlap,
        tol=tol,
        passed=passed,
    )
