"""
Hamiltoniano de relógio de Feynman e variante com pesos sqrt(j(k+1-j))

Representação abstrata: trabalho (x) relógio de k+1 níveis, índice
b * (k+1) + t. Representação unária: relógio em k qubits com |t> codificado
como parede de domínio 1^t 0^(k-t), qubits de trabalho primeiro.

Com pesos w_j = sqrt(j(k+1-j)) o operador restrito à cadeia |psi_j> é 2 J_x
de um spin k/2; a transferência perfeita acontece sob J_x = H'/2 em t = pi.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy import sparse

from core.circuit import Circuit, StateVector, gate_sparse, run_circuit, site_operator
from core.config_store import qubit_cap
from core.errors import DimensionMismatchError, ResourceLimitError, ValidationError
from core.spectral import SparseHermitian, evolve

logger = logging.getLogger(__name__)

_P0 = np.array([[1, 0], [0, 0]], dtype=complex)
_P1 = np.array([[0, 0], [0, 1]], dtype=complex)
_RAISE = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|


# ============================================================
# RELÓGIO (operadores sobre o registrador de relógio)
# ============================================================
def clock_transition(levels: int, t_to: int, t_from: int) -> sparse.csr_matrix:
    """|t_to><t_from| no relógio abstrato."""
    return sparse.csr_matrix(([1.0 + 0j], ([t_to], [t_from])), shape=(levels, levels))


def unary_clock_ops(k: int, t_to: int, t_from: int) -> Dict[int, np.ndarray]:
    """
    Fatores de 1 qubit que realizam |t_to><t_from| no subespaço legal da
    codificação unária (qubit de relógio j-1 guarda o bit c_j).

    Transições (|t_to - t_from| = 1) tocam c_{j-1}, c_j, c_{j+1};
    projetores (t_to = t_from = t) tocam c_t e c_{t+1}.
    """
    if not (0 <= t_to <= k and 0 <= t_from <= k):
        raise ValidationError(f"Valores de relógio {t_to}, {t_from} fora de 0..{k}")
    ops: Dict[int, np.ndarray] = {}
    if t_to == t_from:
        t = t_to
        if t >= 1:
            ops[t - 1] = _P1
        if t < k:
            ops[t] = _P0
        return ops
    if abs(t_to - t_from) != 1:
        raise ValidationError("Somente transições entre valores vizinhos do relógio")
    j = max(t_to, t_from)
    if j >= 2:
        ops[j - 2] = _P1
    ops[j - 1] = _RAISE if t_to > t_from else _RAISE.conj().T
    if j < k:
        ops[j] = _P0
    return ops


def unary_index(t: int, k: int) -> int:
    """Índice do estado |1^t 0^(k-t)> no registrador de k qubits."""
    return ((1 << t) - 1) << (k - t) if k > 0 else 0


def clock_isometry(work_n: int, k: int) -> sparse.csr_matrix:
    """
    Isometria do espaço abstrato (2^work_n (k+1)) para o subespaço legal de
    work_n + k qubits.
    """
    levels = k + 1
    cols = np.arange(2 ** work_n * levels)
    b, t = np.divmod(cols, levels)
    rows = b * (2 ** k) + np.array([unary_index(int(tt), k) for tt in t], dtype=np.int64)
    return sparse.csr_matrix((np.ones(cols.size, dtype=complex), (rows, cols)),
                             shape=(2 ** (work_n + k), cols.size))


# ============================================================
# TIPOS
# ============================================================
@dataclass(frozen=True)
class ClockHamiltonian:
    """
    H = sum_j w_j (U_j (x) |j><j-1| + U_j^dagger (x) |j-1><j|)

    Attributes:
        circuit: Circuito de origem (k portas)
        weights: w_1..w_k
        scale: Fator do gerador usado na transferência (gerador = scale * H)
    """
    circuit: Circuit
    weights: Tuple[float, ...]
    scale: float = 1.0

    def __post_init__(self):
        if self.circuit.k < 1:
            raise ValidationError("Hamiltoniano de relógio exige circuito com pelo menos uma porta")
        weights = tuple(float(w) for w in self.weights)
        if len(weights) != self.circuit.k:
            raise DimensionMismatchError(f"{len(weights)} pesos para {self.circuit.k} portas")
        object.__setattr__(self, "weights", weights)

    @property
    def work_n(self) -> int:
        return self.circuit.n

    @property
    def k(self) -> int:
        return self.circuit.k

    @property
    def levels(self) -> int:
        return self.k + 1

    @cached_property
    def operator(self) -> SparseHermitian:
        """Operador na representação abstrata."""
        levels = self.levels
        dim = 2 ** self.work_n * levels
        h = sparse.csr_matrix((dim, dim), dtype=complex)
        for j, (g, w) in enumerate(zip(self.circuit.gates, self.weights), start=1):
            forward = sparse.kron(gate_sparse(g, self.work_n), clock_transition(levels, j, j - 1), format="csr")
            h = h + w * (forward + forward.conj().T)
        return SparseHermitian(h, self.work_n, levels)

    @cached_property
    def generator(self) -> SparseHermitian:
        """scale * H: o operador que realiza a transferência em t = pi."""
        return self.operator.scaled(self.scale) if self.scale != 1.0 else self.operator

    def chain_basis(self, psi_in: StateVector) -> np.ndarray:
        """Colunas |psi_j> = U_j ... U_1 |psi_in> (x) |j>, j = 0..k."""
        if psi_in.n != self.work_n or psi_in.aux_dim != 1:
            raise DimensionMismatchError(f"Estado de {psi_in.n} qubits para registrador de trabalho de {self.work_n}")
        basis = np.zeros((2 ** self.work_n * self.levels, self.levels), dtype=complex)
        state = psi_in
        for j in range(self.levels):
            if j > 0:
                state = run_circuit(Circuit(self.work_n, (self.circuit.gates[j - 1],)), state)
            basis[:, j] = state.with_register(self.levels, j).amplitudes
        return basis

    def restricted_matrix(self, psi_in: StateVector) -> np.ndarray:
        """Matriz (k+1) x (k+1) de H na cadeia de Krylov (pesos nas subdiagonais)."""
        return self.operator.restricted(self.chain_basis(psi_in))

    def term_supports(self) -> List[Tuple[int, ...]]:
        """Qubits tocados por cada termo da imersão unária (trabalho primeiro)."""
        supports = []
        for j, g in enumerate(self.circuit.gates, start=1):
            clock = unary_clock_ops(self.k, j, j - 1)
            supports.append(tuple(sorted(g.targets)) + tuple(self.work_n + q for q in sorted(clock)))
        return supports

    @property
    def locality(self) -> int:
        return max(len(s) for s in self.term_supports())


@dataclass(frozen=True)
class TransferReport:
    """Resultado da verificação de transferência perfeita"""
    k: int
    n_work: int
    fidelity: float
    t_used: float
    scale: float
    leakage: float
    locality_measured: int
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "n_work": self.n_work,
            "fidelity": self.fidelity,
            "t_used": self.t_used,
            "scale": self.scale,
            "leakage": self.leakage,
            "locality_measured": self.locality_measured,
            "tol": self.tol,
            "passed": self.passed,
        }


# ============================================================
# CONSTRUTORES
# ============================================================
def _check_circuit(c: Circuit) -> None:
    if c.k < 1:
        raise ValidationError("Circuito vazio: o relógio exige k >= 1 portas")


def childs_weights(k: int) -> Tuple[float, ...]:
    """w_j = sqrt(j (k+1-j)), simétricos em j <-> k+1-j."""
    return tuple(math.sqrt(j * (k + 1 - j)) for j in range(1, k + 1))


def build_feynman_clock(c: Circuit) -> ClockHamiltonian:
    """
    Relógio de Feynman com pesos unitários

    Args:
        c: Circuito com k >= 1 portas

    Returns:
        ClockHamiltonian (abstrato)
    """
    _check_circuit(c)
    return ClockHamiltonian(c, (1.0,) * c.k, scale=1.0)


def build_childs_weighted(c: Circuit) -> ClockHamiltonian:
    """
    Relógio com pesos sqrt(j(k+1-j)); H' = 2 J_x na cadeia, gerador J_x.
    """
    _check_circuit(c)
    return ClockHamiltonian(c, childs_weights(c.k), scale=0.5)


# ============================================================
# VERIFICAÇÃO
# ============================================================
def chain_leakage(h: ClockHamiltonian, psi_in: StateVector, times: Sequence[float]) -> float:
    """Maior norma fora de span{|psi_j>} ao longo dos tempos dados."""
    basis = h.chain_basis(psi_in)
    gen = h.generator
    start = psi_in.with_register(h.levels, 0)
    worst = 0.0
    for t in times:
        v = evolve(gen, start, float(t)).amplitudes
        outside = v - basis @ (basis.conj().T @ v)
        worst = max(worst, float(np.linalg.norm(outside)))
    return worst


def verify_perfect_transfer(
    c: Circuit,
    psi_in: StateVector,
    tol: float,
    weighted: bool = True,
    t: Optional[float] = None,
    leakage_samples: int = 20,
) -> TransferReport:
    """
    Evolui |psi_in>|0> sob o gerador do relógio e mede a fidelidade com U|psi_in>|k>

    Args:
        c: Circuito
        psi_in: Estado do registrador de trabalho
        tol: Tolerância (> 0); passa se fidelidade >= 1 - tol
        weighted: Pesos sqrt(j(k+1-j)) (True) ou relógio de Feynman (False)
        t: Tempo de evolução (padrão pi)
        leakage_samples: Tempos amostrados em [0, t] para o vazamento da cadeia

    Returns:
        TransferReport
    """
    if not tol > 0:
        raise ValidationError(f"Tolerância deve ser positiva, recebido {tol}")
    if psi_in.n != c.n or psi_in.aux_dim != 1:
        raise DimensionMismatchError(f"Estado de {psi_in.n} qubits para circuito de {c.n} qubits")

    h = build_childs_weighted(c) if weighted else build_feynman_clock(c)
    t_used = math.pi if t is None else float(t)

    evolved = evolve(h.generator, psi_in.with_register(h.levels, 0), t_used)
    target = run_circuit(c, psi_in).with_register(h.levels, h.k)
    fidelity = evolved.fidelity(target)

    times = np.linspace(0.0, t_used, leakage_samples) if leakage_samples > 0 else []
    leakage = chain_leakage(h, psi_in, times)

    passed = fidelity >= 1.0 - tol
    logger.info("Transferência k=%d n_work=%d: fidelidade %.12f (%s)",
                h.k, h.work_n, fidelity, "ok" if passed else "falhou")
    return TransferReport(
        k=h.k,
        n_work=h.work_n,
        fidelity=fidelity,
        t_used=t_used,
        scale=h.scale,
        leakage=leakage,
        locality_measured=h.locality,
        tol=tol,
        passed=passed,
    )


# ============================================================
# IMERSÃO UNÁRIA
# ============================================================
def unary_embedding(h: ClockHamiltonian) -> Tuple[SparseHermitian, sparse.csr_matrix]:
    """
    Operador sobre work_n + k qubits e isometria do espaço abstrato para o
    subespaço legal; V^dagger H_unário V reproduz o operador abstrato.
    """
    total = h.work_n + h.k
    cap = qubit_cap()
    if total > cap:
        raise ResourceLimitError(f"Imersão unária exige {total} qubits, limite {cap}")

    dim = 2 ** total
    op = sparse.csr_matrix((dim, dim), dtype=complex)
    for j, (g, w) in enumerate(zip(h.circuit.gates, h.weights), start=1):
        clock = site_operator(unary_clock_ops(h.k, j, j - 1), h.k)
        forward = sparse.kron(gate_sparse(g, h.work_n), clock, format="csr")
        op = op + w * (forward + forward.conj().T)
    return SparseHermitian(op, total), clock_isometry(h.work_n, h.k)
