"""
Circuitos, simulação de vetor de estado e o circuito dispatcher U(x)

Convenções:
- qubit 0 é o bit mais significativo do índice da base computacional
  (e a letra mais à esquerda em rótulos de Pauli e bitstrings)
- portas de 1 e 2 qubits aplicadas por contração tensorial no estado
  remodelado para [2] * n
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union
import logging
import math

import numpy as np
from scipy import sparse
from scipy.stats import unitary_group

from core.constants import (
    GateKind, NORM_DRIFT_TOL, NORM_TOL, UNITARY_TOL, STAB1_STATES, PROBE_BITS_PER_QUBIT,
)
from core.errors import (
    CatalogMissError, DimensionMismatchError, ValidationError,
)
from utils.bit_utils import bitstring_to_index, validate_bitstring

logger = logging.getLogger(__name__)


# ============================================================
# MATRIZES DAS PORTAS
# ============================================================
_SQRT2_INV = 1 / math.sqrt(2)

_FIXED_1Q = {
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    GateKind.H: np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV,
    GateKind.S: np.array([[1, 0], [0, 1j]], dtype=complex),
    GateKind.T: np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex),
}

_FIXED_2Q = {
    GateKind.CNOT: np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    GateKind.CZ: np.diag([1, 1, 1, -1]).astype(complex),
}

_ROTATIONS = {
    GateKind.RX: lambda t: np.array([[math.cos(t / 2), -1j * math.sin(t / 2)],
                                     [-1j * math.sin(t / 2), math.cos(t / 2)]], dtype=complex),
    GateKind.RY: lambda t: np.array([[math.cos(t / 2), -math.sin(t / 2)],
                                     [math.sin(t / 2), math.cos(t / 2)]], dtype=complex),
    GateKind.RZ: lambda t: np.array([[np.exp(-1j * t / 2), 0],
                                     [0, np.exp(1j * t / 2)]], dtype=complex),
}

_SELF_INVERSE = {GateKind.X, GateKind.Y, GateKind.Z, GateKind.H, GateKind.CNOT, GateKind.CZ}


# ============================================================
# TIPOS
# ============================================================
@dataclass(frozen=True)
class Gate:
    """
    Porta de 1 ou 2 qubits

    Attributes:
        kind: Tipo da porta
        targets: Qubits alvo (controle primeiro em CNOT)
        theta: Ângulo em radianos (rotações)
        custom: Matriz unitária 2x2 ou 4x4 (portas CUSTOM)
    """
    kind: GateKind
    targets: Tuple[int, ...]
    theta: Optional[float] = None
    custom: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        arity = 2 if self.kind in (GateKind.CNOT, GateKind.CZ, GateKind.CUSTOM2) else 1
        if len(self.targets) != arity:
            raise ValidationError(f"Porta {self.kind.value} exige {arity} alvo(s), recebeu {self.targets}")
        if len(set(self.targets)) != len(self.targets):
            raise ValidationError(f"Alvos repetidos na porta {self.kind.value}: {self.targets}")
        if any(t < 0 for t in self.targets):
            raise ValidationError(f"Alvo negativo na porta {self.kind.value}: {self.targets}")
        if self.kind in _ROTATIONS and self.theta is None:
            raise ValidationError(f"Porta {self.kind.value} exige ângulo theta")
        if self.kind in (GateKind.CUSTOM1, GateKind.CUSTOM2):
            dim = 2 ** arity
            m = np.asarray(self.custom, dtype=complex) if self.custom is not None else None
            if m is None or m.shape != (dim, dim):
                raise ValidationError(f"Porta {self.kind.value} exige matriz {dim}x{dim}")
            if not np.allclose(m.conj().T @ m, np.eye(dim), atol=UNITARY_TOL, rtol=0.0):
                raise ValidationError(f"Matriz da porta {self.kind.value} não é unitária")
            m.setflags(write=False)
            object.__setattr__(self, "custom", m)

    @classmethod
    def custom_gate(cls, matrix: np.ndarray, *targets: int) -> "Gate":
        kind = GateKind.CUSTOM1 if len(targets) == 1 else GateKind.CUSTOM2
        return cls(kind, tuple(targets), custom=np.asarray(matrix, dtype=complex))

    @property
    def matrix(self) -> np.ndarray:
        if self.kind in _FIXED_1Q:
            return _FIXED_1Q[self.kind]
        if self.kind in _FIXED_2Q:
            return _FIXED_2Q[self.kind]
        if self.kind in _ROTATIONS:
            return _ROTATIONS[self.kind](self.theta)
        return self.custom

    def inverse(self) -> "Gate":
        if self.kind in _SELF_INVERSE:
            return self
        if self.kind in _ROTATIONS:
            return Gate(self.kind, self.targets, theta=-self.theta)
        return Gate.custom_gate(self.matrix.conj().T, *self.targets)

    def to_text(self) -> str:
        parts = [self.kind.value] + [str(t) for t in self.targets]
        if self.theta is not None:
            parts.append(repr(float(self.theta)))
        if self.custom is not None:
            for z in self.custom.reshape(-1):
                parts.extend([repr(float(z.real)), repr(float(z.imag))])
        return " ".join(parts)


@dataclass(frozen=True)
class Circuit:
    """Circuito U = U_k ... U_1 (gates[0] é aplicada primeiro)"""
    n: int
    gates: Tuple[Gate, ...] = ()

    def __post_init__(self):
        if self.n < 0:
            raise ValidationError(f"Número de qubits inválido: {self.n}")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.targets) >= self.n:
                raise ValidationError(f"Porta {g.to_text()!r} fora do registrador de {self.n} qubits")

    @property
    def k(self) -> int:
        return len(self.gates)

    @cached_property
    def depth(self) -> int:
        frontier = [0] * self.n
        for g in self.gates:
            layer = max(frontier[t] for t in g.targets) + 1
            for t in g.targets:
                frontier[t] = layer
        return max(frontier, default=0)

    def then(self, other: "Circuit") -> "Circuit":
        """Composição: primeiro self, depois other."""
        if other.n != self.n:
            raise DimensionMismatchError(f"Circuitos com {self.n} e {other.n} qubits")
        return Circuit(self.n, self.gates + other.gates)

    def inverse(self) -> "Circuit":
        return Circuit(self.n, tuple(g.inverse() for g in reversed(self.gates)))

    def to_text(self) -> str:
        return "\n".join(g.to_text() for g in self.gates)

    @classmethod
    def from_text(cls, text: str, n: int) -> "Circuit":
        """
        Lê o formato texto: uma porta por linha, `KIND alvo [alvo2] [theta]`
        (portas CUSTOM seguidas das partes real/imaginária da matriz).
        Linhas vazias e comentários (#) são ignorados.
        """
        gates = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            try:
                kind = GateKind(tokens[0].upper())
            except ValueError:
                raise ValidationError(f"Linha {lineno}: tipo de porta desconhecido {tokens[0]!r}") from None
            arity = 2 if kind in (GateKind.CNOT, GateKind.CZ, GateKind.CUSTOM2) else 1
            try:
                targets = tuple(int(t) for t in tokens[1:1 + arity])
                rest = [float(v) for v in tokens[1 + arity:]]
            except ValueError as e:
                raise ValidationError(f"Linha {lineno}: {e}") from None
            if len(targets) != arity:
                raise ValidationError(f"Linha {lineno}: porta {kind.value} exige {arity} alvo(s)")
            if kind in _ROTATIONS:
                if len(rest) != 1:
                    raise ValidationError(f"Linha {lineno}: rotação exige exatamente um ângulo")
                gates.append(Gate(kind, targets, theta=rest[0]))
            elif kind in (GateKind.CUSTOM1, GateKind.CUSTOM2):
                dim = 2 ** arity
                if len(rest) != 2 * dim * dim:
                    raise ValidationError(f"Linha {lineno}: matriz {dim}x{dim} exige {2 * dim * dim} números")
                vals = np.array(rest[0::2]) + 1j * np.array(rest[1::2])
                gates.append(Gate.custom_gate(vals.reshape(dim, dim), *targets))
            else:
                if rest:
                    raise ValidationError(f"Linha {lineno}: porta {kind.value} não aceita parâmetros")
                gates.append(Gate(kind, targets))
        return cls(n, tuple(gates))


@dataclass(frozen=True)
class StateVector:
    """
    Vetor de estado normalizado: n qubits, opcionalmente tensorizados (à direita)
    com um registrador auxiliar de aux_dim níveis, como o relógio abstrato
    """
    amplitudes: np.ndarray
    n: int
    aux_dim: int = 1

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if self.aux_dim < 1 or amps.size != 2 ** self.n * self.aux_dim:
            raise DimensionMismatchError(
                f"{amps.size} amplitudes para {self.n} qubits x {self.aux_dim} níveis auxiliares")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"Estado não normalizado (norma {norm:.3e})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes: np.ndarray, n: int, aux_dim: int = 1) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0 or not np.isfinite(norm):
            raise ValidationError("Vetor nulo ou não finito não pode ser normalizado")
        return cls(amps / norm, n, aux_dim)

    @classmethod
    def propagated(cls, amplitudes: np.ndarray, n: int, aux_dim: int = 1,
                   error: type = ValidationError, what: str = "Evolução") -> "StateVector":
        """
        Saída de uma evolução unitária

        A norma bruta precisa ficar a NORM_DRIFT_TOL de 1; só o arredondamento
        residual é corrigido.

        Args:
            amplitudes: Amplitudes brutas
            n: Qubits do registrador principal
            aux_dim: Níveis do registrador auxiliar
            error: Exceção levantada quando a norma deriva
            what: Nome da operação, para a mensagem

        Returns:
            StateVector
        """
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if not np.isfinite(norm) or abs(norm - 1.0) > NORM_DRIFT_TOL:
            raise error(f"{what} não preservou a norma (norma {norm:.12f})")
        return cls(amps / norm, n, aux_dim)

    @classmethod
    def basis(cls, bits: str) -> "StateVector":
        validate_bitstring(bits)
        n = len(bits)
        amps = np.zeros(2 ** n, dtype=complex)
        amps[bitstring_to_index(bits)] = 1.0
        return cls(amps, n)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def register_matrix(self) -> np.ndarray:
        """Amplitudes como matriz (2^n, aux_dim)."""
        return self.amplitudes.reshape(2 ** self.n, self.aux_dim)

    def with_register(self, levels: int, index: int) -> "StateVector":
        """|psi> (x) |index> com um registrador auxiliar de `levels` níveis."""
        if self.aux_dim != 1:
            raise DimensionMismatchError("Estado já possui registrador auxiliar")
        if not 0 <= index < levels:
            raise ValidationError(f"Índice {index} fora de 0..{levels - 1}")
        onehot = np.zeros(levels, dtype=complex)
        onehot[index] = 1.0
        return StateVector(np.kron(self.amplitudes, onehot), self.n, levels)

    def overlap(self, other: "StateVector") -> complex:
        if other.dim != self.dim:
            raise DimensionMismatchError(f"Dimensões {self.dim} e {other.dim}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "StateVector") -> float:
        return float(abs(self.overlap(other)) ** 2)

    def tensor(self, other: "StateVector") -> "StateVector":
        if self.aux_dim != 1 or other.aux_dim != 1:
            raise DimensionMismatchError("Produto tensorial só entre registradores de qubits")
        return StateVector(np.kron(self.amplitudes, other.amplitudes), self.n + other.n)


# ============================================================
# SIMULAÇÃO
# ============================================================
def apply_matrix(amplitudes: np.ndarray, matrix: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    """
    Aplica uma matriz 2^a x 2^a aos qubits `targets` de um vetor (ou de cada
    coluna de uma matriz 2^n x m).
    """
    a = len(targets)
    extra = amplitudes.shape[1:]
    psi = amplitudes.reshape([2] * n + list(extra))
    psi = np.moveaxis(psi, list(targets), list(range(a)))
    shape = psi.shape
    psi = (matrix @ psi.reshape(2 ** a, -1)).reshape(shape)
    psi = np.moveaxis(psi, list(range(a)), list(targets))
    return psi.reshape((2 ** n,) + tuple(extra))


def run_circuit(c: Circuit, initial: Union[str, StateVector]) -> StateVector:
    """
    Simula U_k ... U_1 |entrada>

    Args:
        c: Circuito
        initial: Bitstring da base computacional ou StateVector

    Returns:
        Estado final (a norma é verificada, não imposta)
    """
    state = StateVector.basis(initial) if isinstance(initial, str) else initial
    if state.n != c.n:
        raise DimensionMismatchError(f"Entrada de {state.n} qubits para circuito de {c.n} qubits")
    # registrador auxiliar (se houver) é espectador
    psi = state.register_matrix().copy()
    for g in c.gates:
        psi = apply_matrix(psi, g.matrix, g.targets, c.n)
    return StateVector.propagated(psi, c.n, state.aux_dim, what="Circuito")


def gate_unitary(g: Gate, n: int) -> np.ndarray:
    """Matriz densa 2^n x 2^n da porta embutida no registrador."""
    return apply_matrix(np.eye(2 ** n, dtype=complex), g.matrix, g.targets, n)


def circuit_unitary(c: Circuit) -> np.ndarray:
    u = np.eye(2 ** c.n, dtype=complex)
    for g in c.gates:
        u = apply_matrix(u, g.matrix, g.targets, c.n)
    return u


def site_operator(ops: Dict[int, np.ndarray], n: int) -> sparse.csr_matrix:
    """Produto tensorial esparso com ops[q] no qubit q e identidade nos demais."""
    out = sparse.identity(1, dtype=complex, format="csr")
    eye2 = sparse.identity(2, dtype=complex, format="csr")
    for q in range(n):
        m = ops.get(q)
        out = sparse.kron(out, eye2 if m is None else sparse.csr_matrix(m), format="csr")
    return out


def embed_sparse(matrix: np.ndarray, targets: Sequence[int], n: int) -> sparse.csr_matrix:
    """
    Matriz de 1 ou 2 qubits embutida no registrador de n qubits, sem
    passar pela matriz densa 2^n x 2^n.
    """
    matrix = np.asarray(matrix, dtype=complex)
    if len(targets) == 1:
        return site_operator({targets[0]: matrix}, n)
    a, b = targets
    dim = 2 ** n
    out = sparse.csr_matrix((dim, dim), dtype=complex)
    # decomposição em unidades matriciais E_pq (x) E_rs
    for p, q, r, s in product(range(2), repeat=4):
        c = matrix[2 * p + r, 2 * q + s]
        if c == 0:
            continue
        e_pq = np.zeros((2, 2), dtype=complex)
        e_pq[p, q] = 1.0
        e_rs = np.zeros((2, 2), dtype=complex)
        e_rs[r, s] = 1.0
        out = out + c * site_operator({a: e_pq, b: e_rs}, n)
    return out


def gate_sparse(g: Gate, n: int) -> sparse.csr_matrix:
    return embed_sparse(g.matrix, g.targets, n)


def random_circuit(rng: np.random.Generator, n: int, k: int, two_qubit_prob: float = 0.3) -> Circuit:
    """
    Circuito aleatório de k portas: unitárias de 1 qubit Haar-aleatórias e CNOTs.
    """
    gates = []
    for _ in range(k):
        if n >= 2 and rng.random() < two_qubit_prob:
            a, b = rng.choice(n, size=2, replace=False)
            gates.append(Gate(GateKind.CNOT, (int(a), int(b))))
        else:
            u = unitary_group.rvs(2, random_state=rng)
            gates.append(Gate.custom_gate(u, int(rng.integers(n))))
    return Circuit(n, tuple(gates))


# ============================================================
# ESTADOS PRODUTO DE ESTABILIZADORES
# ============================================================
def prepare_stabilizer_product(labels: Sequence[int]) -> StateVector:
    """
    Produto tensorial de estados de stab1 = {|0>,|1>,|+>,|->,|y+>,|y->}

    Args:
        labels: Índice (0..5) por qubit

    Returns:
        Estado produto
    """
    amps = np.ones(1, dtype=complex)
    for pos, label in enumerate(labels):
        if not 0 <= int(label) < len(STAB1_STATES):
            raise ValidationError(f"Rótulo de estabilizador fora de 0..5 na posição {pos}: {label}")
        amps = np.kron(amps, STAB1_STATES[int(label)])
    return StateVector(amps, len(labels))


def decode_probe_labels(bits: str, n_S: int) -> Tuple[int, ...]:
    """
    Decodifica grupos de 3 bits em rótulos de stab1 (valores 6 e 7 não existem).
    """
    need = PROBE_BITS_PER_QUBIT * n_S
    if len(bits) < need:
        raise CatalogMissError(f"x_S={bits!r}: são necessários {need} bits para {n_S} qubits de sonda")
    labels = []
    for q in range(n_S):
        chunk = bits[PROBE_BITS_PER_QUBIT * q:PROBE_BITS_PER_QUBIT * (q + 1)]
        value = int(chunk, 2)
        if value >= len(STAB1_STATES):
            raise CatalogMissError(f"x_S={bits!r}: grupo {chunk!r} do qubit {q} não indexa stab1")
        labels.append(value)
    return tuple(labels)


def encode_probe_labels(labels: Sequence[int], width: int) -> str:
    """Inverso de decode_probe_labels, completando com zeros até `width` bits."""
    bits = "".join(format(int(v), f"0{PROBE_BITS_PER_QUBIT}b") for v in labels)
    if len(bits) > width:
        raise ValidationError(f"{len(labels)} rótulos não cabem em {width} bits")
    return bits + "0" * (width - len(bits))


# ============================================================
# DISPATCHER U(x)
# ============================================================
@dataclass(frozen=True)
class DispatcherSpec:
    """
    Circuito dispatcher: o primeiro bit escolhe entre sonda de estabilizador e
    o ramo de computação difícil.

    Layout da entrada: x = x1 | x_Q (n_Q bits) | payload (n - 1 - n_Q bits).
    Para x1 = 0 o payload é a descrição da sonda (catálogo explícito ou grupos
    de 3 bits); para x1 = 1 os primeiros n_S bits do payload são x_S.

    Attributes:
        n: Bits de entrada
        n_Q: Bits seletores da medição
        n_S: Qubits do registrador de payload
        bqp_branch: x_S -> circuito sobre n_S qubits aplicado a |0^n_S>
        probe_catalog: payload -> rótulos stab1 (None = decodificação 3 bits)
        observable_catalog: x_Q -> rotação V(x_Q) sobre n_S qubits
        joint_sampler: gancho opcional rng -> x para distribuições conjuntas
    """
    n: int
    n_Q: int
    n_S: int
    bqp_branch: Dict[str, Circuit]
    probe_catalog: Optional[Dict[str, Tuple[int, ...]]] = None
    observable_catalog: Dict[str, Circuit] = field(default_factory=dict)
    joint_sampler: Optional[Callable[[np.random.Generator], str]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.n_S < 1 or self.n_Q < 0:
            raise ValidationError(f"n_S={self.n_S} e n_Q={self.n_Q} inválidos")
        if self.payload_bits < self.n_S:
            raise ValidationError(
                f"n={self.n} não comporta 1 + n_Q={self.n_Q} + n_S={self.n_S} bits")
        for xs, c in self.bqp_branch.items():
            validate_bitstring(xs, self.n_S)
            if c.n != self.n_S:
                raise ValidationError(f"Ramo difícil de x_S={xs} atua em {c.n} qubits, esperado {self.n_S}")
        if len(self.bqp_branch) != 2 ** self.n_S:
            raise ValidationError(
                f"Catálogo do ramo difícil tem {len(self.bqp_branch)} entradas, esperado {2 ** self.n_S}")
        if not self.observable_catalog:
            object.__setattr__(self, "observable_catalog", rotation_catalog(self.n_Q, self.n_S))
        if len(self.observable_catalog) != 2 ** self.n_Q:
            raise ValidationError(
                f"Catálogo de observáveis tem {len(self.observable_catalog)} entradas, esperado {2 ** self.n_Q}")
        for xq, v in self.observable_catalog.items():
            validate_bitstring(xq, self.n_Q)
            if v.n != self.n_S:
                raise ValidationError(f"V(x_Q={xq}) atua em {v.n} qubits, esperado {self.n_S}")
        if self.probe_catalog is None and self.payload_bits < PROBE_BITS_PER_QUBIT * self.n_S:
            raise ValidationError(
                f"Payload de {self.payload_bits} bits não codifica {self.n_S} sondas (3 bits por qubit)")

    @property
    def payload_bits(self) -> int:
        return self.n - 1 - self.n_Q

    @property
    def total_qubits(self) -> int:
        return 1 + self.n_Q + self.n_S

    def split(self, x: str) -> Tuple[str, str, str]:
        """(x1, x_Q, payload)"""
        validate_bitstring(x, self.n)
        return x[0], x[1:1 + self.n_Q], x[1 + self.n_Q:]

    def x_s(self, x: str) -> str:
        return self.split(x)[2][:self.n_S]

    def probe_labels(self, payload: str) -> Tuple[int, ...]:
        if self.probe_catalog is not None:
            try:
                return tuple(self.probe_catalog[payload])
            except KeyError:
                raise CatalogMissError(f"Catálogo de sondas sem entrada para x_S={payload!r}") from None
        return decode_probe_labels(payload, self.n_S)

    def rotation(self, x_q: str) -> Circuit:
        try:
            return self.observable_catalog[x_q]
        except KeyError:
            raise CatalogMissError(f"Catálogo de observáveis sem entrada para x_Q={x_q!r}") from None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "n_Q": self.n_Q,
            "n_S": self.n_S,
            "bqp_branch": {k: self.bqp_branch[k].to_text() for k in sorted(self.bqp_branch)},
            "probe_catalog": None if self.probe_catalog is None else {
                k: list(v) for k, v in sorted(self.probe_catalog.items())},
            "observable_catalog": {k: self.observable_catalog[k].to_text()
                                   for k in sorted(self.observable_catalog)},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DispatcherSpec":
        try:
            n_S = int(data["n_S"])
            return cls(
                n=int(data["n"]),
                n_Q=int(data.get("n_Q", 0)),
                n_S=n_S,
                bqp_branch={k: Circuit.from_text(v, n_S) for k, v in data["bqp_branch"].items()},
                probe_catalog=None if data.get("probe_catalog") is None else {
                    k: tuple(v) for k, v in data["probe_catalog"].items()},
                observable_catalog={k: Circuit.from_text(v, n_S)
                                    for k, v in (data.get("observable_catalog") or {}).items()},
            )
        except KeyError as e:
            raise ValidationError(f"DispatcherSpec sem o campo {e}") from None


def rotation_catalog(n_Q: int, n_S: int) -> Dict[str, Circuit]:
    """
    Rotações de Clifford V(x_Q): identidade em x_Q = 0...0; os demais índices
    giram Z no qubit (q mod n_S) para X (H) ou Y (H seguido de S).
    """
    catalog = {}
    for index in range(2 ** n_Q):
        key = format(index, f"0{n_Q}b") if n_Q else ""
        gates: List[Gate] = []
        if index > 0:
            qubit = (index - 1) // 2 % n_S
            gates.append(Gate(GateKind.H, (qubit,)))
            if (index - 1) % 2 == 1:
                gates.append(Gate(GateKind.S, (qubit,)))
        catalog[key] = Circuit(n_S, tuple(gates))
    return catalog


def decider_branch(decider: Circuit) -> Dict[str, Circuit]:
    """
    Catálogo do ramo difícil: para cada x_S, prepara |x_S> com portas X e
    aplica o circuito decisor.
    """
    n_S = decider.n
    catalog = {}
    for index in range(2 ** n_S):
        xs = format(index, f"0{n_S}b")
        prep = tuple(Gate(GateKind.X, (q,)) for q, b in enumerate(xs) if b == "1")
        catalog[xs] = Circuit(n_S, prep + decider.gates)
    return catalog


def dispatcher_payload(spec: DispatcherSpec, x: str) -> StateVector:
    """Estado do registrador de payload preparado por U(x)."""
    x1, _, payload = spec.split(x)
    if x1 == "0":
        return prepare_stabilizer_product(spec.probe_labels(payload))
    xs = payload[:spec.n_S]
    try:
        branch = spec.bqp_branch[xs]
    except KeyError:
        raise CatalogMissError(f"Ramo difícil sem circuito para x_S={xs!r}") from None
    return run_circuit(branch, "0" * spec.n_S)


def dispatcher_state(spec: DispatcherSpec, x: str) -> StateVector:
    """
    U(x)(|x1> |x_Q> |0^n_S>) = |x1> |x_Q> |psi(x_S)>

    Args:
        spec: Especificação do dispatcher
        x: Bitstring de entrada com spec.n bits

    Returns:
        Estado de 1 + n_Q + n_S qubits
    """
    x1, x_q, _ = spec.split(x)
    control = StateVector.basis(x1 + x_q)
    return control.tensor(dispatcher_payload(spec, x))
