"""
Álgebra de strings de Pauli, observáveis O(alpha) = sum_i alpha_i P_i e valores esperados

A ação de uma string de Pauli sobre a base computacional é
P|b> = i^{nY} (-1)^{|b & zmask|} |b xor xmask>, com Y = iXZ; nada de matrizes densas.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import FrozenSet, List, Sequence, Tuple, Union
import logging

import numpy as np
from cachetools import cached, LRUCache
from scipy import sparse

from core.circuit import StateVector
from core.constants import Geometry, PAULI_LETTERS, STAB1_EXPECTATIONS
from core.errors import DimensionMismatchError, ValidationError

logger = logging.getLogger(__name__)

_LETTER_INDEX = {c: i for i, c in enumerate(PAULI_LETTERS)}

_DENSE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


# ============================================================
# TIPOS
# ============================================================
@dataclass(frozen=True)
class PauliString:
    """Produto tensorial de I, X, Y, Z (letra i atua no qubit i)"""
    letters: str

    def __post_init__(self):
        if not self.letters:
            raise ValidationError("Rótulo de Pauli vazio")
        for pos, c in enumerate(self.letters):
            if c not in _LETTER_INDEX:
                raise ValidationError(f"Caractere inválido {c!r} na posição {pos} do rótulo {self.letters!r}")

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def support(self) -> FrozenSet[int]:
        return frozenset(i for i, c in enumerate(self.letters) if c != "I")

    @property
    def weight(self) -> int:
        return len(self.support)

    @property
    def label(self) -> str:
        return self.letters

    def masks(self) -> Tuple[int, int, int]:
        """(xmask, zmask, nY) com qubit 0 no bit mais significativo."""
        xmask = zmask = 0
        n_y = 0
        for q, c in enumerate(self.letters):
            bit = 1 << (self.n - 1 - q)
            if c in "XY":
                xmask |= bit
            if c in "ZY":
                zmask |= bit
            if c == "Y":
                n_y += 1
        return xmask, zmask, n_y

    def letter_indices(self) -> np.ndarray:
        return np.array([_LETTER_INDEX[c] for c in self.letters], dtype=int)

    def to_dense(self) -> np.ndarray:
        m = np.ones((1, 1), dtype=complex)
        for c in self.letters:
            m = np.kron(m, _DENSE[c])
        return m

    def __str__(self) -> str:
        return self.letters


@dataclass(frozen=True)
class PauliObservable:
    """
    Combinação real O(alpha) = sum_i alpha_i P_i sobre uma base fixa de m strings

    Attributes:
        basis: Strings de Pauli (todas com n qubits)
        alpha: Coeficientes em [-1, 1]
        max_terms: Orçamento polinomial de termos declarado na construção
    """
    basis: Tuple[PauliString, ...]
    alpha: Tuple[float, ...]
    max_terms: int = None

    def __post_init__(self):
        basis = tuple(self.basis)
        alpha = tuple(float(a) for a in self.alpha)
        if not basis:
            raise ValidationError("Observável sem termos")
        if len(basis) != len(alpha):
            raise DimensionMismatchError(f"{len(basis)} strings e {len(alpha)} coeficientes")
        n = basis[0].n
        if any(p.n != n for p in basis):
            raise DimensionMismatchError("Strings de Pauli com números de qubits diferentes")
        budget = self.max_terms if self.max_terms is not None else len(basis)
        if len(basis) > budget:
            raise ValidationError(f"{len(basis)} termos excedem o orçamento declarado de {budget}")
        for i, a in enumerate(alpha):
            if not np.isfinite(a) or abs(a) > 1.0 + 1e-12:
                raise ValidationError(f"Coeficiente {i} fora de [-1, 1]: {a}")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "max_terms", budget)

    @classmethod
    def from_terms(cls, terms: Sequence[Tuple[float, Union[str, PauliString]]]) -> "PauliObservable":
        basis = tuple(p if isinstance(p, PauliString) else pauli_from_label(p) for _, p in terms)
        return cls(basis, tuple(c for c, _ in terms))

    @property
    def n(self) -> int:
        return self.basis[0].n

    @property
    def m(self) -> int:
        return len(self.basis)

    @property
    def terms(self) -> List[Tuple[float, PauliString]]:
        return list(zip(self.alpha, self.basis))

    @property
    def l1_norm(self) -> float:
        return float(np.sum(np.abs(self.alpha)))

    def labels(self) -> List[str]:
        return [p.label for p in self.basis]

    def to_dense(self) -> np.ndarray:
        dim = 2 ** self.n
        m = np.zeros((dim, dim), dtype=complex)
        for a, p in self.terms:
            m += a * p.to_dense()
        return m

    def to_dict(self) -> dict:
        return {"basis": self.labels(), "alpha": list(self.alpha)}


# ============================================================
# OPERAÇÕES
# ============================================================
def pauli_from_label(label: str) -> PauliString:
    """
    Converte rótulo (ex.: "IZI") em PauliString

    Args:
        label: String sobre {I, X, Y, Z}

    Returns:
        PauliString com peso e suporte calculados
    """
    if not isinstance(label, str):
        raise ValidationError(f"Rótulo de Pauli deve ser texto, recebido {type(label).__name__}")
    return PauliString(label)


@cached(cache=LRUCache(maxsize=256))
def _enumerate_labels(n: int, k: int, geometry: Geometry) -> Tuple[str, ...]:
    labels = ["I" * n]
    seen = set(labels)
    if geometry is Geometry.LINE:
        # janelas contíguas; uma string suportada em duas janelas entra só na primeira
        for start in range(n - k + 1):
            for word in product(PAULI_LETTERS, repeat=k):
                if all(c == "I" for c in word):
                    continue
                label = "I" * start + "".join(word) + "I" * (n - k - start)
                if label not in seen:
                    seen.add(label)
                    labels.append(label)
    else:
        for size in range(1, k + 1):
            for subset in combinations(range(n), size):
                for word in product("XYZ", repeat=size):
                    chars = ["I"] * n
                    for q, c in zip(subset, word):
                        chars[q] = c
                    labels.append("".join(chars))
    return tuple(labels)


def enumerate_local_paulis(n: int, k: int, geometry: Union[Geometry, str] = Geometry.LINE) -> List[PauliString]:
    """
    Base ordenada de strings k-locais, identidade no índice 0

    Args:
        n: Número de qubits
        k: Localidade
        geometry: "line-contiguous" (janelas contíguas, ordem por (início, palavra))
            ou "all-subsets" (qualquer suporte de tamanho <= k)

    Returns:
        Lista determinística e sem duplicatas
    """
    geometry = Geometry(geometry) if isinstance(geometry, str) else geometry
    if n < 1 or k < 1:
        raise ValidationError(f"n={n} e k={k} devem ser >= 1")
    if k > n:
        raise ValidationError(f"Localidade k={k} maior que o número de qubits n={n}")
    return [PauliString(lbl) for lbl in _enumerate_labels(n, k, geometry)]


def line_basis_size(n: int, k: int) -> int:
    """Número de strings distintas da geometria contígua (com identidade)."""
    return 1 + (n - k + 1) * (4 ** k - 1) - (n - k) * (4 ** (k - 1) - 1)


def apply_pauli(amplitudes: np.ndarray, p: PauliString) -> np.ndarray:
    """
    P aplicado ao primeiro eixo de um array (2^n,) ou (2^n, m), sem alterar a entrada.
    """
    dim = 2 ** p.n
    if amplitudes.shape[0] != dim:
        raise DimensionMismatchError(f"Array com {amplitudes.shape[0]} linhas para string de {p.n} qubits")
    xmask, zmask, n_y = p.masks()
    idx = np.arange(dim)
    parity = np.zeros(dim, dtype=np.int64)
    z = zmask
    while z:
        low = z & -z
        parity ^= (idx & low) != 0
        z ^= low
    phase = (1j ** n_y) * (1 - 2 * parity)
    out = np.empty_like(amplitudes, dtype=complex)
    if amplitudes.ndim == 1:
        out[idx ^ xmask] = phase * amplitudes
    else:
        out[idx ^ xmask] = phase[:, None] * amplitudes
    return out


def register_expectation(amplitudes: np.ndarray, p: PauliString) -> float:
    """
    <psi| P (x) I_env |psi> para um estado remodelado como (2^n, dim_env),
    com o registrador medido como fator da esquerda.
    """
    psi = amplitudes.reshape(2 ** p.n, -1)
    return float(np.vdot(psi, apply_pauli(psi, p)).real)


def pauli_expectation(state: StateVector, p: PauliString) -> float:
    """
    <psi|P|psi> exato

    Args:
        state: Estado normalizado
        p: String de Pauli com o mesmo número de qubits

    Returns:
        Valor em [-1, 1]
    """
    if state.n != p.n:
        raise DimensionMismatchError(f"Estado de {state.n} qubits e string de {p.n} qubits")
    value = register_expectation(state.amplitudes, p)
    return max(-1.0, min(1.0, value))


def observable_expectation(state: StateVector, obs: PauliObservable) -> float:
    """f = sum_i alpha_i <psi|P_i|psi>"""
    if state.n != obs.n:
        raise DimensionMismatchError(f"Estado de {state.n} qubits e observável de {obs.n} qubits")
    return float(sum(a * pauli_expectation(state, p) for a, p in obs.terms if a != 0.0))


def expectation_vector(amplitudes: np.ndarray, basis: Sequence[PauliString]) -> np.ndarray:
    """Vetor phi = (<P_1>, ..., <P_m>) no registrador da esquerda."""
    return np.array([np.clip(register_expectation(amplitudes, p), -1.0, 1.0) for p in basis])


def stabilizer_expectations(labels: np.ndarray, basis: Sequence[PauliString]) -> np.ndarray:
    """
    <psi_l|Q|psi_l> para estados produto de stab1, sem simular o vetor de estado

    Args:
        labels: Matriz (N, n) de rótulos 0..5
        basis: m strings de Pauli

    Returns:
        Matriz (N, m) com entradas em {-1, 0, 1}
    """
    labels = np.asarray(labels, dtype=int)
    letters = np.stack([p.letter_indices() for p in basis])  # (m, n)
    if labels.shape[1] != letters.shape[1]:
        raise DimensionMismatchError(f"Sondas de {labels.shape[1]} qubits e base de {letters.shape[1]} qubits")
    out = np.ones((labels.shape[0], letters.shape[0]))
    for q in range(labels.shape[1]):
        out *= STAB1_EXPECTATIONS[labels[:, q][:, None], letters[:, q][None, :]]
    return out


def pauli_to_sparse(p: PauliString) -> sparse.csr_matrix:
    """P como matriz esparsa 2^n x 2^n (um elemento não nulo por coluna)."""
    dim = 2 ** p.n
    xmask, zmask, n_y = p.masks()
    cols = np.arange(dim)
    parity = np.array([bin(c & zmask).count("1") & 1 for c in cols], dtype=np.int64)
    data = (1j ** n_y) * (1 - 2 * parity)
    return sparse.csr_matrix((data, (cols ^ xmask, cols)), shape=(dim, dim))


def observable_to_sparse(obs: PauliObservable) -> sparse.csr_matrix:
    """sum_i alpha_i P_i em formato esparso."""
    dim = 2 ** obs.n
    out = sparse.csr_matrix((dim, dim), dtype=complex)
    for a, p in obs.terms:
        if a != 0.0:
            out = out + a * pauli_to_sparse(p)
    return out
