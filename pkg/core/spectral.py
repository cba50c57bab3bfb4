"""
Operadores hermitianos esparsos, evolução temporal e solvers de estado fundamental

Compartilhado por clockham, kitaev e concepts. A evolução usa decomposição
espectral densa até `dense_dim_cap` e, acima disso, propagação de Krylov
(Lanczos com reortogonalização completa) com passo adaptativo.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy import sparse
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import eigsh, ArpackNoConvergence

from core.circuit import StateVector
from core.config_store import get_config
from core.constants import DEGENERACY_TOL, HERMITIAN_TOL
from core.errors import (
    ConvergenceError, DegenerateGroundStateError, DimensionMismatchError,
    ResourceLimitError, ValidationError,
)

logger = logging.getLogger(__name__)


# ============================================================
# OPERADOR
# ============================================================
class SparseHermitian:
    """
    Operador hermitiano em formato CSR

    O layout (n qubits, aux_dim níveis auxiliares) diz como os estados
    evoluídos devem ser interpretados: dim = 2^n * aux_dim. Sem layout,
    o operador é tratado como um registrador único de `dim` níveis.

    Attributes:
        matrix: Matriz CSR (somente leitura após a construção)
        n: Qubits do registrador principal
        aux_dim: Níveis do registrador auxiliar (relógio abstrato)
    """

    def __init__(self, matrix, n: Optional[int] = None, aux_dim: int = 1, check: bool = True):
        m = sparse.csr_matrix(matrix, dtype=complex)
        if m.shape[0] != m.shape[1]:
            raise DimensionMismatchError(f"Operador não quadrado: {m.shape}")
        if m.shape[0] < 1:
            raise ValidationError("Operador de dimensão 0")

        cap = get_config()["sparse_dim_cap"]
        if m.shape[0] > cap:
            raise ResourceLimitError(f"Dimensão {m.shape[0]} excede o limite esparso {cap}")

        if n is None:
            n, aux_dim = 0, m.shape[0]
        if 2 ** n * aux_dim != m.shape[0]:
            raise DimensionMismatchError(
                f"Layout {n} qubits x {aux_dim} níveis incompatível com dimensão {m.shape[0]}")

        m.sum_duplicates()
        m.eliminate_zeros()
        if check:
            diff = m - m.conj().T
            err = float(np.max(np.abs(diff.data))) if diff.nnz else 0.0
            if err > HERMITIAN_TOL:
                raise ValidationError(f"Operador não hermitiano (desvio {err:.3e})")

        self.matrix = m
        self.n = n
        self.aux_dim = aux_dim

    # ------------------------------------------------------------
    # Construtores
    # ------------------------------------------------------------
    @classmethod
    def from_dense(cls, array: np.ndarray, n: Optional[int] = None, aux_dim: int = 1) -> "SparseHermitian":
        return cls(sparse.csr_matrix(np.asarray(array, dtype=complex)), n, aux_dim)

    @classmethod
    def from_entries(cls, dim: int, entries: Iterable[Tuple[int, int, complex]],
                     n: Optional[int] = None, aux_dim: int = 1) -> "SparseHermitian":
        """Triplas (linha, coluna, valor); entradas repetidas são somadas."""
        rows, cols, vals = [], [], []
        for r, c, v in entries:
            if not (0 <= r < dim and 0 <= c < dim):
                raise ValidationError(f"Entrada ({r}, {c}) fora da dimensão {dim}")
            rows.append(r)
            cols.append(c)
            vals.append(complex(v))
        m = sparse.coo_matrix((vals, (rows, cols)), shape=(dim, dim), dtype=complex)
        return cls(m, n, aux_dim)

    # ------------------------------------------------------------
    # Propriedades
    # ------------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    @cached_property
    def norm_bound(self) -> float:
        """Limite de Gershgorin para ||H||."""
        if self.nnz == 0:
            return 0.0
        return float(np.max(np.asarray(abs(self.matrix).sum(axis=1)).ravel()))

    @cached_property
    def _dense_spectrum(self) -> Tuple[np.ndarray, np.ndarray]:
        evals, evecs = np.linalg.eigh(self.to_dense())
        evals.setflags(write=False)
        evecs.setflags(write=False)
        return evals, evecs

    def to_dense(self) -> np.ndarray:
        cap = get_config()["dense_dim_cap"]
        if self.dim > cap:
            raise ResourceLimitError(f"Dimensão {self.dim} excede o limite denso {cap}")
        return self.matrix.toarray()

    def use_dense(self) -> bool:
        return self.dim <= get_config()["dense_dim_cap"]

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(amplitudes, dtype=complex)

    def expectation(self, state: StateVector) -> float:
        self._check_state(state)
        psi = state.amplitudes
        return float(np.vdot(psi, self.matrix @ psi).real)

    def residual(self, state: StateVector, energy: Optional[float] = None) -> float:
        """||H psi - E psi|| (E = <H> quando omitido)."""
        self._check_state(state)
        if energy is None:
            energy = self.expectation(state)
        psi = state.amplitudes
        return float(np.linalg.norm(self.matrix @ psi - energy * psi))

    def restricted(self, basis: np.ndarray) -> np.ndarray:
        """B^dagger H B para uma base em colunas."""
        b = np.asarray(basis, dtype=complex)
        return b.conj().T @ (self.matrix @ b)

    def scaled(self, factor: float) -> "SparseHermitian":
        return SparseHermitian(self.matrix * float(factor), self.n, self.aux_dim, check=False)

    def __add__(self, other: "SparseHermitian") -> "SparseHermitian":
        if other.dim != self.dim:
            raise DimensionMismatchError(f"Soma de operadores {self.dim} e {other.dim}")
        return SparseHermitian(self.matrix + other.matrix, self.n, self.aux_dim, check=False)

    def _check_state(self, state: StateVector) -> None:
        if state.dim != self.dim:
            raise DimensionMismatchError(f"Estado de dimensão {state.dim} para operador de dimensão {self.dim}")

    def __repr__(self) -> str:
        return f"SparseHermitian(dim={self.dim}, nnz={self.nnz}, n={self.n}, aux_dim={self.aux_dim})"


# ============================================================
# EVOLUÇÃO
# ============================================================
def _lanczos_basis(matrix: sparse.csr_matrix, v0: np.ndarray, k_dim: int, tol: float):
    """
    Base de Krylov ortonormal (colunas) e tridiagonal (alpha, beta).
    beta_last é o resíduo do último vetor; zero indica subespaço invariante.
    """
    dim = v0.size
    k_dim = min(k_dim, dim)
    q = np.zeros((dim, k_dim), dtype=complex)
    alpha = np.zeros(k_dim)
    beta = np.zeros(k_dim)
    q[:, 0] = v0 / np.linalg.norm(v0)
    size = k_dim
    for j in range(k_dim):
        w = matrix @ q[:, j]
        alpha[j] = float(np.vdot(q[:, j], w).real)
        # reortogonalização completa, duas passagens
        for _ in range(2):
            w -= q[:, :j + 1] @ (q[:, :j + 1].conj().T @ w)
        beta[j] = float(np.linalg.norm(w))
        if beta[j] < tol or j == k_dim - 1:
            size = j + 1
            break
        q[:, j + 1] = w / beta[j]
    return q[:, :size], alpha[:size], beta[:size - 1], beta[size - 1]


def _krylov_step(matrix, v: np.ndarray, dt: float, k_dim: int, tol: float) -> Tuple[np.ndarray, float]:
    """Um passo e^{i H dt} v no subespaço de Krylov; devolve (vetor, erro estimado)."""
    norm = np.linalg.norm(v)
    q, alpha, beta, beta_last = _lanczos_basis(matrix, v, k_dim, tol)
    if alpha.size == 1:
        evals, evecs = alpha.copy(), np.ones((1, 1))
    else:
        evals, evecs = eigh_tridiagonal(alpha, beta)
    coeff = evecs @ (np.exp(1j * dt * evals) * evecs[0, :])
    error = 0.0 if beta_last < tol else float(beta_last * abs(coeff[-1]) * norm)
    return norm * (q @ coeff), error


def _evolve_krylov(h: SparseHermitian, psi: np.ndarray, t: float) -> np.ndarray:
    config = get_config()
    tol = config["lanczos_tol"]
    k_dim = config["krylov_dim"]
    max_restarts = config["max_restarts"]

    remaining = abs(t)
    sign = 1.0 if t >= 0 else -1.0
    dt = min(remaining, 1.0 / max(h.norm_bound, 1e-12) * k_dim / 4)
    restarts = 0
    v = psi.copy()
    while remaining > 0:
        step = min(dt, remaining)
        out, err = _krylov_step(h.matrix, v, sign * step, k_dim, tol)
        if err > tol:
            restarts += 1
            if restarts > max_restarts:
                raise ConvergenceError(
                    f"Krylov não convergiu após {max_restarts} reduções de passo (erro {err:.3e})")
            dt = step / 2
            continue
        v = out
        remaining -= step
        restarts = 0
        dt = step * 1.5
    return v


def evolve(h: SparseHermitian, state: StateVector, t: float) -> StateVector:
    """
    e^{iHt} |psi>

    Args:
        h: Operador hermitiano
        state: Estado com a mesma dimensão do operador
        t: Tempo (finito, qualquer sinal)

    Returns:
        Estado evoluído, com o layout do estado de entrada
    """
    h._check_state(state)
    if not math.isfinite(t):
        raise ValidationError(f"Tempo de evolução não finito: {t}")
    if t == 0:
        return state

    psi = state.amplitudes
    if h.use_dense():
        evals, evecs = h._dense_spectrum
        out = evecs @ (np.exp(1j * t * evals) * (evecs.conj().T @ psi))
    else:
        logger.debug("Evolução por Krylov em dimensão %d", h.dim)
        out = _evolve_krylov(h, psi, t)
    return StateVector.propagated(out, state.n, state.aux_dim, ConvergenceError, "e^{iHt}")


def evolve_many(h: SparseHermitian, states: Sequence[StateVector], t: float,
                threads: Optional[int] = None) -> List[StateVector]:
    """Evoluções independentes em paralelo sobre o mesmo operador (somente leitura)."""
    if not states:
        return []
    threads = threads or get_config()["threads"]
    if h.use_dense():
        # espectro calculado uma vez antes de distribuir
        _ = h._dense_spectrum
    if threads <= 1 or len(states) == 1:
        return [evolve(h, s, t) for s in states]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda s: evolve(h, s, t), states))


# ============================================================
# ESTADO FUNDAMENTAL
# ============================================================
@dataclass(frozen=True)
class GroundStateResult:
    """
    Menor autopar e diagnóstico

    Attributes:
        energy: Menor autovalor
        state: Autovetor (fase fixada: maior componente real positiva)
        gap: Segundo menor menos o menor autovalor (None se dim = 1)
        residual: ||H psi - E psi||
        degenerate: gap < DEGENERACY_TOL
    """
    energy: float
    state: StateVector
    gap: Optional[float]
    residual: float
    degenerate: bool


def _lowest_two(h: SparseHermitian) -> Tuple[np.ndarray, np.ndarray]:
    if h.use_dense():
        evals, evecs = h._dense_spectrum
        return evals[:2], evecs[:, :2]
    tol = get_config()["lanczos_tol"]
    try:
        evals, evecs = eigsh(h.matrix, k=2, which="SA", tol=tol)
    except ArpackNoConvergence as e:
        raise ConvergenceError(f"Lanczos (ARPACK) não convergiu: {e}") from None
    order = np.argsort(evals)
    return evals[order], evecs[:, order]


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    pivot = int(np.argmax(np.abs(vec) > np.abs(vec).max() - 1e-12))
    return vec * (abs(vec[pivot]) / vec[pivot])


def ground_state(h: SparseHermitian, require_unique: bool = False) -> GroundStateResult:
    """
    Menor autopar de H

    Degenerescência é sinalizada, nunca resolvida: o solver denso devolve o
    autovetor de menor índice. Com require_unique=True, levanta
    DegenerateGroundStateError.

    Returns:
        GroundStateResult
    """
    evals, evecs = _lowest_two(h)
    energy = float(evals[0])
    vec = _fix_phase(np.asarray(evecs[:, 0], dtype=complex))
    state = StateVector.normalized(vec, h.n, h.aux_dim)
    gap = float(evals[1] - evals[0]) if evals.size > 1 else None
    degenerate = gap is not None and gap < DEGENERACY_TOL
    if degenerate:
        logger.warning("Estado fundamental degenerado (gap %.3e)", gap)
        if require_unique:
            raise DegenerateGroundStateError(f"Gap {gap:.3e} abaixo de {DEGENERACY_TOL}")
    return GroundStateResult(
        energy=energy,
        state=state,
        gap=gap,
        residual=h.residual(state, energy),
        degenerate=degenerate,
    )


def spectral_gap(h: SparseHermitian) -> float:
    """Segundo menor autovalor menos o menor (>= 0)."""
    if h.dim < 2:
        raise ValidationError("Gap espectral exige dimensão >= 2")
    evals, _ = _lowest_two(h)
    return max(0.0, float(evals[1] - evals[0]))


# ============================================================
# FORMATO TEXTO
# ============================================================
def dump_operator(h: SparseHermitian) -> str:
    """Cabeçalho `dim N` seguido de uma linha `linha coluna re im` por entrada não nula."""
    coo = h.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    lines = [f"dim {h.dim}"]
    for i in order:
        v = coo.data[i]
        lines.append(f"{coo.row[i]} {coo.col[i]} {float(v.real)!r} {float(v.imag)!r}")
    return "\n".join(lines) + "\n"


def load_operator(text: str, n: Optional[int] = None, aux_dim: int = 1) -> SparseHermitian:
    """Inverso de dump_operator."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or not lines[0].startswith("dim "):
        raise ValidationError("Arquivo de operador sem cabeçalho `dim N`")
    try:
        dim = int(lines[0].split()[1])
    except (IndexError, ValueError):
        raise ValidationError(f"Cabeçalho inválido: {lines[0]!r}") from None

    entries = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 4:
            raise ValidationError(f"Linha {lineno}: esperado `linha coluna re im`, recebido {line!r}")
        try:
            r, c = int(parts[0]), int(parts[1])
            v = complex(float(parts[2]), float(parts[3]))
        except ValueError:
            raise ValidationError(f"Linha {lineno}: valor numérico inválido") from None
        entries.append((r, c, v))
    return SparseHermitian.from_entries(dim, entries, n, aux_dim)
