"""
Classes de conceito, distribuições de entrada e geração de datasets

Cada conceito mapeia uma entrada (bitstring, ou vetor alpha no caso
invertido) para f(x) = Tr[rho(x) O]. Estados simulados por entrada ficam em
cache LRU protegido por lock, para que a geração paralela reaproveite as
evoluções.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union
import hashlib
import json
import logging
import math
import threading

import numpy as np
import pandas as pd
from cachetools import LRUCache, cachedmethod
from scipy import sparse

from core.circuit import (
    Circuit, DispatcherSpec, Gate, StateVector, dispatcher_payload, encode_probe_labels, run_circuit,
)
from core.clockham import build_childs_weighted
from core.config_store import get_config
from core.constants import (
    ConceptVariant, DistributionKind, GateKind, Geometry, L1_TOL, NoiseKind, SCHEMA_VERSION, STAB1_STATES,
)
from core.errors import DimensionMismatchError, ValidationError
from core.kitaev import build_kitaev
from core.pauli import (
    PauliObservable, PauliString, enumerate_local_paulis, expectation_vector, pauli_expectation, pauli_to_sparse,
)
from core.spectral import SparseHermitian, evolve, ground_state
from utils.bit_utils import all_bitstrings, random_bitstring, validate_bitstring

logger = logging.getLogger(__name__)

Input = Union[str, Tuple[float, ...]]


def _cache_field():
    return field(default_factory=lambda: LRUCache(maxsize=4096), init=False, compare=False, repr=False)


def _lock_field():
    return field(default_factory=threading.RLock, init=False, compare=False, repr=False)


def _fingerprint(data: dict) -> str:
    payload = json.dumps(data, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()[:16]


def _check_budget(obs: PauliObservable, l1_budget: Optional[float]) -> None:
    if l1_budget is not None and obs.l1_norm > l1_budget + L1_TOL:
        raise ValidationError(f"||alpha||_1 = {obs.l1_norm:.6g} excede o orçamento B = {l1_budget}")


# ============================================================
# FAMÍLIAS DE HAMILTONIANOS (conceitos de estado fundamental)
# ============================================================
@dataclass(frozen=True)
class KitaevFamily:
    """x -> H(x) de Kitaev para um circuito fixo"""
    circuit: Circuit

    def __call__(self, x: str) -> SparseHermitian:
        return build_kitaev(self.circuit, x).operator

    def to_dict(self) -> dict:
        return {"family": "kitaev", "n": self.circuit.n, "circuit": self.circuit.to_text()}


@dataclass(frozen=True)
class IsingFamily:
    """
    x -> J sum_i Z_i Z_{i+1} + h sum_i (-1)^{x_i} X_i em cadeia aberta
    """
    n: int
    J: float = 1.0
    h: float = 1.0

    def __call__(self, x: str) -> SparseHermitian:
        validate_bitstring(x, self.n)
        dim = 2 ** self.n
        m = sparse.csr_matrix((dim, dim), dtype=complex)
        for i in range(self.n - 1):
            m = m + self.J * pauli_to_sparse(PauliString("I" * i + "ZZ" + "I" * (self.n - i - 2)))
        for i, b in enumerate(x):
            sign = -1.0 if b == "1" else 1.0
            m = m + sign * self.h * pauli_to_sparse(PauliString("I" * i + "X" + "I" * (self.n - i - 1)))
        return SparseHermitian(m, self.n)

    def to_dict(self) -> dict:
        return {"family": "ising", "n": self.n, "J": self.J, "h": self.h}


# ============================================================
# CONCEITOS
# ============================================================
@dataclass(frozen=True)
class EvolvedConcept:
    """
    f(x) = <x| e^{-iH tau} O(alpha) e^{iH tau} |x>

    Se o operador tem registrador auxiliar (relógio), a entrada é |x>|clock_start>
    e O(alpha) é medido só no registrador de trabalho.
    """
    hamiltonian: SparseHermitian
    tau: float
    observable: PauliObservable
    clock_start: int = 0
    l1_budget: Optional[float] = None
    label: str = "evolved"
    _cache: LRUCache = _cache_field()
    _lock: threading.RLock = _lock_field()

    variant = ConceptVariant.EVOLVED

    def __post_init__(self):
        if self.observable.n != self.hamiltonian.n:
            raise DimensionMismatchError(
                f"Observável de {self.observable.n} qubits para registrador de {self.hamiltonian.n}")
        if not math.isfinite(self.tau):
            raise ValidationError(f"tau não finito: {self.tau}")
        _check_budget(self.observable, self.l1_budget)

    @property
    def n(self) -> int:
        return self.hamiltonian.n

    @property
    def basis(self) -> Tuple[PauliString, ...]:
        return self.observable.basis

    @cachedmethod(lambda self: self._cache, lock=lambda self: self._lock)
    def state(self, x: str) -> StateVector:
        validate_bitstring(x, self.n)
        psi = StateVector.basis(x)
        if self.hamiltonian.aux_dim > 1:
            psi = psi.with_register(self.hamiltonian.aux_dim, self.clock_start)
        return evolve(self.hamiltonian, psi, self.tau)

    def term_expectations(self, x: str) -> np.ndarray:
        return expectation_vector(self.state(x).amplitudes, self.basis)

    def evaluate(self, x: str) -> float:
        return float(np.dot(self.observable.alpha, self.term_expectations(x)))

    def with_alpha(self, alpha: Sequence[float]) -> "EvolvedConcept":
        obs = PauliObservable(self.basis, tuple(alpha), self.observable.max_terms)
        return EvolvedConcept(self.hamiltonian, self.tau, obs, self.clock_start, self.l1_budget, self.label)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant.value,
            "label": self.label,
            "n": self.n,
            "tau": self.tau,
            "clock_start": self.clock_start,
            "hamiltonian": {"dim": self.hamiltonian.dim, "nnz": self.hamiltonian.nnz,
                            "aux_dim": self.hamiltonian.aux_dim},
            "observable": self.observable.to_dict(),
        }


@dataclass(frozen=True)
class GroundStateConcept:
    """f(x) = <g(x)| O(alpha) |g(x)>, g(x) estado fundamental (não degenerado) de H(x)"""
    family: Callable[[str], SparseHermitian]
    observable: PauliObservable
    n: int
    l1_budget: Optional[float] = None
    _cache: LRUCache = _cache_field()
    _lock: threading.RLock = _lock_field()

    variant = ConceptVariant.GROUND_STATE

    def __post_init__(self):
        _check_budget(self.observable, self.l1_budget)

    @property
    def basis(self) -> Tuple[PauliString, ...]:
        return self.observable.basis

    @cachedmethod(lambda self: self._cache, lock=lambda self: self._lock)
    def state(self, x: str) -> StateVector:
        validate_bitstring(x, self.n)
        h = self.family(x)
        if h.n != self.observable.n:
            raise DimensionMismatchError(f"H(x) com {h.n} qubits de trabalho e observável de {self.observable.n}")
        return ground_state(h, require_unique=True).state

    def term_expectations(self, x: str) -> np.ndarray:
        return expectation_vector(self.state(x).amplitudes, self.basis)

    def evaluate(self, x: str) -> float:
        return float(np.dot(self.observable.alpha, self.term_expectations(x)))

    def with_alpha(self, alpha: Sequence[float]) -> "GroundStateConcept":
        obs = PauliObservable(self.basis, tuple(alpha), self.observable.max_terms)
        return GroundStateConcept(self.family, obs, self.n, self.l1_budget)

    def to_dict(self) -> dict:
        family = self.family.to_dict() if hasattr(self.family, "to_dict") else {"family": repr(self.family)}
        return {"variant": self.variant.value, "n": self.n, "family": family,
                "observable": self.observable.to_dict()}


@dataclass(frozen=True)
class UnitaryParamConcept:
    """
    f(x) = <psi(x)| W(alpha) V(x_Q) O V(x_Q)^dagger W(alpha)^dagger |psi(x)>  (x1 = 0)
    f(x) = <psi(x)| W(alpha) O W(alpha)^dagger |psi(x)>                      (x1 = 1)

    psi(x) é o estado do registrador de payload preparado pelo dispatcher.
    """
    dispatcher: DispatcherSpec
    alpha: Tuple[float, ...]
    base_obs: PauliString
    _cache: LRUCache = _cache_field()
    _lock: threading.RLock = _lock_field()

    variant = ConceptVariant.UNITARY_PARAM

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        if self.base_obs.n != self.dispatcher.n_S:
            raise DimensionMismatchError(
                f"Observável base de {self.base_obs.n} qubits para payload de {self.dispatcher.n_S}")
        shallow_unitary(self.alpha, self.dispatcher.n_S)

    @property
    def n(self) -> int:
        return self.dispatcher.n

    @property
    def unitary(self) -> Circuit:
        return shallow_unitary(self.alpha, self.dispatcher.n_S)

    @cachedmethod(lambda self: self._cache, lock=lambda self: self._lock)
    def state(self, x: str) -> StateVector:
        """V(x_Q)^dagger W^dagger |psi(x)> (ou só W^dagger no ramo x1 = 1)."""
        x1, x_q, _ = self.dispatcher.split(x)
        undo = self.unitary.inverse()
        if x1 == "0":
            undo = undo.then(self.dispatcher.rotation(x_q).inverse())
        return run_circuit(undo, dispatcher_payload(self.dispatcher, x))

    def evaluate(self, x: str) -> float:
        return pauli_expectation(self.state(x), self.base_obs)

    def to_dict(self) -> dict:
        return {"variant": self.variant.value, "n": self.n, "dispatcher": self.dispatcher.to_dict(),
                "alpha": list(self.alpha), "base_obs": self.base_obs.label}


@dataclass(frozen=True)
class FlippedConcept:
    """Conceito invertido: entrada alpha, f^x(alpha) = sum_i alpha_i <P_i> no estado fixo"""
    x_fixed: str
    hamiltonian: SparseHermitian
    tau: float
    basis: Tuple[PauliString, ...]
    clock_start: int = 0

    variant = ConceptVariant.FLIPPED

    def __post_init__(self):
        object.__setattr__(self, "basis", tuple(self.basis))
        if not self.basis:
            raise ValidationError("Base vazia no conceito invertido")
        if any(p.n != self.hamiltonian.n for p in self.basis):
            raise DimensionMismatchError("Base e operador com números de qubits diferentes")
        validate_bitstring(self.x_fixed, self.hamiltonian.n)

    @property
    def n(self) -> int:
        return len(self.basis)

    def expectations(self) -> np.ndarray:
        """<P_i> no estado fixo (calculado uma vez)."""
        cached = self.__dict__.get("_expectations")
        if cached is None:
            psi = StateVector.basis(self.x_fixed)
            if self.hamiltonian.aux_dim > 1:
                psi = psi.with_register(self.hamiltonian.aux_dim, self.clock_start)
            cached = expectation_vector(evolve(self.hamiltonian, psi, self.tau).amplitudes, self.basis)
            cached.setflags(write=False)
            object.__setattr__(self, "_expectations", cached)
        return cached

    def term_expectations(self, alpha: Sequence[float]) -> np.ndarray:
        return self.expectations()

    def evaluate(self, alpha: Sequence[float]) -> float:
        a = np.asarray(alpha, dtype=float)
        if a.shape != (self.n,):
            raise DimensionMismatchError(f"alpha com {a.size} entradas para base de {self.n} strings")
        return float(a @ self.expectations())

    def to_dict(self) -> dict:
        return {"variant": self.variant.value, "x_fixed": self.x_fixed, "tau": self.tau,
                "basis": [p.label for p in self.basis], "hamiltonian_dim": self.hamiltonian.dim}


ConceptSpec = Union[EvolvedConcept, GroundStateConcept, UnitaryParamConcept, FlippedConcept]


def concept_fingerprint(spec: ConceptSpec) -> str:
    return _fingerprint(spec.to_dict())


# ============================================================
# CONSTRUTORES
# ============================================================
def make_evolved(h: SparseHermitian, tau: float, k: int, alpha: Sequence[float],
                 geometry: Geometry = Geometry.LINE, l1_budget: Optional[float] = None,
                 clock_start: int = 0) -> EvolvedConcept:
    """Conceito evoluído sobre a base k-local enumerada de h.n qubits."""
    basis = tuple(enumerate_local_paulis(h.n, k, geometry))
    if len(alpha) != len(basis):
        raise DimensionMismatchError(f"{len(alpha)} coeficientes para base de {len(basis)} strings")
    return EvolvedConcept(h, tau, PauliObservable(basis, tuple(alpha)), clock_start, l1_budget)


def make_ground_state(family: Callable[[str], SparseHermitian], n: int, work_n: int, k: int,
                      alpha: Sequence[float], geometry: Geometry = Geometry.LINE,
                      l1_budget: Optional[float] = None) -> GroundStateConcept:
    basis = tuple(enumerate_local_paulis(work_n, k, geometry))
    if len(alpha) != len(basis):
        raise DimensionMismatchError(f"{len(alpha)} coeficientes para base de {len(basis)} strings")
    return GroundStateConcept(family, PauliObservable(basis, tuple(alpha)), n, l1_budget)


def hard_instance(decider: Circuit, k: int = 2, geometry: Geometry = Geometry.LINE) -> EvolvedConcept:
    """
    Conceito difícil: H_hard = J_x do relógio ponderado do decisor, tau = pi,
    alpha = indicadora de Z no qubit de trabalho 0.

    Args:
        decider: Circuito decisor sobre n qubits (entrada |x>)
        k: Localidade da base (limitada a n)

    Returns:
        EvolvedConcept com relógio iniciando em 0
    """
    clock = build_childs_weighted(decider)
    n = decider.n
    basis = tuple(enumerate_local_paulis(n, min(k, n), geometry))
    target = "Z" + "I" * (n - 1)
    alpha = tuple(1.0 if p.label == target else 0.0 for p in basis)
    return EvolvedConcept(clock.generator, math.pi, PauliObservable(basis, alpha),
                          clock_start=0, l1_budget=1.0, label="hard_instance")


def decision_margin(spec: EvolvedConcept, xs: Sequence[str]) -> float:
    """min |f(x)| sobre as entradas dadas (>= 1/3 sob a convenção 2/3)."""
    return float(min(abs(concept_eval(spec, x)) for x in xs))


def shallow_unitary(alpha: Sequence[float], n_S: int) -> Circuit:
    """
    Camada de profundidade 1: exp(-i alpha_j Y (x) X / 2) nos pares (0,1), (2,3), ...
    e RY(alpha) no qubit restante quando n_S é ímpar. W(0) = identidade.
    """
    n_params = (n_S + 1) // 2
    alpha = [float(a) for a in alpha]
    if len(alpha) != n_params:
        raise ValidationError(f"W para {n_S} qubits exige {n_params} parâmetros, recebeu {len(alpha)}")
    yx = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, 1], [1, 0]]))
    gates: List[Gate] = []
    for j in range(n_S // 2):
        a = alpha[j]
        u = math.cos(a / 2) * np.eye(4) - 1j * math.sin(a / 2) * yx
        gates.append(Gate.custom_gate(u, 2 * j, 2 * j + 1))
    if n_S % 2:
        gates.append(Gate(GateKind.RY, (n_S - 1,), theta=alpha[-1]))
    return Circuit(n_S, tuple(gates))


# ============================================================
# AVALIAÇÃO E FEATURES
# ============================================================
@dataclass(frozen=True)
class NoiseModel:
    """
    Ruído de rótulo/feature

    Attributes:
        kind: exact, uniform (ruído U[-eps2, eps2]) ou shots (s medições por termo)
        eps2: Amplitude declarada do ruído uniforme
        shots: Número de medições por termo
    """
    kind: NoiseKind = NoiseKind.EXACT
    eps2: float = 0.0
    shots: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if self.kind is NoiseKind.UNIFORM and not self.eps2 >= 0:
            raise ValidationError(f"eps2 deve ser >= 0, recebido {self.eps2}")
        if self.kind is NoiseKind.SHOTS and self.shots < 1:
            raise ValidationError(f"Modelo por medições exige shots >= 1, recebido {self.shots}")

    @property
    def declared_eps2(self) -> float:
        if self.kind is NoiseKind.UNIFORM:
            return float(self.eps2)
        if self.kind is NoiseKind.SHOTS:
            return shot_epsilon(self.shots)
        return 0.0

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "eps2": self.eps2, "shots": self.shots}

    @classmethod
    def from_dict(cls, data: dict) -> "NoiseModel":
        try:
            return cls(NoiseKind(data.get("kind", "exact")), float(data.get("eps2", 0.0)), int(data.get("shots", 0)))
        except ValueError as e:
            raise ValidationError(f"Modelo de ruído inválido: {e}") from None


EXACT = NoiseModel()


def shot_epsilon(shots: int) -> float:
    """Limite 3 sigma sqrt(9/s), limitado a 1."""
    return min(1.0, math.sqrt(9.0 / shots))


def concept_eval(spec: ConceptSpec, x: Input) -> float:
    """
    Valor exato f(x) por simulação

    Args:
        spec: Conceito
        x: Bitstring (ou vetor alpha, no conceito invertido)

    Returns:
        f(x)
    """
    if isinstance(spec, FlippedConcept):
        return spec.evaluate(x)
    validate_bitstring(x, spec.n)
    return spec.evaluate(x)


def _shot_estimates(values: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    p = np.clip((1.0 + values) / 2.0, 0.0, 1.0)
    return 2.0 * rng.binomial(shots, p) / shots - 1.0


def feature_map(spec: ConceptSpec, x: Input, noise: NoiseModel = EXACT,
                rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    phi(x) = (<P_1>, ..., <P_m>) com ruído de medição opcional

    No modo shots cada entrada é a média de s resultados +-1 com
    P(+1) = (1 + <P>)/2; o eps1 correspondente é shot_epsilon(s).
    """
    if isinstance(spec, UnitaryParamConcept):
        raise ValidationError("Conceito de unitária parametrizada não tem base de Pauli")
    if not isinstance(spec, FlippedConcept):
        validate_bitstring(x, spec.n)
    phi = np.asarray(spec.term_expectations(x), dtype=float)
    if noise.kind is NoiseKind.SHOTS:
        if rng is None:
            raise ValidationError("Modelo por medições exige um gerador aleatório")
        phi = _shot_estimates(phi, noise.shots, rng)
    return phi


def feature_matrix(spec: ConceptSpec, xs: Sequence[Input], noise: NoiseModel = EXACT,
                   seed: int = 0, stream: int = 0, threads: Optional[int] = None) -> np.ndarray:
    """Matriz N x m de features; RNG por amostra derivado de (seed, stream, índice)."""
    def row(i: int) -> np.ndarray:
        rng = np.random.default_rng([seed, stream, 2, i])
        return feature_map(spec, xs[i], noise, rng)

    threads = threads or get_config()["threads"]
    if threads <= 1 or len(xs) < 2:
        rows = [row(i) for i in range(len(xs))]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, range(len(xs))))
    return np.vstack(rows) if rows else np.zeros((0, len(getattr(spec, "basis", ()))))


# ============================================================
# DISTRIBUIÇÕES DE ENTRADA
# ============================================================
@dataclass(frozen=True)
class InputDistribution:
    """
    Lei das entradas

    Attributes:
        kind: uniform, product-bernoulli, explicit-table, dispatcher ou alpha-uniform
        n: Bits de entrada (ou dimensão de alpha)
        p: Probabilidade por bit (float ou um valor por bit)
        table: x -> probabilidade
        dispatcher: Especificação para a lei D_i
    """
    kind: DistributionKind
    n: int
    p: Union[float, Tuple[float, ...]] = 0.5
    table: Optional[Dict[str, float]] = field(default=None, hash=False)
    dispatcher: Optional[DispatcherSpec] = field(default=None, hash=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", DistributionKind(self.kind))
        if self.n < 1:
            raise ValidationError(f"n deve ser >= 1, recebido {self.n}")
        if self.kind is DistributionKind.BERNOULLI:
            probs = (self.p,) * self.n if isinstance(self.p, (int, float)) else tuple(self.p)
            if len(probs) != self.n:
                raise ValidationError(f"{len(probs)} probabilidades para {self.n} bits")
            if any(not 0.0 <= q <= 1.0 for q in probs):
                raise ValidationError(f"Probabilidades fora de [0, 1]: {probs}")
            object.__setattr__(self, "p", tuple(float(q) for q in probs))
        if self.kind is DistributionKind.TABLE and self.table:
            for x in self.table:
                validate_bitstring(x, self.n)
            total = sum(self.table.values())
            if any(v < 0 for v in self.table.values()) or abs(total - 1.0) > 1e-9:
                raise ValidationError(f"Tabela de probabilidades inválida (soma {total})")
        if self.kind is DistributionKind.DISPATCHER:
            if self.dispatcher is None:
                raise ValidationError("Distribuição D_i exige a especificação do dispatcher")
            if self.dispatcher.n != self.n:
                raise DimensionMismatchError(f"Dispatcher de {self.dispatcher.n} bits para n = {self.n}")

    def sample(self, rng: np.random.Generator) -> Input:
        kind = self.kind
        if kind is DistributionKind.UNIFORM:
            return random_bitstring(rng, self.n)
        if kind is DistributionKind.BERNOULLI:
            return "".join("1" if u < q else "0" for u, q in zip(rng.random(self.n), self.p))
        if kind is DistributionKind.TABLE:
            if not self.table:
                raise ValidationError("Amostragem de tabela explícita vazia")
            keys = sorted(self.table)
            probs = np.array([self.table[k] for k in keys])
            return keys[int(rng.choice(len(keys), p=probs / probs.sum()))]
        if kind is DistributionKind.ALPHA_UNIFORM:
            return tuple(float(a) for a in rng.uniform(-1.0, 1.0, self.n))
        return self._sample_dispatcher(rng)

    def _sample_dispatcher(self, rng: np.random.Generator) -> str:
        spec = self.dispatcher
        if spec.joint_sampler is not None:
            return validate_bitstring(spec.joint_sampler(rng), spec.n)
        x1 = "1" if rng.random() < 0.5 else "0"
        x_q = random_bitstring(rng, spec.n_Q)
        if x1 == "1":
            payload = random_bitstring(rng, spec.n_S)
            payload += "0" * (spec.payload_bits - spec.n_S)
        elif spec.probe_catalog is not None:
            keys = sorted(spec.probe_catalog)
            payload = keys[int(rng.integers(len(keys)))]
        else:
            labels = rng.integers(len(STAB1_STATES), size=spec.n_S)
            payload = encode_probe_labels(labels, spec.payload_bits)
        return x1 + x_q + payload

    def to_dict(self) -> dict:
        data: Dict[str, Any] = {"kind": self.kind.value, "n": self.n}
        if self.kind is DistributionKind.BERNOULLI:
            data["p"] = list(self.p)
        if self.kind is DistributionKind.TABLE:
            data["table"] = dict(sorted((self.table or {}).items()))
        if self.kind is DistributionKind.DISPATCHER:
            data["dispatcher"] = self.dispatcher.to_dict()
        return data


def uniform_distribution(n: int) -> InputDistribution:
    return InputDistribution(DistributionKind.UNIFORM, n)


# ============================================================
# DATASETS
# ============================================================
@dataclass
class Dataset:
    """
    Amostras (x, y) e metadados de geração

    Attributes:
        samples: Pares (bitstring ou vetor alpha, rótulo)
        meta: Impressão digital do conceito, ruído, semente, distribuição, auditoria
    """
    samples: List[Tuple[Input, float]]
    meta: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def xs(self) -> List[Input]:
        return [x for x, _ in self.samples]

    @property
    def ys(self) -> np.ndarray:
        return np.array([y for _, y in self.samples], dtype=float)

    @property
    def flipped(self) -> bool:
        return bool(self.samples) and not isinstance(self.samples[0][0], str)

    def to_frame(self) -> pd.DataFrame:
        key = "alpha" if self.flipped else "x"
        return pd.DataFrame({key: [x if isinstance(x, str) else list(x) for x in self.xs], "y": self.ys})

    def to_jsonl(self) -> str:
        """Cabeçalho {meta, schema_version} e uma linha por amostra, chaves ordenadas."""
        lines = [json.dumps({"meta": self.meta, "schema_version": SCHEMA_VERSION}, sort_keys=True)]
        for x, y in self.samples:
            row = {"x": x, "y": float(y)} if isinstance(x, str) else {"alpha": [float(a) for a in x], "y": float(y)}
            lines.append(json.dumps(row, sort_keys=True))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "Dataset":
        meta: Dict[str, Any] = {}
        samples: List[Tuple[Input, float]] = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValidationError(f"Linha {lineno}: JSON inválido ({e.msg})") from None
            if "meta" in record:
                version = record.get("schema_version")
                if version != SCHEMA_VERSION:
                    raise ValidationError(f"Versão de esquema {version} não suportada (esperado {SCHEMA_VERSION})")
                meta = record["meta"]
                continue
            if "y" not in record or ("x" not in record and "alpha" not in record):
                raise ValidationError(f"Linha {lineno}: registro sem x/alpha ou y")
            y = float(record["y"])
            if not math.isfinite(y):
                raise ValidationError(f"Linha {lineno}: rótulo não finito")
            if "x" in record:
                samples.append((validate_bitstring(record["x"]), y))
            else:
                samples.append((tuple(float(a) for a in record["alpha"]), y))
        return cls(samples, meta)


def _label(spec: ConceptSpec, x: Input, f: float, noise: NoiseModel, rng: np.random.Generator) -> float:
    if noise.kind is NoiseKind.UNIFORM:
        return f + float(rng.uniform(-noise.eps2, noise.eps2))
    if noise.kind is NoiseKind.SHOTS:
        if isinstance(spec, UnitaryParamConcept):
            # observável conjugado tem autovalores +-1
            return float(_shot_estimates(np.array([f]), noise.shots, rng)[0])
        alpha = np.asarray(x if isinstance(spec, FlippedConcept) else spec.observable.alpha, dtype=float)
        return float(alpha @ _shot_estimates(spec.term_expectations(x), noise.shots, rng))
    return f


def gen_dataset(spec: ConceptSpec, dist: InputDistribution, N: int, noise: NoiseModel = EXACT,
                seed: int = 0, stream: int = 0, threads: Optional[int] = None) -> Dataset:
    """
    Gera N amostras rotuladas

    Cada amostra usa o gerador default_rng([seed, stream, índice]), de modo que
    o resultado não depende do paralelismo. Treino usa stream 0 e teste stream 1.

    Args:
        spec: Conceito
        dist: Distribuição de entrada
        N: Número de amostras (>= 1)
        noise: exact, uniform(eps2) ou shots(s)
        seed: Semente
        stream: Fluxo (particiona treino/teste)
        threads: Limite de paralelismo

    Returns:
        Dataset com auditoria do desvio máximo |y - f|
    """
    if N < 1:
        raise ValidationError(f"N deve ser >= 1, recebido {N}")
    if dist.n != spec.n:
        raise DimensionMismatchError(f"Distribuição de {dist.n} bits para conceito de {spec.n}")

    def draw(i: int) -> Tuple[Input, float, float]:
        rng = np.random.default_rng([seed, stream, i])
        x = dist.sample(rng)
        f = concept_eval(spec, x)
        return x, _label(spec, x, f, noise, rng), f

    threads = threads or get_config()["threads"]
    if threads <= 1 or N < 2:
        rows = [draw(i) for i in range(N)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(draw, range(N)))

    deviation = max(abs(y - f) for _, y, f in rows)
    meta = {
        "concept": concept_fingerprint(spec),
        "variant": spec.variant.value,
        "noise": noise.to_dict(),
        "eps2": noise.declared_eps2,
        "seed": seed,
        "stream": stream,
        "distribution": dist.to_dict(),
        "N": N,
        "audit_max_deviation": deviation,
    }
    logger.info("Dataset %s: N=%d, ruído %s, desvio máximo %.3e",
                meta["concept"], N, noise.kind.value, deviation)
    return Dataset([(x, y) for x, y, _ in rows], meta)


def exact_values(spec: ConceptSpec, xs: Sequence[Input]) -> np.ndarray:
    return np.array([concept_eval(spec, x) for x in xs], dtype=float)


def all_inputs(n: int) -> List[str]:
    return all_bitstrings(n)
