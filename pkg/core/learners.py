"""
Algoritmos de aprendizado

- LASSO restrito à bola l1 (gradiente projetado com certificado de Frank-Wolfe)
- Aprendiz de observáveis rasos por sondas de estados estabilizadores
- Solver linear do caso invertido
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from sklearn.linear_model import Ridge

from core.circuit import DispatcherSpec, dispatcher_payload
from core.concepts import Dataset
from core.constants import (
    EPSILON_BUDGET, Geometry, M_OFFSET, R_INFINITY, StepRule,
)
from core.errors import (
    DimensionMismatchError, InsufficientProbesError, ValidationError,
)
from core.pauli import (
    PauliObservable, PauliString, enumerate_local_paulis, observable_expectation, stabilizer_expectations,
)
from core.validators import DataValidator, require_valid

logger = logging.getLogger(__name__)


# ============================================================
# LASSO
# ============================================================
@dataclass(frozen=True)
class LassoConfig:
    """
    Hiperparâmetros do LASSO

    Attributes:
        B: Raio da bola l1 (>= 0)
        eps3: Folga de otimização; o certificado exige gap <= eps3/2
        max_iters: Limite de iterações
        step_rule: Passo fixo 1/L ou backtracking
        tol_residual: Parada antecipada quando o MSE de treino fica abaixo deste valor
    """
    B: float
    eps3: float
    max_iters: int = 20000
    step_rule: StepRule = StepRule.FIXED
    tol_residual: float = 0.0

    def __post_init__(self):
        require_valid(DataValidator.validate_lasso_config({
            "B": self.B, "eps3": self.eps3, "max_iters": self.max_iters,
            "step_rule": StepRule(self.step_rule).value,
        }))
        object.__setattr__(self, "step_rule", StepRule(self.step_rule))

    def to_dict(self) -> dict:
        return {"B": self.B, "eps3": self.eps3, "max_iters": self.max_iters,
                "step_rule": self.step_rule.value, "tol_residual": self.tol_residual}


@dataclass(frozen=True)
class LassoModel:
    """
    Modelo linear h(x) = w . phi(x)

    Attributes:
        w: Pesos com ||w||_1 <= B
        basis: Rótulos das strings de Pauli das features
        B: Orçamento l1 do treino
        diagnostics: train_mse, iterations, gap, converged
        history: Objetivo por iteração (não serializado)
    """
    w: Tuple[float, ...]
    basis: Tuple[str, ...]
    B: float
    diagnostics: Dict[str, Any] = field(default_factory=dict, hash=False)
    history: Tuple[float, ...] = field(default=(), compare=False, repr=False)

    @property
    def converged(self) -> bool:
        return bool(self.diagnostics.get("converged", False))

    def predict(self, features: np.ndarray) -> np.ndarray:
        phi = np.atleast_2d(np.asarray(features, dtype=float))
        if phi.shape[1] != len(self.w):
            raise DimensionMismatchError(f"Features com {phi.shape[1]} colunas para modelo de {len(self.w)} pesos")
        return phi @ np.asarray(self.w)

    def to_dict(self) -> dict:
        return {"basis": list(self.basis), "w": list(self.w), "B": self.B, "diagnostics": dict(self.diagnostics)}

    @classmethod
    def from_dict(cls, data: dict) -> "LassoModel":
        try:
            return cls(tuple(float(v) for v in data["w"]), tuple(data["basis"]), float(data["B"]),
                       dict(data.get("diagnostics", {})))
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"Modelo inválido: {e}") from None


def project_l1(v: np.ndarray, B: float) -> np.ndarray:
    """
    Projeção euclidiana na bola l1 de raio B (ordenação, O(m log m))

    Examples:
        >>> project_l1(np.array([1.0, 1.0]), 1.0)
        array([0.5, 0.5])
    """
    v = np.asarray(v, dtype=float)
    if B < 0:
        raise ValidationError(f"Raio da bola l1 negativo: {B}")
    if B == 0:
        return np.zeros_like(v)
    a = np.abs(v)
    if a.sum() <= B:
        return v.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, u.size + 1)
    rho = np.nonzero(u * idx > css - B)[0][-1]
    theta = (css[rho] - B) / (rho + 1.0)
    out = np.sign(v) * np.maximum(a - theta, 0.0)
    # arredondamento: garante ||out||_1 <= B
    excess = np.abs(out).sum() - B
    if excess > 0:
        out *= B / (B + excess)
    return out


def _objective(phi: np.ndarray, y: np.ndarray, w: np.ndarray) -> float:
    r = phi @ w - y
    return float(r @ r / y.size)


def _gradient(phi: np.ndarray, y: np.ndarray, w: np.ndarray) -> np.ndarray:
    return 2.0 * phi.T @ (phi @ w - y) / y.size


def frank_wolfe_gap(grad: np.ndarray, w: np.ndarray, B: float) -> float:
    """max_{||s||_1 <= B} <grad, w - s> = <grad, w> + B ||grad||_inf (>= F(w) - F*)."""
    return float(grad @ w + B * np.max(np.abs(grad), initial=0.0))


def lasso_train(features: np.ndarray, labels: np.ndarray, cfg: LassoConfig,
                basis: Sequence[str] = ()) -> LassoModel:
    """
    min_{||w||_1 <= B} (1/N) sum_l |w . phi(x_l) - y_l|^2

    Args:
        features: Matriz N x m com entradas em [-1, 1]
        labels: Rótulos reais (finitos)
        cfg: Configuração
        basis: Rótulos das features, gravados no modelo

    Returns:
        LassoModel; se o certificado não for atingido em max_iters, devolve o
        melhor iterado com diagnostics["converged"] = False
    """
    phi = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float).reshape(-1)
    require_valid(DataValidator.validate_features(phi))
    if phi.shape[0] < 1:
        raise ValidationError("Treino exige N >= 1 amostras")
    if phi.shape[0] != y.size:
        raise DimensionMismatchError(f"{phi.shape[0]} linhas de features e {y.size} rótulos")
    if not np.all(np.isfinite(y)):
        raise ValidationError("Rótulos não finitos")
    phi = np.clip(phi, -1.0, 1.0)
    n_samples, m = phi.shape
    basis = tuple(basis) if basis else tuple(f"f{i}" for i in range(m))
    if len(basis) != m:
        raise DimensionMismatchError(f"{len(basis)} rótulos de base para {m} features")

    B = float(cfg.B)
    target = cfg.eps3 / 2.0
    w = np.zeros(m)
    obj = _objective(phi, y, w)
    history = [obj]
    grad = _gradient(phi, y, w)
    gap = frank_wolfe_gap(grad, w, B)
    best_w, best_obj, best_gap = w.copy(), obj, gap

    lipschitz = 2.0 * float(np.linalg.eigvalsh(phi.T @ phi / n_samples)[-1]) if m else 0.0
    step = 1.0 / lipschitz if lipschitz > 0 else 1.0

    iterations = 0
    converged = gap <= target or B == 0.0 or obj <= cfg.tol_residual
    while not converged and iterations < cfg.max_iters:
        iterations += 1
        if cfg.step_rule is StepRule.BACKTRACKING:
            t = min(step * 4.0, 1e6)
            while True:
                w_new = project_l1(w - t * grad, B)
                d = w_new - w
                new_obj = _objective(phi, y, w_new)
                if new_obj <= obj + grad @ d + (d @ d) / (2 * t) + 1e-15 or t < 1e-12:
                    break
                t /= 2.0
            step = t
        else:
            w_new = project_l1(w - step * grad, B)
            new_obj = _objective(phi, y, w_new)

        # passo 1/L é de descida; não aceita subida por arredondamento
        if new_obj > obj:
            new_obj = obj
            w_new = w
        w, obj = w_new, new_obj
        history.append(obj)
        grad = _gradient(phi, y, w)
        gap = frank_wolfe_gap(grad, w, B)
        if obj < best_obj or (obj == best_obj and gap < best_gap):
            best_w, best_obj, best_gap = w.copy(), obj, gap
        converged = gap <= target or obj <= cfg.tol_residual

    if not converged:
        logger.warning("LASSO sem certificado após %d iterações (gap %.3e > %.3e)", iterations, best_gap, target)
        w, obj, gap = best_w, best_obj, best_gap

    diagnostics = {
        "train_mse": obj,
        "iterations": iterations,
        "gap": gap,
        "certified_target": target,
        "converged": bool(converged),
        "l1_norm": float(np.abs(w).sum()),
    }
    logger.debug("LASSO: MSE %.3e, gap %.3e, %d iterações", obj, gap, iterations)
    return LassoModel(tuple(float(v) for v in w), basis, B, diagnostics, tuple(history))


def sample_complexity(B: float, m: int, delta: float, eps3: float) -> int:
    """
    N = ceil(2 B^4 sqrt(2 ln(2m/delta)) / eps3^2)

    Examples:
        >>> sample_complexity(1, 4, 0.1, 0.4)
        38
    """
    if B < 0 or m < 1 or not 0 < delta < 1 or eps3 <= 0:
        raise ValidationError(f"Parâmetros inválidos: B={B}, m={m}, delta={delta}, eps3={eps3}")
    value = 2.0 * B ** 4 * math.sqrt(2.0 * math.log(2.0 * m / delta)) / eps3 ** 2
    return max(1, math.ceil(value))


def generalization_bound(model: LassoModel, cfg: LassoConfig, m: int, N: int, delta: float) -> float:
    """
    R(h) <= R_hat + 2 r_inf B M sqrt(2 ln(2m)/N) + M sqrt(2 ln(1/delta)/(2N)),
    com r_inf = 1 e M = B + 2.
    """
    if N < 1 or m < 1 or not 0 < delta < 1:
        raise ValidationError(f"Parâmetros inválidos: m={m}, N={N}, delta={delta}")
    B = float(cfg.B)
    M = B + M_OFFSET
    complexity = 2.0 * R_INFINITY * B * M * math.sqrt(2.0 * math.log(2.0 * m) / N)
    confidence = M * math.sqrt(2.0 * math.log(1.0 / delta) / (2.0 * N))
    return float(model.diagnostics["train_mse"]) + complexity + confidence


def substituted_bound(model: LassoModel, cfg: LassoConfig, m: int, N: int, delta: float) -> float:
    """
    Forma com M = B: R_hat + B^2/sqrt(2N) (4 sqrt(ln 2m) + sqrt(ln 1/delta)).
    """
    if N < 1 or m < 1 or not 0 < delta < 1:
        raise ValidationError(f"Parâmetros inválidos: m={m}, N={N}, delta={delta}")
    B = float(cfg.B)
    slack = B ** 2 / math.sqrt(2.0 * N) * (4.0 * math.sqrt(math.log(2.0 * m)) + math.sqrt(math.log(1.0 / delta)))
    return float(model.diagnostics["train_mse"]) + slack


def epsilon_budget(eps: float, fractions: Sequence[float] = EPSILON_BUDGET) -> Dict[str, float]:
    """
    Divide eps em eps1' (features), eps2 (rótulos), eps3 (otimização)

    Returns:
        {"eps1", "eps2", "eps3", "composite"} com composite = (eps1 + eps2)^2 + eps3
    """
    if eps <= 0:
        raise ValidationError(f"eps deve ser positivo: {eps}")
    f1, f2, f3 = fractions
    eps1, eps2, eps3 = f1 * eps, f2 * eps, f3 * eps
    return {"eps1": eps1, "eps2": eps2, "eps3": eps3, "composite": (eps1 + eps2) ** 2 + eps3}


# ============================================================
# OBSERVÁVEIS RASOS
# ============================================================
@dataclass(frozen=True)
class ShallowLearnConfig:
    """
    Attributes:
        k_max: Maior suporte procurado
        epsilon: Erro alvo em norma infinito
        delta: Probabilidade de falha
        threshold: Coeficientes com |alpha| abaixo disto são descartados
        min_probes: Mínimo de sondas (x1 = 0) exigido pelo aprendiz de unitárias
    """
    k_max: int
    epsilon: float = 0.1
    delta: float = 0.1
    threshold: Optional[float] = None
    min_probes: int = 1

    def __post_init__(self):
        require_valid(DataValidator.validate_shallow_config({
            "k_max": self.k_max, "epsilon": self.epsilon, "delta": self.delta, "threshold": self.threshold,
        }))

    @property
    def cutoff(self) -> float:
        return self.epsilon / 2.0 if self.threshold is None else float(self.threshold)

    def to_dict(self) -> dict:
        return {"k_max": self.k_max, "epsilon": self.epsilon, "delta": self.delta,
                "threshold": self.threshold, "min_probes": self.min_probes}


def shallow_sample_size(n: int, k: int, epsilon: float, delta: float) -> int:
    """N = ceil(9^k ln(n 4^k / delta) / epsilon^2)"""
    return math.ceil(9 ** k * math.log(n * 4 ** k / delta) / epsilon ** 2)


def shallow_estimates(labels: np.ndarray, values: np.ndarray, n: int, k_max: int) -> Tuple[List[PauliString], np.ndarray]:
    """
    alpha_hat_Q = 3^{|supp Q|} mean_l(v_l <psi_l|Q|psi_l>) para toda Q com |supp Q| <= k_max

    Returns:
        (base com identidade primeiro, estimativas sem truncamento)
    """
    basis = enumerate_local_paulis(n, k_max, Geometry.ALL_SUBSETS)
    table = stabilizer_expectations(labels, basis)
    weights = np.array([3.0 ** p.weight for p in basis])
    return basis, weights * (values @ table) / values.size


def shallow_learn(probes: Sequence[Tuple[Sequence[int], float]], cfg: ShallowLearnConfig) -> PauliObservable:
    """
    Estima um observável k-local a partir de sondas de estados produto de stab1

    Args:
        probes: Pares (rótulos 0..5 por qubit, valor medido)
        cfg: Configuração

    Returns:
        PauliObservable com os coeficientes que sobrevivem ao corte (em [-1, 1])
    """
    if not probes:
        raise ValidationError("Conjunto de sondas vazio")
    labels = np.array([list(lbl) for lbl, _ in probes], dtype=int)
    values = np.array([float(v) for _, v in probes])
    n = labels.shape[1]
    if cfg.k_max > n:
        raise ValidationError(f"k_max={cfg.k_max} maior que o número de qubits {n}")
    if not np.all(np.isfinite(values)):
        raise ValidationError("Valores de sonda não finitos")

    needed = shallow_sample_size(n, cfg.k_max, cfg.epsilon, cfg.delta)
    if len(probes) < needed:
        logger.warning("Sondas insuficientes para k_max=%d: %d < %d (variância 9^k/N)",
                       cfg.k_max, len(probes), needed)

    basis, alpha_hat = shallow_estimates(labels, values, n, cfg.k_max)
    alpha_hat = np.clip(alpha_hat, -1.0, 1.0)
    keep = [i for i, a in enumerate(alpha_hat) if abs(a) >= cfg.cutoff]
    if not keep:
        return PauliObservable((basis[0],), (0.0,))
    return PauliObservable(tuple(basis[i] for i in keep), tuple(float(alpha_hat[i]) for i in keep))


class UnitaryParamPredictor:
    """
    Preditor do aprendiz de unitárias parametrizadas

    Guarda um observável aprendido O'(x_Q) por grupo de sondas; entradas
    x1 = 1 usam o grupo de rotação identidade (x_Q = 0...0).
    """

    def __init__(self, dispatcher: DispatcherSpec, observables: Dict[str, PauliObservable],
                 diagnostics: Dict[str, Any]):
        self.dispatcher = dispatcher
        self.observables = observables
        self.diagnostics = diagnostics

    def observable_for(self, x: str) -> PauliObservable:
        x1, x_q, _ = self.dispatcher.split(x)
        key = "0" * self.dispatcher.n_Q if x1 == "1" else x_q
        try:
            return self.observables[key]
        except KeyError:
            raise InsufficientProbesError(f"Nenhuma sonda com x_Q={key!r} no treino") from None

    def predict_one(self, x: str) -> float:
        state = dispatcher_payload(self.dispatcher, x)
        return observable_expectation(state, self.observable_for(x))

    def predict(self, xs: Sequence[str]) -> np.ndarray:
        return np.array([self.predict_one(x) for x in xs])

    def to_dict(self) -> dict:
        return {
            "observables": {k: v.to_dict() for k, v in sorted(self.observables.items())},
            "diagnostics": dict(self.diagnostics),
        }


def unitary_param_learn(data: Dataset, dispatcher: DispatcherSpec, cfg: ShallowLearnConfig) -> UnitaryParamPredictor:
    """
    Aprende W(alpha) O W(alpha)^dagger das amostras com x1 = 0

    Args:
        data: Dataset amostrado de um conceito de unitária parametrizada
        dispatcher: Parte pública do conceito
        cfg: Configuração do aprendiz raso

    Returns:
        UnitaryParamPredictor
    """
    groups: Dict[str, List[Tuple[Tuple[int, ...], float]]] = {}
    n_hard = 0
    for x, y in data.samples:
        x1, x_q, payload = dispatcher.split(x)
        if x1 == "1":
            n_hard += 1
            continue
        groups.setdefault(x_q, []).append((dispatcher.probe_labels(payload), float(y)))

    n_probes = sum(len(g) for g in groups.values())
    if n_probes < max(1, cfg.min_probes):
        raise InsufficientProbesError(
            f"{n_probes} amostras com x1 = 0, mínimo {max(1, cfg.min_probes)}")

    observables = {x_q: shallow_learn(probes, cfg) for x_q, probes in sorted(groups.items())}
    diagnostics = {
        "n_probes": n_probes,
        "n_hard_branch": n_hard,
        "groups": {k: len(v) for k, v in sorted(groups.items())},
        "probe_fraction": n_probes / max(1, len(data)),
    }
    logger.info("Aprendiz de unitárias: %d sondas em %d grupos", n_probes, len(groups))
    return UnitaryParamPredictor(dispatcher, observables, diagnostics)


# ============================================================
# CASO INVERTIDO
# ============================================================
@dataclass(frozen=True)
class FlippedSolution:
    """
    Solução de A v = y (linhas de A são os vetores alpha)

    Attributes:
        v: Estimativas de <P_i>
        rank: Posto numérico de A
        residual: ||A v - y||
        condition: Número de condição de A
        rank_deficient: Posto < m (solução de norma mínima)
        ridge: Regularização usada
    """
    v: Tuple[float, ...]
    rank: int
    residual: float
    condition: float
    rank_deficient: bool
    ridge: float

    def predict(self, alphas: np.ndarray) -> np.ndarray:
        return np.atleast_2d(np.asarray(alphas, dtype=float)) @ np.asarray(self.v)

    def to_dict(self) -> dict:
        return {"v": list(self.v), "rank": self.rank, "residual": self.residual,
                "condition": self.condition, "rank_deficient": self.rank_deficient, "ridge": self.ridge}


def flipped_solve(samples: Sequence[Tuple[Sequence[float], float]], ridge: float = 0.0) -> FlippedSolution:
    """
    Mínimos quadrados (ridge quando ridge > 0) para o caso invertido

    Args:
        samples: Pares (alpha, y)
        ridge: lambda >= 0

    Returns:
        FlippedSolution
    """
    if not samples:
        raise ValidationError("Sistema sem amostras")
    if ridge < 0:
        raise ValidationError(f"Regularização negativa: {ridge}")
    A = np.array([list(a) for a, _ in samples], dtype=float)
    y = np.array([float(v) for _, v in samples])
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(y))):
        raise ValidationError("Sistema com valores não finitos")

    sv = np.linalg.svd(A, compute_uv=False)
    rank = int(np.linalg.matrix_rank(A))
    condition = float(sv[0] / sv[-1]) if sv.size and sv[-1] > 0 else math.inf
    m = A.shape[1]

    if ridge > 0:
        v = Ridge(alpha=ridge, fit_intercept=False).fit(A, y).coef_
    else:
        v, *_ = np.linalg.lstsq(A, y, rcond=None)
    deficient = rank < m
    if deficient:
        logger.warning("Sistema com posto %d < %d: solução de norma mínima", rank, m)
    return FlippedSolution(
        v=tuple(float(c) for c in v),
        rank=rank,
        residual=float(np.linalg.norm(A @ v - y)),
        condition=condition,
        rank_deficient=deficient,
        ridge=float(ridge),
    )
