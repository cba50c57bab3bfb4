"""
Validação de configurações do sistema
Implementa validações para configurações de experimentos, aprendizes e ruído
"""

import math
from typing import Any, Dict, Tuple

import numpy as np

from core.constants import (
    ConceptVariant, DistributionKind, FEATURE_TOL, LearnerKind, NoiseKind, StepRule,
)
from core.errors import ValidationError


def _is_number(value: Any) -> bool:
    try:
        return math.isfinite(float(value))
    except (TypeError, ValueError):
        return False


class DataValidator:
    """
    Validador de configurações
    """

    @staticmethod
    def validate_lasso_config(cfg: Dict[str, Any]) -> Tuple[bool, str]:
        """
        Valida configuração do LASSO

        Args:
            cfg: Dados da configuração (B, eps3, max_iters, step_rule)

        Returns:
            Tupla (sucesso, mensagem)
        """
        for field in ("B", "eps3"):
            if field not in cfg or cfg[field] is None:
                return False, f"Campo obrigatório faltando: {field}"

        if not _is_number(cfg["B"]) or float(cfg["B"]) < 0:
            return False, f"B deve ser >= 0: {cfg['B']}"

        if not _is_number(cfg["eps3"]) or float(cfg["eps3"]) <= 0:
            return False, f"eps3 deve ser positivo: {cfg['eps3']}"

        if "max_iters" in cfg and cfg["max_iters"] is not None:
            try:
                if int(cfg["max_iters"]) < 1:
                    return False, "max_iters deve ser >= 1"
            except (ValueError, TypeError):
                return False, "max_iters inválido"

        if "step_rule" in cfg and cfg["step_rule"] is not None:
            if str(cfg["step_rule"]) not in [s.value for s in StepRule]:
                return False, f"Regra de passo inválida: {cfg['step_rule']}"

        return True, "Configuração do LASSO válida"

    @staticmethod
    def validate_shallow_config(cfg: Dict[str, Any], n: int = None) -> Tuple[bool, str]:
        """
        Valida configuração do aprendiz de observáveis rasos

        Args:
            cfg: Dados (k_max, epsilon, delta, threshold)
            n: Número de qubits, se conhecido

        Returns:
            Tupla (sucesso, mensagem)
        """
        for field in ("k_max", "epsilon", "delta"):
            if field not in cfg or cfg[field] is None:
                return False, f"Campo obrigatório faltando: {field}"

        try:
            k_max = int(cfg["k_max"])
        except (ValueError, TypeError):
            return False, "k_max inválido"
        if k_max < 1 or (n is not None and k_max > n):
            return False, f"k_max deve estar em 1..{n if n is not None else 'n'}: {k_max}"

        for field in ("epsilon", "delta"):
            if not _is_number(cfg[field]) or not 0 < float(cfg[field]) < 1:
                return False, f"{field} deve estar em (0, 1): {cfg[field]}"

        if cfg.get("threshold") is not None:
            if not _is_number(cfg["threshold"]) or float(cfg["threshold"]) < 0:
                return False, "threshold deve ser >= 0"

        return True, "Configuração do aprendiz raso válida"

    @staticmethod
    def validate_noise(noise: Dict[str, Any]) -> Tuple[bool, str]:
        """
        Valida descritor de ruído

        Args:
            noise: Dados (kind, eps2, shots)

        Returns:
            Tupla (sucesso, mensagem)
        """
        kind = noise.get("kind", NoiseKind.EXACT.value)
        if kind not in [k.value for k in NoiseKind]:
            return False, f"Modelo de ruído inválido: {kind}"

        if kind == NoiseKind.UNIFORM.value:
            if not _is_number(noise.get("eps2")) or float(noise["eps2"]) < 0:
                return False, "Ruído uniforme exige eps2 >= 0"

        if kind == NoiseKind.SHOTS.value:
            try:
                if int(noise.get("shots", 0)) < 1:
                    return False, "Ruído por medições exige shots >= 1"
            except (ValueError, TypeError):
                return False, "shots inválido"

        return True, "Ruído válido"

    @staticmethod
    def validate_distribution(dist: Dict[str, Any]) -> Tuple[bool, str]:
        """
        Valida descritor de distribuição de entrada

        Args:
            dist: Dados (kind, p, table)

        Returns:
            Tupla (sucesso, mensagem)
        """
        kind = dist.get("kind", DistributionKind.UNIFORM.value)
        if kind not in [k.value for k in DistributionKind]:
            return False, f"Distribuição inválida: {kind}"

        if kind == DistributionKind.BERNOULLI.value:
            p = dist.get("p", 0.5)
            probs = p if isinstance(p, (list, tuple)) else [p]
            for q in probs:
                if not _is_number(q) or not 0 <= float(q) <= 1:
                    return False, f"Probabilidade fora de [0, 1]: {q}"

        if kind == DistributionKind.TABLE.value:
            table = dist.get("table") or {}
            if not table:
                return False, "Tabela explícita vazia"
            total = sum(float(v) for v in table.values())
            if abs(total - 1.0) > 1e-9:
                return False, f"Probabilidades da tabela somam {total}, esperado 1"

        return True, "Distribuição válida"

    @staticmethod
    def validate_experiment(cfg: Dict[str, Any]) -> Tuple[bool, str]:
        """
        Valida configuração de experimento

        Args:
            cfg: Dados do experimento (concept, learner, epsilon, delta, ...)

        Returns:
            Tupla (sucesso, mensagem)
        """
        for field in ("concept", "learner", "epsilon"):
            if field not in cfg or cfg[field] is None:
                return False, f"Campo obrigatório faltando: {field}"

        variant = cfg["concept"].get("variant")
        if variant not in [v.value for v in ConceptVariant]:
            return False, f"Variante de conceito inválida: {variant}"

        learner = cfg["learner"].get("kind")
        if learner not in [k.value for k in LearnerKind]:
            return False, f"Aprendiz inválido: {learner}"

        if not _is_number(cfg["epsilon"]) or float(cfg["epsilon"]) <= 0:
            return False, "epsilon deve ser positivo"

        if "delta" in cfg and (not _is_number(cfg["delta"]) or not 0 < float(cfg["delta"]) < 1):
            return False, "delta deve estar em (0, 1)"

        for field in ("n_train", "n_test", "repetitions"):
            if cfg.get(field) is not None:
                try:
                    if int(cfg[field]) < 1:
                        return False, f"{field} deve ser >= 1"
                except (ValueError, TypeError):
                    return False, f"{field} inválido"

        noise = cfg.get("noise") or {}
        ok, message = DataValidator.validate_noise(noise)
        if not ok:
            return ok, message

        # eps2 <= eps é pré-condição da aprendibilidade
        if noise.get("kind") == NoiseKind.UNIFORM.value and float(noise.get("eps2", 0)) > float(cfg["epsilon"]):
            return False, f"eps2 = {noise['eps2']} excede epsilon = {cfg['epsilon']}"

        if cfg.get("distribution"):
            return DataValidator.validate_distribution(cfg["distribution"])

        return True, "Experimento válido"

    @staticmethod
    def validate_features(features: np.ndarray) -> Tuple[bool, str]:
        """Matriz N x m finita com entradas em [-1, 1] (folga FEATURE_TOL)."""
        arr = np.asarray(features, dtype=float)
        if arr.ndim != 2:
            return False, f"Features devem formar uma matriz, recebido shape {arr.shape}"
        if not np.all(np.isfinite(arr)):
            return False, "Features não finitas"
        if arr.size and np.max(np.abs(arr)) > 1.0 + FEATURE_TOL:
            return False, f"Feature fora de [-1, 1]: {np.max(np.abs(arr)):.6g}"
        return True, "Features válidas"


def require_valid(result: Tuple[bool, str]) -> None:
    """Levanta ValidationError com a mensagem do validador."""
    ok, message = result
    if not ok:
        raise ValidationError(message)
