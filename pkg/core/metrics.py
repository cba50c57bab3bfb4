"""
Métricas de risco dos modelos aprendidos
Risco empírico E|f - h|^2, erro padrão e agregação de varreduras
"""

from typing import Any, Dict, List, Sequence

import numpy as np
import pandas as pd

from core.errors import DimensionMismatchError, ValidationError
from utils.calculation_utils import safe_division, standard_error


def validate_predictions(predictions: Sequence[float], targets: Sequence[float]) -> Dict[str, List[str]]:
    """
    Verifica a integridade de um par predições/alvos

    Args:
        predictions: h(x) por amostra
        targets: f(x) (ou rótulo) por amostra

    Returns:
        Dicionário com avisos por categoria
    """
    warnings_dict = {"critical": [], "warnings": [], "info": []}
    pred = np.asarray(predictions, dtype=float)
    true = np.asarray(targets, dtype=float)

    if pred.shape != true.shape:
        warnings_dict["critical"].append(f"Tamanhos diferentes: {pred.shape} e {true.shape}")
        return warnings_dict
    if pred.size == 0:
        warnings_dict["critical"].append("Nenhuma amostra de teste")
    if not np.all(np.isfinite(pred)):
        warnings_dict["critical"].append("Predições não finitas")
    if pred.size and np.max(np.abs(true)) > 1.0 + 1e-9:
        warnings_dict["warnings"].append(f"Alvos fora de [-1, 1]: max |f| = {np.max(np.abs(true)):.4g}")
    if 0 < pred.size < 30:
        warnings_dict["info"].append(f"Apenas {pred.size} amostras: erro padrão pouco confiável")
    return warnings_dict


class RiskMetrics:
    """
    Risco de um preditor sobre um conjunto de teste
    """

    def __init__(self, predictions: Sequence[float], targets: Sequence[float]):
        pred = np.asarray(predictions, dtype=float)
        true = np.asarray(targets, dtype=float)
        if pred.shape != true.shape:
            raise DimensionMismatchError(f"{pred.size} predições para {true.size} alvos")
        if pred.size == 0:
            raise ValidationError("Risco de conjunto vazio")
        self.predictions = pred
        self.targets = true
        self.squared_errors = (pred - true) ** 2

    @property
    def mse(self) -> float:
        return float(self.squared_errors.mean())

    @property
    def mse_standard_error(self) -> float:
        return standard_error(self.squared_errors)

    @property
    def max_abs_error(self) -> float:
        return float(np.sqrt(self.squared_errors.max()))

    @property
    def rms_error(self) -> float:
        return float(np.sqrt(self.mse))

    def sign_agreement(self) -> float:
        """Fração de amostras com sign(h) = sign(f), ignorando f = 0."""
        mask = self.targets != 0
        agree = np.sign(self.predictions[mask]) == np.sign(self.targets[mask])
        return safe_division(float(agree.sum()), float(mask.sum()), default=1.0)

    def summary(self) -> Dict[str, Any]:
        return {
            "mse": self.mse,
            "mse_se": self.mse_standard_error,
            "max_abs_error": self.max_abs_error,
            "rms_error": self.rms_error,
            "n": int(self.predictions.size),
        }


def aggregate_runs(rows: List[Dict[str, Any]], axes: Sequence[str]) -> pd.DataFrame:
    """
    Agrega linhas de execução (uma por repetição) por célula da grade

    Args:
        rows: Dicionários com as colunas dos eixos, test_mse, train_mse e passed
        axes: Colunas que identificam a célula

    Returns:
        DataFrame com média, desvio e contagem por célula
    """
    if not rows:
        return pd.DataFrame(columns=list(axes) + ["runs", "test_mse_mean", "test_mse_std",
                                                  "train_mse_mean", "pass_rate"])
    df = pd.DataFrame(rows)
    keys = list(axes) or ["_all"]
    if not axes:
        df["_all"] = 0
    grouped = df.groupby(keys, sort=True, dropna=False)
    out = grouped.agg(
        runs=("test_mse", "size"),
        test_mse_mean=("test_mse", "mean"),
        test_mse_std=("test_mse", "std"),
        train_mse_mean=("train_mse", "mean"),
        pass_rate=("passed", "mean"),
    ).reset_index()
    out["test_mse_std"] = out["test_mse_std"].fillna(0.0)
    if not axes:
        out = out.drop(columns=["_all"])
    return out
