"""
Utilitários numéricos dos relatórios: razões protegidas, erro padrão e
inclinação das curvas de escala
"""

from typing import Optional, Sequence
import math

import numpy as np
import statsmodels.api as sm


def safe_division(numerator: float, denominator: float, default: float = 0.0,
                  min_threshold: float = 1e-300) -> float:
    """
    Razão numerator/denominator, ou `default` quando |denominator| < min_threshold
    ou o quociente não é finito (ex. fração de acertos sobre zero amostras)

    Examples:
        >>> safe_division(1.0, 4.0)
        0.25
        >>> safe_division(3.0, 0.0, default=1.0)
        1.0
    """
    if abs(denominator) < min_threshold:
        return default
    ratio = numerator / denominator
    return ratio if math.isfinite(ratio) else default


def standard_error(values: Sequence[float]) -> float:
    """
    Erro padrão da média (desvio amostral / sqrt(n)).

    Returns:
        0.0 para menos de duas amostras
    """
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        return 0.0
    return float(arr.std(ddof=1) / math.sqrt(arr.size))


def log_log_slope(xs: Sequence[float], ys: Sequence[float]) -> Optional[float]:
    """
    Inclinação do ajuste OLS de log(y) contra log(x).

    Args:
        xs: Abscissas positivas
        ys: Ordenadas positivas

    Returns:
        Inclinação, ou None se houver menos de dois pontos válidos

    Examples:
        >>> round(log_log_slope([1, 2, 4], [1, 4, 16]), 6)
        2.0
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    mask = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
    if mask.sum() < 2:
        return None
    design = sm.add_constant(np.log(x[mask]))
    fit = sm.OLS(np.log(y[mask]), design).fit()
    return float(fit.params[1])
