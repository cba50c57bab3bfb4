"""
Testes de métricas de risco e agregação de varreduras
"""

import sys
import os

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import pytest

from core.errors import DimensionMismatchError, ValidationError
from core.metrics import RiskMetrics, aggregate_runs, validate_predictions


def test_risk_metrics_summary():
    risk = RiskMetrics([0.5, -1.0, 0.0, 1.0], [1.0, -1.0, 0.5, 0.0])
    assert risk.mse == pytest.approx((0.25 + 0.0 + 0.25 + 1.0) / 4)
    assert risk.max_abs_error == pytest.approx(1.0)
    assert risk.rms_error == pytest.approx(risk.mse ** 0.5)
    summary = risk.summary()
    assert summary["n"] == 4
    assert summary["mse_se"] > 0


def test_sign_agreement_ignores_zero_targets():
    risk = RiskMetrics([0.5, 0.2, -0.3], [1.0, 0.0, 0.4])
    assert risk.sign_agreement() == pytest.approx(0.5)
    assert RiskMetrics([0.1], [0.0]).sign_agreement() == 1.0


def test_risk_metrics_validation():
    assert RiskMetrics([1.0, 1.0], [1.0, -1.0]).mse == pytest.approx(2.0)
    with pytest.raises(DimensionMismatchError):
        RiskMetrics([1.0], [1.0, 0.0])
    with pytest.raises(ValidationError):
        RiskMetrics([], [])


def test_validate_predictions():
    report = validate_predictions([0.0, float("nan")], [2.0, 0.0])
    assert report["critical"] == ["Predições não finitas"]
    assert report["warnings"] and "fora de [-1, 1]" in report["warnings"][0]
    assert report["info"]
    assert validate_predictions([0.0], [0.0, 1.0])["critical"]
    clean = validate_predictions([0.1] * 40, [0.0] * 40)
    assert clean == {"critical": [], "warnings": [], "info": []}


# ============================================================
# AGREGAÇÃO
# ============================================================
def test_aggregate_runs_groups_cells():
    rows = [
        {"n_train": 10, "test_mse": 0.2, "train_mse": 0.1, "passed": False},
        {"n_train": 10, "test_mse": 0.4, "train_mse": 0.3, "passed": True},
        {"n_train": 20, "test_mse": 0.1, "train_mse": 0.05, "passed": True},
    ]
    table = aggregate_runs(rows, ["n_train"])
    assert list(table.columns) == ["n_train", "runs", "test_mse_mean", "test_mse_std",
                                   "train_mse_mean", "pass_rate"]
    first = table.iloc[0]
    assert first["runs"] == 2
    assert first["test_mse_mean"] == pytest.approx(0.3)
    assert first["pass_rate"] == pytest.approx(0.5)
    # uma única repetição tem desvio 0
    assert table.iloc[1]["test_mse_std"] == 0.0


def test_aggregate_runs_without_axes_and_without_rows():
    rows = [{"test_mse": 0.2, "train_mse": 0.1, "passed": True},
            {"test_mse": 0.4, "train_mse": 0.1, "passed": True}]
    table = aggregate_runs(rows, [])
    assert len(table) == 1
    assert "_all" not in table.columns
    empty = aggregate_runs([], ["epsilon"])
    assert empty.empty
    assert list(empty.columns)[:2] == ["epsilon", "runs"]
