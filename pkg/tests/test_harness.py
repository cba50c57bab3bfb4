"""
Testes do harness de experimentos: configuração, execução reprodutível,
varreduras e suíte de verificação
"""

import sys
import os
import json

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import numpy as np
import pytest

from core.concepts import FlippedConcept, GroundStateConcept, UnitaryParamConcept, gen_dataset
from core.errors import ResourceLimitError, ValidationError
from core.harness import (
    ExperimentConfig,
    build_concept,
    run_experiment,
    shallow_scaling,
    sweep,
    verify_suite,
)
from core.learners import FlippedSolution


def _hard_config(**overrides) -> ExperimentConfig:
    data = {
        "concept": {"variant": "hard_instance", "n": 2, "decider": "X 0\nCNOT 0 1", "k": 2},
        "learner": {"kind": "lasso", "eps3": 1e-4},
        "epsilon": 0.05,
        "n_train": 200,
        "n_test": 100,
    }
    data.update(overrides)
    return ExperimentConfig.from_dict(data)


def _flipped_config() -> ExperimentConfig:
    return ExperimentConfig.from_dict({
        "concept": {"variant": "flipped", "n": 2, "decider": "H 0\nCNOT 0 1", "k": 1},
        "learner": {"kind": "flipped"},
        "epsilon": 0.1,
        "n_test": 20,
        "repetitions": 2,
    })


# ============================================================
# CONFIGURAÇÃO
# ============================================================
def test_config_requires_epsilon():
    with pytest.raises(ValidationError):
        ExperimentConfig.from_dict({"concept": {"variant": "hard_instance"}, "learner": {"kind": "lasso"}})


def test_config_rejects_unknown_fields_and_values():
    base = {"concept": {"variant": "hard_instance"}, "learner": {"kind": "lasso"}, "epsilon": 0.1}
    with pytest.raises(ValidationError):
        ExperimentConfig.from_dict({**base, "epochs": 3})
    with pytest.raises(ValidationError):
        ExperimentConfig.from_dict({**base, "learner": {"kind": "svm"}})
    with pytest.raises(ValidationError):
        ExperimentConfig.from_dict({**base, "noise": {"kind": "uniform", "eps2": 0.5}})
    with pytest.raises(ValidationError):
        ExperimentConfig.from_dict({**base, "n_train": 0})


def test_override_returns_new_config():
    cfg = _hard_config()
    changed = cfg.with_override("learner.B", 2.0)
    assert changed.learner["B"] == 2.0
    assert "B" not in cfg.learner
    assert cfg.with_override("epsilon", 0.2).epsilon == 0.2


# ============================================================
# CONSTRUÇÃO DE CONCEITOS
# ============================================================
def test_build_concept_variants():
    spec, dist = build_concept({"variant": "ground_state", "family": "ising", "n": 2, "k": 1})
    assert isinstance(spec, GroundStateConcept)
    assert dist.n == 2

    spec, dist = build_concept({"variant": "unitary_param", "n_S": 1, "decider": "H 0"})
    assert isinstance(spec, UnitaryParamConcept)
    assert spec.n == 4
    assert dist.kind.value == "dispatcher"

    spec, dist = build_concept({"variant": "flipped", "n": 2, "gates": 2, "k": 1})
    assert isinstance(spec, FlippedConcept)
    assert dist.n == len(spec.basis) == 7


def test_build_concept_is_seeded():
    a, _ = build_concept({"variant": "evolved", "n": 2, "gates": 3, "k": 1}, seed=4)
    b, _ = build_concept({"variant": "evolved", "n": 2, "gates": 3, "k": 1}, seed=4)
    assert a.observable.alpha == b.observable.alpha
    assert a.evaluate("01") == pytest.approx(b.evaluate("01"))


def test_build_concept_guards(monkeypatch):
    with pytest.raises(ValidationError):
        build_concept({"variant": "ground_state", "family": "heisenberg"})
    monkeypatch.setenv("OBSLEARN_QUBIT_CAP", "3")
    with pytest.raises(ResourceLimitError):
        build_concept({"variant": "unitary_param", "n_S": 3})


# ============================================================
# EXECUÇÃO
# ============================================================
def test_hard_instance_experiment_passes():
    report = run_experiment(_hard_config(), threads=1)
    payload = report.payload
    assert report.passed
    run = payload["runs"][0]
    assert run["converged"]
    assert run["test_mse"] <= 0.05
    assert run["generalization_bound"] >= run["train_mse"]
    assert run["model"]["basis"][0] == "II"
    assert payload["epsilon_budget"]["eps3"] == pytest.approx(0.02)
    assert set(report.to_dict()) == {"schema_version", "payload", "timing", "environment", "logs"}
    assert {"build", "dataset", "features", "train", "evaluate"} <= set(report.timing)
    assert report.logs and report.logs[0].startswith("[")


def test_experiment_payload_is_reproducible():
    a = run_experiment(_hard_config(n_train=50, n_test=20), threads=1)
    b = run_experiment(_hard_config(n_train=50, n_test=20), threads=1)
    assert json.dumps(a.payload, sort_keys=True) == json.dumps(b.payload, sort_keys=True)


def test_experiment_with_single_training_sample():
    report = run_experiment(_hard_config(n_train=1, n_test=10), threads=1)
    assert report.payload["runs"][0]["n_train"] == 1
    assert "test_mse" in report.payload["runs"][0]


def test_default_training_size_comes_from_sample_complexity():
    cfg = _hard_config(epsilon=0.5, n_test=10)
    cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "n_train": None, "learner": {"kind": "lasso"}})
    run = run_experiment(cfg, threads=1).payload["runs"][0]
    assert run["n_train_source"] == "sample_complexity"
    assert run["n_train"] > 1


def test_shallow_experiment_reports_hard_branch():
    cfg = ExperimentConfig.from_dict({
        "concept": {"variant": "unitary_param", "n_S": 1, "decider": "H 0", "alpha": [0.5]},
        "learner": {"kind": "shallow", "k_max": 1, "threshold": 0.0},
        "epsilon": 0.1,
        "n_train": 2000,
        "n_test": 200,
    })
    report = run_experiment(cfg, threads=1)
    run = report.payload["runs"][0]
    assert report.passed
    assert 0.4 < run["hard_branch_fraction"] < 0.6
    assert run["test_mse_hard_branch"] is not None


def test_noisy_runs_are_judged_against_composite_budget():
    """Com ruído uniforme o limiar é min(eps, (eps1 + eps2)^2 + eps3)"""
    exact = run_experiment(_hard_config(n_train=100, n_test=40), threads=1).payload
    assert exact["pass_threshold"] == pytest.approx(0.05)

    noisy = run_experiment(_hard_config(n_train=100, n_test=40, noise={"kind": "uniform", "eps2": 0.05}),
                           threads=1).payload
    assert noisy["budget_target"] == pytest.approx((0.01 + 0.05) ** 2 + 0.02)
    assert noisy["pass_threshold"] == pytest.approx(noisy["budget_target"])
    run = noisy["runs"][0]
    assert run["passed"] == (run["test_mse"] <= noisy["pass_threshold"])


def test_lasso_with_uniform_label_noise_meets_budget_over_twenty_seeds():
    cfg = _hard_config(
        learner={"kind": "lasso", "eps3": 0.02},
        n_train=2000,
        n_test=100,
        noise={"kind": "uniform", "eps2": 0.05},
        repetitions=20,
        min_pass_rate=0.9,
    )
    payload = run_experiment(cfg, threads=1).payload
    assert len(payload["runs"]) == 20
    assert sum(run["passed"] for run in payload["runs"]) >= 18
    assert payload["passed"]


def test_evaluation_checks_reach_the_run_log(monkeypatch):
    report = run_experiment(_flipped_config(), threads=1)
    assert any("Apenas 20 amostras" in entry for entry in report.logs)

    monkeypatch.setattr(FlippedSolution, "predict", lambda self, alphas: np.full(len(alphas), np.nan))
    with pytest.raises(ValidationError, match="não finitas"):
        run_experiment(_flipped_config(), threads=1)


def test_three_qubit_dispatcher_with_depth_one_layer():
    """n_S = 3, W de profundidade 1, O = Z no qubit 0"""
    cfg = ExperimentConfig.from_dict({
        "concept": {"variant": "unitary_param", "n_S": 3, "decider": "H 0\nCNOT 0 1",
                    "alpha": [0.4, -0.7]},
        "learner": {"kind": "shallow", "k_max": 2},
        "epsilon": 0.05,
        "n_train": 8000,
        "n_test": 400,
    })
    spec, dist = build_concept(cfg.concept)
    assert spec.unitary.depth == 1
    assert spec.base_obs.label == "ZII"

    sample = gen_dataset(spec, dist, 1000, seed=3, threads=1)
    assert abs(sum(x[0] == "1" for x in sample.xs) / 1000 - 0.5) <= 0.05

    report = run_experiment(cfg, threads=1)
    run = report.payload["runs"][0]
    assert run["test_mse"] <= 0.05
    assert run["test_mse_hard_branch"] is not None
    assert run["test_mse_hard_branch"] <= 0.05
    assert abs(run["hard_branch_fraction"] - 0.5) <= 0.05


def test_learner_must_match_concept():
    cfg = _flipped_config().with_override("learner", {"kind": "lasso", "B": 1.0})
    with pytest.raises(ValidationError):
        run_experiment(cfg, threads=1)


# ============================================================
# VARREDURAS
# ============================================================
def test_empty_grid_produces_no_reports():
    reports, table = sweep(_flipped_config(), {})
    assert reports == []
    assert table.empty
    reports, table = sweep(_flipped_config(), {"n_train": []})
    assert reports == []


def test_sweep_runs_every_cell_and_repetition():
    grid = {"n_train": [10, 20, 30], "learner.ridge": [0.0, 0.1]}
    reports, table = sweep(_flipped_config(), grid, threads=2)
    assert len(reports) == 12
    assert len(table) == 6
    assert list(table["runs"]) == [2] * 6
    assert {"learner.ridge", "n_train", "test_mse_mean", "pass_rate"} <= set(table.columns)
    seeds = sorted(r.payload["runs"][0]["seed"] for r in reports)
    assert seeds == [0] * 6 + [1] * 6


# ============================================================
# SUÍTE DE VERIFICAÇÃO
# ============================================================
def test_quick_verify_suite_passes():
    summary = verify_suite(quick=True)
    assert summary["passed"], [c for c in summary["checks"] if not c["passed"]]
    modules = {c["module"] for c in summary["checks"]}
    assert modules == {"clockham", "kitaev", "learners"}
    assert all(c["seconds"] >= 0 for c in summary["checks"])


def test_shallow_error_shrinks_with_sample_size():
    result = shallow_scaling(n=2, k=1, eps_grid=(0.1, 0.2), seeds=4)
    assert len(result["rows"]) == 8
    assert result["slope"] is not None and result["slope"] < 0
    assert result["success_rate"] >= 0.5


def test_shallow_sample_scaling_follows_inverse_square_epsilon():
    """n = 4, 20 sementes: log N contra log erro com inclinação -2 +- 0.3"""
    result = shallow_scaling(n=4, k=2, eps_grid=(0.05, 0.1, 0.2), delta=0.05, seeds=20)
    assert len(result["rows"]) == 60
    assert result["slope"] == pytest.approx(-2.0, abs=0.3)
    at_01 = result["rows"][result["rows"]["epsilon"] == 0.1]
    assert (at_01["inf_error"] <= 0.1).mean() >= 0.9
