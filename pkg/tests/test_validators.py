"""
Testes de validação de configurações de experimento, aprendizes e ruído
"""

import sys
import os

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import numpy as np
import pytest

from core.errors import ValidationError
from core.validators import DataValidator, require_valid


def _experiment(**overrides):
    data = {"concept": {"variant": "hard_instance"}, "learner": {"kind": "lasso"}, "epsilon": 0.1}
    data.update(overrides)
    return data


def test_validate_experiment():
    assert DataValidator.validate_experiment(_experiment())[0]
    assert not DataValidator.validate_experiment({"concept": {"variant": "hard_instance"}, "epsilon": 0.1})[0]
    assert not DataValidator.validate_experiment(_experiment(concept={"variant": "tomography"}))[0]
    assert not DataValidator.validate_experiment(_experiment(epsilon=0))[0]
    assert not DataValidator.validate_experiment(_experiment(delta=1.0))[0]
    assert not DataValidator.validate_experiment(_experiment(n_test="muitos"))[0]
    assert not DataValidator.validate_experiment(_experiment(repetitions=0))[0]


def test_noise_must_not_exceed_epsilon():
    ok, message = DataValidator.validate_experiment(_experiment(noise={"kind": "uniform", "eps2": 0.2}))
    assert not ok
    assert "excede epsilon" in message
    assert DataValidator.validate_experiment(_experiment(noise={"kind": "uniform", "eps2": 0.1}))[0]


def test_validate_noise():
    assert DataValidator.validate_noise({})[0]
    assert not DataValidator.validate_noise({"kind": "gaussian"})[0]
    assert not DataValidator.validate_noise({"kind": "uniform"})[0]
    assert not DataValidator.validate_noise({"kind": "shots", "shots": 0})[0]
    assert DataValidator.validate_noise({"kind": "shots", "shots": 100})[0]


def test_validate_distribution():
    assert DataValidator.validate_distribution({"kind": "product-bernoulli", "p": [0.1, 1.0]})[0]
    assert not DataValidator.validate_distribution({"kind": "product-bernoulli", "p": 1.5})[0]
    assert not DataValidator.validate_distribution({"kind": "explicit-table", "table": {}})[0]
    assert not DataValidator.validate_distribution({"kind": "explicit-table", "table": {"0": 0.4, "1": 0.4}})[0]
    assert DataValidator.validate_distribution({"kind": "explicit-table", "table": {"0": 0.25, "1": 0.75}})[0]


def test_validate_lasso_config():
    assert DataValidator.validate_lasso_config({"B": 0.0, "eps3": 0.1})[0]
    assert not DataValidator.validate_lasso_config({"B": -1.0, "eps3": 0.1})[0]
    assert not DataValidator.validate_lasso_config({"B": 1.0, "eps3": 0.0})[0]
    assert not DataValidator.validate_lasso_config({"B": 1.0})[0]
    assert not DataValidator.validate_lasso_config({"B": 1.0, "eps3": 0.1, "max_iters": 0})[0]
    assert not DataValidator.validate_lasso_config({"B": 1.0, "eps3": 0.1, "step_rule": "adam"})[0]


def test_validate_shallow_config():
    base = {"k_max": 2, "epsilon": 0.1, "delta": 0.1}
    assert DataValidator.validate_shallow_config(base, n=3)[0]
    assert not DataValidator.validate_shallow_config(base, n=1)[0]
    assert not DataValidator.validate_shallow_config({**base, "epsilon": 1.0})[0]
    assert not DataValidator.validate_shallow_config({**base, "threshold": -0.1})[0]


def test_validate_features():
    assert DataValidator.validate_features(np.ones((2, 3)))[0]
    assert not DataValidator.validate_features(np.ones(3))[0]
    assert not DataValidator.validate_features(np.array([[1.5]]))[0]
    assert not DataValidator.validate_features(np.array([[np.inf]]))[0]


def test_require_valid_raises_with_message():
    require_valid((True, "ok"))
    with pytest.raises(ValidationError, match="eps3"):
        require_valid(DataValidator.validate_lasso_config({"B": 1.0}))
