"""
Testes para utilitários de cálculo seguro e de bitstrings
Verifica divisões com denominador nulo, erro padrão e ajuste log-log
"""

import sys
import os
import math

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.errors import ValidationError
from utils.bit_utils import (
    all_bitstrings,
    bitstring_to_index,
    index_to_bitstring,
    random_bitstring,
    validate_bitstring,
)
from utils.calculation_utils import log_log_slope, safe_division, standard_error


# ============================================================
# DIVISÃO SEGURA
# ============================================================
def test_safe_division():
    """Testa divisão com denominadores normais, nulos e não finitos"""
    assert safe_division(1.0, 4.0) == 0.25
    assert safe_division(1.0, 0.0) == 0.0
    assert safe_division(1.0, 0.0, default=-1.0) == -1.0
    assert safe_division(1.0, 1e-12, min_threshold=1e-9) == 0.0


# ============================================================
# ERRO PADRÃO
# ============================================================
def test_standard_error():
    assert standard_error([]) == 0.0
    assert standard_error([3.0]) == 0.0
    # desvio amostral 1, n = 4
    assert standard_error([1.0, 2.0, 3.0, 2.0]) == pytest.approx(math.sqrt(2 / 3) / 2)


# ============================================================
# AJUSTE LOG-LOG
# ============================================================
def test_log_log_slope_of_power_law():
    assert log_log_slope([1, 2, 4], [1, 4, 16]) == pytest.approx(2.0)
    assert log_log_slope([10, 100, 1000], [1.0, 0.1, 0.01]) == pytest.approx(-1.0)


def test_log_log_slope_ignores_nonpositive_points():
    assert log_log_slope([0, 1, 2], [5, 1, 2]) == pytest.approx(1.0)
    assert log_log_slope([1, 2], [0, 3]) is None
    assert log_log_slope([], []) is None


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=-3.0, max_value=3.0), st.floats(min_value=0.1, max_value=10.0))
def test_log_log_slope_recovers_exponent(exponent, scale):
    xs = np.array([1.0, 2.0, 5.0, 10.0])
    assert log_log_slope(xs, scale * xs ** exponent) == pytest.approx(exponent, abs=1e-9)


# ============================================================
# BITSTRINGS
# ============================================================
def test_bitstring_index_uses_first_bit_as_most_significant():
    assert bitstring_to_index("10") == 2
    assert bitstring_to_index("") == 0
    assert index_to_bitstring(2, 3) == "010"
    assert index_to_bitstring(0, 0) == ""


def test_all_bitstrings_order():
    assert all_bitstrings(2) == ["00", "01", "10", "11"]
    assert all_bitstrings(0) == [""]


def test_validate_bitstring():
    assert validate_bitstring("0101", 4) == "0101"
    with pytest.raises(ValidationError):
        validate_bitstring("012")
    with pytest.raises(ValidationError):
        validate_bitstring("01", 3)
    with pytest.raises(ValidationError):
        validate_bitstring(5)


def test_random_bitstring_extremes():
    rng = np.random.default_rng(0)
    assert random_bitstring(rng, 6, p=0.0) == "000000"
    assert random_bitstring(rng, 6, p=1.0) == "111111"
    assert len(random_bitstring(rng, 9)) == 9
