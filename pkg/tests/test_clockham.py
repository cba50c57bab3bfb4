"""
Testes dos Hamiltonianos de relógio: transferência perfeita com pesos
sqrt(j(k+1-j)), relógio de Feynman e imersão unária
"""

import sys
import os
import math

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.circuit import Circuit, Gate, StateVector, random_circuit, run_circuit
from core.clockham import (
    build_childs_weighted,
    build_feynman_clock,
    chain_leakage,
    childs_weights,
    clock_isometry,
    unary_embedding,
    unary_index,
    verify_perfect_transfer,
)
from core.constants import GateKind
from core.errors import DimensionMismatchError, ResourceLimitError, ValidationError
from core.spectral import evolve


def _sample_circuit() -> Circuit:
    return Circuit(2, (
        Gate(GateKind.H, (0,)),
        Gate(GateKind.CNOT, (0, 1)),
        Gate(GateKind.T, (1,)),
        Gate(GateKind.X, (0,)),
    ))


def test_childs_weights_for_three_gates():
    assert np.allclose(childs_weights(3), (math.sqrt(3), 2.0, math.sqrt(3)))


@pytest.mark.parametrize("k", [1, 2, 5, 8])
def test_weights_are_symmetric(k):
    w = childs_weights(k)
    assert np.allclose(w, w[::-1])


def test_restricted_chain_spectrum_is_equally_spaced():
    """Na cadeia de Krylov, H' = 2 J_x: autovalores -k, -k+2, ..., k"""
    h = build_childs_weighted(_sample_circuit())
    restricted = h.restricted_matrix(StateVector.basis("00"))
    evals = np.linalg.eigvalsh(restricted)
    assert np.allclose(evals, [-4, -2, 0, 2, 4], atol=1e-10)
    assert np.allclose(np.diag(restricted, -1), childs_weights(4))


def test_perfect_transfer_at_pi():
    report = verify_perfect_transfer(_sample_circuit(), StateVector.basis("00"), tol=1e-9)
    assert report.passed
    assert report.fidelity == pytest.approx(1.0, abs=1e-9)
    assert report.t_used == pytest.approx(math.pi)
    assert report.scale == 0.5
    assert report.leakage < 1e-9


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=0, max_value=100_000),
       st.integers(min_value=1, max_value=3),
       st.integers(min_value=1, max_value=6))
def test_perfect_transfer_for_random_circuits(seed, n, k):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, n, k)
    psi = run_circuit(random_circuit(rng, n, 3), "0" * n)
    report = verify_perfect_transfer(c, psi, tol=1e-9, leakage_samples=4)
    assert report.passed


def test_feynman_clock_does_not_transfer_perfectly():
    """Pesos uniformes em cadeia de 5 níveis não têm transferência perfeita"""
    c = Circuit(1, tuple(Gate(GateKind.H, (0,)) for _ in range(4)))
    report = verify_perfect_transfer(c, StateVector.basis("0"), tol=1e-9, weighted=False)
    assert not report.passed
    assert report.fidelity < 1 - 1e-6


def test_chain_stays_in_krylov_span():
    h = build_feynman_clock(_sample_circuit())
    assert chain_leakage(h, StateVector.basis("10"), np.linspace(0, 3, 7)) < 1e-9


def test_locality_of_unary_terms():
    """Porta de 2 qubits + no máximo 3 qubits de relógio"""
    h = build_childs_weighted(_sample_circuit())
    assert h.locality <= 5
    assert all(len(s) <= 5 for s in h.term_supports())


def test_unary_index():
    assert unary_index(0, 3) == 0
    assert unary_index(1, 3) == 0b100
    assert unary_index(2, 3) == 0b110
    assert unary_index(3, 3) == 0b111


def test_unary_embedding_reproduces_abstract_operator():
    h = build_childs_weighted(_sample_circuit())
    op, iso = unary_embedding(h)
    assert op.dim == 2 ** (2 + 4)
    projected = (iso.conj().T @ op.matrix @ iso).toarray()
    assert np.allclose(projected, h.operator.matrix.toarray())


def test_unary_evolution_matches_abstract():
    h = build_childs_weighted(_sample_circuit())
    op, iso = unary_embedding(h)
    start = StateVector.basis("01").with_register(h.levels, 0)
    abstract = evolve(h.generator, start, 1.1).amplitudes
    lifted = StateVector(iso @ start.amplitudes, op.n)
    unary = evolve(op.scaled(h.scale), lifted, 1.1).amplitudes
    assert np.allclose(iso @ abstract, unary, atol=1e-10)


def test_isometry_columns_are_orthonormal():
    iso = clock_isometry(2, 3)
    assert iso.shape == (2 ** 5, 4 * 4)
    assert np.allclose((iso.conj().T @ iso).toarray(), np.eye(16))


def test_unary_embedding_respects_qubit_cap(monkeypatch):
    monkeypatch.setenv("OBSLEARN_QUBIT_CAP", "4")
    with pytest.raises(ResourceLimitError):
        unary_embedding(build_childs_weighted(_sample_circuit()))


def test_invalid_inputs():
    with pytest.raises(ValidationError):
        build_childs_weighted(Circuit(2))
    with pytest.raises(ValidationError):
        verify_perfect_transfer(_sample_circuit(), StateVector.basis("00"), tol=0.0)
    with pytest.raises(DimensionMismatchError):
        verify_perfect_transfer(_sample_circuit(), StateVector.basis("0"), tol=1e-9)
