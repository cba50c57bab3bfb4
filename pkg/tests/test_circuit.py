"""
Testes do simulador de circuitos, estados produto e do dispatcher U(x)
"""

import sys
import os

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import unitary_group

from core.circuit import (
    Circuit,
    DispatcherSpec,
    Gate,
    StateVector,
    circuit_unitary,
    decider_branch,
    decode_probe_labels,
    dispatcher_state,
    encode_probe_labels,
    gate_sparse,
    gate_unitary,
    prepare_stabilizer_product,
    random_circuit,
    rotation_catalog,
    run_circuit,
)
from core.constants import GateKind
from core.errors import CatalogMissError, DimensionMismatchError, ValidationError
from core.pauli import PauliString, pauli_expectation


def test_x_on_qubit_zero_flips_leftmost_bit():
    c = Circuit(2, (Gate(GateKind.X, (0,)),))
    out = run_circuit(c, "00")
    assert out.fidelity(StateVector.basis("10")) == pytest.approx(1.0)


def test_bell_state():
    c = Circuit(2, (Gate(GateKind.H, (0,)), Gate(GateKind.CNOT, (0, 1))))
    out = run_circuit(c, "00")
    s = 1 / np.sqrt(2)
    assert np.allclose(out.amplitudes, [s, 0, 0, s])
    assert pauli_expectation(out, PauliString("ZZ")) == pytest.approx(1.0)
    assert pauli_expectation(out, PauliString("XX")) == pytest.approx(1.0)


def test_cnot_control_is_first_target():
    c = Circuit(2, (Gate(GateKind.CNOT, (1, 0)),))
    assert run_circuit(c, "01").fidelity(StateVector.basis("11")) == pytest.approx(1.0)
    assert run_circuit(c, "10").fidelity(StateVector.basis("10")) == pytest.approx(1.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=100_000), st.integers(min_value=1, max_value=3))
def test_circuit_followed_by_inverse_is_identity(seed, n):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, n, 8)
    assert np.allclose(circuit_unitary(c.then(c.inverse())), np.eye(2 ** n), atol=1e-10)


def test_rotation_inverse_negates_angle():
    g = Gate(GateKind.RY, (0,), theta=0.3)
    assert g.inverse().theta == pytest.approx(-0.3)
    assert np.allclose(g.matrix @ g.inverse().matrix, np.eye(2))


def test_sparse_embedding_matches_dense_for_reversed_targets():
    rng = np.random.default_rng(3)
    u = unitary_group.rvs(4, random_state=rng)
    g = Gate.custom_gate(u, 2, 0)
    assert np.allclose(gate_sparse(g, 3).toarray(), gate_unitary(g, 3), atol=1e-12)


def test_text_format_preserves_unitary():
    rng = np.random.default_rng(11)
    c = random_circuit(rng, 3, 6).then(Circuit(3, (Gate(GateKind.RZ, (1,), theta=0.7),)))
    parsed = Circuit.from_text(c.to_text(), 3)
    assert parsed.k == c.k
    assert np.allclose(circuit_unitary(parsed), circuit_unitary(c), atol=1e-12)


def test_text_format_skips_comments_and_rejects_unknown_gates():
    c = Circuit.from_text("# preparação\nH 0\n\nCNOT 0 1  # emaranha\n", 2)
    assert [g.kind for g in c.gates] == [GateKind.H, GateKind.CNOT]
    with pytest.raises(ValidationError):
        Circuit.from_text("FOO 0", 1)
    with pytest.raises(ValidationError):
        Circuit.from_text("RX 0", 1)


def test_gate_validation():
    with pytest.raises(ValidationError):
        Gate(GateKind.CNOT, (0, 0))
    with pytest.raises(ValidationError):
        Gate.custom_gate(np.array([[1, 1], [0, 1]]), 0)
    with pytest.raises(ValidationError):
        Circuit(1, (Gate(GateKind.X, (1,)),))


def test_depth_counts_parallel_layers():
    c = Circuit(3, (Gate(GateKind.H, (0,)), Gate(GateKind.H, (1,)), Gate(GateKind.CNOT, (0, 1)),
                    Gate(GateKind.X, (2,))))
    assert c.depth == 2


def test_state_must_be_normalized():
    with pytest.raises(ValidationError):
        StateVector(np.array([1, 1], dtype=complex), 1)
    with pytest.raises(DimensionMismatchError):
        StateVector(np.array([1, 0, 0], dtype=complex), 1)


def test_propagated_state_rejects_norm_drift():
    """Saídas de evolução não são renormalizadas em silêncio"""
    ok = StateVector.propagated(np.array([1 + 1e-12, 0], dtype=complex), 1)
    assert np.linalg.norm(ok.amplitudes) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ValidationError):
        StateVector.propagated(np.array([1.001, 0], dtype=complex), 1)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=100_000), st.integers(min_value=1, max_value=4))
def test_run_circuit_preserves_norm_without_rescaling(seed, n):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, n, 30)
    psi = StateVector.basis("0" * n)
    raw = circuit_unitary(c) @ psi.amplitudes
    assert np.linalg.norm(raw) == pytest.approx(1.0, abs=1e-10)
    assert np.allclose(run_circuit(c, psi).amplitudes, raw, atol=1e-10)


def test_run_circuit_rejects_wrong_width():
    with pytest.raises(DimensionMismatchError):
        run_circuit(Circuit(2), "000")


# ============================================================
# SONDAS DE ESTABILIZADOR
# ============================================================
def test_stabilizer_product_order():
    state = prepare_stabilizer_product([1, 0])
    assert state.fidelity(StateVector.basis("10")) == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        prepare_stabilizer_product([6])


def test_probe_label_codec():
    assert decode_probe_labels("010101", 2) == (2, 5)
    assert encode_probe_labels((2, 5), 8) == "01010100"
    with pytest.raises(CatalogMissError):
        decode_probe_labels("110", 1)
    with pytest.raises(CatalogMissError):
        decode_probe_labels("01", 1)


# ============================================================
# DISPATCHER
# ============================================================
def _decider() -> Circuit:
    return Circuit(2, (Gate(GateKind.H, (0,)), Gate(GateKind.CNOT, (0, 1))))


def test_rotation_catalog_identity_at_zero():
    catalog = rotation_catalog(2, 2)
    assert sorted(catalog) == ["00", "01", "10", "11"]
    assert catalog["00"].k == 0
    assert catalog["01"].gates[0].kind is GateKind.H
    assert [g.kind for g in catalog["10"].gates] == [GateKind.H, GateKind.S]


def test_dispatcher_hard_branch_runs_decider():
    spec = DispatcherSpec(n=1 + 3 * 2, n_Q=0, n_S=2, bqp_branch=decider_branch(_decider()))
    x = "1" + "10" + "0000"
    out = dispatcher_state(spec, x)
    expected = StateVector.basis("1").tensor(run_circuit(_decider(), "10"))
    assert out.fidelity(expected) == pytest.approx(1.0)


def test_dispatcher_probe_branch_prepares_product_state():
    spec = DispatcherSpec(n=1 + 3 * 2, n_Q=0, n_S=2, bqp_branch=decider_branch(_decider()))
    x = "0" + encode_probe_labels((3, 4), 6)
    out = dispatcher_state(spec, x)
    expected = StateVector.basis("0").tensor(prepare_stabilizer_product((3, 4)))
    assert out.fidelity(expected) == pytest.approx(1.0)
    assert spec.split(x) == ("0", "", "011100")


def test_dispatcher_rejects_incomplete_catalog():
    branch = decider_branch(_decider())
    branch.pop("11")
    with pytest.raises(ValidationError):
        DispatcherSpec(n=7, n_Q=0, n_S=2, bqp_branch=branch)


def test_dispatcher_serialization_preserves_catalogs():
    spec = DispatcherSpec(n=8, n_Q=1, n_S=2, bqp_branch=decider_branch(_decider()))
    restored = DispatcherSpec.from_dict(spec.to_dict())
    assert restored.n == 8 and restored.n_Q == 1
    assert np.allclose(circuit_unitary(restored.bqp_branch["01"]), circuit_unitary(spec.bqp_branch["01"]))
    assert sorted(restored.observable_catalog) == ["0", "1"]
