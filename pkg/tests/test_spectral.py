"""
Testes do núcleo espectral: evolução e^{iHt}, estado fundamental, gap e
formato texto de operadores
"""

import sys
import os
import math

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import sparse
from scipy.linalg import expm

from core.circuit import StateVector
from core.errors import (
    ConvergenceError,
    DegenerateGroundStateError,
    DimensionMismatchError,
    ResourceLimitError,
    ValidationError,
)
from core.spectral import (
    SparseHermitian,
    _evolve_krylov,
    dump_operator,
    evolve,
    evolve_many,
    ground_state,
    load_operator,
    spectral_gap,
)


def _random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def _random_state(rng, n):
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return StateVector.normalized(v, n)


def test_evolve_matches_matrix_exponential():
    rng = np.random.default_rng(0)
    h = _random_hermitian(rng, 8)
    psi = _random_state(rng, 3)
    out = evolve(SparseHermitian.from_dense(h, 3), psi, 0.7)
    assert np.allclose(out.amplitudes, expm(1j * 0.7 * h) @ psi.amplitudes, atol=1e-10)


def test_krylov_path_matches_matrix_exponential(monkeypatch):
    """Acima do limite denso a evolução usa Lanczos"""
    monkeypatch.setenv("OBSLEARN_DENSE_DIM", "4")
    rng = np.random.default_rng(1)
    h = _random_hermitian(rng, 16)
    op = SparseHermitian.from_dense(h, 4)
    assert not op.use_dense()
    psi = _random_state(rng, 4)
    out = evolve(op, psi, 2.5)
    assert np.allclose(out.amplitudes, expm(1j * 2.5 * h) @ psi.amplitudes, atol=1e-8)


def test_evolution_sign_convention():
    """e^{iX pi/2}|0> = i|1>"""
    x = SparseHermitian.from_dense(np.array([[0, 1], [1, 0]]), 1)
    out = evolve(x, StateVector.basis("0"), math.pi / 2)
    assert np.allclose(out.amplitudes, [0, 1j], atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.floats(min_value=-20, max_value=20))
def test_evolution_preserves_norm(seed, t):
    rng = np.random.default_rng(seed)
    op = SparseHermitian.from_dense(_random_hermitian(rng, 4), 2)
    out = evolve(op, _random_state(rng, 2), t)
    assert np.linalg.norm(out.amplitudes) == pytest.approx(1.0, abs=1e-10)


def test_evolve_zero_time_and_invalid_time():
    op = SparseHermitian.from_dense(np.diag([1.0, -1.0]), 1)
    psi = StateVector.basis("1")
    assert evolve(op, psi, 0.0) is psi
    with pytest.raises(ValidationError):
        evolve(op, psi, float("nan"))


def test_evolve_many_matches_sequential():
    rng = np.random.default_rng(5)
    op = SparseHermitian.from_dense(_random_hermitian(rng, 8), 3)
    states = [_random_state(rng, 3) for _ in range(4)]
    parallel = evolve_many(op, states, 1.3, threads=3)
    for s, p in zip(states, parallel):
        assert np.allclose(evolve(op, s, 1.3).amplitudes, p.amplitudes)


def test_layout_mismatch_is_rejected():
    op = SparseHermitian.from_dense(np.eye(4), 2)
    with pytest.raises(DimensionMismatchError):
        evolve(op, StateVector.basis("0"), 1.0)
    with pytest.raises(DimensionMismatchError):
        SparseHermitian.from_dense(np.eye(6), 2)


def test_non_hermitian_is_rejected():
    with pytest.raises(ValidationError):
        SparseHermitian.from_dense(np.array([[0, 1], [0, 0]]), 1)


def test_sparse_dimension_cap(monkeypatch):
    monkeypatch.setenv("OBSLEARN_SPARSE_DIM", "4")
    with pytest.raises(ResourceLimitError):
        SparseHermitian(sparse.identity(8, format="csr"), 3)


def _random_sparse_hermitian(rng, dim, per_row=4):
    nnz = dim * per_row
    rows = rng.integers(0, dim, size=nnz)
    cols = rng.integers(0, dim, size=nnz)
    vals = rng.normal(size=nnz) + 1j * rng.normal(size=nnz)
    a = sparse.csr_matrix((vals, (rows, cols)), shape=(dim, dim))
    return (a + a.conj().T) / 2


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=0, max_value=10_000),
       st.floats(min_value=-3, max_value=3),
       st.floats(min_value=-3, max_value=3))
def test_evolution_group_law(seed, s, t):
    """e^{iH(s+t)} = e^{iHt} e^{iHs}"""
    rng = np.random.default_rng(seed)
    op = SparseHermitian.from_dense(_random_hermitian(rng, 8), 3)
    psi = _random_state(rng, 3)
    composed = evolve(op, evolve(op, psi, s), t)
    direct = evolve(op, psi, s + t)
    assert np.allclose(composed.amplitudes, direct.amplitudes, atol=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.floats(min_value=-10, max_value=10))
def test_evolution_conserves_energy(seed, t):
    rng = np.random.default_rng(seed)
    op = SparseHermitian.from_dense(_random_hermitian(rng, 16), 4)
    psi = _random_state(rng, 4)
    assert op.expectation(evolve(op, psi, t)) == pytest.approx(op.expectation(psi), abs=1e-9)


@settings(max_examples=8, deadline=None)
@given(st.integers(min_value=0, max_value=10_000),
       st.integers(min_value=4, max_value=10),
       st.floats(min_value=-3, max_value=3))
def test_krylov_matches_dense_on_random_sparse_operators(seed, n, t):
    """Até dimensão 1024: Krylov bruto contra a decomposição espectral densa"""
    rng = np.random.default_rng(seed)
    matrix = _random_sparse_hermitian(rng, 2 ** n)
    op = SparseHermitian(matrix, n)
    psi = _random_state(rng, n).amplitudes

    raw = _evolve_krylov(op, psi, t)
    assert np.linalg.norm(raw) == pytest.approx(1.0, abs=1e-9)

    evals, evecs = np.linalg.eigh(matrix.toarray())
    expected = evecs @ (np.exp(1j * t * evals) * (evecs.conj().T @ psi))
    assert np.allclose(raw, expected, atol=1e-7)


def test_norm_drift_is_reported_not_hidden(monkeypatch):
    monkeypatch.setenv("OBSLEARN_DENSE_DIM", "4")
    monkeypatch.setattr("core.spectral._evolve_krylov", lambda h, psi, t: 1.01 * psi)
    rng = np.random.default_rng(4)
    op = SparseHermitian.from_dense(_random_hermitian(rng, 16), 4)
    with pytest.raises(ConvergenceError):
        evolve(op, _random_state(rng, 4), 1.0)


# ============================================================
# ESTADO FUNDAMENTAL
# ============================================================
def test_ground_state_and_gap():
    op = SparseHermitian.from_dense(np.diag([3.0, 1.0, 2.0, 5.0]), 2)
    result = ground_state(op)
    assert result.energy == pytest.approx(1.0)
    assert result.gap == pytest.approx(1.0)
    assert not result.degenerate
    assert result.state.fidelity(StateVector.basis("01")) == pytest.approx(1.0)
    assert result.residual < 1e-12
    assert spectral_gap(op) == pytest.approx(1.0)


def test_degenerate_ground_state_is_flagged():
    op = SparseHermitian.from_dense(np.diag([1.0, 1.0, 2.0, 2.0]), 2)
    assert ground_state(op).degenerate
    with pytest.raises(DegenerateGroundStateError):
        ground_state(op, require_unique=True)


def test_lanczos_ground_state_matches_dense(monkeypatch):
    rng = np.random.default_rng(9)
    h = _random_hermitian(rng, 32)
    expected = np.linalg.eigvalsh(h)
    monkeypatch.setenv("OBSLEARN_DENSE_DIM", "8")
    result = ground_state(SparseHermitian.from_dense(h, 5))
    assert result.energy == pytest.approx(expected[0], abs=1e-8)
    assert result.gap == pytest.approx(expected[1] - expected[0], abs=1e-8)


def test_gap_requires_two_levels():
    with pytest.raises(ValidationError):
        spectral_gap(SparseHermitian.from_dense(np.array([[1.0]]), 0))


# ============================================================
# FORMATO TEXTO
# ============================================================
def test_operator_text_format_preserves_entries():
    rng = np.random.default_rng(2)
    op = SparseHermitian.from_dense(_random_hermitian(rng, 4), 2)
    text = dump_operator(op)
    assert text.startswith("dim 4\n")
    restored = load_operator(text, 2)
    assert np.allclose(restored.matrix.toarray(), op.matrix.toarray())


def test_operator_text_format_errors():
    with pytest.raises(ValidationError):
        load_operator("0 0 1.0 0.0\n")
    with pytest.raises(ValidationError):
        load_operator("dim 2\n0 0 1.0\n")
    with pytest.raises(ValidationError):
        load_operator("dim 2\n0 5 1.0 0.0\n")
