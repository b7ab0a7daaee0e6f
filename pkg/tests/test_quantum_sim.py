import numpy as np
import pytest
from hypothesis import given, strategies as st

from hybridqss.errors import CapacityError
from hybridqss.quantum_sim import (
    MAX_MIXED_DIM,
    QuditState,
    UnitaryOp,
    apply_on,
    fidelity,
    generalized_pauli,
    haar_random_state,
    ket,
    maximally_mixed,
    mixed,
    partial_trace,
    permute_subsystems,
    pure,
    swap_matrix,
    tensor,
    tomographic_set,
    trace_distance,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)
BELL = pure(np.array([1, 0, 0, 1]) / np.sqrt(2), (2, 2))


def test_tensor():
    assert np.allclose(tensor(ket([0], [2]), ket([1], [2])).data, [0, 1, 0, 0])
    rho = tensor(maximally_mixed(2), ket([0], [2]))
    assert np.allclose(rho.density(), np.diag([0.5, 0, 0.5, 0]))


def test_apply_on():
    s = ket([0, 0], [2, 2])
    assert np.allclose(apply_on(s, UnitaryOp(X), [0]).data, ket([1, 0], [2, 2]).data)
    assert np.allclose(apply_on(s, UnitaryOp(np.eye(2)), [1]).data, s.data)
    assert np.allclose(apply_on(ket([0, 1], [2, 2]), UnitaryOp(swap_matrix(2)), [0, 1]).data, ket([1, 0], [2, 2]).data)


def test_apply_on_mixed_matches_pure(rng):
    psi = tensor(haar_random_state(3, rng), haar_random_state(2, rng))
    u = UnitaryOp(np.linalg.qr(rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))[0])
    a = apply_on(psi, u, [0, 1]).density()
    b = apply_on(psi.as_mixed(), u, [0, 1]).density()
    assert np.allclose(a, b, atol=1e-12)


def test_unitary_rejects_nonunitary():
    with pytest.raises(ValueError):
        UnitaryOp(np.array([[1, 1], [0, 1]]))


def test_partial_trace():
    assert np.allclose(partial_trace(BELL, [0]).density(), np.eye(2) / 2)
    assert np.allclose(partial_trace(BELL, [1]).density(), np.eye(2) / 2)
    prod = tensor(ket([1], [3]), ket([0], [2]))
    assert np.allclose(partial_trace(prod, [0]).density(), np.diag([0, 1, 0]))
    assert np.allclose(partial_trace(BELL, [0, 1]).density(), BELL.density())


def test_partial_trace_capacity():
    big = ket([0] * 13, [2] * 13)
    with pytest.raises(CapacityError):
        partial_trace(big, list(range(13)))
    assert 2**12 == MAX_MIXED_DIM


def test_trace_distance_and_fidelity():
    zero, one = ket([0], [2]), ket([1], [2])
    assert trace_distance(zero, one) == pytest.approx(1.0)
    assert trace_distance(zero, maximally_mixed(2)) == pytest.approx(0.5)
    assert fidelity(zero, maximally_mixed(2)) == pytest.approx(0.5)
    assert fidelity(zero, one) == pytest.approx(0.0)


def test_generalized_pauli():
    assert np.allclose(generalized_pauli(0, 0, 2).matrix, np.eye(2))
    assert np.allclose(generalized_pauli(1, 0, 2).matrix, X)
    assert np.allclose(generalized_pauli(0, 1, 2).matrix, Z)
    assert np.allclose(generalized_pauli(1, 1, 2).matrix, X @ Z)
    out = apply_on(ket([2], [3]), generalized_pauli(1, 0, 3), [0])
    assert np.allclose(out.data, ket([0], [3]).data)


def test_permute_subsystems():
    s = ket([0, 1, 2], [2, 3, 4], ["a", "b", "c"])
    p = permute_subsystems(s, [2, 0, 1])
    assert p.dims == (4, 2, 3) and p.labels == ("c", "a", "b")
    assert np.allclose(p.data, ket([2, 0, 1], [4, 2, 3]).data)


def test_tomographic_set_spans_hermitian_space():
    for d in (2, 3, 5):
        states = tomographic_set(d)
        assert len(states) == d * d
        m = np.array([s.density().reshape(-1) for s in states])
        assert np.linalg.matrix_rank(m) == d * d


def test_state_validation():
    with pytest.raises(ValueError):
        QuditState(np.array([1, 1]), (2,))
    with pytest.raises(ValueError):
        mixed(np.array([[1, 0], [0, 1]]), (2,))


@given(st.integers(0, 10_000), st.sampled_from([(2, 2, 2), (3, 2), (5,), (3, 3)]))
def test_partial_traces_are_states(seed, dims):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=int(np.prod(dims))) + 1j * rng.normal(size=int(np.prod(dims)))
    s = pure(v, dims, normalize=True)
    for k in range(len(dims)):
        r = partial_trace(s, [k]).density()
        assert np.trace(r) == pytest.approx(1.0)
        assert np.allclose(r, r.conj().T)
        assert np.linalg.eigvalsh(r).min() > -1e-12
