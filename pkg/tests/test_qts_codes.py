import numpy as np
import pytest
from hypothesis import given, strategies as st

from hybridqss.errors import InsufficientShares, SchemeError
from hybridqss.qts_codes import (
    DISCARDED,
    QotpKey,
    QtsCode,
    codeword,
    permute_shares,
    qotp_decrypt,
    qotp_encrypt,
    qotp_key_average,
    qts_encode,
    qts_reconstruct,
    recovery_unitary,
)
from hybridqss.quantum_sim import (
    fidelity,
    haar_random_state,
    ket,
    maximally_mixed,
    partial_trace,
    pure,
    tomographic_set,
    trace_distance,
)

QUTRIT = QtsCode(2, 3, 3)

# the qutrit code written out term by term
CODEWORDS = {
    0: ["000", "111", "222"],
    1: ["012", "120", "201"],
    2: ["021", "210", "102"],
}


def reference(s):
    v = np.zeros(27, dtype=complex)
    for t in CODEWORDS[s]:
        v[int(t, 3)] = 1 / np.sqrt(3)
    return v


@pytest.mark.parametrize("s", [0, 1, 2])
def test_qutrit_codewords(s):
    assert np.max(np.abs(codeword(QUTRIT, s).data - reference(s))) < 1e-12


def test_superposition_encodes_linearly(rng):
    amps = rng.normal(size=3) + 1j * rng.normal(size=3)
    amps /= np.linalg.norm(amps)
    enc = qts_encode(pure(amps, (3,)), QUTRIT)
    assert np.max(np.abs(enc.data - sum(a * reference(s) for s, a in enumerate(amps)))) < 1e-12


@pytest.mark.parametrize("positions", [(0, 1), (1, 2), (0, 2), (2, 0)])
def test_any_two_shares_recover(positions, rng):
    for _ in range(5):
        secret = haar_random_state(3, rng)
        out = qts_reconstruct(qts_encode(secret, QUTRIT), positions, QUTRIT)
        assert fidelity(secret, partial_trace(out, [positions[0]])) > 1 - 1e-12


def test_single_share_refused_and_mixed():
    enc = codeword(QUTRIT, 1)
    with pytest.raises(InsufficientShares):
        qts_reconstruct(enc, [0], QUTRIT)
    for psi in tomographic_set(3):
        e = qts_encode(psi, QUTRIT)
        for i in range(3):
            assert trace_distance(partial_trace(e, [i]), maximally_mixed(3)) < 1e-12


@pytest.mark.parametrize("perm", [(1, 0, 2), (0, 2, 1), (2, 1, 0)])
def test_transpositions(perm):
    zero = codeword(QUTRIT, 0)
    assert fidelity(zero, permute_shares(zero, perm)) > 1 - 1e-12
    plus = qts_encode(pure(np.array([0, 1, 1]) / np.sqrt(2), (3,)), QUTRIT)
    assert fidelity(plus, permute_shares(plus, perm)) > 1 - 1e-12
    assert fidelity(codeword(QUTRIT, 2), permute_shares(codeword(QUTRIT, 1), perm)) > 1 - 1e-12


def test_code_validation():
    with pytest.raises(SchemeError):
        QtsCode(2, 4, 3)  # k <= n/2
    with pytest.raises(SchemeError):
        QtsCode(3, 4, 3)  # d < 2k-1
    with pytest.raises(SchemeError):
        QtsCode(2, 3, 4)  # d not prime


def test_discarded_labels():
    code = QtsCode(3, 4, 5)
    assert code.labels() == ("share0", "share1", "share2", "share3", DISCARDED)


def test_recovery_rejects_bad_positions():
    with pytest.raises(SchemeError):
        recovery_unitary(QtsCode(3, 4, 5), (0, 1, 4))
    with pytest.raises(ValueError):
        recovery_unitary(QtsCode(3, 4, 5), (0, 1))


@given(st.sampled_from([(2, 3, 3), (2, 3, 5), (3, 5, 5), (3, 4, 5), (1, 1, 2)]), st.integers(0, 10_000))
def test_every_k_subset_recovers(params, seed):
    k, n, d = params
    code = QtsCode(k, n, d)
    rng = np.random.default_rng(seed)
    secret = haar_random_state(d, rng)
    enc = qts_encode(secret, code)
    positions = [int(x) for x in rng.permutation(n)[:k]]
    out = qts_reconstruct(enc, positions, code)
    assert fidelity(secret, partial_trace(out, [positions[0]])) > 1 - 1e-10


def test_qotp_examples():
    s = ket([0], [2])
    assert np.allclose(qotp_encrypt(s, [0], QotpKey(((0, 0),), 2)).data, s.data)
    assert np.allclose(qotp_encrypt(ket([2], [3]), [0], QotpKey(((1, 0),), 3)).data, ket([0], [3]).data)
    wrong = qotp_decrypt(s, [0], QotpKey(((1, 0),), 2))
    assert fidelity(s, wrong) == pytest.approx(0.0)
    assert np.allclose(qotp_encrypt(s, [], QotpKey((), 2)).data, s.data)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_qotp_average_is_maximally_mixed(d, rng):
    for _ in range(5):
        avg = qotp_key_average(haar_random_state(d, rng), [0])
        assert np.max(np.abs(avg.density() - np.eye(d) / d)) < 1e-12


@given(st.integers(0, 10_000))
def test_qotp_roundtrip_two_qutrits(seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=9) + 1j * rng.normal(size=9)
    s = pure(v, (3, 3), normalize=True)
    key = QotpKey.random(3, 2, rng)
    back = qotp_decrypt(qotp_encrypt(s, [0, 1], key), [0, 1], key)
    assert np.max(np.abs(back.data - s.data)) < 1e-12


def test_qotp_key_validation():
    with pytest.raises(ValueError):
        QotpKey(((3, 0),), 3)
    with pytest.raises(ValueError):
        qotp_encrypt(ket([0, 0], [3, 3]), [0, 1], QotpKey(((1, 0),), 3))
