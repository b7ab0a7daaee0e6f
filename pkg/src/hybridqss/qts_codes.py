"""Polynomial quantum threshold codes and the quantum one-time pad.

A ((k,n)) code over a prime dimension d maps |s> to the uniform
superposition of |f(x_0), ..., f(x_{2k-2})> over all polynomials f of degree
below k whose x^(k-1) coefficient is s. With the default points 0..2k-2 and
k=2, d=3 this is the familiar qutrit code

    |0> -> |000> + |111> + |222>
    |1> -> |012> + |120> + |201>
    |2> -> |021> + |210> + |102>

(up to 1/sqrt(3)). When n < 2k-1 the surplus positions are kept in the
state but labelled ``discarded``.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .classical_sharing import is_prime, poly_eval
from .errors import InsufficientShares, SchemeError
from .quantum_sim import (
    QuditState,
    apply_on,
    generalized_pauli,
    ket,
    permute_subsystems,
    replace_subsystem,
)

DISCARDED = "discarded"


@dataclass(frozen=True)
class QtsCode:
    k: int
    n: int
    d: int
    eval_points: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not (1 <= self.k <= self.n and 2 * self.k > self.n):
            raise SchemeError(f"(({self.k},{self.n})) violates n/2 < k <= n")
        if not is_prime(self.d):
            raise SchemeError(f"code dimension {self.d} is not prime")
        if self.d < 2 * self.k - 1:
            raise SchemeError(f"(({self.k},{self.n})) needs d >= {2 * self.k - 1}, got {self.d}")
        pts = tuple(self.eval_points) or tuple(range(2 * self.k - 1))
        if len(pts) != 2 * self.k - 1 or len(set(pts)) != len(pts) or any(not 0 <= x < self.d for x in pts):
            raise SchemeError(f"need {2 * self.k - 1} distinct evaluation points in [0,{self.d}), got {pts}")
        object.__setattr__(self, "eval_points", pts)

    @property
    def n_full(self) -> int:
        return 2 * self.k - 1

    def labels(self) -> tuple[str, ...]:
        return tuple(f"share{i}" if i < self.n else DISCARDED for i in range(self.n_full))


@functools.lru_cache(maxsize=64)
def _isometry(k: int, d: int, points: tuple[int, ...]) -> np.ndarray:
    size = d ** len(points)
    v = np.zeros((size, d), dtype=complex)
    amp = d ** (-(k - 1) / 2)
    for s in range(d):
        for low in itertools.product(range(d), repeat=k - 1):
            coeffs = list(low) + [s]
            vals = [poly_eval(coeffs, x, d) for x in points]
            v[np.ravel_multi_index(vals, (d,) * len(points)), s] += amp
    v.flags.writeable = False
    return v


def encoding_isometry(code: QtsCode) -> np.ndarray:
    """The d^(2k-1) x d matrix of the encoder."""
    return _isometry(code.k, code.d, code.eval_points)


def qts_encode(secret: QuditState, code: QtsCode, target: int = 0) -> QuditState:
    """Encode subsystem ``target`` of ``secret`` into 2k-1 code qudits."""
    if not secret.is_pure:
        raise ValueError("qts_encode expects a pure state")
    if secret.dims[target] != code.d:
        raise SchemeError(f"secret subsystem has dimension {secret.dims[target]}, code needs {code.d}")
    return replace_subsystem(
        secret, target, encoding_isometry(code), (code.d,) * code.n_full, code.labels()
    )


def _complete_unitary(cols: np.ndarray) -> np.ndarray:
    """Square unitary whose leading columns are the orthonormal ``cols``."""
    n, m = cols.shape
    if m == n:
        return cols
    q, _ = np.linalg.qr(np.hstack([cols, np.eye(n, dtype=complex)]))
    q = q[:, :n].copy()
    q[:, :m] = cols
    return q


@functools.lru_cache(maxsize=64)
def _recovery(k: int, d: int, points: tuple[int, ...], positions: tuple[int, ...]) -> np.ndarray:
    full = len(points)
    rest = [i for i in range(full) if i not in positions]
    v = _isometry(k, d, points).reshape((d,) * full + (d,))
    v = np.transpose(v, [full] + list(positions) + rest)
    a_dim, r_dim = d ** len(positions), d ** len(rest)
    v = np.ascontiguousarray(v).reshape(d, a_dim, r_dim)
    m0 = v[0]
    sigma = m0.T @ m0.conj()
    lam, vecs = np.linalg.eigh(sigma)
    keep = lam > 1e-12
    lam, vecs = lam[keep], vecs[:, keep]
    rank = len(lam)
    junk = a_dim // d
    if rank > junk:
        raise SchemeError("positions cannot correct the erased shares")
    g = np.zeros((a_dim, a_dim), dtype=complex)
    used = []
    for s in range(d):
        block = v[s] @ vecs.conj() / np.sqrt(lam)
        g[:, s * junk : s * junk + rank] = block
        used.extend(range(s * junk, s * junk + rank))
    w = g[:, used]
    # random probes instead of forming w^dag w, which is cubic in a_dim
    probe = np.random.default_rng(0).normal(size=(len(used), 3))
    if np.max(np.abs(np.linalg.norm(w @ probe, axis=0) - np.linalg.norm(probe, axis=0))) > 1e-9:
        raise SchemeError(f"positions {positions} do not form a correctable set")
    taken = set(used)
    free = [c for c in range(a_dim) if c not in taken]
    if free:
        full_u = _complete_unitary(w)
        g[:, used] = w
        g[:, free] = full_u[:, len(used):]
    u = g.conj().T
    u.flags.writeable = False
    return u


def recovery_unitary(code: QtsCode, positions: Sequence[int]) -> np.ndarray:
    """Unitary on the listed code positions that moves the secret onto the first of them.

    Built from the encoder: the complement's reduced state is diagonalised and
    the conditional share vectors are rotated onto |s>|i>.
    """
    positions = tuple(int(p) for p in positions)
    if len(positions) != code.k:
        raise ValueError(f"recovery acts on exactly k={code.k} positions")
    if len(set(positions)) != len(positions) or any(not 0 <= p < code.n for p in positions):
        raise SchemeError(f"inconsistent share positions {positions} for n={code.n}")
    return _recovery(code.k, code.d, code.eval_points, positions)


def qts_reconstruct(
    state: QuditState, share_positions: Sequence[int], code: QtsCode, subsystems: Sequence[int] | None = None
) -> QuditState:
    """Run the recovery on the first k listed shares.

    ``subsystems[i]`` is the state index holding code share i (identity when
    omitted). The secret ends up on the subsystem holding
    ``share_positions[0]``, which is relabelled ``output``.
    """
    positions = [int(p) for p in share_positions]
    if len(set(positions)) != len(positions):
        raise SchemeError(f"duplicate share positions {positions}")
    if len(positions) < code.k:
        raise InsufficientShares(f"(({code.k},{code.n})) needs {code.k} shares, got {len(positions)}")
    subsystems = list(range(code.n_full)) if subsystems is None else list(subsystems)
    if len(set(subsystems)) != len(subsystems) or len(subsystems) < code.n:
        raise SchemeError("inconsistent ordering metadata")
    use = positions[: code.k]
    targets = [subsystems[p] for p in use]
    if any(state.dims[t] != code.d for t in targets):
        raise SchemeError("share subsystems do not match the code dimension")
    out = apply_on(state, recovery_unitary(code, use), targets)
    labels = list(out.labels)
    labels[targets[0]] = "output"
    return out.relabel(labels)


def permute_shares(state: QuditState, perm: Sequence[int]) -> QuditState:
    """Reorder subsystems: new position i holds old subsystem ``perm[i]``."""
    return permute_subsystems(state, perm)


@dataclass(frozen=True)
class QotpKey:
    digits: tuple[tuple[int, int], ...]
    d: int

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple((int(a), int(b)) for a, b in self.digits))
        if any(not (0 <= a < self.d and 0 <= b < self.d) for a, b in self.digits):
            raise ValueError(f"key digits out of range for d={self.d}")

    def __len__(self) -> int:
        return len(self.digits)

    @classmethod
    def random(cls, d: int, count: int, rng) -> "QotpKey":
        return cls(tuple((int(rng.integers(0, d)), int(rng.integers(0, d))) for _ in range(count)), d)

    @classmethod
    def all_keys(cls, d: int, count: int = 1):
        for flat in itertools.product(range(d), repeat=2 * count):
            yield cls(tuple(zip(flat[::2], flat[1::2])), d)


def _check_key(state: QuditState, targets: Sequence[int], key: QotpKey) -> None:
    if len(key) != len(targets):
        raise ValueError(f"key has {len(key)} digit pairs for {len(targets)} targets")
    if any(state.dims[t] != key.d for t in targets):
        raise ValueError("key dimension does not match target dimensions")


def qotp_encrypt(state: QuditState, targets: Sequence[int], key: QotpKey) -> QuditState:
    """Apply X^a Z^b to each target."""
    _check_key(state, targets, key)
    for t, (a, b) in zip(targets, key.digits):
        state = apply_on(state, generalized_pauli(a, b, key.d), [t])
    return state


def qotp_decrypt(state: QuditState, targets: Sequence[int], key: QotpKey) -> QuditState:
    _check_key(state, targets, key)
    for t, (a, b) in zip(targets, key.digits):
        state = apply_on(state, generalized_pauli(a, b, key.d).dagger, [t])
    return state


def qotp_key_average(state: QuditState, targets: Sequence[int]) -> QuditState:
    """Uniform mixture of the encryptions of ``state`` over every key."""
    d = state.dims[targets[0]]
    acc = None
    count = 0
    for key in QotpKey.all_keys(d, len(targets)):
        rho = qotp_encrypt(state, targets, key).density()
        acc = rho if acc is None else acc + rho
        count += 1
    return QuditState(acc / count, state.dims, state.labels)


def codeword(code: QtsCode, s: int) -> QuditState:
    return qts_encode(ket([s], [code.d], ["secret"]), code)
