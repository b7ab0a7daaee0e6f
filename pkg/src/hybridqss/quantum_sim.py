"""Dense multi-qudit states and the handful of operations the schemes need.

States are immutable. Pure states hold a flat amplitude vector, mixed states
a density matrix; subsystem ``i`` is the i-th most significant digit of the
flat index. Every subsystem carries a label naming its owner ("dealer",
"discarded", "reference", or a player name).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CapacityError

MAX_PURE_DIM = 2_000_000
MAX_MIXED_DIM = 4096
CONSTRUCTION_TOL = 1e-12


def _prod(dims: Sequence[int]) -> int:
    out = 1
    for d in dims:
        out *= int(d)
    return out


@dataclass(frozen=True, eq=False)
class QuditState:
    dims: tuple[int, ...]
    data: np.ndarray
    labels: tuple[str, ...]

    def __init__(self, data, dims: Sequence[int], labels: Sequence[str] | None = None, *, check: bool = True):
        dims = tuple(int(d) for d in dims)
        if not dims or any(d < 2 for d in dims):
            raise ValueError(f"subsystem dimensions must all be >= 2, got {dims}")
        total = _prod(dims)
        arr = np.asarray(data, dtype=complex)
        if arr.ndim == 1:
            if total > MAX_PURE_DIM:
                raise CapacityError(f"pure state of dimension {total} exceeds {MAX_PURE_DIM}")
            if arr.shape != (total,):
                raise ValueError(f"amplitude vector has shape {arr.shape}, expected ({total},)")
        elif arr.ndim == 2:
            if total > MAX_MIXED_DIM:
                raise CapacityError(f"density matrix of dimension {total} exceeds {MAX_MIXED_DIM}")
            if arr.shape != (total, total):
                raise ValueError(f"density matrix has shape {arr.shape}, expected ({total},{total})")
        else:
            raise ValueError("state data must be a vector or a square matrix")
        labels = tuple(labels) if labels is not None else ("",) * len(dims)
        if len(labels) != len(dims):
            raise ValueError("need one label per subsystem")
        if check:
            if arr.ndim == 1:
                norm = np.linalg.norm(arr)
                if abs(norm - 1) > CONSTRUCTION_TOL * max(1, total) ** 0.5:
                    raise ValueError(f"state vector has norm {norm}")
            else:
                if abs(np.trace(arr) - 1) > CONSTRUCTION_TOL * total:
                    raise ValueError(f"density matrix has trace {np.trace(arr)}")
                if np.max(np.abs(arr - arr.conj().T), initial=0) > 1e-10:
                    raise ValueError("density matrix is not Hermitian")
        arr.flags.writeable = False
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "labels", labels)

    @property
    def is_pure(self) -> bool:
        return self.data.ndim == 1

    @property
    def dim(self) -> int:
        return _prod(self.dims)

    @property
    def n(self) -> int:
        return len(self.dims)

    def density(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return self.data

    def as_mixed(self) -> "QuditState":
        return self if not self.is_pure else QuditState(self.density(), self.dims, self.labels, check=False)

    def relabel(self, labels: Sequence[str]) -> "QuditState":
        return QuditState(self.data, self.dims, labels, check=False)

    def positions(self, label: str) -> list[int]:
        return [i for i, lab in enumerate(self.labels) if lab == label]

    def check(self, tol: float = 1e-10) -> None:
        """Full invariant check, including positivity for mixed states."""
        if self.is_pure:
            if abs(np.linalg.norm(self.data) - 1) > CONSTRUCTION_TOL * max(1, self.dim) ** 0.5:
                raise ValueError("state vector is not normalized")
            return
        rho = self.data
        if np.max(np.abs(rho - rho.conj().T)) > tol:
            raise ValueError("density matrix is not Hermitian")
        if np.linalg.eigvalsh(rho).min() < -tol:
            raise ValueError("density matrix has a negative eigenvalue")
        if abs(np.trace(rho) - 1) > CONSTRUCTION_TOL * self.dim:
            raise ValueError("density matrix trace differs from 1")

    def __repr__(self) -> str:
        kind = "pure" if self.is_pure else "mixed"
        return f"QuditState({kind}, dims={self.dims}, labels={self.labels})"


@dataclass(frozen=True, eq=False)
class UnitaryOp:
    dim: int
    matrix: np.ndarray

    def __init__(self, matrix, *, tol: float = 1e-10):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("unitary must be a square matrix")
        if np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))) > tol:
            raise ValueError("matrix is not unitary")
        m.flags.writeable = False
        object.__setattr__(self, "dim", m.shape[0])
        object.__setattr__(self, "matrix", m)

    @property
    def dagger(self) -> "UnitaryOp":
        return UnitaryOp(self.matrix.conj().T)

    def __matmul__(self, other: "UnitaryOp") -> "UnitaryOp":
        return UnitaryOp(self.matrix @ other.matrix)


# ---------------------------------------------------------------------------
# constructors


def ket(digits: Sequence[int], dims: Sequence[int], labels: Sequence[str] | None = None) -> QuditState:
    dims = tuple(dims)
    if len(digits) != len(dims) or any(not 0 <= x < d for x, d in zip(digits, dims)):
        raise ValueError(f"basis digits {digits} do not fit dims {dims}")
    vec = np.zeros(_prod(dims), dtype=complex)
    vec[int(np.ravel_multi_index(tuple(digits), dims))] = 1
    return QuditState(vec, dims, labels)


def pure(vec, dims: Sequence[int] | None = None, labels: Sequence[str] | None = None, normalize: bool = False) -> QuditState:
    v = np.asarray(vec, dtype=complex).ravel()
    if normalize:
        v = v / np.linalg.norm(v)
    return QuditState(v, dims or (len(v),), labels)


def mixed(rho, dims: Sequence[int] | None = None, labels: Sequence[str] | None = None) -> QuditState:
    m = np.asarray(rho, dtype=complex)
    return QuditState(m, dims or (m.shape[0],), labels)


def maximally_mixed(d: int, label: str = "") -> QuditState:
    return QuditState(np.eye(d) / d, (d,), (label,))


def haar_random_state(d: int, rng: np.random.Generator, label: str = "") -> QuditState:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return QuditState(v / np.linalg.norm(v), (d,), (label,))


def tomographic_set(d: int) -> list[QuditState]:
    """Basis states plus (|j>+|k>)/sqrt2 and (|j>+i|k>)/sqrt2 for j < k.

    Their projectors span all d x d Hermitian matrices.
    """
    out = [ket([j], [d]) for j in range(d)]
    for j in range(d):
        for k in range(j + 1, d):
            for phase in (1, 1j):
                v = np.zeros(d, dtype=complex)
                v[j], v[k] = 1, phase
                out.append(QuditState(v / np.sqrt(2), (d,)))
    return out


# ---------------------------------------------------------------------------
# raw array helpers (shared with the batched verifier)


def apply_to_axes(tensor: np.ndarray, matrix: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Apply ``matrix`` to the given axes of an amplitude tensor.

    ``matrix`` maps the flattened target axes (in the order given) to a space
    with the same factor shape. Returns a tensor of identical shape.
    """
    axes = list(axes)
    moved = np.moveaxis(tensor, axes, range(len(axes)))
    shape = moved.shape
    tdim = _prod(shape[: len(axes)])
    flat = moved.reshape(tdim, -1)
    rows = None
    if flat.size > 100_000:
        # code states are sparse in the computational basis; skip all-zero rows
        rows = np.flatnonzero(np.any(flat != 0, axis=1))
    if rows is not None and len(rows) < tdim // 2:
        out = (matrix[:, rows] @ flat[rows]).reshape(shape)
    else:
        out = (matrix @ flat).reshape(shape)
    return np.moveaxis(out, range(len(axes)), axes)


def reduced_density(tensor: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Density matrix of the kept axes of a pure amplitude tensor."""
    keep = list(keep)
    moved = np.moveaxis(tensor, keep, range(len(keep)))
    kdim = _prod(moved.shape[: len(keep)])
    m = moved.reshape(kdim, -1)
    return m @ m.conj().T


# ---------------------------------------------------------------------------
# operations


def tensor(a: QuditState, b: QuditState) -> QuditState:
    dims = a.dims + b.dims
    labels = a.labels + b.labels
    if a.is_pure and b.is_pure:
        return QuditState(np.kron(a.data, b.data), dims, labels, check=False)
    return QuditState(np.kron(a.density(), b.density()), dims, labels, check=False)


def _check_targets(state: QuditState, targets: Sequence[int]) -> list[int]:
    targets = [int(t) for t in targets]
    if len(set(targets)) != len(targets):
        raise ValueError(f"targets must be distinct, got {targets}")
    if any(not 0 <= t < state.n for t in targets):
        raise ValueError(f"targets {targets} out of range for {state.n} subsystems")
    return targets


def apply_on(state: QuditState, op, targets: Sequence[int]) -> QuditState:
    """Apply a unitary to the listed subsystems, identity elsewhere."""
    targets = _check_targets(state, targets)
    matrix = op.matrix if isinstance(op, UnitaryOp) else np.asarray(op, dtype=complex)
    tdim = _prod(state.dims[t] for t in targets)
    if matrix.shape != (tdim, tdim):
        raise ValueError(f"operator of shape {matrix.shape} does not match target dimension {tdim}")
    if state.is_pure:
        t = apply_to_axes(state.data.reshape(state.dims), matrix, targets)
        return QuditState(t.reshape(-1), state.dims, state.labels, check=False)
    n = state.n
    t = state.data.reshape(state.dims + state.dims)
    t = apply_to_axes(t, matrix, targets)
    t = apply_to_axes(t, matrix.conj(), [n + x for x in targets])
    return QuditState(t.reshape(state.dim, state.dim), state.dims, state.labels, check=False)


def partial_trace(state: QuditState, keep: Sequence[int]) -> QuditState:
    """Reduced (mixed) state of the kept subsystems, in the order given."""
    keep = _check_targets(state, keep)
    if not keep:
        raise ValueError("keep at least one subsystem")
    dims = tuple(state.dims[k] for k in keep)
    labels = tuple(state.labels[k] for k in keep)
    if _prod(dims) > MAX_MIXED_DIM:
        raise CapacityError(f"reduced state of dimension {_prod(dims)} exceeds {MAX_MIXED_DIM}")
    if state.is_pure:
        rho = reduced_density(state.data.reshape(state.dims), keep)
        return QuditState(rho, dims, labels, check=False)
    n = state.n
    rest = [i for i in range(n) if i not in keep]
    t = state.data.reshape(state.dims + state.dims)
    t = np.moveaxis(t, keep + rest + [n + i for i in keep] + [n + i for i in rest], range(2 * n))
    kd, rd = _prod(dims), _prod(state.dims[i] for i in rest)
    t = t.reshape(kd, rd, kd, rd)
    return QuditState(np.einsum("arbr->ab", t), dims, labels, check=False)


def permute_subsystems(state: QuditState, order: Sequence[int]) -> QuditState:
    """New state whose subsystem i is the old subsystem ``order[i]``."""
    order = list(order)
    if sorted(order) != list(range(state.n)):
        raise ValueError(f"{order} is not a permutation of {state.n} subsystems")
    dims = tuple(state.dims[i] for i in order)
    labels = tuple(state.labels[i] for i in order)
    if state.is_pure:
        t = np.transpose(state.data.reshape(state.dims), order)
        return QuditState(t.reshape(-1), dims, labels, check=False)
    n = state.n
    t = np.transpose(state.data.reshape(state.dims + state.dims), order + [n + i for i in order])
    return QuditState(t.reshape(state.dim, state.dim), dims, labels, check=False)


def replace_subsystem(
    state: QuditState, target: int, isometry: np.ndarray, out_dims: Sequence[int], out_labels: Sequence[str]
) -> QuditState:
    """Apply an isometry to one subsystem, splicing its output subsystems in place."""
    if not state.is_pure:
        raise ValueError("replace_subsystem works on pure states")
    out_dims = tuple(out_dims)
    if isometry.shape != (_prod(out_dims), state.dims[target]):
        raise ValueError("isometry shape does not match the target and output dimensions")
    dims = state.dims[:target] + out_dims + state.dims[target + 1 :]
    if _prod(dims) > MAX_PURE_DIM:
        raise CapacityError(f"state of dimension {_prod(dims)} exceeds {MAX_PURE_DIM}")
    t = np.moveaxis(state.data.reshape(state.dims), target, 0)
    rest = t.shape[1:]
    t = (isometry @ t.reshape(state.dims[target], -1)).reshape(out_dims + rest)
    t = np.moveaxis(t, range(len(out_dims)), range(target, target + len(out_dims)))
    labels = state.labels[:target] + tuple(out_labels) + state.labels[target + 1 :]
    return QuditState(t.reshape(-1), dims, labels, check=False)


def trace_distance(a: QuditState, b: QuditState) -> float:
    """Half the trace norm of the difference."""
    if a.dims != b.dims:
        raise ValueError(f"dimension mismatch {a.dims} vs {b.dims}")
    if a.is_pure and b.is_pure:
        overlap = abs(np.vdot(a.data, b.data)) ** 2
        return float(np.sqrt(max(0.0, 1.0 - overlap)))
    return trace_distance_matrices(a.density(), b.density())


def trace_distance_matrices(a: np.ndarray, b: np.ndarray) -> float:
    diff = a - b
    diff = (diff + diff.conj().T) / 2
    return float(0.5 * np.abs(np.linalg.eigvalsh(diff)).sum())


def fidelity(a: QuditState, b: QuditState) -> float:
    """<a|rho_b|a> for a pure ``a`` (either argument may be the pure one)."""
    if a.dims != b.dims:
        raise ValueError(f"dimension mismatch {a.dims} vs {b.dims}")
    if not a.is_pure:
        if not b.is_pure:
            raise ValueError("fidelity needs at least one pure state")
        a, b = b, a
    if b.is_pure:
        return float(abs(np.vdot(a.data, b.data)) ** 2)
    return float(np.real(np.vdot(a.data, b.data @ a.data)))


def shift_matrix(d: int) -> np.ndarray:
    """X with X|j> = |j+1 mod d>."""
    return np.roll(np.eye(d, dtype=complex), 1, axis=0)


def clock_matrix(d: int) -> np.ndarray:
    """Z with Z|j> = w^j |j>, w = exp(2 pi i / d)."""
    return np.diag(np.exp(2j * np.pi * np.arange(d) / d))


def generalized_pauli(a: int, b: int, d: int) -> UnitaryOp:
    """X^a Z^b on a d-level system."""
    if d < 2:
        raise ValueError("dimension must be >= 2")
    if not (0 <= a < d and 0 <= b < d):
        raise ValueError(f"exponents ({a},{b}) out of range for d={d}")
    return UnitaryOp(np.linalg.matrix_power(shift_matrix(d), a) @ np.linalg.matrix_power(clock_matrix(d), b))


def swap_matrix(d1: int, d2: int | None = None) -> np.ndarray:
    d2 = d1 if d2 is None else d2
    s = np.zeros((d1 * d2, d1 * d2), dtype=complex)
    for i in range(d1):
        for j in range(d2):
            s[j * d1 + i, i * d2 + j] = 1
    return s
