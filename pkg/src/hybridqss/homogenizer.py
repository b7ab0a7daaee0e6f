"""Partial-swap homogenization, unwinding, and the dilution-based twin-threshold scheme.

A system qubit interacts in turn with N reservoir qubits, each prepared in
xi, through P(eta) = cos(eta) I + i sin(eta) SWAP. Because every reservoir
qubit meets the system exactly once, the system marginal after step k
follows the one-qubit map rho -> Tr_R[P (rho x xi) P^dag]; the joint state is
needed only for unwinding.

Orderings are lists ``ordering[j] = physical position of logical qubit j``,
where logical qubit 0 is the system and logical qubit k >= 1 is the k-th
reservoir qubit to interact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .access_structure import PlayerRoster, fmt_set
from .classical_sharing import (
    CNode,
    ClassicalShare,
    CPublic,
    CShamir,
    FieldElement,
    next_prime,
    reconstruct_tree,
    shamir_tree,
    split_tree,
    tree_obtains,
)
from .errors import CapacityError, InsufficientShares, SchemeError
from .hybrid_protocols import RecordingRng, TwinThresholdDescriptor, _render_key
from .quantum_sim import (
    QuditState,
    UnitaryOp,
    apply_on,
    fidelity,
    ket,
    partial_trace,
    permute_subsystems,
    swap_matrix,
    tensor,
    trace_distance,
)

MAX_PURE_N = 14
MAX_MIXED_N = 8


def partial_swap(eta: float) -> UnitaryOp:
    return UnitaryOp(np.cos(eta) * np.eye(4) + 1j * np.sin(eta) * swap_matrix(2))


def eta_for_delta(delta: float) -> float:
    """Largest eta with sin(eta) <= sqrt(delta/2)."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    return float(np.arcsin(min(1.0, np.sqrt(delta / 2))))


def _as_qubit(state: QuditState | np.ndarray, name: str) -> QuditState:
    if not isinstance(state, QuditState):
        arr = np.asarray(state, dtype=complex)
        state = QuditState(arr, (2,))
    if state.dims != (2,):
        raise ValueError(f"{name} must be a single qubit")
    return state


def check_ordering(ordering: Sequence[int], size: int) -> tuple[int, ...]:
    ordering = tuple(int(x) for x in ordering)
    if sorted(ordering) != list(range(size)):
        raise ValueError(f"ordering {ordering} is not a permutation of {size} positions")
    return ordering


def _to_physical(ordering: Sequence[int]) -> list[int]:
    """Subsystem order that puts logical qubit j at physical position ordering[j]."""
    inv = [0] * len(ordering)
    for logical, phys in enumerate(ordering):
        inv[phys] = logical
    return inv


@dataclass(frozen=True)
class HomogenizerRun:
    eta: float
    rho: QuditState
    xi: QuditState
    N: int
    ordering: tuple[int, ...]
    joint_state: QuditState = field(repr=False)
    reservoir_marginals: tuple[QuditState, ...] = field(repr=False)

    @property
    def system_marginal(self) -> QuditState:
        return partial_trace(self.joint_state, [self.ordering[0]])

    def system_distance(self) -> float:
        return trace_distance(self.system_marginal, self.xi)

    def reservoir_distances(self) -> list[float]:
        return [trace_distance(x, self.xi) for x in self.reservoir_marginals]

    def initial_state(self) -> QuditState:
        state = self.rho
        for _ in range(self.N):
            state = tensor(state, self.xi)
        return permute_subsystems(state, _to_physical(self.ordering))


def homogenize(
    rho: QuditState,
    xi: QuditState,
    N: int,
    eta: float,
    ordering: Sequence[int] | None = None,
    labels: Sequence[str] | None = None,
) -> HomogenizerRun:
    """Run the machine and lay the N+1 qubits out physically per ``ordering``."""
    rho, xi = _as_qubit(rho, "rho"), _as_qubit(xi, "xi")
    if N < 1:
        raise ValueError("N must be at least 1")
    both_pure = rho.is_pure and xi.is_pure
    limit = MAX_PURE_N if both_pure else MAX_MIXED_N
    if N > limit:
        raise CapacityError(
            f"N={N} exceeds the {'state-vector' if both_pure else 'density-matrix'} limit of {limit}"
        )
    ordering = check_ordering(range(N + 1) if ordering is None else ordering, N + 1)
    state = rho.relabel(["system"])
    for k in range(1, N + 1):
        state = tensor(state, xi.relabel([f"r{k}"]))
    u = partial_swap(eta)
    res = []
    for k in range(1, N + 1):
        state = apply_on(state, u, [0, k])
        res.append(partial_trace(state, [k]))
    state = permute_subsystems(state, _to_physical(ordering))
    if labels is not None:
        state = state.relabel(labels)
    return HomogenizerRun(float(eta), rho, xi, N, ordering, state, tuple(res))


def _marginal_step(rho: np.ndarray, xi: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    joint = u @ np.kron(rho, xi) @ u.conj().T
    t = joint.reshape(2, 2, 2, 2)
    return np.einsum("ajbj->ab", t), np.einsum("jajb->ab", t)


@dataclass(frozen=True)
class ConvergenceProfile:
    """D(rho_S^(N), xi) and D(xi'_N, xi) for N = 1..len."""

    system: tuple[float, ...]
    reservoir: tuple[float, ...]

    def first_n(self, delta: float) -> int | None:
        """First N with the system within delta and every reservoir marginal so far within delta."""
        worst = 0.0
        for i, (s, r) in enumerate(zip(self.system, self.reservoir), start=1):
            worst = max(worst, r)
            if s <= delta and worst <= delta:
                return i
        return None


def marginal_profile(rho: QuditState, xi: QuditState, eta: float, n_max: int) -> ConvergenceProfile:
    """Exact marginals by iterating the one-qubit map; valid for any N."""
    rho, xi = _as_qubit(rho, "rho"), _as_qubit(xi, "xi")
    u = partial_swap(eta).matrix
    x = xi.density()
    cur = rho.density()
    sys_d, res_d = [], []
    for _ in range(n_max):
        cur, out = _marginal_step(cur, x, u)
        sys_d.append(_td(cur, x))
        res_d.append(_td(out, x))
    return ConvergenceProfile(tuple(sys_d), tuple(res_d))


def _td(a: np.ndarray, b: np.ndarray) -> float:
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(a - b))))


def first_n_within(rho: QuditState, xi: QuditState, delta: float, eta: float | None = None, n_max: int = MAX_PURE_N) -> int | None:
    eta = eta_for_delta(delta) if eta is None else eta
    return marginal_profile(rho, xi, eta, n_max).first_n(delta)


def _unwind_state(state: QuditState, eta: float, claimed: Sequence[int]) -> QuditState:
    udag = partial_swap(eta).dagger
    sys_pos = claimed[0]
    for k in range(len(claimed) - 1, 0, -1):
        state = apply_on(state, udag, [sys_pos, claimed[k]])
    return state


def unwind_joint(run: HomogenizerRun, claimed_ordering: Sequence[int]) -> QuditState:
    claimed = check_ordering(claimed_ordering, run.N + 1)
    return _unwind_state(run.joint_state, run.eta, claimed)


def unwind(run: HomogenizerRun, claimed_ordering: Sequence[int]) -> QuditState:
    """Undo the interactions in reverse claimed order; returns the claimed system qubit."""
    claimed = check_ordering(claimed_ordering, run.N + 1)
    return partial_trace(_unwind_state(run.joint_state, run.eta, claimed), [claimed[0]])


def closeness(target: QuditState, state: QuditState) -> float:
    """Fidelity when ``target`` is pure, else 1 - trace distance."""
    if target.is_pure:
        return fidelity(target, state)
    return 1.0 - trace_distance(target, state)


def ordering_sweep(run: HomogenizerRun) -> list[tuple[tuple[int, ...], float]]:
    """Unwinding fidelity of the system qubit for every claimed ordering."""
    out = []
    for perm in itertools.permutations(range(run.N + 1)):
        out.append((perm, closeness(run.rho, unwind(run, perm))))
    return out


# ---------------------------------------------------------------------------
# ordering keys


def ordering_to_digits(ordering: Sequence[int]) -> tuple[int, ...]:
    """Lehmer code: digit j counts later entries smaller than ordering[j]; radix len-j.

    The final digit (radix 1, always 0) is dropped.
    """
    ordering = list(ordering)
    return tuple(sum(1 for x in ordering[j + 1 :] if x < ordering[j]) for j in range(len(ordering) - 1))


def digits_to_ordering(digits: Sequence[int], size: int) -> tuple[int, ...]:
    if len(digits) != size - 1:
        raise ValueError(f"expected {size - 1} ordering digits, got {len(digits)}")
    pool = list(range(size))
    out = []
    for j, c in enumerate(digits):
        if not 0 <= c < size - j:
            raise SchemeError(f"ordering digit {j} = {c} out of range for radix {size - j}")
        out.append(pool.pop(c))
    out.append(pool.pop())
    return tuple(out)


# ---------------------------------------------------------------------------
# the dilution scheme


@dataclass(frozen=True)
class Scheme3Plan:
    roster: PlayerRoster
    k_c: int
    common_set: frozenset[str]
    m: tuple[int, ...]
    eta: float
    xi: QuditState = field(compare=False, repr=False)
    p: int = 0
    key: CNode = field(default_factory=CPublic)
    delta: float = 0.05
    kind: str = "scheme3"

    @property
    def N(self) -> int:
        return sum(self.m) - 1

    @property
    def claimed(self) -> TwinThresholdDescriptor:
        return TwinThresholdDescriptor(self.roster, self.k_c, len(self.roster.quantum_capable), self.common_set)

    def qubit_labels(self) -> list[str]:
        out = []
        for player, count in zip(self.roster.quantum_players, self.m):
            out.extend([player] * count)
        return out

    def render(self) -> str:
        q = self.roster.quantum_players
        rows = [f"homogenize N={self.N} eta={self.eta:.6f} (delta={self.delta:g})"]
        rows += [f"  {p} <- {c} qubit(s)" for p, c in zip(q, self.m)]
        rows.append(f"  ordering key: {_render_key(self.key)} over GF({self.p})")
        return "\n".join(rows)


def build_scheme3(
    roster: PlayerRoster,
    k_c: int,
    common_set: Iterable[str],
    m: Sequence[int],
    eta: float | None = None,
    delta: float = 0.05,
    xi: QuditState | None = None,
    N: int | None = None,
) -> Scheme3Plan:
    c = roster.check(common_set)
    q_players = roster.quantum_players
    if not q_players:
        raise SchemeError("scheme needs at least one q-player")
    if not set(q_players) <= c:
        raise SchemeError(f"every q-player must be in the common set; missing {fmt_set(set(q_players) - c)}")
    m = tuple(int(x) for x in m)
    if len(m) != len(q_players):
        raise SchemeError(f"need one qubit count per q-player ({len(q_players)}), got {len(m)}")
    if any(x < 1 for x in m):
        raise SchemeError("every q-player needs at least one qubit")
    if N is not None and sum(m) != N + 1:
        raise SchemeError(f"qubit counts sum to {sum(m)}, but N+1 = {N + 1}")
    N = sum(m) - 1
    if N < 1:
        raise SchemeError("need at least one reservoir qubit (sum of qubit counts >= 2)")
    q = len(q_players)
    n = len(roster)
    lam_c = len(c - roster.quantum_capable)
    if k_c < lam_c:
        raise SchemeError(f"k_c = {k_c} is below lambda_c = {lam_c}")
    c_out = [p for p in roster.classical_players if p not in c]
    if k_c - lam_c > len(c_out):
        raise SchemeError(f"k_c - lambda_c = {k_c - lam_c} exceeds the {len(c_out)} c-players outside C")
    p = next_prime(max(N + 1, 3, q + lam_c + 1, n - q - lam_c + 1))
    k1 = shamir_tree(q + lam_c, roster.ordered(c), "K1")
    k2 = shamir_tree(k_c - lam_c, c_out, "K2")
    key = CShamir(2, (k1, k2), "K")
    eta = eta_for_delta(delta) if eta is None else float(eta)
    xi = ket([0], [2]) if xi is None else _as_qubit(xi, "xi")
    return Scheme3Plan(roster, k_c, c, m, eta, xi, p, key, delta)


@dataclass(frozen=True)
class Scheme3Deal:
    plan: Scheme3Plan
    global_state: QuditState
    classical_shares: tuple[ClassicalShare, ...]
    randomness_record: dict
    secret_snapshot: QuditState = field(repr=False)
    ordering: tuple[int, ...] = field(repr=False, default=())

    def shares_of(self, players: Iterable[str]) -> list[ClassicalShare]:
        t = set(players)
        return [s for s in self.classical_shares if s.holder in t or s.holder == "*public*"]


def scheme3_deal(plan: Scheme3Plan, secret: QuditState, seed: int | None = None, rng: np.random.Generator | None = None) -> Scheme3Deal:
    secret = _as_qubit(secret, "secret")
    rec = RecordingRng(seed, rng)
    size = plan.N + 1
    digits = tuple(int(rec.integers(0, size - j)) for j in range(size - 1))
    ordering = digits_to_ordering(digits, size)
    shares = split_tree(plan.key, tuple(FieldElement(x, plan.p) for x in digits), rec, "K")
    run = homogenize(secret, plan.xi, plan.N, plan.eta, ordering, plan.qubit_labels())
    record = {"seed": seed, "draws": list(rec.draws)}
    return Scheme3Deal(plan, run.joint_state, tuple(shares), record, secret, ordering)


def scheme3_requirements(plan: Scheme3Plan, players: frozenset[str]) -> str | None:
    """Reason the subset fails, naming the reconstruction step, or None."""
    missing_q = [p for p in plan.roster.quantum_players if p not in players]
    if missing_q:
        return f"step 1: q-shares of {fmt_set(missing_q)} are missing"
    k1, k2 = plan.key.children
    if not tree_obtains(k1, players):
        return f"step 2: K_1 needs every member of C; missing {fmt_set(plan.common_set - players)}"
    if not tree_obtains(k2, players):
        return "step 3: K_2 needs k_c - lambda_c c-players outside C"
    return None


def scheme3_reconstruct(dl: Scheme3Deal, players: Iterable[str]) -> QuditState:
    plan = dl.plan
    t = plan.roster.check(players)
    why = scheme3_requirements(plan, t)
    if why is not None:
        raise InsufficientShares(f"insufficient shares: {why}")
    digits = reconstruct_tree(plan.key, dl.shares_of(t), "K")
    ordering = digits_to_ordering(digits, plan.N + 1)
    state = _unwind_state(dl.global_state, plan.eta, ordering)
    return partial_trace(state, [ordering[0]]).relabel(["output"])


def scheme3_subset_leak(plan: Scheme3Plan, players: frozenset[str], secrets: Sequence[QuditState]) -> float:
    """Largest trace distance between the subset's ordering-averaged qubit states over ``secrets``.

    Used for subsets that cannot rebuild the ordering key, whose view of the
    key is then independent of the ordering.
    """
    labels = plan.qubit_labels()
    size = plan.N + 1
    n_orders = math.factorial(size)
    if n_orders > 40320:
        raise CapacityError(f"{n_orders} orderings are too many to average exactly")
    pos = [i for i, lab in enumerate(labels) if lab in players]
    if not pos:
        return 0.0
    states = []
    for psi in secrets:
        run = homogenize(psi, plan.xi, plan.N, plan.eta)
        acc = None
        for perm in itertools.permutations(range(size)):
            phys = permute_subsystems(run.joint_state, _to_physical(perm))
            r = partial_trace(phys, pos).data
            acc = r if acc is None else acc + r
        states.append(acc / n_orders)
    worst = 0.0
    for a, b in itertools.combinations(states, 2):
        worst = max(worst, _td(a, b))
    return worst


def verify_scheme3(
    plan: Scheme3Plan,
    tolerance: float = 1e-9,
    leak_budget: float | None = None,
    subsets: Sequence[Iterable[str]] | None = None,
):
    """Exact check of a dilution plan over every ordering.

    Authorized subsets must rebuild every key digit and unwind every
    tomographic secret. Forbidden subsets must see key shares independent of
    the ordering; their ordering-averaged qubit states are then compared.
    Finite N leaves a residual leak: it is reported, and only counts as LEAKY
    when it exceeds ``leak_budget``.
    """
    from .classical_sharing import digit_view_counts
    from .quantum_sim import tomographic_set
    from .verifier import (
        AUTHORIZED_OK,
        FORBIDDEN_OK,
        LEAKY,
        RECONSTRUCTION_FAIL,
        SubsetVerdict,
        VerificationReport,
        _tree_correct_for,
    )

    size = plan.N + 1
    if math.factorial(size) > 40320:
        raise CapacityError(f"{size}! orderings exceed the exact verification budget")
    secrets = tomographic_set(2)
    runs = [homogenize(s, plan.xi, plan.N, plan.eta) for s in secrets]
    claimed = plan.claimed
    todo = list(plan.roster.subsets()) if subsets is None else [plan.roster.check(s) for s in subsets]
    report = VerificationReport([], "exact", tolerance, plan.kind)
    leaks = []
    for t in todo:
        auth = claimed.is_authorized(t)
        if auth:
            if scheme3_requirements(plan, t) is not None:
                report.verdicts.append(SubsetVerdict(t, True, RECONSTRUCTION_FAIL, detail=scheme3_requirements(plan, t)))
                continue
            ok, why = _tree_correct_for(plan.key, t, plan.p, "K")
            if not ok:
                report.verdicts.append(SubsetVerdict(t, True, RECONSTRUCTION_FAIL, detail=why))
                continue
            worst = 1.0
            for perm in itertools.permutations(range(size)):
                for run in runs:
                    phys = permute_subsystems(run.joint_state, _to_physical(perm))
                    out = partial_trace(_unwind_state(phys, plan.eta, perm), [perm[0]])
                    worst = min(worst, fidelity(run.rho, out))
            verdict = AUTHORIZED_OK if worst >= 1 - tolerance else RECONSTRUCTION_FAIL
            report.verdicts.append(SubsetVerdict(t, True, verdict, fidelity=worst))
            continue
        if tree_obtains(plan.key, t):
            # rebuilding K needs all of C, which contains every q-player, so this is unreachable
            raise SchemeError(f"forbidden subset {fmt_set(t)} can rebuild the ordering key")
        table = digit_view_counts(plan.key, t, plan.p)
        if any(table[v] != table[0] for v in range(1, plan.p)):
            report.verdicts.append(SubsetVerdict(t, False, LEAKY, detail="key shares depend on the ordering"))
            continue
        leak = scheme3_subset_leak(plan, t, secrets)
        leaks.append((leak, t))
        verdict = LEAKY if leak_budget is not None and leak > leak_budget else FORBIDDEN_OK
        report.verdicts.append(SubsetVerdict(t, False, verdict, trace_distance=leak, detail="ordering-averaged"))
    over = [(x, t) for x, t in leaks if x > tolerance]
    if over:
        x, t = max(over, key=lambda z: z[0])
        report.warnings.append(
            f"{len(over)} forbidden subset(s) retain information at N={plan.N}; worst {fmt_set(t)} with trace distance {x:.3e}"
        )
    return report
