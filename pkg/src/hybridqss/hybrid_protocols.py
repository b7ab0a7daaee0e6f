"""Layered hybrid schemes: plan trees, builders, dealing and reconstruction.

A plan is a tree whose nodes each consume one d-dimensional qudit:

* ``Hold(player)`` gives the qudit to a player;
* ``Qts(k, children)`` encodes it with a ((k, n)) polynomial code and hands
  code share i to ``children[i]`` (surplus code qudits become ``discarded``);
* ``Encrypt(child, key)`` applies X^a Z^b with a fresh key (a, b) and then
  passes the qudit to ``child``; both key digits are shared through the
  classical tree ``key``.

Classical key trees use the nodes from :mod:`classical_sharing` over the
field of size d.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .access_structure import (
    AccessStructure,
    PlayerRoster,
    WeightedCompletion,
    check_no_cloning,
    fmt_set,
    min_hitting_set,
    minimize,
    restrict,
    weighted_selfdual_completion,
)
from .classical_sharing import (
    PUBLIC,
    CCumulative,
    CHold,
    CNode,
    ClassicalShare,
    CPublic,
    CShamir,
    FieldElement,
    is_prime,
    next_prime,
    reconstruct_tree,
    shamir_tree,
    split_tree,
    tree_min_modulus,
    tree_obtains,
    tree_players,
)
from .errors import InsufficientShares, SchemeError
from .qts_codes import DISCARDED, QtsCode, encoding_isometry, recovery_unitary
from .quantum_sim import QuditState, apply_on, generalized_pauli, partial_trace, replace_subsystem


@dataclass(frozen=True)
class Hold:
    player: str


@dataclass(frozen=True)
class Qts:
    k: int
    children: tuple["QNode", ...]
    label: str = ""

    @property
    def n(self) -> int:
        return len(self.children)


@dataclass(frozen=True)
class Encrypt:
    child: "QNode"
    key: CNode
    label: str


QNode = Union[Hold, Qts, Encrypt]


def qts_over(k: int, players: Sequence[str], label: str = "") -> Qts:
    return Qts(k, tuple(Hold(p) for p in players), label)


def walk(node: QNode) -> Iterable[QNode]:
    """Preorder traversal."""
    yield node
    if isinstance(node, Qts):
        for c in node.children:
            yield from walk(c)
    elif isinstance(node, Encrypt):
        yield from walk(node.child)


def encrypt_nodes(node: QNode) -> list[Encrypt]:
    return [x for x in walk(node) if isinstance(x, Encrypt)]


def layout(node: QNode) -> list[str]:
    """Owner label of every qudit in the dealt state, in order."""
    if isinstance(node, Hold):
        return [node.player]
    if isinstance(node, Encrypt):
        return layout(node.child)
    out: list[str] = []
    for c in node.children:
        out.extend(layout(c))
    return out + [DISCARDED] * (node.k - 1 - (node.n - node.k))


def quantum_holders(node: QNode) -> frozenset[str]:
    return frozenset(x.player for x in walk(node) if isinstance(x, Hold))


def required_dimension(node: QNode) -> int:
    """Smallest prime d that fits every code and every classical threshold node."""
    need = 2
    for x in walk(node):
        if isinstance(x, Qts):
            need = max(need, 2 * x.k - 1)
        elif isinstance(x, Encrypt):
            need = max(need, tree_min_modulus(x.key))
    return next_prime(need)


def obtains(node: QNode, players: frozenset[str]) -> bool:
    """Symbolic evaluation: does ``players`` recover this node's input qudit?

    Encrypted qudits without the key count as lost.
    """
    if isinstance(node, Hold):
        return node.player in players
    if isinstance(node, Encrypt):
        return obtains(node.child, players) and tree_obtains(node.key, players)
    return sum(obtains(c, players) for c in node.children) >= node.k


@dataclass(frozen=True)
class TwinThresholdDescriptor:
    """At least k_c c-players, at least k_q q-players, and all of ``common_set``."""

    roster: PlayerRoster
    k_c: int
    k_q: int
    common_set: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "common_set", self.roster.check(self.common_set))
        if self.k_c < 0 or self.k_q < 0:
            raise SchemeError("thresholds must be nonnegative")
        if self.k_c + self.k_q > self.n:
            raise SchemeError(f"k_c + k_q = {self.k_c + self.k_q} exceeds n = {self.n}")
        if self.k_q > self.q:
            raise SchemeError(f"k_q = {self.k_q} exceeds the {self.q} q-players")
        if self.k_c > self.n - self.q:
            raise SchemeError(f"k_c = {self.k_c} exceeds the {self.n - self.q} c-players")

    @property
    def n(self) -> int:
        return len(self.roster)

    @property
    def q(self) -> int:
        return len(self.roster.quantum_capable)

    @property
    def lambda_q(self) -> int:
        return len(self.common_set & self.roster.quantum_capable)

    @property
    def lambda_c(self) -> int:
        return len(self.common_set - self.roster.quantum_capable)

    def is_authorized(self, players: Iterable[str]) -> bool:
        t = self.roster.check(players)
        return (
            len(t & self.roster.quantum_capable) >= self.k_q
            and len(t - self.roster.quantum_capable) >= self.k_c
            and self.common_set <= t
        )

    def as_access_structure(self) -> AccessStructure:
        sets = [t for t in self.roster.subsets() if t and self.is_authorized(t)]
        if not sets:
            raise SchemeError("descriptor authorizes no nonempty subset")
        return minimize(self.roster, sets)

    def __str__(self) -> str:
        c = f", C={fmt_set(self.common_set)}" if self.common_set else ""
        return f"twin(k_c={self.k_c}, k_q={self.k_q}, n={self.n}, q={self.q}{c})"


Claimed = Union[AccessStructure, TwinThresholdDescriptor]


def claimed_structure(claimed: Claimed) -> AccessStructure:
    return claimed if isinstance(claimed, AccessStructure) else claimed.as_access_structure()


@dataclass(frozen=True)
class SchemePlan:
    roster: PlayerRoster
    root: QNode
    d: int
    claimed: Claimed
    kind: str = "custom"
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if not is_prime(self.d):
            raise SchemeError(f"dimension {self.d} is not prime")
        need = required_dimension(self.root)
        if self.d < need:
            raise SchemeError(f"plan needs dimension >= {need}, got {self.d}")
        for x in walk(self.root):
            if isinstance(x, Hold):
                if x.player not in self.roster:
                    raise SchemeError(f"unknown quantum share holder {x.player}")
                if x.player not in self.roster.quantum_capable:
                    raise SchemeError(f"quantum share given to c-player {x.player}")
            elif isinstance(x, Qts):
                QtsCode(x.k, x.n, self.d)
            elif isinstance(x, Encrypt):
                unknown = tree_players(x.key) - set(self.roster.names)
                if unknown:
                    raise SchemeError(f"key {x.label} names unknown players {sorted(unknown)}")
        labels = [e.label for e in encrypt_nodes(self.root)]
        if len(set(labels)) != len(labels) or any(not lab for lab in labels):
            raise SchemeError(f"encryption labels must be unique and nonempty: {labels}")

    @property
    def keys(self) -> list[Encrypt]:
        return encrypt_nodes(self.root)

    def layout(self) -> list[str]:
        return layout(self.root)

    def q_player_count(self) -> int:
        return len(quantum_holders(self.root))

    def obtains(self, players: Iterable[str]) -> bool:
        return obtains(self.root, self.roster.check(players))

    def render(self) -> str:
        return "\n".join(render(self.root))


# ---------------------------------------------------------------------------
# rendering


def _render_key(key: CNode) -> str:
    if isinstance(key, CPublic):
        return "public"
    if isinstance(key, CHold):
        return key.player
    if isinstance(key, CCumulative):
        return f"cumulative {key.structure}"
    if all(isinstance(c, CHold) for c in key.children):
        return f"({key.k},{key.n}) : " + ", ".join(c.player for c in key.children)
    return f"({key.k},{key.n})[" + "; ".join(_render_key(c) for c in key.children) + "]"


def render(node: QNode) -> list[str]:
    """Layer tree in the row notation: ``holder -> (k,n) : key holders``."""
    if isinstance(node, Hold):
        return [node.player]
    if isinstance(node, Encrypt):
        inner = render(node.child)
        key = _render_key(node.key)
        if len(inner) == 1:
            return [f"{inner[0]} -> {key}"]
        return [f"QOTP {node.label} -> {key} {{"] + ["  " + x for x in inner] + ["}"]
    tag = f"(({node.k},{node.n}))" + (f" {node.label}" if node.label else "")
    if all(isinstance(c, Hold) for c in node.children):
        return [f"{tag} : " + ", ".join(c.player for c in node.children)]
    lines = [tag + " {"]
    for c in node.children:
        lines.extend("  " + x for x in render(c))
    return lines + ["}"]


# ---------------------------------------------------------------------------
# builders


def _default_roster(n: int, q: int | None = None, prefix: str = "P") -> PlayerRoster:
    names = [f"{prefix}{i}" for i in range(1, n + 1)]
    return PlayerRoster(names, names if q is None else names[:q])


def _pick_d(root: QNode, d: int | None) -> int:
    return required_dimension(root) if d is None else d


def plain_qts(k: int, n: int, d: int | None = None, roster: PlayerRoster | None = None) -> SchemePlan:
    roster = roster or _default_roster(n)
    if len(roster) != n:
        raise SchemeError(f"roster has {len(roster)} players, expected {n}")
    if not 2 * k > n or k > n:
        raise SchemeError(f"(({k},{n})) violates n/2 < k <= n")
    if len(roster.quantum_capable) < n:
        raise SchemeError("a plain quantum threshold scheme needs every player quantum-capable")
    root = qts_over(k, roster.names)
    return SchemePlan(roster, root, _pick_d(root, d), AccessStructure.threshold(roster, k), "plain-qts")


def compress_threshold(k: int, n: int, d: int | None = None, roster: PlayerRoster | None = None) -> SchemePlan:
    """((k,n)) rebuilt from a ((k-g, n-g)) code plus a classical (k,n) key, g = 2k-n-1."""
    if not (2 * k > n and k <= n):
        raise SchemeError(f"(({k},{n})) violates n/2 < k <= n")
    gamma = 2 * k - n - 1
    if gamma <= 0:
        raise SchemeError(f"(({k},{n})) is incompressible: 2k = {2 * k} <= n+1 = {n + 1}")
    roster = roster or _default_roster(n, n - gamma)
    if len(roster) != n:
        raise SchemeError(f"roster has {len(roster)} players, expected {n}")
    qp = roster.quantum_players
    if len(qp) < n - gamma:
        raise SchemeError(f"compression needs {n - gamma} q-players, roster has {len(qp)}")
    root = Encrypt(qts_over(k - gamma, qp[: n - gamma]), shamir_tree(k, roster.names, "K1"), "K1")
    return SchemePlan(
        roster, root, _pick_d(root, d), AccessStructure.threshold(roster, k), "threshold-compress",
        (f"gamma={gamma}",),
    )


def compress_general(
    gamma: AccessStructure,
    d: int | None = None,
    w_max: int = 3,
    hitting_set: Iterable[str] | None = None,
    completion: WeightedCompletion | dict | None = None,
    promote_completion: bool = False,
) -> SchemePlan:
    """Compression for an arbitrary structure.

    Top layer ((r, 2r-1)); row i is encrypted, its quantum part goes to the
    hitting-set member of alpha_i and its key to a (|alpha_i|,|alpha_i|)
    split among alpha_i. The other r-1 top shares each go to a weighted
    majority code realised by replication.

    A completion holder outside the q-players is an error unless
    ``promote_completion`` is set, in which case they are made quantum-capable
    and the plan notes say so.
    """
    roster = gamma.roster
    if not check_no_cloning(gamma):
        raise SchemeError(f"{gamma} violates no-cloning: two authorized sets are disjoint")
    q = roster.quantum_capable
    if hitting_set is None:
        m = min_hitting_set(gamma, q)
        if m is None:
            raise SchemeError(f"no hitting set for {gamma} among q-players {fmt_set(q)}; compression impossible")
    else:
        m = roster.check(hitting_set)
        if not m <= q:
            raise SchemeError(f"hitting set {fmt_set(m)} contains c-players")
        if any(not (m & a) for a in gamma.minimal_sets):
            raise SchemeError(f"{fmt_set(m)} does not hit every set of {gamma}")
    if completion is None:
        completion = weighted_selfdual_completion(gamma, w_max)
        if completion is None:
            raise SchemeError(f"unsupported structure: no weighted completion of {gamma} with weights <= {w_max}")
    elif isinstance(completion, dict):
        completion = WeightedCompletion.from_weights(completion)
    if any(not completion.is_authorized(a) for a in gamma.minimal_sets):
        raise SchemeError("completion does not contain the structure")
    notes = [f"hitting set {fmt_set(m)}", f"completion weights {_fmt_weights(roster, completion)}"]
    outsiders = [p for p in completion.holders() if p not in q]
    if outsiders:
        if not promote_completion:
            raise SchemeError(
                f"completion needs non-q-player quantum share: {fmt_set(outsiders)} carry weight but are c-players"
            )
        roster = roster.with_quantum(outsiders)
        notes.append(f"promoted to q-player for the completion: {fmt_set(outsiders)}")
    r = len(gamma.minimal_sets)
    rows: list[QNode] = []
    for i, alpha in enumerate(gamma.minimal_sets, start=1):
        holder = next(p for p in roster.ordered(alpha) if p in m)
        members = roster.ordered(alpha)
        rows.append(Encrypt(Hold(holder), shamir_tree(len(members), members, f"K{i}"), f"K{i}"))
    replicated = tuple(
        Hold(p) for p in roster.names for _ in range(completion.weights.get(p, 0))
    )
    for _ in range(r - 1):
        rows.append(Qts(completion.threshold, replicated, "replicate"))
    root = Qts(r, tuple(rows))
    gamma_out = AccessStructure(roster, gamma.minimal_sets)
    return SchemePlan(roster, root, _pick_d(root, d), gamma_out, "general-compress", tuple(notes))


def _fmt_weights(roster: PlayerRoster, c: WeightedCompletion) -> str:
    return ",".join(f"{p}={c.weights.get(p, 0)}" for p in roster.names) + f" total={c.total}"


def _next_key_label(root: QNode) -> str:
    used = {e.label for e in encrypt_nodes(root)}
    i = 1
    while f"K{i}" in used:
        i += 1
    return f"K{i}"


def inflate(plan: SchemePlan, new_players: Sequence[str], gamma_prime: AccessStructure | Iterable[Iterable[str]]) -> SchemePlan:
    """Add c-players by encrypting the secret and sharing the key per the larger structure."""
    gamma = claimed_structure(plan.claimed)
    new_players = list(new_players)
    overlap = set(new_players) & set(plan.roster.names)
    if overlap:
        raise SchemeError(f"new players already in the roster: {sorted(overlap)}")
    roster = PlayerRoster(list(plan.roster.names) + new_players, plan.roster.quantum_capable)
    if not isinstance(gamma_prime, AccessStructure):
        gamma_prime = minimize(roster, gamma_prime)
    elif gamma_prime.roster.names != roster.names:
        gamma_prime = AccessStructure(roster, gamma_prime.minimal_sets)
    if not check_no_cloning(gamma_prime):
        raise SchemeError(f"{gamma_prime} violates no-cloning")
    back = restrict(gamma_prime, plan.roster.names)
    if set(back.minimal_sets) != set(gamma.minimal_sets):
        raise SchemeError(f"restriction of {gamma_prime} to the original players is {back}, not {gamma}")
    label = _next_key_label(plan.root)
    root = Encrypt(plan.root, CCumulative(gamma_prime, label), label)
    notes = plan.notes + (f"inflated from {plan.kind} by {','.join(new_players) or 'nobody'}",)
    return SchemePlan(roster, root, plan.d, gamma_prime, "inflate", notes)


def inflate_qts_conformal(
    k: int, n: int, gamma: int, d: int | None = None, roster: PlayerRoster | None = None
) -> SchemePlan:
    """A ((k,n)) code on the q-players with its key shared (k+g, n+g) among everyone."""
    if gamma < 0:
        raise SchemeError("gamma must be nonnegative")
    if not (2 * k > n and k <= n):
        raise SchemeError(f"(({k},{n})) violates n/2 < k <= n")
    if roster is None:
        names = [f"P{i}" for i in range(1, n + 1)] + [f"X{i}" for i in range(1, gamma + 1)]
        roster = PlayerRoster(names, names[:n])
    if len(roster) != n + gamma:
        raise SchemeError(f"roster has {len(roster)} players, expected {n + gamma}")
    qp = roster.quantum_players
    if len(qp) < n:
        raise SchemeError(f"need {n} q-players, roster has {len(qp)}")
    root = Encrypt(qts_over(k, qp[:n]), shamir_tree(k + gamma, roster.names, "K1"), "K1")
    claimed = AccessStructure.threshold(roster, k + gamma)
    return SchemePlan(roster, root, _pick_d(root, d), claimed, "inflate", (f"conformal gamma={gamma}",))


def inflate_qts(k: int, n: int, k_new: int, n_new: int, d: int | None = None, roster: PlayerRoster | None = None) -> SchemePlan:
    if k_new - k != n_new - n or n_new < n:
        raise SchemeError(
            f"non-conformal inflation impossible: (({k},{n})) -> ({k_new},{n_new}) must raise k and n together"
        )
    return inflate_qts_conformal(k, n, n_new - n, d, roster)


def build_q2ts(desc: TwinThresholdDescriptor, d: int | None = None, variant: str = "all-common") -> SchemePlan:
    """Encrypted (k_q, q) code among q-players, key (k_c, n-q) among c-players."""
    if desc.common_set:
        return build_q2ts_c(desc, d, variant)
    roster = desc.roster
    if not 2 * desc.k_q > desc.q:
        raise SchemeError(f"k_q = {desc.k_q} must exceed q/2 = {desc.q / 2} (no-cloning)")
    cp = roster.classical_players
    if desc.k_c > len(cp):
        raise SchemeError(f"k_c = {desc.k_c} exceeds the {len(cp)} c-players")
    root = Encrypt(qts_over(desc.k_q, roster.quantum_players), shamir_tree(desc.k_c, cp, "K1"), "K1")
    return SchemePlan(roster, root, _pick_d(root, d), desc, "q2ts")


STEP6_VARIANTS = ("all-common", "c-common")


def build_q2ts_c(desc: TwinThresholdDescriptor, d: int | None = None, variant: str = "all-common") -> SchemePlan:
    """Twin thresholds with a common set.

    ``variant`` picks how K_1 is shared: ``all-common`` uses a (|C|,|C|)
    split among all of C, ``c-common`` a (lambda_c, lambda_c) split among
    the c-players in C.
    """
    if not desc.common_set:
        return build_q2ts(desc, d)
    if variant not in STEP6_VARIANTS:
        raise SchemeError(f"unknown K_1 variant {variant!r}; choose from {STEP6_VARIANTS}")
    roster, c = desc.roster, desc.common_set
    lq, lc = desc.lambda_q, desc.lambda_c
    if lq == 0:
        raise SchemeError("common set has no q-player (lambda_q = 0); the quantum split needs one")
    if desc.q - lq == 0:
        raise SchemeError("no q-players outside the common set")
    if not 2 * (desc.k_q - lq) > desc.q - lq:
        raise SchemeError(
            f"k_q - lambda_q = {desc.k_q - lq} must exceed (q - lambda_q)/2 = {(desc.q - lq) / 2} (no-cloning)"
        )
    if desc.k_c < lc:
        raise SchemeError(f"k_c = {desc.k_c} is below lambda_c = {lc}")
    q_in = [p for p in roster.quantum_players if p in c]
    q_out = [p for p in roster.quantum_players if p not in c]
    c_in = [p for p in roster.classical_players if p in c]
    c_out = [p for p in roster.classical_players if p not in c]
    if desc.k_c - lc > len(c_out):
        raise SchemeError(f"k_c - lambda_c = {desc.k_c - lc} exceeds the {len(c_out)} c-players outside C")
    quantum = Qts(2, (qts_over(lq, q_in), qts_over(desc.k_q - lq, q_out)))
    if variant == "all-common":
        k1 = shamir_tree(len(c), roster.ordered(c), "K1")
    else:
        k1 = shamir_tree(lc, c_in, "K1")
    k2 = shamir_tree(desc.k_c - lc, c_out, "K2")
    root = Encrypt(quantum, CShamir(2, (k1, k2), "K"), "K1")
    return SchemePlan(roster, root, _pick_d(root, d), desc, "q2ts+c", (f"K_1 variant {variant}",))


# ---------------------------------------------------------------------------
# simulation


def _expand(state: QuditState, node: QNode, pos: int, d: int, keys: dict[str, tuple[int, int]]) -> QuditState:
    if isinstance(node, Hold):
        labels = list(state.labels)
        labels[pos] = node.player
        return state.relabel(labels)
    if isinstance(node, Encrypt):
        a, b = keys[node.label]
        state = apply_on(state, generalized_pauli(a, b, d), [pos])
        return _expand(state, node.child, pos, d, keys)
    code = QtsCode(node.k, node.n, d)
    state = replace_subsystem(state, pos, encoding_isometry(code), (d,) * code.n_full, code.labels())
    for i in reversed(range(node.n)):
        state = _expand(state, node.children[i], pos + i, d, keys)
    return state


def encode(plan: SchemePlan, state: QuditState, keys: dict[str, tuple[int, int]], target: int = 0) -> QuditState:
    """Run the plan's quantum layers on subsystem ``target``; other subsystems ride along."""
    if state.dims[target] != plan.d:
        raise SchemeError(f"secret has dimension {state.dims[target]}, plan uses {plan.d}")
    return _expand(state, plan.root, target, plan.d, keys)


KeySource = Callable[[Encrypt], tuple[int, int]]


def _size(node: QNode) -> int:
    return len(layout(node))


def _decode(state: QuditState, node: QNode, offset: int, players: frozenset[str], d: int, key_of: KeySource):
    if isinstance(node, Hold):
        if node.player not in players:
            raise InsufficientShares(f"share held by {node.player} is missing")
        return state, offset
    if isinstance(node, Encrypt):
        state, pos = _decode(state, node.child, offset, players, d, key_of)
        a, b = key_of(node)
        return apply_on(state, generalized_pauli(a, b, d).dagger, [pos]), pos
    got: list[tuple[int, int]] = []
    first_miss = None
    start = offset
    for i, child in enumerate(node.children):
        if len(got) == node.k:
            break
        try:
            state, pos = _decode(state, child, start, players, d, key_of)
            got.append((i, pos))
        except InsufficientShares as exc:
            first_miss = first_miss or exc
        start += _size(child)
    if len(got) < node.k:
        name = f"(({node.k},{node.n}))" + (f" {node.label}" if node.label else "")
        raise InsufficientShares(
            f"insufficient shares for layer {name}: {len(got)} of {node.k} recovered"
            + (f" ({first_miss})" if first_miss else "")
        )
    code = QtsCode(node.k, node.n, d)
    out = apply_on(state, recovery_unitary(code, [i for i, _ in got]), [pos for _, pos in got])
    return out, got[0][1]


def decode(plan: SchemePlan, state: QuditState, players: Iterable[str], key_of: KeySource) -> tuple[QuditState, int]:
    """Undo the plan using only ``players``' qudits; returns the state and the output position."""
    t = plan.roster.check(players)
    if not t:
        raise InsufficientShares("empty player subset holds no shares")
    return _decode(state, plan.root, 0, t, plan.d, key_of)


# ---------------------------------------------------------------------------
# dealing


class RecordingRng:
    """Wraps a numpy Generator and logs every integer drawn."""

    def __init__(self, seed: int | None = None, rng: np.random.Generator | None = None):
        self.seed = seed
        self._rng = rng if rng is not None else np.random.default_rng(seed)
        self.draws: list[int] = []

    def integers(self, low: int, high: int) -> int:
        v = int(self._rng.integers(low, high))
        self.draws.append(v)
        return v


@dataclass(frozen=True)
class Deal:
    plan: SchemePlan
    global_state: QuditState
    classical_shares: tuple[ClassicalShare, ...]
    randomness_record: dict
    secret_snapshot: QuditState = field(repr=False)
    dealer_keys: dict = field(default_factory=dict, repr=False)

    def shares_of(self, players: Iterable[str]) -> list[ClassicalShare]:
        t = set(players)
        return [s for s in self.classical_shares if s.holder in t or s.holder == PUBLIC]

    def qudits_of(self, players: Iterable[str]) -> list[int]:
        t = set(players)
        return [i for i, lab in enumerate(self.global_state.labels) if lab in t]


def draw_keys(plan: SchemePlan, rng) -> tuple[dict[str, tuple[int, int]], list[ClassicalShare]]:
    """Fresh QOTP keys and their classical shares, in preorder of the encryptions."""
    keys: dict[str, tuple[int, int]] = {}
    shares: list[ClassicalShare] = []
    for e in plan.keys:
        a, b = int(rng.integers(0, plan.d)), int(rng.integers(0, plan.d))
        keys[e.label] = (a, b)
        digits = (FieldElement(a, plan.d), FieldElement(b, plan.d))
        shares.extend(split_tree(e.key, digits, rng, e.label))
    return keys, shares


def deal(plan: SchemePlan, secret: QuditState, seed: int | None = None, rng: np.random.Generator | None = None) -> Deal:
    if secret.n != 1:
        raise SchemeError(f"secret must be a single qudit, got {secret.n} subsystems")
    if secret.dims[0] != plan.d:
        raise SchemeError(f"secret has dimension {secret.dims[0]}, plan uses {plan.d}")
    if not secret.is_pure:
        raise SchemeError("dealing needs a pure secret")
    rec = RecordingRng(seed, rng)
    keys, shares = draw_keys(plan, rec)
    state = encode(plan, secret.relabel(["secret"]), keys)
    record = {"seed": seed, "draws": list(rec.draws)}
    return Deal(plan, state, tuple(shares), record, secret, keys)


def key_from_shares(shares: Sequence[ClassicalShare]) -> KeySource:
    def key_of(node: Encrypt) -> tuple[int, int]:
        a, b = reconstruct_tree(node.key, shares, node.label)
        return a, b

    return key_of


def reconstruct(dl: Deal, players: Iterable[str]) -> QuditState:
    """Recover the secret from the listed players' quantum and classical shares."""
    t = dl.plan.roster.check(players)
    if not t:
        raise InsufficientShares("empty player subset holds no shares")
    state, pos = decode(dl.plan, dl.global_state, t, key_from_shares(dl.shares_of(t)))
    return partial_trace(state, [pos]).relabel(["output"])


# ---------------------------------------------------------------------------
# serialization


def _structure_json(g: AccessStructure) -> dict:
    return {
        "players": list(g.roster.names),
        "quantum": list(g.roster.quantum_players),
        "sets": [list(g.roster.ordered(s)) for s in g.minimal_sets],
    }


def _structure_from(obj: dict) -> AccessStructure:
    roster = PlayerRoster(obj["players"], obj["quantum"])
    return AccessStructure(roster, tuple(frozenset(s) for s in obj["sets"]))


def cnode_to_json(node: CNode) -> dict:
    if isinstance(node, CHold):
        return {"type": "hold", "player": node.player}
    if isinstance(node, CPublic):
        return {"type": "public"}
    if isinstance(node, CShamir):
        return {"type": "shamir", "k": node.k, "label": node.label, "children": [cnode_to_json(c) for c in node.children]}
    return {"type": "cumulative", "label": node.label, "structure": _structure_json(node.structure)}


def cnode_from_json(obj: dict) -> CNode:
    kind = obj["type"]
    if kind == "hold":
        return CHold(obj["player"])
    if kind == "public":
        return CPublic()
    if kind == "shamir":
        return CShamir(obj["k"], tuple(cnode_from_json(c) for c in obj["children"]), obj.get("label", ""))
    if kind == "cumulative":
        return CCumulative(_structure_from(obj["structure"]), obj.get("label", ""))
    raise SchemeError(f"unknown classical node type {kind!r}")


def qnode_to_json(node: QNode) -> dict:
    if isinstance(node, Hold):
        return {"type": "hold", "player": node.player}
    if isinstance(node, Qts):
        return {"type": "qts", "k": node.k, "label": node.label, "children": [qnode_to_json(c) for c in node.children]}
    return {"type": "encrypt", "label": node.label, "key": cnode_to_json(node.key), "child": qnode_to_json(node.child)}


def qnode_from_json(obj: dict) -> QNode:
    kind = obj["type"]
    if kind == "hold":
        return Hold(obj["player"])
    if kind == "qts":
        return Qts(obj["k"], tuple(qnode_from_json(c) for c in obj["children"]), obj.get("label", ""))
    if kind == "encrypt":
        return Encrypt(qnode_from_json(obj["child"]), cnode_from_json(obj["key"]), obj["label"])
    raise SchemeError(f"unknown quantum node type {kind!r}")


def plan_to_json(plan: SchemePlan) -> dict:
    if isinstance(plan.claimed, AccessStructure):
        claimed = {"type": "access", "sets": [list(plan.roster.ordered(s)) for s in plan.claimed.minimal_sets]}
    else:
        claimed = {
            "type": "twin",
            "k_c": plan.claimed.k_c,
            "k_q": plan.claimed.k_q,
            "common": list(plan.roster.ordered(plan.claimed.common_set)),
        }
    return {
        "kind": plan.kind,
        "d": plan.d,
        "players": list(plan.roster.names),
        "quantum": list(plan.roster.quantum_players),
        "root": qnode_to_json(plan.root),
        "claimed": claimed,
        "notes": list(plan.notes),
    }


def plan_from_json(obj: dict) -> SchemePlan:
    roster = PlayerRoster(obj["players"], obj["quantum"])
    c = obj["claimed"]
    if c["type"] == "access":
        claimed: Claimed = AccessStructure(roster, tuple(frozenset(s) for s in c["sets"]))
    elif c["type"] == "twin":
        claimed = TwinThresholdDescriptor(roster, c["k_c"], c["k_q"], frozenset(c["common"]))
    else:
        raise SchemeError(f"unknown claimed structure type {c['type']!r}")
    return SchemePlan(roster, qnode_from_json(obj["root"]), obj["d"], claimed, obj["kind"], tuple(obj.get("notes", ())))


def all_key_tuples(plan: SchemePlan) -> Iterable[dict[str, tuple[int, int]]]:
    labels = [e.label for e in plan.keys]
    for flat in itertools.product(range(plan.d), repeat=2 * len(labels)):
        yield {lab: (flat[2 * i], flat[2 * i + 1]) for i, lab in enumerate(labels)}
