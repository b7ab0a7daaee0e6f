"""Monotone access structures over a named player roster.

Players are plain strings. Player subsets are ``frozenset`` objects; whenever
an order matters (tie-breaking, printing) subsets are sorted by name.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

Subset = frozenset


class UnknownPlayerError(ValueError):
    pass


@dataclass(frozen=True)
class PlayerRoster:
    """Ordered player names plus the quantum-capable subset."""

    names: tuple[str, ...]
    quantum_capable: frozenset[str]

    def __init__(self, names: Iterable[str], quantum_capable: Iterable[str] | None = None):
        names = tuple(names)
        if not names:
            raise ValueError("roster must contain at least one player")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate player names in {names}")
        q = frozenset(names if quantum_capable is None else quantum_capable)
        unknown = q - set(names)
        if unknown:
            raise UnknownPlayerError(f"quantum-capable players not in roster: {sorted(unknown)}")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "quantum_capable", q)

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __contains__(self, name: object) -> bool:
        return name in self.names

    @property
    def classical_only(self) -> frozenset[str]:
        return frozenset(self.names) - self.quantum_capable

    @property
    def quantum_players(self) -> tuple[str, ...]:
        return tuple(p for p in self.names if p in self.quantum_capable)

    @property
    def classical_players(self) -> tuple[str, ...]:
        return tuple(p for p in self.names if p not in self.quantum_capable)

    def check(self, players: Iterable[str]) -> frozenset[str]:
        s = frozenset(players)
        unknown = s - set(self.names)
        if unknown:
            raise UnknownPlayerError(f"unknown players: {sorted(unknown)}")
        return s

    def ordered(self, players: Iterable[str]) -> tuple[str, ...]:
        s = set(players)
        return tuple(p for p in self.names if p in s)

    def sub(self, players: Iterable[str]) -> "PlayerRoster":
        s = self.check(players)
        return PlayerRoster(self.ordered(s), self.quantum_capable & s)

    def with_quantum(self, players: Iterable[str]) -> "PlayerRoster":
        return PlayerRoster(self.names, self.quantum_capable | self.check(players))

    def subsets(self) -> Iterator[frozenset[str]]:
        """All 2^n subsets, by cardinality then roster order."""
        for size in range(len(self.names) + 1):
            for combo in itertools.combinations(self.names, size):
                yield frozenset(combo)


def fmt_set(players: Iterable[str]) -> str:
    names = sorted(players)
    if all(len(p) == 1 for p in names):
        return "".join(names)
    return "{" + ",".join(names) + "}"


@dataclass(frozen=True)
class AccessStructure:
    """A monotone access structure given by its minimal authorized sets."""

    roster: PlayerRoster
    minimal_sets: tuple[frozenset[str], ...]

    def __post_init__(self):
        if not self.minimal_sets:
            raise ValueError("access structure needs at least one minimal set")
        for s in self.minimal_sets:
            if not s:
                raise ValueError("minimal sets must be nonempty")
            self.roster.check(s)
        for a, b in itertools.permutations(self.minimal_sets, 2):
            if a <= b:
                raise ValueError(f"not an antichain: {fmt_set(a)} is contained in {fmt_set(b)}")

    @classmethod
    def threshold(cls, roster: PlayerRoster, k: int, players: Iterable[str] | None = None) -> "AccessStructure":
        holders = roster.names if players is None else roster.ordered(players)
        if not 1 <= k <= len(holders):
            raise ValueError(f"threshold {k} out of range for {len(holders)} players")
        return cls(roster, tuple(frozenset(c) for c in itertools.combinations(holders, k)))

    def is_authorized(self, players: Iterable[str]) -> bool:
        t = self.roster.check(players)
        return any(s <= t for s in self.minimal_sets)

    def authorized_subsets(self) -> list[frozenset[str]]:
        return [t for t in self.roster.subsets() if self.is_authorized(t)]

    def maximal_unauthorized_sets(self) -> list[frozenset[str]]:
        """Inclusion-maximal unauthorized subsets of the roster, by brute force."""
        everyone = frozenset(self.roster.names)
        out = []
        for t in self.roster.subsets():
            if self.is_authorized(t):
                continue
            if all(self.is_authorized(t | {x}) for x in everyone - t):
                out.append(t)
        return out

    def support(self) -> frozenset[str]:
        return frozenset().union(*self.minimal_sets)

    def __str__(self) -> str:
        return "{" + ", ".join(fmt_set(s) for s in self.minimal_sets) + "}"


def minimize(roster: PlayerRoster, sets: Iterable[Iterable[str]]) -> AccessStructure:
    """Reduce a family of authorized sets to its inclusion-minimal antichain.

    First-occurrence order of the input is kept.
    """
    family: list[frozenset[str]] = []
    for s in sets:
        fs = roster.check(s)
        if not fs:
            raise ValueError("authorized sets must be nonempty")
        if fs not in family:
            family.append(fs)
    if not family:
        raise ValueError("at least one authorized set is required")
    kept = [s for s in family if not any(o < s for o in family)]
    return AccessStructure(roster, tuple(kept))


def check_no_cloning(gamma: AccessStructure) -> bool:
    """True iff every pair of minimal authorized sets intersects."""
    return all(a & b for a, b in itertools.combinations(gamma.minimal_sets, 2))


def is_authorized(gamma: AccessStructure, players: Iterable[str]) -> bool:
    return gamma.is_authorized(players)


def restrict(gamma: AccessStructure, players: Iterable[str]) -> AccessStructure:
    """Restriction to ``players`` with everyone outside taken as cooperating.

    Each minimal set is intersected with ``players`` and the result minimized;
    intersections that come out empty are dropped.
    """
    p = gamma.roster.check(players)
    if not p:
        raise ValueError("cannot restrict to an empty player set")
    sub = gamma.roster.sub(p)
    cut = [s & p for s in gamma.minimal_sets if s & p]
    if not cut:
        raise ValueError("restriction leaves no nonempty authorized set")
    return minimize(sub, cut)


def min_hitting_set(gamma: AccessStructure, candidates: Iterable[str]) -> frozenset[str] | None:
    """Smallest subset of ``candidates`` meeting every minimal set.

    Exhaustive search by increasing size; among equal sizes the first subset
    in lexicographic order of sorted names wins. ``None`` if no subset of
    ``candidates`` hits every minimal set.
    """
    q = sorted(gamma.roster.check(candidates))
    if len(q) > 20:
        raise ValueError("exhaustive hitting-set search is limited to 20 candidates")
    if any(not (s & set(q)) for s in gamma.minimal_sets):
        return None
    for size in range(1, len(q) + 1):
        for combo in itertools.combinations(q, size):
            h = frozenset(combo)
            if all(h & s for s in gamma.minimal_sets):
                return h
    return None  # pragma: no cover - unreachable once every set meets q


@dataclass(frozen=True)
class WeightedCompletion:
    """Weighted-majority self-dual structure: authorized iff weight >= threshold."""

    weights: Mapping[str, int]
    total: int
    threshold: int

    def __post_init__(self):
        if self.total % 2 != 1:
            raise ValueError("total weight must be odd")
        if self.threshold != (self.total + 1) // 2:
            raise ValueError("threshold must equal (total+1)/2")
        if sum(self.weights.values()) != self.total or any(w < 0 for w in self.weights.values()):
            raise ValueError("weights must be nonnegative and sum to total")

    @classmethod
    def from_weights(cls, weights: Mapping[str, int]) -> "WeightedCompletion":
        total = sum(weights.values())
        return cls(dict(weights), total, (total + 1) // 2)

    def weight(self, players: Iterable[str]) -> int:
        return sum(self.weights.get(p, 0) for p in players)

    def is_authorized(self, players: Iterable[str]) -> bool:
        return self.weight(players) >= self.threshold

    def holders(self) -> list[str]:
        return [p for p, w in self.weights.items() if w > 0]

    def __hash__(self):
        return hash((tuple(sorted(self.weights.items())), self.total))

    def __eq__(self, other):
        if not isinstance(other, WeightedCompletion):
            return NotImplemented
        return (
            {p: w for p, w in self.weights.items() if w}
            == {p: w for p, w in other.weights.items() if w}
            and self.total == other.total
        )


def _bounded_compositions(total: int, slots: int, cap: int) -> Iterator[tuple[int, ...]]:
    """Vectors of ``slots`` entries in [0, cap] summing to ``total``, lexicographically."""
    if slots == 0:
        if total == 0:
            yield ()
        return
    lo = max(0, total - cap * (slots - 1))
    for first in range(lo, min(cap, total) + 1):
        for rest in _bounded_compositions(total - first, slots - 1, cap):
            yield (first,) + rest


def weighted_selfdual_completion(gamma: AccessStructure, w_max: int) -> WeightedCompletion | None:
    """First weight vector (smallest odd total, then lexicographic in roster
    order) with entries in [0, w_max] under which every minimal set carries a
    strict weight majority."""
    if w_max < 1:
        raise ValueError("w_max must be at least 1")
    if not check_no_cloning(gamma):
        raise ValueError(f"{gamma} has disjoint authorized sets; no self-dual completion exists")
    names = gamma.roster.names
    index = {p: i for i, p in enumerate(names)}
    members = [[index[p] for p in s] for s in gamma.minimal_sets]
    for total in range(1, len(names) * w_max + 1, 2):
        for vec in _bounded_compositions(total, len(names), w_max):
            if all(2 * sum(vec[i] for i in m) > total for m in members):
                return WeightedCompletion.from_weights(dict(zip(names, vec)))
    return None
