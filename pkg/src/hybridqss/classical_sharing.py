"""Classical secret sharing over prime fields.

Two flat schemes (Shamir threshold sharing and the cumulative construction
for arbitrary monotone structures) plus nested share trees, where a share
may itself be re-shared by another scheme. Multi-digit secrets are shared
digit by digit with independent randomness.
"""

from __future__ import annotations

import functools
import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Protocol, Sequence, Union

from .access_structure import AccessStructure
from .errors import InsufficientShares


class IntSource(Protocol):
    def integers(self, low: int, high: int): ...


@functools.lru_cache(maxsize=None)
def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    p = max(2, n)
    while not is_prime(p):
        p += 1
    return p


@dataclass(frozen=True)
class FieldElement:
    value: int
    modulus: int

    def __post_init__(self):
        if not is_prime(self.modulus):
            raise ValueError(f"modulus {self.modulus} is not prime")
        if not 0 <= self.value < self.modulus:
            raise ValueError(f"{self.value} is not reduced modulo {self.modulus}")

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.modulus != self.modulus:
                raise ValueError("cannot mix elements of different fields")
            return other.value
        return int(other)

    def __add__(self, other):
        return FieldElement((self.value + self._coerce(other)) % self.modulus, self.modulus)

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement((self.value - self._coerce(other)) % self.modulus, self.modulus)

    def __rsub__(self, other):
        return FieldElement((self._coerce(other) - self.value) % self.modulus, self.modulus)

    def __neg__(self):
        return FieldElement(-self.value % self.modulus, self.modulus)

    def __mul__(self, other):
        return FieldElement((self.value * self._coerce(other)) % self.modulus, self.modulus)

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if self.value == 0:
            raise ZeroDivisionError("zero has no inverse")
        return FieldElement(pow(self.value, self.modulus - 2, self.modulus), self.modulus)

    def __truediv__(self, other):
        return self * FieldElement(self._coerce(other) % self.modulus, self.modulus).inverse()

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.modulus})"


@dataclass(frozen=True)
class ClassicalShare:
    """One classical share.

    ``index`` is the Shamir evaluation point, or the addend number for
    cumulative shares. ``payload`` holds one field element per secret digit.
    """

    holder: str
    label: str
    index: int | None
    payload: tuple[FieldElement, ...]

    def __post_init__(self):
        if not self.payload:
            raise ValueError("share payload must be nonempty")

    @property
    def modulus(self) -> int:
        return self.payload[0].modulus

    @property
    def digits(self) -> tuple[int, ...]:
        return tuple(e.value for e in self.payload)


Secret = Union[FieldElement, Sequence[FieldElement]]


def _as_digits(secret: Secret) -> tuple[FieldElement, ...]:
    digits = (secret,) if isinstance(secret, FieldElement) else tuple(secret)
    if not digits:
        raise ValueError("secret must have at least one digit")
    if len({e.modulus for e in digits}) != 1:
        raise ValueError("all secret digits must share one modulus")
    return digits


def poly_eval(coeffs: Sequence[int], x: int, p: int) -> int:
    y = 0
    for c in reversed(coeffs):
        y = (y * x + c) % p
    return y


def lagrange_at_zero(points: Sequence[int], values: Sequence[int], p: int) -> int:
    total = 0
    for i, (xi, yi) in enumerate(zip(points, values)):
        num, den = 1, 1
        for j, xj in enumerate(points):
            if j != i:
                num = num * (-xj) % p
                den = den * (xi - xj) % p
        total = (total + yi * num * pow(den, p - 2, p)) % p
    return total


def _check_threshold(k: int, n: int, p: int) -> None:
    if k < 1:
        raise ValueError("threshold must be at least 1")
    if k > n:
        raise ValueError(f"threshold {k} exceeds share count {n}")
    if n >= p:
        raise ValueError(f"{n} shares need {n} distinct nonzero points; field size {p} is too small")


def shamir_split(
    secret: Secret,
    k: int,
    n: int,
    rng: IntSource,
    holders: Sequence[str] | None = None,
    label: str = "shamir",
) -> list[ClassicalShare]:
    """Split ``secret`` with a (k, n) Shamir scheme.

    Share i (1-based) is f(i) where f has degree k-1 and f(0) = secret.
    For each digit, ``rng.integers(0, p)`` is called k-1 times for the
    coefficients of x, x^2, ..., x^(k-1).
    """
    digits = _as_digits(secret)
    p = digits[0].modulus
    _check_threshold(k, n, p)
    holders = [str(i) for i in range(1, n + 1)] if holders is None else list(holders)
    if len(holders) != n:
        raise ValueError("need exactly one holder per share")
    polys = [[d.value] + [int(rng.integers(0, p)) for _ in range(k - 1)] for d in digits]
    return [
        ClassicalShare(
            holders[x - 1],
            label,
            x,
            tuple(FieldElement(poly_eval(f, x, p), p) for f in polys),
        )
        for x in range(1, n + 1)
    ]


def shamir_reconstruct(shares: Sequence[ClassicalShare], k: int) -> Secret:
    if len(shares) < k:
        raise InsufficientShares(f"need {k} Shamir shares, got {len(shares)}")
    points = [s.index for s in shares]
    if len(set(points)) != len(points):
        raise ValueError(f"duplicate evaluation points {points}")
    use = shares[:k]
    p = use[0].modulus
    width = len(use[0].payload)
    digits = tuple(
        FieldElement(lagrange_at_zero([s.index for s in use], [s.payload[j].value for s in use], p), p)
        for j in range(width)
    )
    return digits[0] if width == 1 else digits


def cumulative_split(
    secret: Secret, gamma: AccessStructure, rng: IntSource, label: str = "cumulative"
) -> list[ClassicalShare]:
    """Cumulative sharing: one addend per maximal unauthorized set B, handed
    to every player outside B. The addends sum to the secret; all but the last
    are drawn uniformly."""
    digits = _as_digits(secret)
    p = digits[0].modulus
    blocks = gamma.maximal_unauthorized_sets()
    addends = []
    for d in digits:
        rs = [int(rng.integers(0, p)) for _ in range(len(blocks) - 1)]
        rs.append((d.value - sum(rs)) % p)
        addends.append(rs)
    shares = []
    for j, b in enumerate(blocks):
        payload = tuple(FieldElement(addends[t][j], p) for t in range(len(digits)))
        for player in gamma.roster.names:
            if player not in b:
                shares.append(ClassicalShare(player, label, j, payload))
    return shares


def cumulative_reconstruct(shares: Iterable[ClassicalShare], gamma: AccessStructure) -> Secret:
    blocks = gamma.maximal_unauthorized_sets()
    found: dict[int, ClassicalShare] = {}
    for s in shares:
        found.setdefault(s.index, s)
    missing = [j for j in range(len(blocks)) if j not in found]
    if missing:
        raise InsufficientShares(f"insufficient shares: missing cumulative addends {missing}")
    first = found[0]
    p = first.modulus
    width = len(first.payload)
    digits = tuple(
        FieldElement(sum(found[j].payload[t].value for j in range(len(blocks))) % p, p)
        for t in range(width)
    )
    return digits[0] if width == 1 else digits


# ---------------------------------------------------------------------------
# Nested share trees


@dataclass(frozen=True)
class CHold:
    player: str


@dataclass(frozen=True)
class CPublic:
    """A value published in the plan; every subset sees it."""


@dataclass(frozen=True)
class CShamir:
    k: int
    children: tuple["CNode", ...]
    label: str = ""

    @property
    def n(self) -> int:
        return len(self.children)


@dataclass(frozen=True)
class CCumulative:
    structure: AccessStructure
    label: str = ""


CNode = Union[CHold, CPublic, CShamir, CCumulative]

PUBLIC = "*public*"


def shamir_tree(k: int, players: Sequence[str], label: str = "") -> CNode:
    """A flat (k, n) Shamir node over ``players``; k == 0 publishes the value."""
    if k == 0:
        return CPublic()
    if k > len(players):
        raise ValueError(f"({k},{len(players)}) classical threshold is impossible")
    return CShamir(k, tuple(CHold(p) for p in players), label)


def tree_players(node: CNode) -> frozenset[str]:
    if isinstance(node, CHold):
        return frozenset([node.player])
    if isinstance(node, CPublic):
        return frozenset()
    if isinstance(node, CShamir):
        return frozenset().union(*(tree_players(c) for c in node.children))
    return frozenset(node.structure.roster.names)


def tree_min_modulus(node: CNode) -> int:
    """Smallest field size the tree's Shamir nodes can live in."""
    if isinstance(node, CShamir):
        return max([node.n + 1] + [tree_min_modulus(c) for c in node.children])
    return 2


def tree_obtains(node: CNode, players: frozenset[str]) -> bool:
    """Symbolic evaluation: can ``players`` recover this node's value?"""
    if isinstance(node, CHold):
        return node.player in players
    if isinstance(node, CPublic):
        return True
    if isinstance(node, CShamir):
        return sum(tree_obtains(c, players) for c in node.children) >= node.k
    return node.structure.is_authorized(players & frozenset(node.structure.roster.names))


def _split_digit(node: CNode, value: int, p: int, draw, path: str, out: list) -> None:
    if isinstance(node, CHold):
        out.append((node.player, path, None, value))
    elif isinstance(node, CPublic):
        out.append((PUBLIC, path, None, value))
    elif isinstance(node, CShamir):
        _check_threshold(node.k, node.n, p)
        coeffs = [value] + [draw() for _ in range(node.k - 1)]
        for i, child in enumerate(node.children, start=1):
            sub = len(out)
            _split_digit(child, poly_eval(coeffs, i, p), p, draw, f"{path}.{i}", out)
            if isinstance(child, (CHold, CPublic)):
                h, pth, _, v = out[sub]
                out[sub] = (h, pth, i, v)
    else:
        blocks = node.structure.maximal_unauthorized_sets()
        rs = [draw() for _ in range(len(blocks) - 1)]
        rs.append((value - sum(rs)) % p)
        for j, b in enumerate(blocks):
            for player in node.structure.roster.names:
                if player not in b:
                    out.append((player, f"{path}.r{j}", j, rs[j]))


def split_tree_digit(node: CNode, value: int, p: int, randomness: Iterator[int], path: str = "K"):
    """Deterministically share one digit, pulling randomness from an iterator.

    Returns a list of (holder, path, index, value) leaf records.
    """
    out: list = []
    _split_digit(node, value % p, p, lambda: next(randomness) % p, path, out)
    return out


def tree_randomness_count(node: CNode) -> int:
    """Number of field draws consumed when sharing one digit."""
    if isinstance(node, CShamir):
        return node.k - 1 + sum(tree_randomness_count(c) for c in node.children)
    if isinstance(node, CCumulative):
        return len(node.structure.maximal_unauthorized_sets()) - 1
    return 0


def split_tree(node: CNode, secret: Secret, rng: IntSource, label: str = "K") -> list[ClassicalShare]:
    """Share every digit of ``secret`` through the tree with fresh randomness."""
    digits = _as_digits(secret)
    p = digits[0].modulus
    per_digit = [
        split_tree_digit(node, d.value, p, iter(lambda: int(rng.integers(0, p)), None), label)
        for d in digits
    ]
    shares = []
    for leaf in range(len(per_digit[0])):
        holder, path, index, _ = per_digit[0][leaf]
        payload = tuple(FieldElement(rows[leaf][3], p) for rows in per_digit)
        shares.append(ClassicalShare(holder, path, index, payload))
    return shares


def _recover(node: CNode, path: str, by_path: dict[str, ClassicalShare], p: int, width: int):
    """Digits of this node's value, or ``None`` if the held shares don't reach it."""
    if isinstance(node, (CHold, CPublic)):
        s = by_path.get(path)
        return None if s is None else s.digits
    if isinstance(node, CShamir):
        got = []
        for i, child in enumerate(node.children, start=1):
            v = _recover(child, f"{path}.{i}", by_path, p, width)
            if v is not None:
                got.append((i, v))
            if len(got) == node.k:
                break
        if len(got) < node.k:
            return None
        return tuple(
            lagrange_at_zero([i for i, _ in got], [v[t] for _, v in got], p) for t in range(width)
        )
    blocks = node.structure.maximal_unauthorized_sets()
    sums = [0] * width
    for j in range(len(blocks)):
        hit = by_path.get(f"{path}.r{j}")
        if hit is None:
            return None
        sums = [(a + b) % p for a, b in zip(sums, hit.digits)]
    return tuple(sums)


def reconstruct_tree(node: CNode, shares: Iterable[ClassicalShare], label: str = "K") -> tuple[int, ...]:
    """Recover the shared digits from the given leaf shares.

    Raises :class:`InsufficientShares` naming ``label`` if they don't suffice.
    """
    by_path: dict[str, ClassicalShare] = {}
    for s in shares:
        if s.label == label or s.label.startswith(label + "."):
            by_path.setdefault(s.label, s)
    if not by_path:
        raise InsufficientShares(f"insufficient shares for key {label}: none held")
    first = next(iter(by_path.values()))
    out = _recover(node, label, by_path, first.modulus, len(first.payload))
    if out is None:
        raise InsufficientShares(f"insufficient shares for key {label}: threshold not met")
    return out


def digit_view_counts(node: CNode, players: frozenset[str], p: int) -> list[Counter]:
    """Exact view distribution for one shared digit.

    Entry v maps each view (the tuple of leaf values visible to ``players``,
    public leaves included) to the number of randomness branches producing
    it when the digit equals v.
    """
    draws = tree_randomness_count(node)
    table = []
    for value in range(p):
        counts: Counter = Counter()
        for rand in itertools.product(range(p), repeat=draws):
            leaves = split_tree_digit(node, value, p, iter(rand))
            counts[tuple(v for h, _, _, v in leaves if h in players or h == PUBLIC)] += 1
        table.append(counts)
    return table


def digit_randomness_space(node: CNode, p: int) -> int:
    return p ** tree_randomness_count(node)
