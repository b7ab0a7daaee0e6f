import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import FixedRng
from hybridqss.access_structure import PlayerRoster, minimize
from hybridqss.classical_sharing import (
    CCumulative,
    CHold,
    CPublic,
    CShamir,
    FieldElement,
    cumulative_reconstruct,
    cumulative_split,
    digit_view_counts,
    is_prime,
    next_prime,
    reconstruct_tree,
    shamir_reconstruct,
    shamir_split,
    shamir_tree,
    split_tree,
    tree_obtains,
    tree_players,
)
from hybridqss.errors import InsufficientShares


def test_primes():
    assert [p for p in range(20) if is_prime(p)] == [2, 3, 5, 7, 11, 13, 17, 19]
    assert next_prime(8) == 11 and next_prime(7) == 7 and next_prime(0) == 2


def test_field_arithmetic():
    a, b = FieldElement(3, 7), FieldElement(5, 7)
    assert (a + b).value == 1 and (a - b).value == 5 and (a * b).value == 1
    assert (a / b * b).value == 3
    with pytest.raises(ZeroDivisionError):
        FieldElement(0, 7).inverse()


def test_shamir_hand_example():
    shares = shamir_split(FieldElement(3, 7), 2, 3, FixedRng([2]))
    assert [(s.index, s.payload[0].value) for s in shares] == [(1, 5), (2, 0), (3, 2)]
    assert shamir_reconstruct(shares[:2], 2).value == 3
    assert shamir_reconstruct(shares[1:], 2).value == 3
    with pytest.raises(InsufficientShares):
        shamir_reconstruct(shares[:1], 2)


def test_shamir_degenerate():
    shares = shamir_split(FieldElement(4, 5), 1, 1, FixedRng([]))
    assert shamir_reconstruct(shares, 1).value == 4


def test_shamir_field_too_small():
    with pytest.raises(ValueError):
        shamir_split(FieldElement(1, 3), 2, 3, FixedRng([0]))


@given(st.sampled_from([5, 7, 11]), st.data())
def test_shamir_any_k_subset_recovers(p, data):
    n = data.draw(st.integers(1, p - 1))
    k = data.draw(st.integers(1, n))
    secret = data.draw(st.integers(0, p - 1))
    shares = shamir_split(FieldElement(secret, p), k, n, np.random.default_rng(data.draw(st.integers(0, 999))))
    pick = data.draw(st.permutations(shares))[:k]
    assert shamir_reconstruct(pick, k).value == secret


def test_cumulative_example():
    r = PlayerRoster("ABC")
    g = minimize(r, ["AB", "BC"])
    assert sorted("".join(sorted(b)) for b in g.maximal_unauthorized_sets()) == ["AC", "B"]
    shares = cumulative_split(FieldElement(4, 5), g, FixedRng([2]))
    by_block = {}
    for s in shares:
        by_block.setdefault(s.index, set()).add(s.holder)
    assert sorted("".join(sorted(h)) for h in by_block.values()) == ["AC", "B"]
    for t in ("AB", "BC", "ABC"):
        assert cumulative_reconstruct([s for s in shares if s.holder in t], g).value == 4
    with pytest.raises(InsufficientShares, match="insufficient shares"):
        cumulative_reconstruct([s for s in shares if s.holder in "AC"], g)


def test_cumulative_single_set():
    g = minimize(PlayerRoster("A"), ["A"])
    shares = cumulative_split(FieldElement(3, 5), g, FixedRng([]))
    assert len(shares) == 1 and shares[0].payload[0].value == 3


NESTED = CShamir(2, (shamir_tree(2, ["A", "B"], "x"), CHold("C"), CCumulative(minimize(PlayerRoster("DE"), ["D", "E"]))), "K")


@pytest.mark.parametrize(
    "tree",
    [shamir_tree(3, ["A", "B", "C", "D"]), NESTED, CShamir(2, (CHold("A"), CPublic()), "K"), CPublic()],
)
def test_tree_obtains_matches_reconstruction(tree, rng):
    p = 7
    players = sorted(tree_players(tree)) or ["A"]
    shares = split_tree(tree, (FieldElement(5, p), FieldElement(2, p)), rng)
    for size in range(len(players) + 1):
        for t in itertools.combinations(players, size):
            t = frozenset(t)
            held = [s for s in shares if s.holder in t or s.holder == "*public*"]
            if tree_obtains(tree, t):
                assert reconstruct_tree(tree, held) == (5, 2)
            else:
                with pytest.raises(InsufficientShares):
                    reconstruct_tree(tree, held)


def test_shamir_tree_zero_threshold_is_public():
    assert isinstance(shamir_tree(0, ["A"]), CPublic)
    with pytest.raises(ValueError):
        shamir_tree(3, ["A", "B"])


@pytest.mark.parametrize("tree", [shamir_tree(2, ["A", "B", "C"]), NESTED])
def test_non_obtaining_views_are_independent_of_the_digit(tree):
    players = sorted(tree_players(tree))
    for size in range(len(players) + 1):
        for t in itertools.combinations(players, size):
            t = frozenset(t)
            if tree_obtains(tree, t):
                continue
            table = digit_view_counts(tree, t, 5)
            assert all(table[v] == table[0] for v in range(5))
