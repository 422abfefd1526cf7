import pytest

from neuralbayes.models.partitions import MAX_DIM, bell_number, block_profiles, restricted_growth_strings, set_partitions
from oracles import FROZEN


@pytest.mark.parametrize("n", range(1, MAX_DIM + 1))
def test_counts_match_bell_numbers(n):
    assert bell_number(n) == FROZEN["bell"][n - 1]
    assert sum(1 for _ in restricted_growth_strings(n)) == FROZEN["bell"][n - 1]
    assert sum(c for _, c in block_profiles(n)) == FROZEN["bell"][n - 1]


@pytest.mark.parametrize("n", range(1, 6))
def test_partitions_are_valid_and_distinct(n):
    seen = set()
    for part in set_partitions(n):
        blocks = [tuple(sorted(b)) for b in part]
        assert sorted(i for b in blocks for i in b) == list(range(n))
        seen.add(tuple(sorted(blocks)))
    assert len(seen) == bell_number(n)


def test_restricted_growth_form():
    for s in restricted_growth_strings(4):
        assert s[0] == 0
        assert all(s[i] <= max(s[:i]) + 1 for i in range(1, len(s)))


def test_profiles_of_three():
    assert dict(block_profiles(3)) == {(1, 1, 1): 1, (2, 1): 3, (3,): 1}
