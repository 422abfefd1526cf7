"""Set partitions via restricted growth strings."""

from collections import Counter
from functools import lru_cache

MAX_DIM = 8


def restricted_growth_strings(n):
    """Yield every restricted growth string of length ``n``.

    ``a[0] = 0`` and ``a[i] <= 1 + max(a[:i])``; strings are in
    lexicographic order and correspond one-to-one to set partitions.
    """
    if n == 0:
        yield ()
        return
    a = [0] * n
    b = [1] * n  # b[i] = 1 + max(a[:i])
    while True:
        yield tuple(a)
        # rightmost position that can be incremented
        i = n - 1
        while i > 0 and a[i] == b[i]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for j in range(i + 1, n):
            a[j] = 0
            b[j] = max(b[i], a[i] + 1)


def set_partitions(n):
    """Yield each partition of ``{0..n-1}`` as a tuple of blocks."""
    for rgs in restricted_growth_strings(n):
        blocks = {}
        for item, label in enumerate(rgs):
            blocks.setdefault(label, []).append(item)
        yield tuple(tuple(blocks[k]) for k in sorted(blocks))


def bell_number(n):
    """Bell number via the Bell triangle (independent of the enumeration)."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


@lru_cache(maxsize=None)
def block_profiles(n):
    """Multiplicity of each sorted block-size profile over all partitions of n items.

    Returns a tuple of ``(sizes, count)`` pairs.  For an exchangeable
    density the partition term only depends on block sizes, so this table
    is all that is needed to evaluate the partition sum.
    """
    counts = Counter(
        tuple(sorted((len(b) for b in part), reverse=True)) for part in set_partitions(n)
    )
    return tuple(sorted(counts.items()))
