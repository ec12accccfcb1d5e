"""
Priority Modification

Reassigns loop priority levels from their weighted control costs J' with a
switch threshold delta acting as hysteresis:

- costs spread less than delta: keep every level
- equal costs keep their previous relative order
- a pair already ordered by cost keeps its order
- an inverted pair swaps only if its cost gap is at least delta
- an inverted pair with a smaller gap keeps its previous order, and loops with
  lower cost still go below both

Every pair of loops is decided on its own by the rules above, and loops are
ranked by how many pairwise contests they win. When the pairwise decisions are
consistent this is the unique order that honours every one of them. When they
form a cycle (possible once delta exceeds some gaps but not others), loops with
equal wins fall back to cost, then previous level.
"""
from typing import Sequence


def _check_permutation(levels: Sequence[int]) -> None:
    if sorted(levels) != list(range(1, len(levels) + 1)):
        raise ValueError(f"priority levels must be a permutation of 1..{len(levels)}, got {list(levels)}")


def _ranks_above(a: int, b: int, costs: Sequence[float], previous: Sequence[int], delta: float) -> bool:
    """Whether loop a goes above loop b."""
    if costs[a] == costs[b]:
        return previous[a] > previous[b]
    high, low = (a, b) if costs[a] > costs[b] else (b, a)
    # inverted pair inside the threshold keeps its previous order
    keep = costs[high] - costs[low] < delta and previous[low] > previous[high]
    winner = low if keep else high
    return winner == a


def modify_priorities(
    weighted_costs: Sequence[float],
    previous: Sequence[int],
    delta: float,
) -> tuple[int, ...]:
    """
    Args:
        weighted_costs: J' per loop
        previous: Current levels per loop (greater wins), a permutation of 1..N
        delta: Switch threshold (>= 0; +inf freezes priorities)

    Returns:
        New levels per loop, a permutation of 1..N
    """
    n = len(weighted_costs)
    if len(previous) != n:
        raise ValueError(f"got {n} costs but {len(previous)} priority levels")
    _check_permutation(previous)
    if n == 0:
        return ()

    if max(weighted_costs) - min(weighted_costs) < delta:
        return tuple(previous)

    wins = [0] * n
    for a in range(n):
        for b in range(a + 1, n):
            if _ranks_above(a, b, weighted_costs, previous, delta):
                wins[a] += 1
            else:
                wins[b] += 1

    order = sorted(range(n), key=lambda i: (-wins[i], -weighted_costs[i], -previous[i]))
    levels = [0] * n
    for rank, loop in enumerate(order):
        levels[loop] = n - rank
    return tuple(levels)
