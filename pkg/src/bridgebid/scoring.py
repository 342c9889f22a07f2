"""Duplicate scoring, IMP conversion, and normalized rewards.

``contract_score`` applies the duplicate law component by component (trick
points, game and slam bonuses, doubled insults, overtrick and undertrick
schedules). Scores are stored from North-South's perspective; rewards divide
by the largest score magnitude the variant can produce, so they live in
[-1, 1] for any deck size.
"""

from __future__ import annotations

import bisect
from functools import lru_cache

from .auction import Contract, Doubling, NOTRUMP, PASSED_OUT
from .deals import GameVariant, Vulnerability, seat_side
from .errors import ContractViolation

# Per-trick bid values: clubs, diamonds, hearts, spades. Notrump is 40 for
# the first trick and 30 after.
_SUIT_TRICK_VALUE = (20, 20, 30, 30)

_GAME_BONUS = (300, 500)  # (not vulnerable, vulnerable)
_PARTSCORE_BONUS = 50
_SMALL_SLAM_BONUS = (500, 750)
_GRAND_SLAM_BONUS = (1000, 1500)
_INSULT = {Doubling.DOUBLED: 50, Doubling.REDOUBLED: 100}


def _trick_points(level: int, strain: int, doubling: Doubling) -> int:
    if strain == NOTRUMP:
        base = 40 + 30 * (level - 1)
    else:
        base = _SUIT_TRICK_VALUE[strain] * level
    return base * (1, 2, 4)[doubling]


def _overtrick_value(strain: int, doubling: Doubling, vulnerable: bool) -> int:
    if doubling is Doubling.UNDOUBLED:
        return 20 if strain <= 1 else 30
    each = 200 if vulnerable else 100
    return each * (2 if doubling is Doubling.REDOUBLED else 1)


def _undertrick_penalty(down: int, doubling: Doubling, vulnerable: bool) -> int:
    if doubling is Doubling.UNDOUBLED:
        return (100 if vulnerable else 50) * down
    # Doubled: 100, then 200 apiece for the second and third, then 300 apiece
    # when not vulnerable; 200 then 300 apiece when vulnerable. Redoubled
    # penalties are exactly twice the doubled ones.
    if vulnerable:
        doubled = 200 + 300 * (down - 1)
    else:
        doubled = 100 + 200 * min(down - 1, 2) + 300 * max(down - 3, 0)
    return doubled * (2 if doubling is Doubling.REDOUBLED else 1)


def contract_score(
    variant: GameVariant, contract: Contract, tricks: int, vulnerable: bool
) -> int:
    """Score from the declaring side's point of view (negative when set).

    ``tricks`` is the total number of tricks the declaring side took, out of
    the ``variant.ranks_per_suit`` available.
    """
    total_tricks = variant.ranks_per_suit
    if not 0 <= tricks <= total_tricks:
        raise ContractViolation(
            f"tricks must be in [0, {total_tricks}], got {tricks}"
        )
    if not 1 <= contract.level <= variant.max_level:
        raise ContractViolation(
            f"contract level {contract.level} outside this deck's"
            f" 1..{variant.max_level}"
        )
    needed = variant.book + contract.level
    if tricks < needed:
        return -_undertrick_penalty(needed - tricks, contract.doubling, vulnerable)

    points = _trick_points(contract.level, contract.strain, contract.doubling)
    score = points
    if points >= 100:
        score += _GAME_BONUS[vulnerable]
    else:
        score += _PARTSCORE_BONUS
    if contract.level == 6:
        score += _SMALL_SLAM_BONUS[vulnerable]
    elif contract.level == 7:
        score += _GRAND_SLAM_BONUS[vulnerable]
    score += _INSULT.get(contract.doubling, 0)
    score += (tricks - needed) * _overtrick_value(
        contract.strain, contract.doubling, vulnerable
    )
    return score


def board_ns_score(
    variant: GameVariant,
    outcome,
    tricks: int | None,
    vulnerability: Vulnerability,
) -> int:
    """North-South's score for a finished board.

    ``outcome`` is a Contract or PASSED_OUT; ``tricks`` is the declaring
    side's trick count (ignored for a passed-out board).
    """
    if outcome is PASSED_OUT:
        return 0
    side = seat_side(outcome.declarer)
    vulnerable = vulnerability.side_vulnerable(side)
    score = contract_score(variant, outcome, tricks, vulnerable)
    return score if side == 0 else -score


# IMP scale: band k starts at _IMP_BOUNDS[k - 1] points of score difference.
_IMP_BOUNDS = (
    20, 50, 90, 130, 170, 220, 270, 320, 370, 430, 500, 600,
    750, 900, 1100, 1300, 1500, 1750, 2000, 2250, 2500, 3000, 3500, 4000,
)


def imps(score_diff: int) -> int:
    """Signed IMP value of a score difference; odd and monotone in the diff."""
    magnitude = bisect.bisect_right(_IMP_BOUNDS, abs(score_diff))
    return magnitude if score_diff >= 0 else -magnitude


@lru_cache(maxsize=None)
def max_abs_score(variant: GameVariant) -> int:
    """Largest |score| any contract/result can produce, by enumeration."""
    best = 0
    for level in range(1, variant.max_level + 1):
        for strain in range(5):
            for doubling in Doubling:
                contract = Contract(level, strain, 0, doubling)
                for vulnerable in (False, True):
                    for tricks in range(variant.ranks_per_suit + 1):
                        best = max(
                            best,
                            abs(contract_score(variant, contract, tricks, vulnerable)),
                        )
    return best


def normalized_reward(
    variant: GameVariant,
    outcome,
    tricks: int | None,
    vulnerability: Vulnerability,
    side: int = 0,
) -> float:
    """Board score for ``side`` (0=NS, 1=EW) scaled into [-1, 1]."""
    ns = board_ns_score(variant, outcome, tricks, vulnerability)
    signed = ns if side == 0 else -ns
    return signed / max_abs_score(variant)
