"""Scoring law against the published duplicate tables, IMPs, rewards.

The expected values here are transcribed literally from the standard score
table (made contracts, overtricks, and undertrick schedules as printed), not
generated from the formulas under test.
"""

import pytest

from bridgebid.auction import Contract, Doubling, PASSED_OUT, parse_call, replay_calls
from bridgebid.deals import GameVariant, STANDARD, Vulnerability
from bridgebid.errors import ContractViolation
from bridgebid.scoring import (
    board_ns_score,
    contract_score,
    imps,
    max_abs_score,
    normalized_reward,
)

V5 = GameVariant.of(5)

# Score for making exactly, per (level, strain class):
# columns are undoubled nv/v, doubled nv/v, redoubled nv/v.
# 'm' = minor suits, 'M' = major suits, 'N' = notrump.
MADE_TABLE = {
    (1, "m"): (70, 70, 140, 140, 230, 230),
    (1, "M"): (80, 80, 160, 160, 520, 720),
    (1, "N"): (90, 90, 180, 180, 560, 760),
    (2, "m"): (90, 90, 180, 180, 560, 760),
    (2, "M"): (110, 110, 470, 670, 640, 840),
    (2, "N"): (120, 120, 490, 690, 680, 880),
    (3, "m"): (110, 110, 470, 670, 640, 840),
    (3, "M"): (140, 140, 530, 730, 760, 960),
    (3, "N"): (400, 600, 550, 750, 800, 1000),
    (4, "m"): (130, 130, 510, 710, 720, 920),
    (4, "M"): (420, 620, 590, 790, 880, 1080),
    (4, "N"): (430, 630, 610, 810, 920, 1120),
    (5, "m"): (400, 600, 550, 750, 800, 1000),
    (5, "M"): (450, 650, 650, 850, 1000, 1200),
    (5, "N"): (460, 660, 670, 870, 1040, 1240),
    (6, "m"): (920, 1370, 1090, 1540, 1380, 1830),
    (6, "M"): (980, 1430, 1210, 1660, 1620, 2070),
    (6, "N"): (990, 1440, 1230, 1680, 1660, 2110),
    (7, "m"): (1440, 2140, 1630, 2330, 1960, 2660),
    (7, "M"): (1510, 2210, 1770, 2470, 2240, 2940),
    (7, "N"): (1520, 2220, 1790, 2490, 2280, 2980),
}

STRAINS_BY_CLASS = {"m": (0, 1), "M": (2, 3), "N": (4,)}

# Cumulative penalties for going down 1..13.
UNDERTRICKS = {
    (Doubling.UNDOUBLED, False): [50 * u for u in range(1, 14)],
    (Doubling.UNDOUBLED, True): [100 * u for u in range(1, 14)],
    (Doubling.DOUBLED, False): [
        100, 300, 500, 800, 1100, 1400, 1700, 2000, 2300, 2600, 2900, 3200, 3500,
    ],
    (Doubling.DOUBLED, True): [
        200, 500, 800, 1100, 1400, 1700, 2000, 2300, 2600, 2900, 3200, 3500, 3800,
    ],
    (Doubling.REDOUBLED, False): [
        200, 600, 1000, 1600, 2200, 2800, 3400, 4000, 4600, 5200, 5800, 6400, 7000,
    ],
    (Doubling.REDOUBLED, True): [
        400, 1000, 1600, 2200, 2800, 3400, 4000, 4600, 5200, 5800, 6400, 7000, 7600,
    ],
}

# Value of each overtrick.
def overtrick_value(strain_class, doubling, vulnerable):
    if doubling is Doubling.UNDOUBLED:
        return 20 if strain_class == "m" else 30
    base = 200 if vulnerable else 100
    return base * (2 if doubling is Doubling.REDOUBLED else 1)


# IMP bands as printed: (low, high, imps).
IMP_TABLE = [
    (0, 10, 0), (20, 40, 1), (50, 80, 2), (90, 120, 3), (130, 160, 4),
    (170, 210, 5), (220, 260, 6), (270, 310, 7), (320, 360, 8), (370, 420, 9),
    (430, 490, 10), (500, 590, 11), (600, 740, 12), (750, 890, 13),
    (900, 1090, 14), (1100, 1290, 15), (1300, 1490, 16), (1500, 1740, 17),
    (1750, 1990, 18), (2000, 2240, 19), (2250, 2490, 20), (2500, 2990, 21),
    (3000, 3490, 22), (3500, 3990, 23), (4000, 4000, 24),
]

DOUBLINGS = (Doubling.UNDOUBLED, Doubling.DOUBLED, Doubling.REDOUBLED)


class TestMadeContracts:
    def test_all_35_contracts_exactly(self):
        for (level, cls), row in MADE_TABLE.items():
            for strain in STRAINS_BY_CLASS[cls]:
                for d_idx, doubling in enumerate(DOUBLINGS):
                    for v_idx, vulnerable in enumerate((False, True)):
                        contract = Contract(level, strain, 0, doubling)
                        got = contract_score(STANDARD, contract, 6 + level, vulnerable)
                        assert got == row[2 * d_idx + v_idx], (
                            f"{level}{cls} {doubling.name} vul={vulnerable}"
                        )

    def test_overtricks(self):
        for (level, cls), row in MADE_TABLE.items():
            for strain in STRAINS_BY_CLASS[cls]:
                for d_idx, doubling in enumerate(DOUBLINGS):
                    for v_idx, vulnerable in enumerate((False, True)):
                        contract = Contract(level, strain, 0, doubling)
                        made = row[2 * d_idx + v_idx]
                        per = overtrick_value(cls, doubling, vulnerable)
                        for over in range(1, 13 - 6 - level + 1):
                            got = contract_score(
                                STANDARD, contract, 6 + level + over, vulnerable
                            )
                            assert got == made + over * per


class TestUndertricks:
    def test_full_schedule(self):
        # 7NT can go down 1 through 13; use it to sweep every row.
        for doubling in DOUBLINGS:
            contract = Contract(7, 4, 0, doubling)
            for vulnerable in (False, True):
                expected = UNDERTRICKS[(doubling, vulnerable)]
                for down in range(1, 14):
                    got = contract_score(STANDARD, contract, 13 - down, vulnerable)
                    assert got == -expected[down - 1]

    def test_partial_depths_from_lower_contracts(self):
        # 2H doubled nv down 3 is the classic 500.
        assert contract_score(STANDARD, Contract(2, 2, 0, Doubling.DOUBLED), 5, False) == -500
        # 1C undoubled vul down 2.
        assert contract_score(STANDARD, Contract(1, 0, 0, Doubling.UNDOUBLED), 5, True) == -200

    def test_deepest_penalty_is_7600(self):
        contract = Contract(7, 4, 0, Doubling.REDOUBLED)
        assert contract_score(STANDARD, contract, 0, True) == -7600


class TestValidation:
    def test_tricks_out_of_range(self):
        contract = Contract(1, 0, 0, Doubling.UNDOUBLED)
        with pytest.raises(ContractViolation):
            contract_score(STANDARD, contract, 14, False)
        with pytest.raises(ContractViolation):
            contract_score(STANDARD, contract, -1, False)

    def test_level_beyond_deck(self):
        contract = Contract(6, 0, 0, Doubling.UNDOUBLED)
        with pytest.raises(ContractViolation):
            contract_score(V5, contract, 5, False)


class TestReducedDeck:
    def test_book_is_zero(self):
        # 1C in the 5-rank game makes with a single trick.
        contract = Contract(1, 0, 0, Doubling.UNDOUBLED)
        assert contract_score(V5, contract, 1, False) == 70
        assert contract_score(V5, contract, 0, False) == -50

    def test_game_still_at_100_points(self):
        # 3NT is a game even when only 5 tricks exist.
        contract = Contract(3, 4, 0, Doubling.UNDOUBLED)
        assert contract_score(V5, contract, 3, False) == 100 + 300

    def test_max_abs_by_hand(self):
        # Worst case in the 5-rank game: down 5 redoubled vulnerable.
        assert max_abs_score(V5) == 2 * (200 + 300 * 4)
        assert max_abs_score(STANDARD) == 7600


class TestNsScore:
    def test_declarer_side_sign(self):
        contract_ns = Contract(3, 4, 0, Doubling.UNDOUBLED)
        contract_ew = Contract(3, 4, 1, Doubling.UNDOUBLED)
        assert board_ns_score(STANDARD, contract_ns, 9, Vulnerability.NONE) == 400
        assert board_ns_score(STANDARD, contract_ew, 9, Vulnerability.NONE) == -400
        assert board_ns_score(STANDARD, contract_ew, 8, Vulnerability.NONE) == 50

    def test_vulnerability_follows_declaring_side(self):
        contract_ew = Contract(3, 4, 3, Doubling.UNDOUBLED)
        assert board_ns_score(STANDARD, contract_ew, 9, Vulnerability.EW) == -600
        assert board_ns_score(STANDARD, contract_ew, 9, Vulnerability.NS) == -400
        assert board_ns_score(STANDARD, contract_ew, 8, Vulnerability.EW) == 100

    def test_passed_out_scores_zero(self):
        assert board_ns_score(STANDARD, PASSED_OUT, None, Vulnerability.BOTH) == 0

    def test_from_real_auction(self):
        state = replay_calls(STANDARD, 0, [parse_call(c) for c in "1N P 3N P P P".split()])
        contract = state.final_contract()
        assert board_ns_score(STANDARD, contract, 10, Vulnerability.NS) == 630


class TestImps:
    def test_every_band_edge(self):
        for low, high, value in IMP_TABLE:
            assert imps(low) == value
            assert imps(high) == value
            mid = (low + high) // 2
            assert imps(mid) == value

    def test_between_band_gaps(self):
        # Table rows step by 10; interior points inherit the lower row.
        assert imps(45) == 1
        assert imps(595) == 11

    def test_odd_function(self):
        for d in (0, 10, 20, 430, 4000, 7600):
            assert imps(-d) == -imps(d)

    def test_monotone(self):
        values = [imps(d) for d in range(0, 8001, 10)]
        assert values == sorted(values)
        assert values[-1] == 24

    def test_cap(self):
        assert imps(7600) == 24


class TestReward:
    def test_extremes(self):
        contract = Contract(7, 4, 0, Doubling.REDOUBLED)
        z = normalized_reward(STANDARD, contract, 0, Vulnerability.BOTH)
        assert z == -1.0
        assert normalized_reward(STANDARD, contract, 0, Vulnerability.BOTH, side=1) == 1.0

    def test_passed_out(self):
        assert normalized_reward(STANDARD, PASSED_OUT, None, Vulnerability.NONE) == 0.0

    def test_bounded_for_random_outcomes(self):
        import random

        rng = random.Random(3)
        for variant in (V5, STANDARD):
            for _ in range(300):
                contract = Contract(
                    rng.randint(1, variant.max_level),
                    rng.randrange(5),
                    rng.randrange(4),
                    Doubling(rng.randrange(3)),
                )
                tricks = rng.randint(0, variant.ranks_per_suit)
                vul = rng.choice(list(Vulnerability))
                z = normalized_reward(variant, contract, tricks, vul)
                assert -1.0 <= z <= 1.0

    def test_zero_sum_between_sides(self):
        contract = Contract(4, 3, 1, Doubling.DOUBLED)
        a = normalized_reward(STANDARD, contract, 10, Vulnerability.EW, side=0)
        b = normalized_reward(STANDARD, contract, 10, Vulnerability.EW, side=1)
        assert a == -b != 0
