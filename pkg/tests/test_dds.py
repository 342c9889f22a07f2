"""Double-dummy solver against the brute-force oracle, plus dataset IO."""

import random
import subprocess
import sys

import pytest

from bridgebid.dds import (
    DdsRecord,
    DdsTable,
    backend_name,
    find_table_mismatches,
    full_table,
    load_dds_dataset,
    record_from_json,
    record_to_json,
    solve_double_dummy,
    store_dds_dataset,
    tabulate,
)
from bridgebid.dds import _search_py
from bridgebid.dds.reference import enumerate_tricks
from bridgebid.deals import Deal, GameVariant, Vulnerability, generate_deal, parse_deal
from bridgebid.errors import ConfigError, DataError

V3 = GameVariant.of(3)
V4 = GameVariant.of(4)
V5 = GameVariant.of(5)


def hand_masks(deal):
    masks = [0, 0, 0, 0]
    for card, seat in enumerate(deal.holder):
        masks[seat] |= 1 << card
    return masks


class TestForcedOutcomes:
    def test_single_forced_trick(self):
        # One card per hand at the kernel level: N holds the club ace (trump),
        # everyone else holds diamonds; N declares and must win the trick.
        n = 3
        hands = [1 << 2, 1 << 3, 1 << 4, 1 << 5]  # CA, DJ, DQ, DK
        tricks = _search_py.solve(n, hands, 0, 1, 0, True)
        assert tricks == 1
        # Same layout but East declares in diamonds: the club ace cannot
        # follow and EW's high diamond takes it.
        tricks = _search_py.solve(n, list(hands), 1, 2, 1, True)
        assert tricks == 1

    def test_all_trumps_in_one_hand(self):
        # The tiny deal gives each hand a complete suit.
        deal = parse_deal("N:AKQ... .AKQ.. ..AKQ. ...AKQ")
        # Declarer holds every trump: all 3 tricks, whoever declares.
        assert solve_double_dummy(deal, 3, 0) == 3  # North's spades
        assert solve_double_dummy(deal, 2, 1) == 3  # East's hearts
        assert solve_double_dummy(deal, 1, 2) == 3  # South's diamonds
        assert solve_double_dummy(deal, 0, 3) == 3  # West's clubs

    def test_all_trumps_reduced_five(self):
        holder = [0] * V5.num_cards
        # South takes all hearts (suit 2), the rest is dealt round-robin.
        seats = [0, 1, 3] * 5
        i = 0
        for card in range(V5.num_cards):
            if card // 5 == 2:
                holder[card] = 2
            else:
                holder[card] = seats[i]
                i += 1
        deal = Deal(V5, tuple(holder), 0, Vulnerability.NONE)
        assert solve_double_dummy(deal, 2, 2) == 5

    def test_notrump_top_cards(self):
        # In the tiny deal at notrump, whoever leads cashes their whole suit.
        deal = parse_deal("N:AKQ... .AKQ.. ..AKQ. ...AKQ")
        # Declarer North: East leads and runs hearts; NS never get in.
        assert solve_double_dummy(deal, 4, 0) == 0
        assert solve_double_dummy(deal, 4, 1) == 0


class TestAgainstBruteForce:
    def test_full_tables_n4(self):
        for seed in range(12):
            deal = generate_deal(seed, V4, seed + 1)
            table = full_table(deal)
            for declarer in range(4):
                for strain in range(5):
                    expected = enumerate_tricks(deal, strain, declarer)
                    assert table.entry(declarer, strain) == expected

    def test_sampled_n5(self):
        rng = random.Random(5)
        for seed in range(4):
            deal = generate_deal(seed, V5, 3)
            declarer = rng.randrange(4)
            strain = rng.randrange(5)
            assert solve_double_dummy(deal, strain, declarer) == enumerate_tricks(
                deal, strain, declarer
            )


class TestSearchProperties:
    def test_zero_sum_between_sides(self):
        rng = random.Random(11)
        for seed in range(15):
            deal = generate_deal(seed, V5, 1)
            hands = hand_masks(deal)
            trump = rng.randrange(-1, 4)
            leader = rng.randrange(4)
            a = _search_py.solve(5, list(hands), trump, leader, 0)
            b = _search_py.solve(5, list(hands), trump, leader, 1)
            assert a + b == 5

    def test_equivalence_reduction_is_exact(self):
        rng = random.Random(12)
        for seed in range(10):
            deal = generate_deal(seed, V5, 2)
            declarer = rng.randrange(4)
            strain = rng.randrange(5)
            with_reduction = solve_double_dummy(deal, strain, declarer)
            without = solve_double_dummy(
                deal, strain, declarer, use_equivalence=False
            )
            assert with_reduction == without

    def test_kernels_agree(self):
        cy = pytest.importorskip("bridgebid.dds._search_cy")
        rng = random.Random(13)
        for seed in range(15):
            deal = generate_deal(seed, V5, 4)
            hands = hand_masks(deal)
            trump = rng.randrange(-1, 4)
            leader = rng.randrange(4)
            side = rng.randrange(2)
            assert cy.solve(5, list(hands), trump, leader, side) == _search_py.solve(
                5, list(hands), trump, leader, side
            )

    def test_table_entries_bounded(self):
        for seed in range(5):
            deal = generate_deal(seed, V5, 1)
            table = full_table(deal)
            assert all(0 <= t <= 5 for t in table.tricks)

    def test_deterministic_and_cached(self):
        deal = generate_deal(99, V5, 1)
        assert full_table(deal) == full_table(deal)

    def test_capability_limit(self):
        deal = generate_deal(0, GameVariant.of(13), 1)
        with pytest.raises(ConfigError, match="dataset"):
            solve_double_dummy(deal, 0, 0)
        with pytest.raises(ConfigError):
            full_table(deal)

    def test_backend_selection(self):
        assert backend_name() in ("python", "compiled")
        out = subprocess.run(
            [
                sys.executable,
                "-c",
                "from bridgebid.dds import backend_name; print(backend_name())",
            ],
            capture_output=True,
            text=True,
            env={"BRIDGEBID_PURE_PYTHON": "1", "PATH": "/usr/bin:/bin"},
        )
        assert out.stdout.strip() == "python"


class TestRecords:
    def test_table_shape_validated(self):
        with pytest.raises(DataError, match="20"):
            DdsTable((1, 2, 3))
        with pytest.raises(DataError):
            DdsTable(tuple([-1] * 20))

    def test_record_trick_range_validated(self):
        deal = generate_deal(0, V5, 1)
        with pytest.raises(DataError, match="exceeds"):
            DdsRecord(deal=deal, table=DdsTable(tuple([6] * 20)))

    def test_json_field_order(self):
        record = tabulate(generate_deal(1, V5, 2))
        line = record_to_json(record)
        keys = list(__import__("json").loads(line))
        assert keys == ["deal", "dealer", "vul", "dds"]

    def test_json_round_trip(self):
        record = tabulate(generate_deal(2, V5, 7))
        assert record_from_json(record_to_json(record)) == record

    def test_dataset_round_trip_1000(self, tmp_path):
        records = [tabulate(generate_deal(0, V5, b)) for b in range(1, 1001)]
        path = tmp_path / "dds.jsonl"
        store_dds_dataset(records, path)
        assert load_dds_dataset(path) == records

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("", encoding="utf-8")
        assert load_dds_dataset(path) == []

    def test_malformed_line_number(self, tmp_path):
        record = tabulate(generate_deal(3, V5, 1))
        path = tmp_path / "dds.jsonl"
        path.write_text(record_to_json(record) + "\nnot json\n", encoding="utf-8")
        with pytest.raises(DataError, match="line 2"):
            load_dds_dataset(path)

    def test_missing_field(self):
        with pytest.raises(DataError, match="missing 'dds'"):
            record_from_json('{"deal": "x", "dealer": "N", "vul": "None"}')

    def test_trick_out_of_range_rejected(self, tmp_path):
        record = tabulate(generate_deal(4, V5, 1))
        line = record_to_json(record).replace(
            '"dds": [', '"dds": [9, ', 1
        )  # prepend an impossible trick count
        # 21 entries now, or 9 > 5 if we instead swap; either way it must fail
        path = tmp_path / "dds.jsonl"
        path.write_text(line + "\n", encoding="utf-8")
        with pytest.raises(DataError, match="line 1"):
            load_dds_dataset(path)

    def test_explicit_fields_override_deal_text(self):
        record = tabulate(generate_deal(5, V5, 1))
        line = record_to_json(record).replace('"dealer": "N"', '"dealer": "E"')
        loaded = record_from_json(line)
        assert loaded.deal.dealer == 1

    def test_bad_vulnerability(self):
        record = tabulate(generate_deal(6, V5, 1))
        line = record_to_json(record).replace('"vul": "None"', '"vul": "nobody"')
        with pytest.raises(DataError, match="vulnerability"):
            record_from_json(line)


class TestVerification:
    def test_mismatch_flagged(self):
        good = [tabulate(generate_deal(s, V5, 1)) for s in range(5)]
        tampered = list(good)
        bent = list(good[2].table.tricks)
        bent[7] = (bent[7] + 1) % 6
        tampered[2] = DdsRecord(deal=good[2].deal, table=DdsTable(tuple(bent)))
        mismatches = find_table_mismatches(tampered)
        assert [m[0] for m in mismatches] == [2]
        stored, recomputed = mismatches[0][1], mismatches[0][2]
        assert stored != recomputed
        assert recomputed == good[2].table

    def test_clean_dataset_passes(self):
        records = [tabulate(generate_deal(s, V4, 2)) for s in range(5)]
        assert find_table_mismatches(records) == []
