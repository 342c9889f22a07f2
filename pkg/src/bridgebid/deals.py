"""Cards, deals, seeded deal generation, and deal text serialization.

Cards are plain integers. For a game with N ranks per suit, card index
``N * suit + rank_offset`` runs over [0, 4N), with suits ordered
clubs, diamonds, hearts, spades and ranks ascending (offset N-1 is the ace).
Seats are 0=North, 1=East, 2=South, 3=West, clockwise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .errors import ContractViolation, DataError

NORTH, EAST, SOUTH, WEST = range(4)
SEAT_NAMES = "NESW"
SUIT_NAMES = "CDHS"
SUIT_SYMBOLS = "♣♦♥♠"
RANK_CHARS = "23456789TJQKA"  # rank values 2..14


def seat_side(seat: int) -> int:
    """0 for the North-South partnership, 1 for East-West."""
    return seat & 1


class Vulnerability(enum.Enum):
    NONE = "None"
    NS = "NS"
    EW = "EW"
    BOTH = "Both"

    def side_vulnerable(self, side: int) -> bool:
        if self is Vulnerability.BOTH:
            return True
        if self is Vulnerability.NONE:
            return False
        return (self is Vulnerability.NS) == (side == 0)


# Standard 16-board duplicate cycle, indexed by (board_number - 1) % 16.
_VULNERABILITY_CYCLE = (
    Vulnerability.NONE, Vulnerability.NS, Vulnerability.EW, Vulnerability.BOTH,
    Vulnerability.NS, Vulnerability.EW, Vulnerability.BOTH, Vulnerability.NONE,
    Vulnerability.EW, Vulnerability.BOTH, Vulnerability.NONE, Vulnerability.NS,
    Vulnerability.BOTH, Vulnerability.NONE, Vulnerability.NS, Vulnerability.EW,
)


@dataclass(frozen=True)
class GameVariant:
    """Deck geometry. ``ranks_per_suit`` (N) ranges over [3, 13]; the standard
    game is N=13 with a 6-trick book, reduced decks use book 0 so a level-L
    contract needs L of the N tricks."""

    ranks_per_suit: int
    book: int

    def __post_init__(self) -> None:
        n = self.ranks_per_suit
        if not 3 <= n <= 13:
            raise ContractViolation(f"ranks_per_suit must be in [3, 13], got {n}")
        expected_book = 6 if n == 13 else 0
        if self.book != expected_book:
            raise ContractViolation(
                f"variant with {n} ranks must use book {expected_book}, got {self.book}"
            )

    @classmethod
    def of(cls, ranks_per_suit: int) -> "GameVariant":
        return cls(ranks_per_suit, 6 if ranks_per_suit == 13 else 0)

    @classmethod
    def from_name(cls, name: str) -> "GameVariant":
        key = name.strip().lower()
        if key in ("standard", "n13"):
            return cls.of(13)
        if key.startswith("n") and key[1:].isdigit() and 3 <= int(key[1:]) <= 13:
            return cls.of(int(key[1:]))
        raise DataError(f"unknown variant name {name!r} (use 'standard' or 'n3'..'n13')")

    @property
    def name(self) -> str:
        return "standard" if self.ranks_per_suit == 13 else f"n{self.ranks_per_suit}"

    @property
    def max_level(self) -> int:
        return self.ranks_per_suit - self.book

    @property
    def action_count(self) -> int:
        return 3 + 5 * self.max_level

    @property
    def feature_width(self) -> int:
        return 4 + 4 + 3 * (5 * self.max_level * 4) + 4 * self.ranks_per_suit

    @property
    def num_cards(self) -> int:
        return 4 * self.ranks_per_suit

    @property
    def cards_per_hand(self) -> int:
        return self.ranks_per_suit

    @property
    def min_rank(self) -> int:
        """Lowest rank value in play; the deck keeps the top N of ranks 2..14."""
        return 15 - self.ranks_per_suit


STANDARD = GameVariant.of(13)


def card_index(variant: GameVariant, suit: int, rank: int) -> int:
    offset = rank - variant.min_rank
    if not (0 <= suit < 4 and 0 <= offset < variant.ranks_per_suit):
        raise ContractViolation(f"no card with suit {suit}, rank {rank} in {variant.name}")
    return variant.ranks_per_suit * suit + offset


def card_suit(variant: GameVariant, card: int) -> int:
    return card // variant.ranks_per_suit


def card_rank(variant: GameVariant, card: int) -> int:
    return variant.min_rank + card % variant.ranks_per_suit


def card_name(variant: GameVariant, card: int) -> str:
    """Short text form, e.g. 'SA' for the spade ace."""
    return SUIT_NAMES[card_suit(variant, card)] + RANK_CHARS[card_rank(variant, card) - 2]


@dataclass(frozen=True)
class Deal:
    """Assignment of every card to a seat, plus dealer and vulnerability."""

    variant: GameVariant
    holder: tuple[int, ...]  # card index -> seat
    dealer: int
    vulnerability: Vulnerability

    def __post_init__(self) -> None:
        n = self.variant.ranks_per_suit
        if len(self.holder) != 4 * n:
            raise ContractViolation(
                f"holder must assign {4 * n} cards, got {len(self.holder)}"
            )
        counts = [0, 0, 0, 0]
        for seat in self.holder:
            counts[seat] += 1
        if counts != [n, n, n, n]:
            raise ContractViolation(f"each seat must hold {n} cards, got {counts}")

    def hands(self) -> tuple[tuple[int, ...], ...]:
        """Per-seat card tuples (ascending card index), cached on first use."""
        cached = getattr(self, "_hands", None)
        if cached is None:
            lists: tuple[list[int], ...] = ([], [], [], [])
            for card, seat in enumerate(self.holder):
                lists[seat].append(card)
            cached = tuple(tuple(h) for h in lists)
            object.__setattr__(self, "_hands", cached)
        return cached

    def hand(self, seat: int) -> tuple[int, ...]:
        return self.hands()[seat]


def with_schedule(deal: Deal, dealer: int, vulnerability: Vulnerability) -> Deal:
    """Same holdings under a different dealer/vulnerability assignment."""
    return replace(deal, dealer=dealer, vulnerability=vulnerability)


# ---------------------------------------------------------------------------
# Seeded generation.
#
# The per-board generator is xoshiro256** (Blackman & Vigna), its four state
# words drawn from a SplitMix64 sequence initialised at
# ``seed XOR (board_number * 0x9E3779B97F4A7C15 mod 2^64)``. Bounded draws use
# rejection sampling on the raw 64-bit output, so any implementation of these
# two published algorithms reproduces identical deals.
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1


class Xoshiro256StarStar:
    """xoshiro256** with SplitMix64 seeding; exactly reproducible cross-language."""

    def __init__(self, key: int) -> None:
        state = key & _MASK64
        words = []
        for _ in range(4):
            state = (state + 0x9E3779B97F4A7C15) & _MASK64
            z = state
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
            words.append(z ^ (z >> 31))
        self._s = words

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        x = (s1 * 5) & _MASK64
        result = (((x << 7) | (x >> 57)) & _MASK64) * 9 & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & _MASK64
        self._s = [s0, s1, s2, s3]
        return result

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection (no modulo bias)."""
        limit = ((1 << 64) // n) * n
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n


def board_dealer(board_number: int) -> int:
    return (board_number - 1) % 4


def board_vulnerability(board_number: int) -> Vulnerability:
    return _VULNERABILITY_CYCLE[(board_number - 1) % 16]


def generate_deal(seed: int, variant: GameVariant, board_number: int) -> Deal:
    """Deterministic deal for (seed, board_number); dealer and vulnerability
    follow the standard 16-board duplicate cycle."""
    key = (seed ^ (board_number * 0x9E3779B97F4A7C15)) & _MASK64
    rng = Xoshiro256StarStar(key)
    n_cards = variant.num_cards
    deck = list(range(n_cards))
    for i in range(n_cards - 1, 0, -1):
        j = rng.below(i + 1)
        deck[i], deck[j] = deck[j], deck[i]
    holder = [0] * n_cards
    per_hand = variant.cards_per_hand
    for position, card in enumerate(deck):
        holder[card] = position // per_hand
    return Deal(
        variant=variant,
        holder=tuple(holder),
        dealer=board_dealer(board_number),
        vulnerability=board_vulnerability(board_number),
    )


# ---------------------------------------------------------------------------
# Deal text: "<seat>:<spades>.<hearts>.<diamonds>.<clubs> <2nd> <3rd> <4th>"
# with the named seat first and the remaining hands clockwise; ranks
# descending within each suit. format_deal lists the dealer first. The text
# cannot carry vulnerability, so parse_deal takes it as an argument.
# ---------------------------------------------------------------------------

# Suit order inside a hand group is spades-first (display), opposite of the
# clubs-first card-index order.
_DISPLAY_SUITS = (3, 2, 1, 0)


def format_deal(deal: Deal) -> str:
    variant = deal.variant
    hands = deal.hands()
    groups = []
    for offset in range(4):
        seat = (deal.dealer + offset) % 4
        suits = {0: [], 1: [], 2: [], 3: []}
        for card in hands[seat]:
            suits[card_suit(variant, card)].append(card_rank(variant, card))
        parts = []
        for suit in _DISPLAY_SUITS:
            ranks = sorted(suits[suit], reverse=True)
            parts.append("".join(RANK_CHARS[r - 2] for r in ranks))
        groups.append(".".join(parts))
    return f"{SEAT_NAMES[deal.dealer]}:{' '.join(groups)}"


def parse_deal(
    text: str,
    *,
    vulnerability: Vulnerability = Vulnerability.NONE,
    variant: GameVariant | None = None,
) -> Deal:
    """Inverse of format_deal. The variant is inferred from the card count
    unless given; malformed input raises DataError naming the offending
    position (0-based character index)."""
    s = text.strip()
    if len(s) < 2 or s[1] != ":":
        raise DataError("position 0: deal text must start with '<seat>:'")
    first_seat = SEAT_NAMES.find(s[0].upper())
    if first_seat < 0:
        raise DataError(f"position 0: unknown seat {s[0]!r}")
    body = s[2:]
    groups = body.split(" ")
    if len(groups) != 4:
        raise DataError(f"position 2: expected 4 space-separated hands, got {len(groups)}")

    # First pass: collect (position, suit, rank_char) for every card.
    entries: list[tuple[int, int, str]] = []
    hand_card_counts = []
    pos = 2
    for group in groups:
        suit_strings = group.split(".")
        if len(suit_strings) != 4:
            raise DataError(
                f"position {pos}: hand must have 4 '.'-separated suit groups, "
                f"got {len(suit_strings)}"
            )
        count = 0
        suit_pos = pos
        for display_idx, ranks in enumerate(suit_strings):
            suit = _DISPLAY_SUITS[display_idx]
            for k, ch in enumerate(ranks):
                entries.append((suit_pos + k, suit, ch.upper()))
                count += 1
            suit_pos += len(ranks) + 1
        hand_card_counts.append(count)
        pos += len(group) + 1

    total = sum(hand_card_counts)
    if variant is None:
        if total % 4 != 0 or not 12 <= total <= 52:
            raise DataError(f"position 2: {total} cards cannot form a 4-hand deal")
        variant = GameVariant.of(total // 4)
    n = variant.cards_per_hand
    for i, count in enumerate(hand_card_counts):
        if count != n:
            raise DataError(
                f"hand {i + 1}: expected {n} cards, got {count}"
            )

    holder = [-1] * variant.num_cards
    card_cursor = 0
    for hand_idx, count in enumerate(hand_card_counts):
        seat = (first_seat + hand_idx) % 4
        for _ in range(count):
            char_pos, suit, ch = entries[card_cursor]
            card_cursor += 1
            rank_offset = RANK_CHARS.find(ch)
            if rank_offset < 0:
                raise DataError(f"position {char_pos}: unknown rank character {ch!r}")
            rank = rank_offset + 2
            if rank < variant.min_rank:
                raise DataError(
                    f"position {char_pos}: rank {ch} below this deck's lowest "
                    f"rank {RANK_CHARS[variant.min_rank - 2]}"
                )
            card = card_index(variant, suit, rank)
            if holder[card] >= 0:
                raise DataError(
                    f"position {char_pos}: duplicate card "
                    f"{card_name(variant, card)}"
                )
            holder[card] = seat
    return Deal(
        variant=variant,
        holder=tuple(holder),
        dealer=first_seat,
        vulnerability=vulnerability,
    )


def write_deals_file(deals, path) -> None:
    """One deal per line, UTF-8, LF-terminated."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for deal in deals:
            fh.write(format_deal(deal) + "\n")


def read_deals_file(path, *, variant: GameVariant | None = None) -> list[Deal]:
    deals = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                deals.append(parse_deal(line, variant=variant))
            except DataError as exc:
                raise DataError(f"line {lineno}: {exc}") from None
    return deals
