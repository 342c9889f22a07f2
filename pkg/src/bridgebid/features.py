"""Binary observation encoding of the auction, observer-relative.

Layout for a variant with B = 5 * max_level bids and N ranks per suit, with
rel(p) = (p - to_act) mod 4:

    [0, 4)              vulnerability: (our side not-vul, our side vul,
                        their side not-vul, their side vul)
    [4, 8)              bit k set iff the player at rel k passed before the
                        first non-pass call
    [8, 8 + 4B)         per bid index, ascending: one-hot of rel(bidder)
    [8 + 4B, 8 + 8B)    same, for the double of each bid
    [8 + 8B, 8 + 12B)   same, for the redouble of each bid
    [8 + 12B, +4N)      the observer's hand, by card index

Standard game: 4 + 4 + 3*140 + 52 = 480 bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .auction import AuctionState, DOUBLE, FIRST_BID, PASS, REDOUBLE, call_text
from .deals import GameVariant, Vulnerability, card_name, seat_side
from .errors import ContractViolation


@dataclass(frozen=True)
class SegmentOffsets:
    """Start offsets of each observation segment; ``end`` is the total width."""

    vulnerability: int
    passes: int
    bids: int
    doubles: int
    redoubles: int
    hand: int
    end: int


def segment_offsets(variant: GameVariant) -> SegmentOffsets:
    block = 4 * 5 * variant.max_level
    return SegmentOffsets(
        vulnerability=0,
        passes=4,
        bids=8,
        doubles=8 + block,
        redoubles=8 + 2 * block,
        hand=8 + 3 * block,
        end=8 + 3 * block + 4 * variant.ranks_per_suit,
    )


@dataclass(frozen=True)
class Observation:
    bits: np.ndarray  # uint8, length feature_width
    mask: np.ndarray  # bool, length action_count
    to_act: int


def encode(state: AuctionState, hand, vulnerability: Vulnerability) -> Observation:
    """Observation for the player to act, holding ``hand`` (their card set)."""
    if state.is_terminal:
        raise ContractViolation("cannot encode a finished auction")
    variant = state.variant
    if len(hand) != variant.cards_per_hand:
        raise ContractViolation(
            f"hand must hold {variant.cards_per_hand} cards, got {len(hand)}"
        )
    offsets = segment_offsets(variant)
    bits = np.zeros(offsets.end, dtype=np.uint8)
    observer = state.to_act

    our_vul = vulnerability.side_vulnerable(seat_side(observer))
    their_vul = vulnerability.side_vulnerable(1 - seat_side(observer))
    bits[0 if not our_vul else 1] = 1
    bits[2 if not their_vul else 3] = 1

    seat = state.dealer
    before_opening = True
    current_bid = None
    for call in state.calls:
        rel = (seat - observer) % 4
        if call == PASS:
            if before_opening:
                bits[offsets.passes + rel] = 1
        else:
            before_opening = False
            if call == DOUBLE:
                bits[offsets.doubles + 4 * (current_bid - FIRST_BID) + rel] = 1
            elif call == REDOUBLE:
                bits[offsets.redoubles + 4 * (current_bid - FIRST_BID) + rel] = 1
            else:
                current_bid = call
                bits[offsets.bids + 4 * (call - FIRST_BID) + rel] = 1
        seat = (seat + 1) % 4
    for card in hand:
        bits[offsets.hand + card] = 1
    return Observation(bits=bits, mask=state.legal_mask(), to_act=observer)


def observe(state: AuctionState, deal) -> Observation:
    """Encode for the player to act using their hand and the deal's schedule."""
    return encode(state, deal.hand(state.to_act), deal.vulnerability)


@dataclass(frozen=True)
class DecodedCalls:
    """Call blocks read back from an observation, in (call, rel seat) pairs."""

    bids: tuple[tuple[int, int], ...]
    doubles: tuple[tuple[int, int], ...]
    redoubles: tuple[tuple[int, int], ...]


def decode_calls(variant: GameVariant, bits: np.ndarray) -> DecodedCalls:
    """Inverse of the three call blocks of ``encode``."""
    offsets = segment_offsets(variant)
    if len(bits) != offsets.end:
        raise ContractViolation(
            f"expected {offsets.end} observation bits, got {len(bits)}"
        )

    def read_block(start: int) -> tuple[tuple[int, int], ...]:
        found = []
        for index in range(5 * variant.max_level):
            group = bits[start + 4 * index : start + 4 * index + 4]
            hot = np.flatnonzero(group)
            if len(hot) > 1:
                raise ContractViolation(
                    f"group at offset {start + 4 * index} is not one-hot"
                )
            if len(hot) == 1:
                found.append((FIRST_BID + index, int(hot[0])))
        return tuple(found)

    return DecodedCalls(
        bids=read_block(offsets.bids),
        doubles=read_block(offsets.doubles),
        redoubles=read_block(offsets.redoubles),
    )


def render_observation(
    variant: GameVariant, bits: np.ndarray, mask: np.ndarray | None = None
) -> list[str]:
    """Human-readable lines, one per segment, for debugging an encoding.

    Seats are relative to the observer: rel 0 is the observer, rel 2 their
    partner, rel 1 and rel 3 the opponents.
    """
    offsets = segment_offsets(variant)
    if len(bits) != offsets.end:
        raise ContractViolation(
            f"expected {offsets.end} observation bits, got {len(bits)}"
        )
    decoded = decode_calls(variant, bits)

    def block_text(pairs) -> str:
        if not pairs:
            return "none"
        return "; ".join(f"{call_text(call)} by rel {rel}" for call, rel in pairs)

    our = "vulnerable" if bits[1] else "not vulnerable"
    their = "vulnerable" if bits[3] else "not vulnerable"
    passes = [str(k) for k in range(4) if bits[offsets.passes + k]]
    hand = [
        card_name(variant, int(card))
        for card in np.flatnonzero(bits[offsets.hand : offsets.end])
    ]
    lines = [
        f"vulnerability   we are {our}, they are {their}",
        "opening passes  " + (f"rel {', '.join(passes)}" if passes else "none"),
        f"bids            {block_text(decoded.bids)}",
        f"doubles         {block_text(decoded.doubles)}",
        f"redoubles       {block_text(decoded.redoubles)}",
        f"hand            {' '.join(hand)}",
    ]
    if mask is not None:
        legal = " ".join(call_text(int(a)) for a in np.flatnonzero(mask))
        lines.append(f"legal calls     {legal}")
    return lines
