"""Brute-force trick-play enumeration, used as an oracle for the real solver.

No transposition table, no pruning, no move reduction: plain minimax over
every legal line of play. Cards are handled as (suit, rank) pairs rather than
the solver's bitmasks so the two implementations share nothing but the rules.
Feasible for small decks only.
"""

from __future__ import annotations

from ..deals import Deal, card_rank, card_suit, seat_side


def enumerate_tricks(deal: Deal, trump: int, declarer: int) -> int:
    """Tricks for the declaring side; ``trump`` is a suit 0..3 or 4 for notrump."""
    variant = deal.variant
    hands = [
        [(card_suit(variant, c), card_rank(variant, c)) for c in deal.hand(seat)]
        for seat in range(4)
    ]
    trump_suit = None if trump == 4 else trump
    return _search(hands, trump_suit, (declarer + 1) % 4, seat_side(declarer), 0, [])


def _search(hands, trump_suit, leader, side, pos, played):
    if pos == 4:
        led_suit = played[0][0]
        best = 0
        for i in (1, 2, 3):
            if _beats(played[i], played[best], led_suit, trump_suit):
                best = i
        winner = (leader + best) % 4
        won = 1 if winner % 2 == side else 0
        return won + _search(hands, trump_suit, winner, side, 0, [])
    player = (leader + pos) % 4
    hand = hands[player]
    if not hand:
        return 0
    if played:
        legal = [c for c in hand if c[0] == played[0][0]] or list(hand)
    else:
        legal = list(hand)
    best = None
    maximizing = player % 2 == side
    for card in legal:
        hand.remove(card)
        played.append(card)
        value = _search(hands, trump_suit, leader, side, pos + 1, played)
        played.pop()
        hand.append(card)
        if best is None or (value > best if maximizing else value < best):
            best = value
    return best


def _beats(card, incumbent, led_suit, trump_suit):
    suit, rank = card
    inc_suit, inc_rank = incumbent
    if suit == trump_suit:
        return inc_suit != trump_suit or rank > inc_rank
    if inc_suit == trump_suit:
        return False
    return suit == led_suit and inc_suit == led_suit and rank > inc_rank
