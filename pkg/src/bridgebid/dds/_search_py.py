"""Pure-Python trick-play search kernel.

Exhaustive alpha-beta over the card-play game with a per-invocation
transposition table and adjacent-rank equivalence reduction. The compiled
kernel in ``_search_cy`` implements the same algorithm; this module is the
import-time fallback and the readable statement of the search.

Positions are cached only between tricks, keyed by (remaining-card bitset,
leader). At a trick boundary the set of remaining cards determines which
cards are dead, so the key is complete; mid-trick positions are never cached.
"""

from __future__ import annotations


def solve(
    n: int,
    hands: list[int],
    trump: int,
    leader: int,
    maximizing_side: int,
    use_equivalence: bool = True,
) -> int:
    """Tricks won by ``maximizing_side`` (0=NS, 1=EW) under perfect play.

    ``hands`` are per-seat card bitmasks partitioning ``4 * n`` cards,
    ``trump`` is a suit 0..3 or -1 for notrump, and ``leader`` leads to the
    first trick. Every hand must hold the same number of cards.
    """
    kernel = _Kernel(n, hands, trump, maximizing_side, use_equivalence)
    tricks = bin(hands[0]).count("1")
    return kernel.search(leader, -1, tricks + 1)


class _Kernel:
    def __init__(self, n, hands, trump, maximizing_side, use_equivalence):
        self.n = n
        self.hands = list(hands)
        self.trump = trump
        self.maximizing_side = maximizing_side
        self.use_equivalence = use_equivalence
        self.suit_masks = [((1 << n) - 1) << (s * n) for s in range(4)]
        self.dead = 0
        self.tt: dict[int, tuple[int, int]] = {}

    def search(self, leader: int, alpha: int, beta: int) -> int:
        """Value at a trick boundary: future tricks for the maximizing side."""
        hands = self.hands
        remaining = hands[0] | hands[1] | hands[2] | hands[3]
        if remaining == 0:
            return 0
        key = (remaining << 2) | leader
        entry = self.tt.get(key)
        if entry is not None:
            lo, hi = entry
            if lo == hi:
                return lo
            if lo >= beta:
                return lo
            if hi <= alpha:
                return hi
            if lo > alpha:
                alpha = lo
            if hi < beta:
                beta = hi
        else:
            lo, hi = 0, bin(remaining).count("1") // 4
        # Each trick gets its own card buffer: deeper tricks must not clobber
        # the cards of a trick still being searched higher up the stack.
        value = self._play(leader, leader, 0, -1, alpha, beta, [0, 0, 0, 0])
        if value <= alpha:
            self.tt[key] = (lo, min(hi, value))
        elif value >= beta:
            self.tt[key] = (max(lo, value), hi)
        else:
            self.tt[key] = (value, value)
        return value

    def _play(self, leader, player, pos, led_suit, alpha, beta, trick):
        if pos == 4:
            winner = self._trick_winner(leader, trick)
            won = 1 if (winner & 1) == self.maximizing_side else 0
            trick_mask = 0
            for card in trick:
                trick_mask |= 1 << card
            self.dead |= trick_mask
            value = won + self.search(winner, alpha - won, beta - won)
            self.dead &= ~trick_mask
            return value
        moves = self._moves(player, led_suit)
        hands = self.hands
        if (player & 1) == self.maximizing_side:
            best = -1
            for card in moves:
                bit = 1 << card
                hands[player] ^= bit
                trick[pos] = card
                value = self._play(
                    leader,
                    (player + 1) & 3,
                    pos + 1,
                    card // self.n if pos == 0 else led_suit,
                    alpha,
                    beta,
                    trick,
                )
                hands[player] ^= bit
                if value > best:
                    best = value
                    if value > alpha:
                        alpha = value
                        if alpha >= beta:
                            break
            return best
        best = 1 << 20
        for card in moves:
            bit = 1 << card
            hands[player] ^= bit
            trick[pos] = card
            value = self._play(
                leader,
                (player + 1) & 3,
                pos + 1,
                card // self.n if pos == 0 else led_suit,
                alpha,
                beta,
                trick,
            )
            hands[player] ^= bit
            if value < best:
                best = value
                if value < beta:
                    beta = value
                    if alpha >= beta:
                        break
        return best

    def _trick_winner(self, leader: int, trick) -> int:
        n = self.n
        trump = self.trump
        led_suit = trick[0] // n
        best_pos = 0
        best_card = trick[0]
        best_is_trump = led_suit == trump
        for i in (1, 2, 3):
            card = trick[i]
            suit = card // n
            if suit == trump:
                if not best_is_trump or card > best_card:
                    best_pos, best_card, best_is_trump = i, card, True
            elif suit == led_suit and not best_is_trump and card > best_card:
                best_pos, best_card = i, card
        return (leader + best_pos) & 3

    def _moves(self, player: int, led_suit: int) -> list[int]:
        hand = self.hands[player]
        if led_suit >= 0:
            follow = hand & self.suit_masks[led_suit]
            if follow:
                return self._suit_moves(follow, led_suit)
        out = []
        for suit in range(4):
            cards = hand & self.suit_masks[suit]
            if cards:
                out.extend(self._suit_moves(cards, suit))
        return out

    def _suit_moves(self, cards: int, suit: int) -> list[int]:
        """Candidate cards in one suit, highest runs first.

        With equivalence reduction on, cards of this hand that are adjacent in
        rank once dead cards are skipped form a run; only the lowest card of
        each run is searched. Cards still held elsewhere (including cards on
        the current trick, which are never in ``dead``) break runs.
        """
        n = self.n
        base = suit * n
        if not self.use_equivalence:
            return [base + off for off in range(n - 1, -1, -1) if cards >> (base + off) & 1]
        dead = self.dead
        out = []
        run_low = -1
        for off in range(n - 1, -1, -1):
            card = base + off
            if cards >> card & 1:
                run_low = card
            elif not dead >> card & 1:
                if run_low >= 0:
                    out.append(run_low)
                    run_low = -1
        if run_low >= 0:
            out.append(run_low)
        return out
