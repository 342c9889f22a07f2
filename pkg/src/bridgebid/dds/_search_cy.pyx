# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of the pure-Python trick-play search kernel.

Same algorithm and identical results as ``_search_py`` (which carries the
commentary); this version exists purely for speed.
"""


cdef inline int _popcount(unsigned long long x):
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


cdef class _Kernel:
    cdef unsigned long long hands[4]
    cdef unsigned long long suit_masks[4]
    cdef unsigned long long dead
    cdef int n
    cdef int trump
    cdef int maximizing_side
    cdef bint use_equivalence
    cdef dict tt

    def __init__(self, int n, hands, int trump, int maximizing_side,
                 bint use_equivalence):
        cdef int i
        self.n = n
        for i in range(4):
            self.hands[i] = hands[i]
            self.suit_masks[i] = ((<unsigned long long>1 << n) - 1) << (i * n)
        self.trump = trump
        self.maximizing_side = maximizing_side
        self.use_equivalence = use_equivalence
        self.dead = 0
        self.tt = {}

    cdef int search(self, int leader, int alpha, int beta):
        cdef unsigned long long remaining = (
            self.hands[0] | self.hands[1] | self.hands[2] | self.hands[3]
        )
        if remaining == 0:
            return 0
        cdef unsigned long long ckey = (remaining << 2) | <unsigned long long>leader
        cdef int lo, hi, value, packed
        entry = self.tt.get(ckey)
        if entry is not None:
            packed = entry
            lo = packed >> 8
            hi = packed & 0xFF
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
            lo = 0
            hi = _popcount(remaining) >> 2
        # Per-trick card buffer on this stack frame: deeper tricks must not
        # clobber the cards of a trick still being searched higher up.
        cdef int trick[4]
        value = self._play(leader, leader, 0, -1, alpha, beta, trick)
        if value <= alpha:
            hi = hi if hi < value else value
        elif value >= beta:
            lo = lo if lo > value else value
        else:
            lo = value
            hi = value
        self.tt[ckey] = (lo << 8) | hi
        return value

    cdef int _play(self, int leader, int player, int pos, int led_suit,
                   int alpha, int beta, int* trick):
        cdef int winner, won, value, best, i, card, count, next_led
        cdef unsigned long long trick_mask, bit
        cdef int moves[56]
        if pos == 4:
            winner = self._trick_winner(leader, trick)
            won = 1 if (winner & 1) == self.maximizing_side else 0
            trick_mask = 0
            for i in range(4):
                trick_mask |= <unsigned long long>1 << trick[i]
            self.dead |= trick_mask
            value = won + self.search(winner, alpha - won, beta - won)
            self.dead &= ~trick_mask
            return value
        count = self._moves(player, led_suit, moves)
        if (player & 1) == self.maximizing_side:
            best = -1
            for i in range(count):
                card = moves[i]
                bit = <unsigned long long>1 << card
                self.hands[player] ^= bit
                trick[pos] = card
                next_led = card // self.n if pos == 0 else led_suit
                value = self._play(leader, (player + 1) & 3, pos + 1, next_led,
                                   alpha, beta, trick)
                self.hands[player] ^= bit
                if value > best:
                    best = value
                    if value > alpha:
                        alpha = value
                        if alpha >= beta:
                            break
            return best
        best = 1 << 20
        for i in range(count):
            card = moves[i]
            bit = <unsigned long long>1 << card
            self.hands[player] ^= bit
            trick[pos] = card
            next_led = card // self.n if pos == 0 else led_suit
            value = self._play(leader, (player + 1) & 3, pos + 1, next_led,
                               alpha, beta, trick)
            self.hands[player] ^= bit
            if value < best:
                best = value
                if value < beta:
                    beta = value
                    if alpha >= beta:
                        break
        return best

    cdef int _trick_winner(self, int leader, int* trick):
        cdef int led_suit = trick[0] // self.n
        cdef int best_pos = 0
        cdef int best_card = trick[0]
        cdef bint best_is_trump = led_suit == self.trump
        cdef int i, card, suit
        for i in range(1, 4):
            card = trick[i]
            suit = card // self.n
            if suit == self.trump:
                if not best_is_trump or card > best_card:
                    best_pos = i
                    best_card = card
                    best_is_trump = True
            elif suit == led_suit and not best_is_trump and card > best_card:
                best_pos = i
                best_card = card
        return (leader + best_pos) & 3

    cdef int _moves(self, int player, int led_suit, int* out):
        cdef unsigned long long hand = self.hands[player]
        cdef unsigned long long follow, cards
        cdef int count = 0
        cdef int suit
        if led_suit >= 0:
            follow = hand & self.suit_masks[led_suit]
            if follow:
                return self._suit_moves(follow, led_suit, out, 0)
        for suit in range(4):
            cards = hand & self.suit_masks[suit]
            if cards:
                count = self._suit_moves(cards, suit, out, count)
        return count

    cdef int _suit_moves(self, unsigned long long cards, int suit, int* out,
                         int count):
        cdef int base = suit * self.n
        cdef int off, card
        cdef int run_low = -1
        if not self.use_equivalence:
            for off in range(self.n - 1, -1, -1):
                card = base + off
                if (cards >> card) & 1:
                    out[count] = card
                    count += 1
            return count
        for off in range(self.n - 1, -1, -1):
            card = base + off
            if (cards >> card) & 1:
                run_low = card
            elif not (self.dead >> card) & 1:
                if run_low >= 0:
                    out[count] = run_low
                    count += 1
                    run_low = -1
        if run_low >= 0:
            out[count] = run_low
            count += 1
        return count


def solve(int n, hands, int trump, int leader, int maximizing_side,
          bint use_equivalence=True):
    """See _search_py.solve; identical contract."""
    kernel = _Kernel(n, hands, trump, maximizing_side, use_equivalence)
    cdef int tricks = _popcount(<unsigned long long>hands[0])
    return kernel.search(leader, -1, tricks + 1)
