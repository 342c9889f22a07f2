"""Auction state machine: call encoding, legality, termination, contract.

Calls are integers. 0 is Pass, 1 is Double, 2 is Redouble, and bid
``3 + 5 * (level - 1) + strain`` names level ``level`` in ``strain``
(0=clubs, 1=diamonds, 2=hearts, 3=spades, 4=notrump). Text forms are
"P", "X", "XX", and e.g. "1C" or "7N".
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .deals import GameVariant, SEAT_NAMES, seat_side
from .errors import ContractViolation

PASS, DOUBLE, REDOUBLE = 0, 1, 2
FIRST_BID = 3
STRAIN_CHARS = "CDHSN"
NOTRUMP = 4


def make_bid(level: int, strain: int) -> int:
    if not (level >= 1 and 0 <= strain <= 4):
        raise ContractViolation(f"no bid with level {level}, strain {strain}")
    return FIRST_BID + 5 * (level - 1) + strain


def bid_level(call: int) -> int:
    if call < FIRST_BID:
        raise ContractViolation(f"call {call} is not a bid")
    return (call - FIRST_BID) // 5 + 1


def bid_strain(call: int) -> int:
    if call < FIRST_BID:
        raise ContractViolation(f"call {call} is not a bid")
    return (call - FIRST_BID) % 5


def call_text(call: int) -> str:
    if call == PASS:
        return "P"
    if call == DOUBLE:
        return "X"
    if call == REDOUBLE:
        return "XX"
    return f"{bid_level(call)}{STRAIN_CHARS[bid_strain(call)]}"


def parse_call(text: str) -> int:
    s = text.strip().upper()
    if s in ("P", "PASS"):
        return PASS
    if s in ("X", "DBL"):
        return DOUBLE
    if s in ("XX", "RDBL"):
        return REDOUBLE
    if len(s) >= 2 and s[:-1].isdigit() and s[-1] in STRAIN_CHARS:
        level = int(s[:-1])
        if level >= 1:
            return make_bid(level, STRAIN_CHARS.index(s[-1]))
    raise ContractViolation(f"unrecognised call {text!r}")


class Doubling(enum.IntEnum):
    UNDOUBLED = 0
    DOUBLED = 1
    REDOUBLED = 2


@dataclass(frozen=True)
class Contract:
    """Outcome of a completed auction that found a bid."""

    level: int
    strain: int
    declarer: int
    doubling: Doubling

    def __str__(self) -> str:
        suffix = ("", "X", "XX")[self.doubling]
        return f"{self.level}{STRAIN_CHARS[self.strain]}{suffix} by {SEAT_NAMES[self.declarer]}"


class PassedOut:
    """Singleton marker for a four-pass auction."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "PASSED_OUT"


PASSED_OUT = PassedOut()


@dataclass(frozen=True)
class AuctionState:
    """Immutable auction position; ``apply`` returns the successor state."""

    variant: GameVariant
    dealer: int
    calls: tuple[int, ...] = ()
    to_act: int = field(default=-1)
    highest_bid: int | None = None
    last_bidder: int | None = None
    doubling: Doubling = Doubling.UNDOUBLED
    last_doubler: int | None = None
    consecutive_passes: int = 0

    def __post_init__(self) -> None:
        if self.to_act == -1:
            object.__setattr__(self, "to_act", self.dealer)

    @property
    def is_terminal(self) -> bool:
        if self.highest_bid is None:
            return len(self.calls) == 4
        return self.consecutive_passes >= 3

    def is_legal(self, call: int) -> bool:
        if self.is_terminal or not 0 <= call < self.variant.action_count:
            return False
        if call == PASS:
            return True
        if call == DOUBLE:
            return (
                self.highest_bid is not None
                and self.doubling is Doubling.UNDOUBLED
                and (self.last_bidder - self.to_act) % 2 == 1
            )
        if call == REDOUBLE:
            return (
                self.doubling is Doubling.DOUBLED
                and (self.last_doubler - self.to_act) % 2 == 1
            )
        return self.highest_bid is None or call > self.highest_bid

    def legal_mask(self) -> np.ndarray:
        mask = np.zeros(self.variant.action_count, dtype=bool)
        if self.is_terminal:
            return mask
        mask[PASS] = True
        if (
            self.highest_bid is not None
            and self.doubling is Doubling.UNDOUBLED
            and (self.last_bidder - self.to_act) % 2 == 1
        ):
            mask[DOUBLE] = True
        if (
            self.doubling is Doubling.DOUBLED
            and (self.last_doubler - self.to_act) % 2 == 1
        ):
            mask[REDOUBLE] = True
        lowest = FIRST_BID if self.highest_bid is None else self.highest_bid + 1
        mask[lowest:] = True
        return mask

    def apply(self, call: int) -> "AuctionState":
        if self.is_terminal:
            raise ContractViolation("auction is over; no further calls")
        if not 0 <= call < self.variant.action_count:
            raise ContractViolation(
                f"call {call} out of range for {self.variant.action_count} actions"
            )
        next_seat = (self.to_act + 1) % 4
        common = dict(calls=self.calls + (call,), to_act=next_seat)
        if call == PASS:
            return replace(self, consecutive_passes=self.consecutive_passes + 1, **common)
        if call == DOUBLE:
            if self.highest_bid is None:
                raise ContractViolation("cannot double before any bid")
            if self.doubling is not Doubling.UNDOUBLED:
                raise ContractViolation("contract is already doubled")
            if (self.last_bidder - self.to_act) % 2 == 0:
                raise ContractViolation("cannot double partner's bid")
            return replace(
                self,
                doubling=Doubling.DOUBLED,
                last_doubler=self.to_act,
                consecutive_passes=0,
                **common,
            )
        if call == REDOUBLE:
            if self.doubling is not Doubling.DOUBLED:
                raise ContractViolation("redouble requires a standing double")
            if (self.last_doubler - self.to_act) % 2 == 0:
                raise ContractViolation("only the doubled side may redouble")
            return replace(
                self,
                doubling=Doubling.REDOUBLED,
                last_doubler=None,
                consecutive_passes=0,
                **common,
            )
        if self.highest_bid is not None and call <= self.highest_bid:
            raise ContractViolation(
                f"bid {call_text(call)} does not outrank {call_text(self.highest_bid)}"
            )
        return replace(
            self,
            highest_bid=call,
            last_bidder=self.to_act,
            doubling=Doubling.UNDOUBLED,
            last_doubler=None,
            consecutive_passes=0,
            **common,
        )

    def final_contract(self):
        """Contract for a finished auction, or PASSED_OUT."""
        if not self.is_terminal:
            raise ContractViolation("auction still in progress")
        if self.highest_bid is None:
            return PASSED_OUT
        strain = bid_strain(self.highest_bid)
        winning_side = seat_side(self.last_bidder)
        declarer = None
        seat = self.dealer
        for call in self.calls:
            if (
                call >= FIRST_BID
                and bid_strain(call) == strain
                and seat_side(seat) == winning_side
            ):
                declarer = seat
                break
            seat = (seat + 1) % 4
        return Contract(
            level=bid_level(self.highest_bid),
            strain=strain,
            declarer=declarer,
            doubling=self.doubling,
        )


def new_auction(variant: GameVariant, dealer: int) -> AuctionState:
    if not 0 <= dealer < 4:
        raise ContractViolation(f"dealer must be a seat 0..3, got {dealer}")
    return AuctionState(variant=variant, dealer=dealer)


def replay_calls(variant: GameVariant, dealer: int, calls) -> AuctionState:
    """Apply a call sequence from a fresh auction, validating each step."""
    state = new_auction(variant, dealer)
    for call in calls:
        state = state.apply(call)
    return state


def auction_text(state: AuctionState) -> str:
    return " ".join(call_text(c) for c in state.calls)
