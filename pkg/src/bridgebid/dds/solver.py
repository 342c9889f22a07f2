"""Double-dummy solving with a compiled kernel and a pure-Python fallback.

The compiled extension is preferred when it imported cleanly; setting
BRIDGEBID_PURE_PYTHON=1 in the environment forces the fallback. Both kernels
implement the same search and return identical trick counts.

Exhaustive solving is limited to decks of at most 7 ranks per suit. Tables
for the standard deck come from ingested datasets instead.
"""

from __future__ import annotations

import os
from functools import lru_cache

from ..deals import Deal, seat_side
from ..errors import ConfigError, ContractViolation
from .records import DdsRecord, DdsTable

if os.environ.get("BRIDGEBID_PURE_PYTHON"):
    from . import _search_py as _kernel

    _BACKEND = "python"
else:
    try:
        from . import _search_cy as _kernel  # type: ignore[attr-defined]

        _BACKEND = "compiled"
    except ImportError:
        from . import _search_py as _kernel

        _BACKEND = "python"

MAX_SOLVER_RANKS = 7


def backend_name() -> str:
    """'compiled' when the extension is active, 'python' for the fallback."""
    return _BACKEND


def solve_double_dummy(
    deal: Deal, trump: int, declarer: int, *, use_equivalence: bool = True
) -> int:
    """Tricks the declaring side takes under perfect play by both sides.

    The opening lead is by declarer's left-hand opponent. ``trump`` is a
    strain (suit 0..3, or 4 for notrump).
    """
    n = deal.variant.ranks_per_suit
    if n > MAX_SOLVER_RANKS:
        raise ConfigError(
            f"exhaustive solving handles at most {MAX_SOLVER_RANKS} ranks per suit"
            f" (got {n}); use an ingested trick-table dataset for larger decks"
        )
    if not 0 <= trump <= 4:
        raise ContractViolation(f"trump must be a strain 0..4, got {trump}")
    if not 0 <= declarer <= 3:
        raise ContractViolation(f"declarer must be a seat 0..3, got {declarer}")
    return _solve_cached(n, deal.holder, trump, declarer, use_equivalence)


@lru_cache(maxsize=1 << 18)
def _solve_cached(n, holder, trump, declarer, use_equivalence):
    hands = [0, 0, 0, 0]
    for card, seat in enumerate(holder):
        hands[seat] |= 1 << card
    return _kernel.solve(
        n,
        hands,
        -1 if trump == 4 else trump,
        (declarer + 1) % 4,
        seat_side(declarer),
        use_equivalence,
    )


def full_table(deal: Deal) -> DdsTable:
    """All 20 (declarer, strain) trick counts; cached by the card layout."""
    if deal.variant.ranks_per_suit > MAX_SOLVER_RANKS:
        raise ConfigError(
            f"exhaustive solving handles at most {MAX_SOLVER_RANKS} ranks per suit"
        )
    return _table_cached(deal.variant.ranks_per_suit, deal.holder)


@lru_cache(maxsize=1 << 16)
def _table_cached(n, holder):
    tricks = tuple(
        _solve_cached(n, holder, strain, declarer, True)
        for declarer in range(4)
        for strain in range(5)
    )
    return DdsTable(tricks)


def tabulate(deal: Deal) -> DdsRecord:
    return DdsRecord(deal=deal, table=full_table(deal))


def find_table_mismatches(records) -> list[tuple[int, DdsTable, DdsTable]]:
    """(position, stored, recomputed) for records whose table the solver
    disagrees with. Only meaningful for solvable deck sizes."""
    mismatches = []
    for position, record in enumerate(records):
        recomputed = full_table(record.deal)
        if recomputed.tricks != record.table.tricks:
            mismatches.append((position, record.table, recomputed))
    return mismatches
