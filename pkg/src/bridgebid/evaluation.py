"""Duplicate matches, checkpoint tournaments, and a console table.

A match plays every board twice with the rooms' seatings swapped, so both
policies bid both sides of each deal; the per-board IMP swing then reflects
bidding skill rather than the luck of the cards. Policies are callables
mapping (bits batch, mask batch) to action indices; network checkpoints are
adapted with greedy argmax selection (ties to the lowest index) unless a
sampling adapter is requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .auction import PASSED_OUT, new_auction
from .deals import SEAT_NAMES, seat_side
from .errors import ConfigError, ContractViolation, DataError
from .features import encode
from .neural import Checkpoint, PolicyValueParams, forward
from .scoring import board_ns_score, imps
from .train_rl import sample_masked_rows


def greedy_policy(params: PolicyValueParams):
    def act(bits, masks):
        probs, _ = forward(params, bits.astype(np.float32), masks)
        return probs.argmax(axis=1)

    return act


def sampling_policy(params: PolicyValueParams, rng):
    def act(bits, masks):
        probs, _ = forward(params, bits.astype(np.float32), masks)
        return sample_masked_rows(probs, rng)

    return act


def _as_policy(policy, variant):
    if isinstance(policy, Checkpoint):
        policy = policy.params
    if isinstance(policy, PolicyValueParams):
        if policy.config.input_width != variant.feature_width:
            raise ConfigError("policy width does not match the board variant")
        return greedy_policy(policy)
    return policy


@dataclass(frozen=True)
class BoardLine:
    board: int
    open_contract: str
    open_score: int
    closed_contract: str
    closed_score: int
    imps: int


@dataclass(frozen=True)
class MatchResult:
    boards: int
    imps_per_board: float
    standard_error: float
    lines: tuple[BoardLine, ...]

    def summary(self) -> str:
        return (
            f"{self.imps_per_board:+.2f} ± {self.standard_error:.2f} IMPs/board"
            f" over {self.boards} boards"
        )


def _outcome_text(outcome) -> str:
    return "passed out" if outcome is PASSED_OUT else str(outcome)


def _play_boards(policy_ns, policy_ew, records):
    """Run all auctions in lockstep, batching each side's decisions.

    Returns (outcome, NS score) per record.
    """
    variant = records[0].deal.variant
    states = [new_auction(variant, r.deal.dealer) for r in records]
    active = list(range(len(records)))
    while active:
        by_side = ([], [])
        for i in active:
            by_side[seat_side(states[i].to_act)].append(i)
        for side, policy in ((0, policy_ns), (1, policy_ew)):
            members = by_side[side]
            if not members:
                continue
            bits = np.empty((len(members), variant.feature_width), dtype=np.uint8)
            masks = np.empty((len(members), variant.action_count), dtype=bool)
            for row, i in enumerate(members):
                deal = records[i].deal
                obs = encode(states[i], deal.hand(states[i].to_act), deal.vulnerability)
                bits[row] = obs.bits
                masks[row] = obs.mask
            actions = policy(bits, masks)
            for row, i in enumerate(members):
                states[i] = states[i].apply(int(actions[row]))
        active = [i for i in active if not states[i].is_terminal]

    results = []
    for i, record in enumerate(records):
        outcome = states[i].final_contract()
        tricks = None
        if outcome is not PASSED_OUT:
            tricks = record.table.entry(outcome.declarer, outcome.strain)
        score = board_ns_score(variant, outcome, tricks, record.deal.vulnerability)
        results.append((outcome, score))
    return results


def duplicate_match(policy_a, policy_b, records, n_boards) -> MatchResult:
    """Play n_boards twice (rooms swapped); positive IMPs favor policy A."""
    if n_boards < 1:
        raise ConfigError("a match needs at least one board")
    if n_boards > len(records):
        raise DataError(
            f"match wants {n_boards} boards but the dataset holds {len(records)}"
        )
    records = records[:n_boards]
    variant = records[0].deal.variant
    a = _as_policy(policy_a, variant)
    b = _as_policy(policy_b, variant)

    open_room = _play_boards(a, b, records)  # A sits NS
    closed_room = _play_boards(b, a, records)  # B sits NS
    lines = []
    swings = []
    for i in range(n_boards):
        open_outcome, open_score = open_room[i]
        closed_outcome, closed_score = closed_room[i]
        swing = imps(open_score - closed_score)
        swings.append(swing)
        lines.append(
            BoardLine(
                board=i,
                open_contract=_outcome_text(open_outcome),
                open_score=open_score,
                closed_contract=_outcome_text(closed_outcome),
                closed_score=closed_score,
                imps=swing,
            )
        )
    swings = np.array(swings, dtype=np.float64)
    se = float(swings.std(ddof=1) / math.sqrt(n_boards)) if n_boards > 1 else 0.0
    return MatchResult(
        boards=n_boards,
        imps_per_board=float(swings.mean()),
        standard_error=se,
        lines=tuple(lines),
    )


def match_csv_rows(result: MatchResult) -> list[str]:
    rows = ["board,open_contract,open_score,closed_contract,closed_score,imps"]
    for line in result.lines:
        rows.append(
            f"{line.board},{line.open_contract},{line.open_score},"
            f"{line.closed_contract},{line.closed_score},{line.imps}"
        )
    return rows


@dataclass(frozen=True)
class TournamentMatrix:
    labels: tuple[str, ...]
    tanh_imps: np.ndarray  # [row, col] = tanh(IMPs/board of row vs column)
    imps: np.ndarray

    def entry(self, row_label: str, col_label: str) -> float:
        r = self.labels.index(row_label)
        c = self.labels.index(col_label)
        return float(self.tanh_imps[r, c])


def round_robin(entries, records, n_boards) -> TournamentMatrix:
    """All-pairs duplicate matches among labeled checkpoints.

    Each unordered pair plays once; the mirrored entry is the exact
    negation (the duplicate format is symmetric in the room swap).
    """
    if len(entries) < 2:
        raise ConfigError("a tournament needs at least two entries")
    labels = tuple(str(label) for label, _ in entries)
    if len(set(labels)) != len(labels):
        raise ConfigError("tournament entry labels must be unique")
    k = len(entries)
    raw = np.zeros((k, k), dtype=np.float64)
    for i in range(k):
        for j in range(i + 1, k):
            result = duplicate_match(entries[i][1], entries[j][1], records, n_boards)
            raw[i, j] = result.imps_per_board
            raw[j, i] = -result.imps_per_board
    return TournamentMatrix(labels=labels, tanh_imps=np.tanh(raw), imps=raw)


def tournament_csv_rows(matrix: TournamentMatrix) -> list[str]:
    rows = ["," + ",".join(matrix.labels)]
    for r, label in enumerate(matrix.labels):
        cells = ",".join(f"{matrix.tanh_imps[r, c]:.4f}" for c in range(len(matrix.labels)))
        rows.append(f"{label},{cells}")
    return rows


def tournament_long_rows(matrix: TournamentMatrix) -> list[str]:
    rows = ["row,col,tanh_imps_per_board,imps_per_board"]
    for r, row_label in enumerate(matrix.labels):
        for c, col_label in enumerate(matrix.labels):
            rows.append(
                f"{row_label},{col_label},{matrix.tanh_imps[r, c]:.4f},{matrix.imps[r, c]:.4f}"
            )
    return rows


# ---------------------------------------------------------------------------
# Console table
# ---------------------------------------------------------------------------


def play_console(checkpoint, human_seat: int, deal, in_stream, out_stream, solver=None):
    """One board at the console: the human calls for one seat, the model
    fills the other three. Returns the final outcome.

    ``solver`` maps (deal, strain, declarer) to double-dummy tricks; when
    None and the variant is small enough, the built-in solver is used.
    """
    from .auction import call_text, parse_call
    from .dds.solver import MAX_SOLVER_RANKS, solve_double_dummy
    from .deals import format_deal

    variant = deal.variant
    params = checkpoint.params if isinstance(checkpoint, Checkpoint) else checkpoint
    if params.config.input_width != variant.feature_width:
        raise ConfigError("checkpoint does not match the deal's variant")
    if human_seat not in range(4):
        raise ConfigError("seat must be 0..3")

    def emit(text):
        out_stream.write(text + "\n")

    emit(f"Board: {format_deal(deal)}")
    emit(f"You are {SEAT_NAMES[human_seat]}; dealer {SEAT_NAMES[deal.dealer]}, "
         f"vulnerability {deal.vulnerability.value}")
    hand_cards = sorted(deal.hand(human_seat), reverse=True)
    from .deals import card_name

    emit("Your hand: " + " ".join(card_name(variant, c) for c in hand_cards))

    state = new_auction(variant, deal.dealer)
    while not state.is_terminal:
        seat = state.to_act
        if seat == human_seat:
            out_stream.write("Your call: ")
            out_stream.flush()
            line = in_stream.readline()
            if not line:
                emit("(input closed; abandoning board)")
                return None
            text = line.strip()
            try:
                call = parse_call(text)
            except ContractViolation:
                emit(f"unrecognised call {text!r}; try P, X, XX, or like 1C/3N")
                continue
            if not state.is_legal(call):
                try:
                    state.apply(call)
                except ContractViolation as exc:
                    emit(f"illegal: {exc}")
                continue
            state = state.apply(call)
        else:
            obs = encode(state, deal.hand(seat), deal.vulnerability)
            probs, _ = forward(params, obs.bits[None, :].astype(np.float32), obs.mask[None, :])
            call = int(probs[0].argmax())
            emit(f"{SEAT_NAMES[seat]}: {call_text(call)}")
            state = state.apply(call)

    outcome = state.final_contract()
    if outcome is PASSED_OUT:
        emit("Passed out. Score 0.")
        return outcome
    emit(f"Contract: {outcome}")
    tricks = None
    if solver is not None:
        tricks = solver(deal, outcome.strain, outcome.declarer)
    elif variant.ranks_per_suit <= MAX_SOLVER_RANKS:
        tricks = solve_double_dummy(deal, outcome.strain, outcome.declarer)
    if tricks is None:
        emit("No double-dummy table available for this deck size.")
        return outcome
    score = board_ns_score(variant, outcome, tricks, deal.vulnerability)
    emit(f"Double-dummy tricks for declarer: {tricks}")
    emit(f"Score (North-South perspective): {score:+d}")
    return outcome
