"""Supervised pretraining of the policy head from bidding records.

A board record is a deal plus the complete auction played on it. Records
expand into (observation, call) pairs, one per decision, and the network is
trained by masked cross-entropy. A deterministic rule-based teacher generates
synthetic datasets so everything runs without an external corpus; externally
produced files use the same JSONL schema:

    {"deal": "...", "dealer": "N", "vul": "None", "actions": [0, 3, 0, ...]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .auction import (
    NOTRUMP,
    PASS,
    AuctionState,
    bid_level,
    bid_strain,
    make_bid,
    new_auction,
)
from .deals import (
    Deal,
    GameVariant,
    Vulnerability,
    format_deal,
    generate_deal,
    parse_deal,
)
from .errors import ContractViolation, DataError
from .features import encode
from .neural import (
    Checkpoint,
    NetConfig,
    PolicyValueParams,
    SlBatch,
    adam_step,
    forward,
    init_adam,
    init_params,
    loss_and_grad,
)


@dataclass(frozen=True)
class SlBoardRecord:
    deal: Deal
    actions: tuple[int, ...]

    def __post_init__(self) -> None:
        state = new_auction(self.deal.variant, self.deal.dealer)
        for position, call in enumerate(self.actions):
            if state.is_terminal:
                raise DataError(f"call at position {position} follows a finished auction")
            if not state.is_legal(call):
                raise DataError(f"call {call} at position {position} is illegal")
            state = state.apply(call)
        if not state.is_terminal:
            raise DataError("actions do not form a complete auction")


@dataclass(frozen=True)
class SlConfig:
    learning_rate: float = 1e-4
    batch_size: int = 128
    epochs: int = 40
    seed: int = 0
    eval_every: int = 1

    def __post_init__(self) -> None:
        if self.batch_size < 1 or self.epochs < 1 or self.eval_every < 1:
            raise ContractViolation("batch size, epochs, and cadence must be positive")
        if self.learning_rate <= 0:
            raise ContractViolation("learning rate must be positive")


# ---------------------------------------------------------------------------
# Rule-based teacher
# ---------------------------------------------------------------------------

_POINT_VALUES = (4, 3, 2, 1)  # top four ranks, ace downward


def hand_points(variant: GameVariant, hand) -> int:
    top = variant.ranks_per_suit - 1
    total = 0
    for card in hand:
        offset = top - card % variant.ranks_per_suit
        if offset < len(_POINT_VALUES):
            total += _POINT_VALUES[offset]
    return total


def suit_lengths(variant: GameVariant, hand) -> list[int]:
    lengths = [0, 0, 0, 0]
    for card in hand:
        lengths[card // variant.ranks_per_suit] += 1
    return lengths


def teacher_call(state: AuctionState, hand) -> int:
    """Deterministic point-count bidder: open, raise partner, or overcall.

    Never doubles, so its auctions stay short and strictly escalating.
    """
    variant = state.variant
    points = hand_points(variant, hand)
    lengths = suit_lengths(variant, hand)
    longest = max(lengths)
    best_suit = max(s for s in range(4) if lengths[s] == longest)

    if state.highest_bid is None:
        if points >= 15 and longest - min(lengths) <= 2:
            return make_bid(1, NOTRUMP)
        if points >= 12:
            return make_bid(1, best_suit)
        return PASS

    level = bid_level(state.highest_bid)
    strain = bid_strain(state.highest_bid)
    partner_holds = (state.last_bidder - state.to_act) % 4 == 2
    if partner_holds:
        if points >= 10:
            jump = 2 if points >= 14 else 1
            for target in range(min(level + jump, variant.max_level), level, -1):
                candidate = make_bid(target, strain)
                if state.is_legal(candidate):
                    return candidate
        return PASS

    # Opponents hold the contract: overcall a decent long suit.
    if points >= 13 and longest >= variant.cards_per_hand // 4 + 1:
        overcall_level = level if best_suit > strain else level + 1
        if overcall_level <= min(3, variant.max_level):
            candidate = make_bid(overcall_level, best_suit)
            if state.is_legal(candidate):
                return candidate
    return PASS


def teacher_record(deal: Deal) -> SlBoardRecord:
    state = new_auction(deal.variant, deal.dealer)
    actions = []
    while not state.is_terminal:
        call = teacher_call(state, deal.hand(state.to_act))
        actions.append(call)
        state = state.apply(call)
    return SlBoardRecord(deal=deal, actions=tuple(actions))


def generate_teacher_dataset(variant: GameVariant, count: int, seed: int):
    """Teacher auctions over a seeded board schedule (dealer and
    vulnerability rotate as in duplicate play)."""
    records = []
    for board in range(1, count + 1):
        deal = generate_deal(seed, variant, board)
        records.append(teacher_record(deal))
    return records


# ---------------------------------------------------------------------------
# Dataset I/O
# ---------------------------------------------------------------------------


def sl_record_to_json(record: SlBoardRecord) -> str:
    return json.dumps(
        {
            "deal": format_deal(record.deal),
            "dealer": "NESW"[record.deal.dealer],
            "vul": record.deal.vulnerability.value,
            "actions": list(record.actions),
        }
    )


def sl_record_from_json(line: str, variant: GameVariant | None = None) -> SlBoardRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise DataError("record is not a JSON object")
    for key in ("deal", "dealer", "vul", "actions"):
        if key not in obj:
            raise DataError(f"record missing {key!r}")
    deal = parse_deal(obj["deal"], variant=variant)
    dealer = obj["dealer"]
    if dealer not in "NESW" or len(dealer) != 1:
        raise DataError(f"unknown dealer {dealer!r}")
    try:
        vul = Vulnerability(obj["vul"])
    except ValueError:
        raise DataError(f"unknown vulnerability {obj['vul']!r}") from None
    deal = replace(deal, dealer="NESW".index(dealer), vulnerability=vul)
    actions = obj["actions"]
    if not isinstance(actions, list) or not all(isinstance(a, int) for a in actions):
        raise DataError("actions must be a list of call indices")
    return SlBoardRecord(deal=deal, actions=tuple(actions))


def store_sl_dataset(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(sl_record_to_json(record) + "\n")


def load_sl_dataset(path, variant: GameVariant | None = None):
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(sl_record_from_json(line, variant))
            except DataError as exc:
                raise DataError(f"line {number}: {exc}") from None
    return records


# ---------------------------------------------------------------------------
# Pair expansion and training
# ---------------------------------------------------------------------------


def expand_pairs(record: SlBoardRecord):
    """Yield one (Observation, target call) per decision in the auction."""
    deal = record.deal
    state = new_auction(deal.variant, deal.dealer)
    for call in record.actions:
        yield encode(state, deal.hand(state.to_act), deal.vulnerability), call
        state = state.apply(call)


def _pairs_to_arrays(records, variant: GameVariant):
    bits, masks, targets = [], [], []
    for record in records:
        for observation, call in expand_pairs(record):
            bits.append(observation.bits)
            masks.append(observation.mask)
            targets.append(call)
    if not bits:
        raise DataError("dataset contains no decisions")
    return (
        np.array(bits, dtype=np.uint8),
        np.array(masks, dtype=bool),
        np.array(targets, dtype=np.int64),
    )


def epoch_order(n_pairs: int, epoch: int, seed: int) -> np.ndarray:
    """Visit order for one epoch: a seed-derived permutation of all pairs."""
    return np.random.default_rng([seed, 0x51AC, epoch]).permutation(n_pairs)


def evaluate_arrays(params: PolicyValueParams, bits, masks, targets, chunk=4096):
    total_ce = 0.0
    correct = 0
    for start in range(0, len(bits), chunk):
        sl = slice(start, start + chunk)
        probs, _ = forward(params, bits[sl].astype(np.float32), masks[sl])
        picked = probs[np.arange(len(probs)), targets[sl]]
        with np.errstate(divide="ignore"):
            total_ce -= float(np.log(picked).sum())
        correct += int((probs.argmax(axis=1) == targets[sl]).sum())
    n = len(bits)
    return total_ce / n, correct / n


@dataclass
class SlMetrics:
    epoch: int
    train_loss: float
    eval_loss: float
    eval_acc: float


def sl_train(
    train_records,
    config: SlConfig,
    hidden_width: int = 1024,
    hidden_layers: int = 4,
    eval_records=None,
    on_epoch=None,
):
    """Train from board records; returns (Checkpoint, list of SlMetrics).

    Deterministic for a fixed config: initialization, epoch permutations,
    and batch order all derive from the config seed.
    """
    if not train_records:
        raise DataError("training dataset is empty")
    variant = train_records[0].deal.variant
    bits, masks, targets = _pairs_to_arrays(train_records, variant)
    eval_arrays = None
    if eval_records:
        eval_arrays = _pairs_to_arrays(eval_records, variant)

    net_config = NetConfig(
        input_width=variant.feature_width,
        policy_width=variant.action_count,
        hidden_width=hidden_width,
        hidden_layers=hidden_layers,
    )
    params = init_params(net_config, config.seed)
    adam = init_adam(params, lr=config.learning_rate)

    n_pairs = len(bits)
    history = []
    for epoch in range(1, config.epochs + 1):
        order = epoch_order(n_pairs, epoch, config.seed)
        loss_sum = 0.0
        for start in range(0, n_pairs, config.batch_size):
            idx = order[start : start + config.batch_size]
            batch = SlBatch(bits=bits[idx], masks=masks[idx], actions=targets[idx])
            loss, grads, _ = loss_and_grad(params, batch)
            params, adam = adam_step(params, grads, adam)
            loss_sum += loss * len(idx)
            if on_epoch is not None:
                on_epoch("batch", epoch, idx)
        eval_loss = eval_acc = float("nan")
        if eval_arrays is not None and epoch % config.eval_every == 0:
            eval_loss, eval_acc = evaluate_arrays(params, *eval_arrays)
        row = SlMetrics(epoch, loss_sum / n_pairs, eval_loss, eval_acc)
        history.append(row)
        if on_epoch is not None:
            on_epoch("epoch", epoch, row)

    checkpoint = Checkpoint(
        params=params,
        provenance={
            "stage": "sl",
            "update": config.epochs,
            "seed": config.seed,
            "variant": variant.name,
        },
        adam=adam,
    )
    return checkpoint, history


def sl_evaluate(checkpoint: Checkpoint, records):
    """Cross-entropy and top-1 accuracy of a checkpoint on board records."""
    if not records:
        raise DataError("evaluation dataset is empty")
    variant = records[0].deal.variant
    if checkpoint.params.config.input_width != variant.feature_width:
        raise DataError("checkpoint width does not match the dataset variant")
    return evaluate_arrays(checkpoint.params, *_pairs_to_arrays(records, variant))


def metrics_csv_rows(history) -> list[str]:
    rows = ["epoch,train_loss,eval_loss,eval_acc"]
    for m in history:
        rows.append(f"{m.epoch},{m.train_loss:.6f},{m.eval_loss:.6f},{m.eval_acc:.6f}")
    return rows
