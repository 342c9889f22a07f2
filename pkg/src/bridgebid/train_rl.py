"""PPO over vectorized bidding environments with a self-play opponent pool.

The learner always sits North-South (deals are i.i.d., so fixing seats loses
nothing and keeps reward bookkeeping simple); East-West calls come from an
opponent checkpoint sampled uniformly from the pool at every episode reset.
Rewards are zero except at auction end, where the learner side receives the
double-dummy board score scaled into [-1, 1].

A rollout records exactly ``rollout_length`` learner decisions per slot.
Decisions with a single legal call are still recorded (their policy gradient
is identically zero), which guarantees a terminal reward always lands on a
transition inside the current buffer.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .auction import PASSED_OUT, new_auction
from .deals import seat_side
from .dds import DdsRecord
from .errors import ConfigError, DataError, NumericError
from .features import encode
from .neural import (
    AdamState,
    Checkpoint,
    NetConfig,
    PolicyValueParams,
    PpoBatch,
    adam_step,
    forward,
    forward_with_logs,
    init_adam,
    init_params,
    loss_and_grad,
)
from .scoring import normalized_reward


@dataclass(frozen=True)
class PpoConfig:
    num_envs: int = 8192
    rollout_length: int = 32
    gae_lambda: float = 0.95
    discount: float = 1.0
    clip_ratio: float = 0.2
    value_coef: float = 0.5
    entropy_coef: float = 1e-3
    minibatch_size: int = 1024
    learning_rate: float = 1e-6
    update_steps: int = 10_000
    epochs_per_update: int = 10
    grad_clip: float = 0.5
    seed: int = 0
    normalize_advantages: bool = True
    value_clip: float | None = 0.2

    def __post_init__(self) -> None:
        if min(self.num_envs, self.rollout_length, self.minibatch_size) < 1:
            raise ConfigError("env count, rollout length, and minibatch must be positive")
        if not 0.0 <= self.gae_lambda <= 1.0 or not 0.0 <= self.discount <= 1.0:
            raise ConfigError("gae_lambda and discount must lie in [0, 1]")
        if self.update_steps < 1 or self.epochs_per_update < 1:
            raise ConfigError("update counts must be positive")


@dataclass(frozen=True)
class FspConfig:
    snapshot_every: int = 100
    use_pool: bool = True

    def __post_init__(self) -> None:
        if self.snapshot_every < 1:
            raise ConfigError("snapshot cadence must be positive")


class FspPool:
    """Ordered, immutable opponent checkpoints; never empty once created."""

    def __init__(self, initial: PolicyValueParams, label: str = "0"):
        self._entries: list[tuple[str, PolicyValueParams]] = [(label, initial.copy())]

    def add(self, label: str, params: PolicyValueParams) -> None:
        self._entries.append((label, params.copy()))

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self._entries]

    def entry(self, index: int) -> PolicyValueParams:
        return self._entries[index][1]

    def sample(self, rng) -> tuple[int, PolicyValueParams]:
        index = int(rng.integers(len(self._entries)))
        return index, self._entries[index][1]


@dataclass
class RolloutBuffer:
    """(rollout_length, num_envs)-shaped transition arrays plus bootstrap."""

    bits: np.ndarray
    masks: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    values: np.ndarray
    rewards: np.ndarray
    dones: np.ndarray
    seats: np.ndarray
    bootstrap: np.ndarray


@dataclass
class EpisodeResult:
    record_index: int
    outcome: object
    reward: float
    decisions: int
    opponent: int | None


def sample_masked_rows(probs: np.ndarray, rng) -> np.ndarray:
    """Sample one action per row; zero-probability entries are unreachable."""
    cum = np.cumsum(probs.astype(np.float64), axis=1)
    cum /= cum[:, -1:]
    u = rng.random(len(probs))
    return (cum <= u[:, None]).sum(axis=1)


class DealFeed:
    """Cycles through dataset records in seeded shuffled order, reshuffling
    on exhaustion."""

    def __init__(self, records, seed: int):
        if not records:
            raise DataError("the training dataset is empty")
        self.records = records
        self._rng = np.random.default_rng([seed & 0xFFFFFFFF, 0xDEA1])
        self._order = self._rng.permutation(len(records))
        self._pos = 0
        self.wraps = 0

    def next(self) -> tuple[int, DdsRecord]:
        if self._pos == len(self._order):
            self._order = self._rng.permutation(len(self._order))
            self._pos = 0
            self.wraps += 1
        index = int(self._order[self._pos])
        self._pos += 1
        return index, self.records[index]


class _Slot:
    __slots__ = ("record_index", "record", "state", "opponent_index", "opponent", "decisions")

    def __init__(self):
        self.record_index = -1
        self.record = None
        self.state = None
        self.opponent_index = None
        self.opponent = None
        self.decisions = 0


class RolloutEngine:
    """Advances num_envs auctions in lockstep between learner decisions."""

    def __init__(self, records, config: PpoConfig, seed: int, opponent_provider):
        self.config = config
        self.variant = records[0].deal.variant
        self.feed = DealFeed(records, seed)
        self._provider = opponent_provider
        self._rng = np.random.default_rng([seed & 0xFFFFFFFF, 0xACC7])
        self._learner: PolicyValueParams | None = None
        self.slots = [_Slot() for _ in range(config.num_envs)]
        for slot in self.slots:
            self._reset_slot(slot)

    def _reset_slot(self, slot: _Slot) -> None:
        slot.record_index, slot.record = self.feed.next()
        slot.state = new_auction(self.variant, slot.record.deal.dealer)
        slot.opponent_index, slot.opponent = self._provider(self._rng)
        slot.decisions = 0

    def _terminal_reward(self, slot: _Slot) -> float:
        outcome = slot.state.final_contract()
        tricks = None
        if outcome is not PASSED_OUT:
            tricks = slot.record.table.entry(outcome.declarer, outcome.strain)
        return normalized_reward(
            self.variant, outcome, tricks, slot.record.deal.vulnerability, side=0
        )

    def _encode_slots(self, indices):
        width = self.variant.feature_width
        actions = self.variant.action_count
        bits = np.empty((len(indices), width), dtype=np.uint8)
        masks = np.empty((len(indices), actions), dtype=bool)
        for row, e in enumerate(indices):
            slot = self.slots[e]
            obs = encode(
                slot.state,
                slot.record.deal.hand(slot.state.to_act),
                slot.record.deal.vulnerability,
            )
            bits[row] = obs.bits
            masks[row] = obs.mask
        return bits, masks

    def _opponent_round(self, indices) -> None:
        groups: dict[int, list[int]] = {}
        for e in indices:
            key = -1 if self.slots[e].opponent_index is None else self.slots[e].opponent_index
            groups.setdefault(key, []).append(e)
        for key in sorted(groups):
            members = groups[key]
            bits, masks = self._encode_slots(members)
            params = self.slots[members[0]].opponent
            if params is None:
                params = self._learner
            probs, _ = forward(params, bits.astype(np.float32), masks)
            actions = sample_masked_rows(probs, self._rng)
            for row, e in enumerate(members):
                self.slots[e].state = self.slots[e].state.apply(int(actions[row]))

    def _advance_all(self, t, buffer: RolloutBuffer | None, episodes) -> None:
        while True:
            need_opponent = []
            for e, slot in enumerate(self.slots):
                if slot.state.is_terminal:
                    reward = self._terminal_reward(slot)
                    if buffer is not None:
                        buffer.rewards[t, e] = reward
                        buffer.dones[t, e] = True
                    episodes.append(
                        EpisodeResult(
                            record_index=slot.record_index,
                            outcome=slot.state.final_contract(),
                            reward=reward,
                            decisions=slot.decisions,
                            opponent=slot.opponent_index,
                        )
                    )
                    self._reset_slot(slot)
                if seat_side(slot.state.to_act) == 1:
                    need_opponent.append(e)
            if not need_opponent:
                return
            self._opponent_round(need_opponent)

    def collect(self, learner: PolicyValueParams) -> tuple[RolloutBuffer, list[EpisodeResult]]:
        config = self.config
        E, T = config.num_envs, config.rollout_length
        variant = self.variant
        buffer = RolloutBuffer(
            bits=np.empty((T, E, variant.feature_width), dtype=np.uint8),
            masks=np.empty((T, E, variant.action_count), dtype=bool),
            actions=np.empty((T, E), dtype=np.int64),
            log_probs=np.empty((T, E), dtype=np.float32),
            values=np.empty((T, E), dtype=np.float32),
            rewards=np.zeros((T, E), dtype=np.float32),
            dones=np.zeros((T, E), dtype=bool),
            seats=np.empty((T, E), dtype=np.int8),
            bootstrap=np.empty(E, dtype=np.float32),
        )
        episodes: list[EpisodeResult] = []
        self._learner = learner
        all_slots = range(E)
        # Freshly initialized slots may open with an opponent seat as dealer;
        # fresh episodes cannot be terminal, so no rewards can arise here.
        self._advance_all(None, None, episodes)
        for t in range(T):
            bits, masks = self._encode_slots(all_slots)
            probs, values, log_all = forward_with_logs(
                learner, bits.astype(np.float32), masks
            )
            actions = sample_masked_rows(probs, self._rng)
            buffer.bits[t] = bits
            buffer.masks[t] = masks
            buffer.actions[t] = actions
            buffer.log_probs[t] = log_all[np.arange(E), actions]
            buffer.values[t] = values
            for e in range(E):
                slot = self.slots[e]
                buffer.seats[t, e] = slot.state.to_act
                slot.decisions += 1
                slot.state = slot.state.apply(int(actions[e]))
            self._advance_all(t, buffer, episodes)
        bits, masks = self._encode_slots(all_slots)
        _, boot = forward(learner, bits.astype(np.float32), masks)
        buffer.bootstrap = boot.astype(np.float32)
        self._learner = None
        return buffer, episodes


def compute_gae(buffer: RolloutBuffer, gae_lambda: float, discount: float):
    """Advantages and value targets; done flags stop credit at episode ends."""
    T, E = buffer.rewards.shape
    advantages = np.zeros((T, E), dtype=np.float64)
    running = np.zeros(E, dtype=np.float64)
    values = buffer.values.astype(np.float64)
    for t in range(T - 1, -1, -1):
        carry = 1.0 - buffer.dones[t].astype(np.float64)
        next_values = buffer.bootstrap if t == T - 1 else values[t + 1]
        delta = buffer.rewards[t] + discount * next_values * carry - values[t]
        running = delta + discount * gae_lambda * carry * running
        advantages[t] = running
    returns = advantages + values
    return advantages.astype(np.float32), returns.astype(np.float32)


def ppo_update(params, adam: AdamState, buffer: RolloutBuffer, advantages, returns, config: PpoConfig, rng):
    """Clipped-surrogate updates over shuffled minibatches; returns new
    (params, adam, stats) with stats averaged across minibatches."""
    T, E = buffer.rewards.shape
    n = T * E
    flat_bits = buffer.bits.reshape(n, -1)
    flat_masks = buffer.masks.reshape(n, -1)
    flat_actions = buffer.actions.reshape(n)
    flat_logp = buffer.log_probs.reshape(n)
    flat_values = buffer.values.reshape(n)
    flat_adv = advantages.reshape(n)
    flat_ret = returns.reshape(n)

    totals: dict[str, float] = {}
    steps = 0
    for _ in range(config.epochs_per_update):
        order = rng.permutation(n)
        for start in range(0, n, config.minibatch_size):
            idx = order[start : start + config.minibatch_size]
            adv = flat_adv[idx]
            if config.normalize_advantages:
                adv = (adv - adv.mean()) / (adv.std() + 1e-8)
            batch = PpoBatch(
                bits=flat_bits[idx],
                masks=flat_masks[idx],
                actions=flat_actions[idx],
                old_log_probs=flat_logp[idx],
                advantages=adv,
                returns=flat_ret[idx],
                clip_eps=config.clip_ratio,
                value_coef=config.value_coef,
                entropy_coef=config.entropy_coef,
                old_values=flat_values[idx] if config.value_clip is not None else None,
                value_clip=config.value_clip,
            )
            _, grads, stats = loss_and_grad(params, batch)
            params, adam = adam_step(params, grads, adam)
            for key, value in stats.items():
                totals[key] = totals.get(key, 0.0) + value
            steps += 1
    means = {key: value / steps for key, value in totals.items()}
    return params, adam, means


@dataclass
class RlMetrics:
    update: int
    mean_reward: float
    policy_loss: float
    value_loss: float
    entropy: float
    clip_frac: float
    approx_kl: float
    pool_size: int
    wallclock: float


@dataclass
class FspResult:
    checkpoint: Checkpoint
    snapshots: list[tuple[int, PolicyValueParams]]
    metrics: list[RlMetrics]
    feed_wraps: int


def rl_metrics_csv_rows(metrics) -> list[str]:
    rows = ["update,mean_reward,policy_loss,value_loss,entropy,clip_frac,approx_kl,pool_size,wallclock"]
    for m in metrics:
        rows.append(
            f"{m.update},{m.mean_reward:.6f},{m.policy_loss:.6f},{m.value_loss:.6f},"
            f"{m.entropy:.6f},{m.clip_frac:.6f},{m.approx_kl:.6f},{m.pool_size},{m.wallclock:.3f}"
        )
    return rows


def fsp_train(
    records,
    config: PpoConfig,
    fsp: FspConfig,
    *,
    initial: Checkpoint | None = None,
    hidden_width: int = 1024,
    hidden_layers: int = 4,
    on_update=None,
    abort_dump_path=None,
) -> FspResult:
    """The full loop: collect rollouts, estimate advantages, update, snapshot.

    ``initial`` warm-starts from a pretrained checkpoint; otherwise the
    policy starts from random init. With ``fsp.use_pool`` off, opponents are
    the live learner ("latest self") instead of sampled past checkpoints.
    """
    if not records:
        raise DataError("the training dataset is empty")
    variant = records[0].deal.variant
    if initial is not None:
        if initial.params.config.input_width != variant.feature_width:
            raise ConfigError("initial checkpoint does not match the dataset variant")
        params = initial.params.copy()
    else:
        net_config = NetConfig(
            input_width=variant.feature_width,
            policy_width=variant.action_count,
            hidden_width=hidden_width,
            hidden_layers=hidden_layers,
        )
        params = init_params(net_config, config.seed)
    adam = init_adam(params, lr=config.learning_rate, clip_norm=config.grad_clip)
    pool = FspPool(params, label="0")

    def opponent_provider(rng):
        if fsp.use_pool:
            return pool.sample(rng)
        return None, None  # resolved to the live learner inside the engine

    engine = RolloutEngine(records, config, config.seed, opponent_provider)
    update_rng = np.random.default_rng([config.seed & 0xFFFFFFFF, 0x0DD5])

    snapshots = [(0, params.copy())]
    metrics: list[RlMetrics] = []
    start = time.perf_counter()
    try:
        for update in range(1, config.update_steps + 1):
            buffer, episodes = engine.collect(params)
            advantages, returns = compute_gae(buffer, config.gae_lambda, config.discount)
            params, adam, stats = ppo_update(
                params, adam, buffer, advantages, returns, config, update_rng
            )
            if update % fsp.snapshot_every == 0:
                pool.add(str(update), params)
                snapshots.append((update, params.copy()))
            row = RlMetrics(
                update=update,
                mean_reward=float(np.mean([ep.reward for ep in episodes])) if episodes else 0.0,
                policy_loss=stats["policy_loss"],
                value_loss=stats["value_loss"],
                entropy=stats["entropy"],
                clip_frac=stats["clip_frac"],
                approx_kl=stats["approx_kl"],
                pool_size=len(pool) if fsp.use_pool else 1,
                wallclock=time.perf_counter() - start,
            )
            metrics.append(row)
            if on_update is not None:
                on_update(update, row, buffer, episodes)
    except NumericError:
        if abort_dump_path is not None:
            from .neural import store_checkpoint

            dump = Checkpoint(
                params=params,
                provenance={
                    "stage": "rl",
                    "update": len(metrics),
                    "seed": config.seed,
                    "variant": variant.name,
                    "aborted": True,
                },
                adam=adam,
            )
            store_checkpoint(dump, abort_dump_path)
        raise

    checkpoint = Checkpoint(
        params=params,
        provenance={
            "stage": "rl",
            "update": config.update_steps,
            "seed": config.seed,
            "variant": variant.name,
        },
        adam=adam,
    )
    return FspResult(
        checkpoint=checkpoint,
        snapshots=snapshots,
        metrics=metrics,
        feed_wraps=engine.feed.wraps,
    )
