"""Rollout engine, GAE, PPO update, and self-play loop tests."""

import numpy as np
import pytest

from bridgebid.auction import PASSED_OUT
from bridgebid.dds import tabulate
from bridgebid.deals import GameVariant, generate_deal
from bridgebid.errors import ConfigError, DataError, NumericError
from bridgebid.neural import (
    Checkpoint,
    NetConfig,
    forward,
    init_adam,
    init_params,
    param_list,
)
from bridgebid.scoring import normalized_reward
from bridgebid.train_rl import (
    DealFeed,
    FspConfig,
    FspPool,
    PpoConfig,
    RolloutBuffer,
    RolloutEngine,
    compute_gae,
    fsp_train,
    ppo_update,
    rl_metrics_csv_rows,
    sample_masked_rows,
)

V4 = GameVariant.of(4)


@pytest.fixture(scope="module")
def dds_records():
    return [tabulate(generate_deal(21, V4, board)) for board in range(1, 25)]


def tiny_net(variant, seed=0, hidden=8):
    config = NetConfig(
        input_width=variant.feature_width,
        policy_width=variant.action_count,
        hidden_width=hidden,
        hidden_layers=1,
    )
    return init_params(config, seed)


def make_pool(variant, entries=3):
    pool = FspPool(tiny_net(variant, seed=50))
    for k in range(1, entries):
        pool.add(str(k), tiny_net(variant, seed=50 + k))
    return pool


def reference_gae(rewards, values, dones, bootstrap, lam, gamma):
    """Direct summation of the discounted-delta series, cut at done flags."""
    T, E = rewards.shape
    advantages = np.zeros((T, E))
    for e in range(E):
        for t in range(T):
            total, coef = 0.0, 1.0
            for step in range(t, T):
                cont = 0.0 if dones[step, e] else 1.0
                next_v = bootstrap[e] if step == T - 1 else values[step + 1, e]
                delta = rewards[step, e] + gamma * next_v * cont - values[step, e]
                total += coef * delta
                if dones[step, e]:
                    break
                coef *= gamma * lam
            advantages[t, e] = total
    return advantages


def random_buffer(rng, T=7, E=3):
    rewards = np.zeros((T, E), dtype=np.float32)
    dones = rng.random((T, E)) < 0.3
    rewards[dones] = rng.normal(size=int(dones.sum())).astype(np.float32)
    return RolloutBuffer(
        bits=np.zeros((T, E, 1), dtype=np.uint8),
        masks=np.ones((T, E, 1), dtype=bool),
        actions=np.zeros((T, E), dtype=np.int64),
        log_probs=np.zeros((T, E), dtype=np.float32),
        values=rng.normal(size=(T, E)).astype(np.float32),
        rewards=rewards,
        dones=dones,
        seats=np.zeros((T, E), dtype=np.int8),
        bootstrap=rng.normal(size=E).astype(np.float32),
    )


class TestGae:
    def test_matches_direct_summation(self):
        rng = np.random.default_rng(3)
        for trial in range(10):
            buffer = random_buffer(rng)
            for lam, gamma in ((0.95, 1.0), (0.5, 0.9), (0.7, 0.99)):
                got, returns = compute_gae(buffer, lam, gamma)
                want = reference_gae(
                    buffer.rewards,
                    buffer.values.astype(np.float64),
                    buffer.dones,
                    buffer.bootstrap,
                    lam,
                    gamma,
                )
                assert np.abs(got - want).max() < 1e-6
                assert np.abs(returns - (want + buffer.values)).max() < 1e-6

    def test_lambda_zero_is_one_step_td(self):
        buffer = random_buffer(np.random.default_rng(5))
        advantages, _ = compute_gae(buffer, 0.0, 1.0)
        T, E = buffer.rewards.shape
        for e in range(E):
            for t in range(T):
                cont = 0.0 if buffer.dones[t, e] else 1.0
                next_v = buffer.bootstrap[e] if t == T - 1 else buffer.values[t + 1, e]
                delta = buffer.rewards[t, e] + next_v * cont - buffer.values[t, e]
                assert advantages[t, e] == pytest.approx(delta, abs=1e-6)

    def test_lambda_one_is_monte_carlo(self):
        # Episodes end with the only nonzero reward; A_t must be z - V(s_t).
        T, E = 6, 2
        values = np.arange(T * E, dtype=np.float32).reshape(T, E) / 10.0
        rewards = np.zeros((T, E), dtype=np.float32)
        dones = np.zeros((T, E), dtype=bool)
        dones[2, 0] = dones[5, 0] = dones[4, 1] = True
        rewards[2, 0], rewards[5, 0], rewards[4, 1] = 0.5, -0.25, 0.75
        buffer = RolloutBuffer(
            bits=np.zeros((T, E, 1), dtype=np.uint8),
            masks=np.ones((T, E, 1), dtype=bool),
            actions=np.zeros((T, E), dtype=np.int64),
            log_probs=np.zeros((T, E), dtype=np.float32),
            values=values,
            rewards=rewards,
            dones=dones,
            seats=np.zeros((T, E), dtype=np.int8),
            bootstrap=np.zeros(E, dtype=np.float32),
        )
        advantages, _ = compute_gae(buffer, 1.0, 1.0)
        for t in range(3):
            assert advantages[t, 0] == pytest.approx(0.5 - values[t, 0], abs=1e-6)
        for t in range(3, 6):
            assert advantages[t, 0] == pytest.approx(-0.25 - values[t, 0], abs=1e-6)
        for t in range(5):
            assert advantages[t, 1] == pytest.approx(0.75 - values[t, 1], abs=1e-6)


class TestSampling:
    def test_samples_respect_zero_probabilities(self):
        rng = np.random.default_rng(0)
        probs = np.array([[0.0, 0.7, 0.0, 0.3], [0.5, 0.0, 0.5, 0.0]])
        draws = np.array([sample_masked_rows(probs, rng) for _ in range(500)])
        assert set(np.unique(draws[:, 0])) <= {1, 3}
        assert set(np.unique(draws[:, 1])) <= {0, 2}

    def test_frequencies_track_probabilities(self):
        rng = np.random.default_rng(1)
        probs = np.tile(np.array([[0.1, 0.2, 0.3, 0.4]]), (2000, 1))
        draws = sample_masked_rows(probs, rng)
        freq = np.bincount(draws, minlength=4) / len(draws)
        assert np.abs(freq - [0.1, 0.2, 0.3, 0.4]).max() < 0.05

    def test_single_legal_action_is_forced(self):
        rng = np.random.default_rng(2)
        probs = np.array([[0.0, 1.0, 0.0]])
        assert sample_masked_rows(probs, rng)[0] == 1

    def test_pool_sampling_is_uniform(self):
        variant = V4
        pool = make_pool(variant, entries=5)
        rng = np.random.default_rng(7)
        n = 10_000
        counts = np.zeros(5)
        for _ in range(n):
            index, _ = pool.sample(rng)
            counts[index] += 1
        sigma = np.sqrt(n * 0.2 * 0.8)
        assert np.abs(counts - n * 0.2).max() < 5 * sigma


class TestDealFeed:
    def test_wraps_with_reshuffle(self, dds_records):
        feed = DealFeed(dds_records[:5], seed=3)
        first = [feed.next()[0] for _ in range(5)]
        assert sorted(first) == list(range(5))
        assert feed.wraps == 0
        second = [feed.next()[0] for _ in range(5)]
        assert sorted(second) == list(range(5))
        assert feed.wraps == 1

    def test_empty_dataset_rejected(self):
        with pytest.raises(DataError, match="empty"):
            DealFeed([], seed=0)


class TestRolloutEngine:
    def make_engine(self, records, num_envs=6, rollout=8, seed=11, pool=None):
        config = PpoConfig(
            num_envs=num_envs,
            rollout_length=rollout,
            minibatch_size=16,
            update_steps=1,
            seed=seed,
        )
        pool = pool or make_pool(V4)
        return RolloutEngine(records, config, seed, pool.sample), config

    def test_buffer_shape_and_mask_coherence(self, dds_records):
        engine, config = self.make_engine(dds_records)
        learner = tiny_net(V4, seed=1)
        buffer, episodes = engine.collect(learner)
        T, E = config.rollout_length, config.num_envs
        assert buffer.bits.shape == (T, E, V4.feature_width)
        assert buffer.actions.shape == (T, E)
        for t in range(T):
            for e in range(E):
                assert buffer.masks[t, e, buffer.actions[t, e]]
        assert len(episodes) > 0

    def test_learner_occupies_north_south_only(self, dds_records):
        engine, _ = self.make_engine(dds_records)
        buffer, _ = engine.collect(tiny_net(V4, seed=1))
        assert set(np.unique(buffer.seats)) <= {0, 2}

    def test_rewards_only_at_episode_ends(self, dds_records):
        engine, _ = self.make_engine(dds_records, num_envs=8, rollout=16)
        buffer, _ = engine.collect(tiny_net(V4, seed=2))
        nonterminal = buffer.rewards[~buffer.dones]
        assert np.all(nonterminal == 0.0)
        assert np.abs(buffer.rewards).max() <= 1.0

    def test_terminal_rewards_recompute_from_tables(self, dds_records):
        engine, _ = self.make_engine(dds_records, num_envs=8, rollout=16)
        _, episodes = engine.collect(tiny_net(V4, seed=3))
        assert episodes
        for ep in episodes:
            record = dds_records[ep.record_index]
            if ep.outcome is PASSED_OUT:
                assert ep.reward == 0.0
                continue
            tricks = record.table.entry(ep.outcome.declarer, ep.outcome.strain)
            expected = normalized_reward(
                V4, ep.outcome, tricks, record.deal.vulnerability, side=0
            )
            assert ep.reward == pytest.approx(expected, abs=1e-9)
            assert ep.decisions >= 2

    def test_episodes_draw_fresh_deals_and_opponents(self, dds_records):
        pool = make_pool(V4, entries=4)
        engine, _ = self.make_engine(dds_records, num_envs=8, rollout=24, pool=pool)
        _, episodes = engine.collect(tiny_net(V4, seed=4))
        assert len({ep.record_index for ep in episodes}) > 3
        assert len({ep.opponent for ep in episodes}) > 1

    def test_collect_is_deterministic(self, dds_records):
        learner = tiny_net(V4, seed=5)

        def run():
            engine, _ = self.make_engine(dds_records, seed=13)
            buffer, episodes = engine.collect(learner)
            return buffer, [ep.reward for ep in episodes]

        buf_a, rewards_a = run()
        buf_b, rewards_b = run()
        assert rewards_a == rewards_b
        assert np.array_equal(buf_a.actions, buf_b.actions)
        assert np.array_equal(buf_a.log_probs, buf_b.log_probs)


class TestPpoUpdate:
    def test_zero_advantages_fresh_buffer(self, dds_records):
        config = PpoConfig(
            num_envs=4,
            rollout_length=8,
            minibatch_size=4 * 8,
            epochs_per_update=1,
            learning_rate=1e-3,
            update_steps=1,
            seed=2,
        )
        pool = make_pool(V4)
        engine = RolloutEngine(dds_records, config, 2, pool.sample)
        learner = tiny_net(V4, seed=6)
        buffer, _ = engine.collect(learner)
        adam = init_adam(learner, lr=config.learning_rate)
        advantages = np.zeros_like(buffer.rewards)
        returns = buffer.values.copy()
        _, _, stats = ppo_update(
            learner, adam, buffer, advantages, returns,
            config, np.random.default_rng(0),
        )
        assert stats["policy_loss"] == 0.0
        assert stats["clip_frac"] == 0.0

    def test_rewarded_action_gains_probability(self, dds_records):
        learner = tiny_net(V4, seed=7)
        config = PpoConfig(
            num_envs=2,
            rollout_length=4,
            minibatch_size=8,
            epochs_per_update=4,
            learning_rate=5e-3,
            update_steps=1,
            seed=3,
            normalize_advantages=False,
            value_clip=None,
        )
        pool = make_pool(V4)
        engine = RolloutEngine(dds_records, config, 3, pool.sample)
        buffer, _ = engine.collect(learner)
        # reward the recorded action at (0, 0), punish the one at (0, 1)
        advantages = np.zeros_like(buffer.rewards)
        advantages[0, 0] = 1.0
        advantages[0, 1] = -1.0
        returns = buffer.values.copy()
        before_up, _ = forward(learner, buffer.bits[0, 0], buffer.masks[0, 0])
        before_down, _ = forward(learner, buffer.bits[0, 1], buffer.masks[0, 1])
        new_params, _, _ = ppo_update(
            learner, init_adam(learner, lr=config.learning_rate),
            buffer, advantages, returns, config, np.random.default_rng(1),
        )
        after_up, _ = forward(new_params, buffer.bits[0, 0], buffer.masks[0, 0])
        after_down, _ = forward(new_params, buffer.bits[0, 1], buffer.masks[0, 1])
        assert after_up[buffer.actions[0, 0]] > before_up[buffer.actions[0, 0]]
        assert after_down[buffer.actions[0, 1]] < before_down[buffer.actions[0, 1]]


class TestFspTrain:
    def small_config(self, updates=3, seed=9, **overrides):
        defaults = dict(
            num_envs=4,
            rollout_length=8,
            minibatch_size=16,
            epochs_per_update=2,
            learning_rate=1e-3,
            update_steps=updates,
            seed=seed,
        )
        defaults.update(overrides)
        return PpoConfig(**defaults)

    def test_metrics_pool_growth_and_snapshots(self, dds_records):
        config = self.small_config(updates=5)
        result = fsp_train(
            dds_records, config, FspConfig(snapshot_every=2),
            hidden_width=8, hidden_layers=1,
        )
        assert [m.update for m in result.metrics] == [1, 2, 3, 4, 5]
        assert result.metrics[-1].pool_size == 3  # init + updates 2 and 4
        assert [label for label, _ in result.snapshots] == [0, 2, 4]
        assert result.checkpoint.provenance["stage"] == "rl"
        rows = rl_metrics_csv_rows(result.metrics)
        assert rows[0].startswith("update,mean_reward,")
        assert len(rows) == 6

    def test_runs_are_deterministic(self, dds_records):
        def run():
            result = fsp_train(
                dds_records,
                self.small_config(updates=3, seed=17),
                FspConfig(snapshot_every=2),
                hidden_width=8,
                hidden_layers=1,
            )
            stats = [(m.mean_reward, m.policy_loss, m.entropy) for m in result.metrics]
            return stats, param_list(result.checkpoint.params)

        stats_a, params_a = run()
        stats_b, params_b = run()
        assert stats_a == stats_b
        assert all(np.array_equal(x, y) for x, y in zip(params_a, params_b))

    def test_reward_placement_invariant_on_logged_buffers(self, dds_records):
        seen = []

        def hook(update, row, buffer, episodes):
            nonterminal = buffer.rewards[~buffer.dones]
            assert np.all(nonterminal == 0.0)
            assert np.abs(buffer.rewards).max() <= 1.0
            T, E = buffer.actions.shape
            for t in range(T):
                for e in range(E):
                    assert buffer.masks[t, e, buffer.actions[t, e]]
            seen.append(update)

        fsp_train(
            dds_records,
            self.small_config(updates=2),
            FspConfig(snapshot_every=10),
            hidden_width=8,
            hidden_layers=1,
            on_update=hook,
        )
        assert seen == [1, 2]

    def test_no_fsp_mode_uses_live_learner(self, dds_records):
        opponents = set()

        def hook(update, row, buffer, episodes):
            opponents.update(ep.opponent for ep in episodes)

        result = fsp_train(
            dds_records,
            self.small_config(updates=2),
            FspConfig(snapshot_every=1, use_pool=False),
            hidden_width=8,
            hidden_layers=1,
            on_update=hook,
        )
        assert opponents == {None}
        assert result.metrics[-1].pool_size == 1

    def test_warm_start_from_checkpoint(self, dds_records):
        params = tiny_net(V4, seed=30)
        initial = Checkpoint(params=params, provenance={"stage": "sl"})
        result = fsp_train(
            dds_records,
            self.small_config(updates=1),
            FspConfig(),
            initial=initial,
        )
        assert result.checkpoint.params.config == params.config

    def test_variant_mismatch_rejected(self, dds_records):
        wrong = tiny_net(GameVariant.of(5), seed=0)
        with pytest.raises(ConfigError, match="variant"):
            fsp_train(
                dds_records,
                self.small_config(updates=1),
                FspConfig(),
                initial=Checkpoint(params=wrong, provenance={}),
            )

    def test_dataset_wraps_are_counted(self, dds_records):
        result = fsp_train(
            dds_records[:4],
            self.small_config(updates=2),
            FspConfig(),
            hidden_width=8,
            hidden_layers=1,
        )
        assert result.feed_wraps > 0

    def test_non_finite_loss_aborts_with_dump(self, dds_records, tmp_path):
        params = tiny_net(V4, seed=31)
        broken = param_list(params)
        broken[0][:] = np.float32(3e38)  # overflows to inf in the matmul
        initial = Checkpoint(params=params, provenance={"stage": "sl"})
        dump = tmp_path / "abort.ckpt"
        with pytest.raises(NumericError):
            with np.errstate(all="ignore"):
                fsp_train(
                    dds_records,
                    self.small_config(updates=1),
                    FspConfig(),
                    initial=initial,
                    abort_dump_path=dump,
                )
        assert dump.exists()
