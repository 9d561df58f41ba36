import numpy as np
import pytest

from f2ddpg.marl import make_learners
from f2ddpg.metrics import (EvalReport, SimilaritySample, bias_alignment_series,
                            capture_stats, cosine_similarity, evaluate,
                            rollout_trace)
from f2ddpg.scenarios import make_scenario


class TestCosineSimilarity:
    def test_parallel(self):
        assert cosine_similarity(np.array([1.0, 0.0]), np.array([1.0, 0.0])) == 1.0

    def test_orthogonal(self):
        assert cosine_similarity(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_antiparallel(self):
        assert cosine_similarity(np.array([1.0, 0.0]), np.array([-1.0, 0.0])) == -1.0

    def test_zero_norm_flags_undefined(self):
        assert np.isnan(cosine_similarity(np.zeros(3), np.ones(3)))
        assert np.isnan(cosine_similarity(np.ones(3), np.zeros(3)))

    def test_scale_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            u = rng.normal(size=6)
            v = rng.normal(size=6)
            alpha, beta = rng.uniform(0.1, 10, size=2)
            assert abs(cosine_similarity(alpha * u, beta * v)
                       - cosine_similarity(u, v)) < 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            cosine_similarity(np.zeros(2), np.zeros(3))


class TestCaptureStats:
    def test_hand_counts(self):
        stats = capture_stats([0, 1, 3, 5], thresholds=(1, 3))
        assert stats[1] == 75.0
        assert stats[3] == 50.0

    def test_all_zero(self):
        stats = capture_stats([0, 0, 0], thresholds=(1, 3))
        assert stats == {1: 0.0, 3: 0.0}

    def test_monotone_in_threshold(self):
        rng = np.random.default_rng(1)
        counts = rng.integers(0, 6, size=40).tolist()
        stats = capture_stats(counts, thresholds=range(6))
        values = [stats[t] for t in range(6)]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            capture_stats([])


class TestEvaluate:
    def _learners(self, scenario, seed=0):
        learners, _ = make_learners(scenario, (8, 8), np.random.default_rng(seed))
        return learners

    def test_reproducible_exactly(self):
        scenario = make_scenario("cooperative_navigation", agents=2)
        learners = self._learners(scenario)
        a = evaluate(learners, scenario, episodes=2, seed=5)
        b = evaluate(learners, scenario, episodes=2, seed=5)
        assert np.array_equal(a.returns, b.returns)
        assert np.array_equal(a.green_capture_counts, b.green_capture_counts)

    def test_return_rows_match_episode_count(self):
        scenario = make_scenario("cooperative_navigation", agents=2)
        report = evaluate(self._learners(scenario), scenario, episodes=4, seed=0)
        assert report.returns.shape == (4, 2)
        assert report.mean_returns.shape == (2,)

    def test_zero_policy_below_scripted_placement_oracle(self):
        # agents frozen at random spawns must do worse than agents standing on
        # landmarks for the whole episode
        scenario = make_scenario("cooperative_navigation", agents=3)
        learners = self._learners(scenario)
        for lk in learners:
            for w in lk.actor.weights:
                w[:] = 0.0
            for b in lk.actor.biases:
                b[:] = 0.0
        report = evaluate(learners, scenario, episodes=20, seed=7)
        zero_policy_mean = report.mean_returns.mean()

        # oracle: reward when every landmark has an agent on it, every step
        from f2ddpg.env import reset
        from f2ddpg.scenarios import reward_cooperative_navigation
        rng = np.random.default_rng(7)
        oracle_returns = []
        for _ in range(20):
            world = reset(scenario, rng)
            for agent, lm in zip(world.agents, world.landmarks):
                agent.pos = lm.pos.copy()
            r = reward_cooperative_navigation(world)
            oracle_returns.append(scenario.horizon * float(np.mean(r)))
        assert zero_policy_mean < np.mean(oracle_returns)

    def test_bad_episode_count(self):
        scenario = make_scenario("cooperative_navigation", agents=2)
        with pytest.raises(ValueError):
            evaluate(self._learners(scenario), scenario, episodes=0, seed=0)


class TestBiasAlignmentSeries:
    def test_constant_series(self):
        samples = [(i, 0.5) for i in range(200)]
        series = bias_alignment_series(samples)
        assert len(series) == 100
        assert all(row["mean_cosine"] == 0.5 for row in series)

    def test_alternating_signs_average_zero(self):
        samples = [(i, 1.0 if i % 2 == 0 else -1.0) for i in range(400)]
        series = bias_alignment_series(samples)
        assert all(abs(row["mean_cosine"]) < 1e-15 for row in series)

    def test_windows_partition_without_overlap(self):
        samples = [(i, 0.1) for i in range(503)]
        series = bias_alignment_series(samples)
        starts = [row["start_step"] for row in series]
        ends = [row["end_step"] for row in series]
        assert starts[0] == 0 and ends[-1] == 502
        for prev_end, nxt_start in zip(ends, starts[1:]):
            assert nxt_start == prev_end + 1

    def test_undefined_samples_excluded(self):
        samples = [(0, np.nan), (1, 0.4), (2, np.nan), (3, 0.6)]
        series = bias_alignment_series(samples, n_windows=1)
        assert series[0]["mean_cosine"] == 0.5
        assert series[0]["samples"] == 2

    def test_all_undefined_window_is_gap(self):
        samples = [(0, np.nan), (1, np.nan)]
        series = bias_alignment_series(samples, n_windows=1)
        assert np.isnan(series[0]["mean_cosine"])

    def test_accepts_similarity_samples(self):
        samples = [SimilaritySample(step=i, cosine=0.25) for i in range(10)]
        series = bias_alignment_series(samples, n_windows=2)
        assert all(row["mean_cosine"] == 0.25 for row in series)

    def test_from_blocks_constructor(self):
        s = SimilaritySample.from_blocks(3, np.array([1.0, 0.0]), np.array([0.0, 2.0]))
        assert s.step == 3
        assert s.cosine == 0.0


class TestRolloutTrace:
    def test_record_fields_and_count(self):
        scenario = make_scenario("cooperative_navigation", agents=2, horizon=5)
        learners, _ = make_learners(scenario, (8, 8), np.random.default_rng(0))
        records = rollout_trace(learners, scenario, episodes=2, seed=9)
        assert len(records) == 10
        rec = records[0]
        assert set(rec) == {"episode", "timestep", "positions", "velocities",
                            "actions", "rewards"}
        assert len(rec["positions"]) == 2

    def test_bias_fn_included(self):
        scenario = make_scenario("cooperative_navigation", agents=2, horizon=2)
        learners, _ = make_learners(scenario, (8, 8), np.random.default_rng(0))
        records = rollout_trace(learners, scenario, episodes=1, seed=9,
                                bias_fn=lambda obs, acts: {"0": [a.tolist() for a in acts]})
        assert "biases" in records[0]
