import numpy as np
import pytest

from f2ddpg.replay import Minibatch, ReplayBuffer, Transition


def make_transition(tag: float, obs_dims=(3, 2), act_dims=(2, 2)):
    return Transition(
        obs=[np.full(d, tag) for d in obs_dims],
        actions=[np.full(d, tag + 0.5) for d in act_dims],
        rewards=np.array([tag, -tag]),
        next_obs=[np.full(d, tag + 1) for d in obs_dims],
    )


def make_buffer(capacity=8):
    return ReplayBuffer(capacity, obs_dims=[3, 2], act_dims=[2, 2])


class TestPush:
    def test_occupancy_grows_then_saturates(self):
        buf = make_buffer(capacity=2)
        assert len(buf) == 0
        buf.push(make_transition(1.0))
        assert len(buf) == 1
        buf.push(make_transition(2.0))
        buf.push(make_transition(3.0))
        assert len(buf) == 2

    def test_fifo_eviction_order(self):
        buf = make_buffer(capacity=2)
        for tag in (1.0, 2.0, 3.0):
            buf.push(make_transition(tag))
        obs0, _, _, _ = buf.stored(0)
        obs1, _, _, _ = buf.stored(1)
        assert obs0[0] == 2.0 and obs1[0] == 3.0

    def test_layout_mismatch_rejected(self):
        buf = make_buffer()
        bad = make_transition(1.0, obs_dims=(3, 3))
        with pytest.raises(ValueError):
            buf.push(bad)

    def test_round_trip_exact(self):
        buf = make_buffer()
        t = make_transition(0.25)
        buf.push(t)
        obs, act, rew, nxt = buf.stored(0)
        assert np.array_equal(obs, np.concatenate(t.obs))
        assert np.array_equal(act, np.concatenate(t.actions))
        assert np.array_equal(rew, t.rewards)
        assert np.array_equal(nxt, np.concatenate(t.next_obs))


class TestSample:
    def test_not_ready_signal(self):
        buf = make_buffer()
        buf.push(make_transition(1.0))
        assert not buf.ready(2)
        with pytest.raises(ValueError):
            buf.sample(2, np.random.default_rng(0))

    def test_single_item_forced(self):
        buf = make_buffer()
        buf.push(make_transition(4.0))
        mb = buf.sample(1, np.random.default_rng(0))
        assert isinstance(mb, Minibatch)
        assert mb.obs.shape[0] == 1
        assert mb.obs[0, 0] == 4.0

    def test_same_rng_state_identical_batch(self):
        buf = make_buffer()
        for tag in range(6):
            buf.push(make_transition(float(tag)))
        a = buf.sample(4, np.random.default_rng(11))
        b = buf.sample(4, np.random.default_rng(11))
        assert np.array_equal(a.indices, b.indices)
        assert np.array_equal(a.obs, b.obs)

    def test_sampling_does_not_mutate_storage(self):
        buf = make_buffer()
        for tag in range(5):
            buf.push(make_transition(float(tag)))
        before = [tuple(arr.copy() for arr in buf.stored(i)) for i in range(5)]
        mb = buf.sample(3, np.random.default_rng(3))
        mb.obs[:] = -999.0
        for i, snapshot in enumerate(before):
            for got, want in zip(buf.stored(i), snapshot):
                assert np.array_equal(got, want)

    def test_uniformity_within_five_sigma(self):
        # 1e5 draws over a 10-item buffer: each index within 5 sigma of 1e4
        buf = ReplayBuffer(16, obs_dims=[1], act_dims=[1])
        for tag in range(10):
            buf.push(Transition(obs=[np.array([float(tag)])],
                                actions=[np.array([0.0])],
                                rewards=np.array([0.0]),
                                next_obs=[np.array([0.0])]))
        rng = np.random.default_rng(2024)
        draws = 100_000
        counts = np.zeros(10)
        for _ in range(draws // 10):
            mb = buf.sample(10, rng)
            counts += np.bincount(mb.indices, minlength=10)
        expected = draws / 10
        sigma = np.sqrt(draws * 0.1 * 0.9)
        assert np.all(np.abs(counts - expected) < 5 * sigma)
