import struct

import numpy as np
import pytest

from f2ddpg.checkpoint import (MAGIC, VERSION, Checkpoint, CheckpointError,
                               load_checkpoint, restore_rng, save_checkpoint)
from f2ddpg.config import RunConfig, parse_config
from f2ddpg.marl import TrainConfig, make_learners
from f2ddpg.scenarios import make_scenario


def sample_checkpoint(seed=0) -> Checkpoint:
    cfg = parse_config("scenario = cooperative_navigation\nagents = 2\n"
                       "hidden_units = 8,8\nepisodes = 10\n")
    scenario = make_scenario(cfg.scenario, agents=cfg.agents)
    rng = np.random.default_rng(seed)
    learners, _ = make_learners(scenario, cfg.hidden_units, rng)
    learners[0].actor_opt.step = 42
    learners[0].noise_scale = 0.123
    rng.normal(size=100)  # advance the stream so the state is nontrivial
    return Checkpoint(config=cfg, episode=7, rng_state=rng.bit_generator.state,
                      learners=learners)


class TestRoundTrip:
    def test_save_load_save_byte_identical(self, tmp_path):
        ckpt = sample_checkpoint()
        p1 = tmp_path / "a.bin"
        p2 = tmp_path / "b.bin"
        save_checkpoint(p1, ckpt)
        loaded = load_checkpoint(p1)
        save_checkpoint(p2, loaded)
        assert p1.read_bytes() == p2.read_bytes()

    def test_fields_survive(self, tmp_path):
        ckpt = sample_checkpoint()
        path = tmp_path / "c.bin"
        save_checkpoint(path, ckpt)
        loaded = load_checkpoint(path)
        assert loaded.episode == 7
        assert loaded.config == ckpt.config
        assert loaded.learners[0].actor_opt.step == 42
        assert loaded.learners[0].noise_scale == 0.123
        for a, b in zip(ckpt.learners, loaded.learners):
            for w0, w1 in zip(a.actor.weights, b.actor.weights):
                assert np.array_equal(w0, w1)
            for m0, m1 in zip(a.critic_opt.v_weights, b.critic_opt.v_weights):
                assert np.array_equal(m0, m1)

    def test_rng_state_resumes_stream(self, tmp_path):
        ckpt = sample_checkpoint(seed=3)
        path = tmp_path / "d.bin"
        save_checkpoint(path, ckpt)
        rng_a = restore_rng(load_checkpoint(path).rng_state)
        rng_b = restore_rng(ckpt.rng_state)
        assert np.array_equal(rng_a.normal(size=10), rng_b.normal(size=10))


class TestRefusals:
    def test_corrupt_magic(self, tmp_path):
        ckpt = sample_checkpoint()
        path = tmp_path / "e.bin"
        save_checkpoint(path, ckpt)
        data = bytearray(path.read_bytes())
        data[:4] = b"NOPE"
        path.write_bytes(bytes(data))
        with pytest.raises(CheckpointError, match="magic"):
            load_checkpoint(path)

    def test_version_mismatch_names_both_versions(self, tmp_path):
        ckpt = sample_checkpoint()
        path = tmp_path / "f.bin"
        save_checkpoint(path, ckpt)
        data = bytearray(path.read_bytes())
        data[len(MAGIC):len(MAGIC) + 4] = struct.pack("<I", VERSION + 9)
        path.write_bytes(bytes(data))
        with pytest.raises(CheckpointError) as err:
            load_checkpoint(path)
        assert str(VERSION + 9) in str(err.value)
        assert str(VERSION) in str(err.value)

    def test_truncated_file(self, tmp_path):
        ckpt = sample_checkpoint()
        path = tmp_path / "g.bin"
        save_checkpoint(path, ckpt)
        path.write_bytes(path.read_bytes()[:50])
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_checkpoint(tmp_path / "absent.bin")
