import json

import numpy as np
import pytest

from f2ddpg.checkpoint import load_checkpoint
from f2ddpg.cli import main
from f2ddpg.metrics import evaluate
from f2ddpg.scenarios import make_scenario

SMOKE = """\
scenario = cooperative_navigation
agents = 2
hidden_units = 8,8
batch_size = 8
buffer_capacity = 500
episodes = 2
horizon = 10
eval_every = 1
eval_episodes = 2
checkpoint_every = 1
seed = 3
"""


def write_smoke(tmp_path, extra=""):
    cfg = tmp_path / "smoke.cfg"
    cfg.write_text(SMOKE + extra, encoding="utf-8")
    return cfg


def run_train(tmp_path, name="run", extra="", seed=None):
    cfg = write_smoke(tmp_path, extra)
    out = tmp_path / name
    argv = ["train", "--config", str(cfg), "--out", str(out)]
    if seed is not None:
        argv += ["--seed", str(seed)]
    assert main(argv) == 0
    return out


class TestTrain:
    def test_outputs_written(self, tmp_path):
        out = run_train(tmp_path)
        assert (out / "config.txt").exists()
        assert (out / "rewards.csv").exists()
        assert (out / "diagnostics.jsonl").exists()
        assert (out / "eval.csv").exists()
        assert (out / "checkpoint.bin").exists()
        assert (out / "alignment.csv").exists()

    def test_reward_csv_row_per_episode(self, tmp_path):
        out = run_train(tmp_path)
        rows = (out / "rewards.csv").read_text().strip().splitlines()
        assert rows[0] == "episode,return_agent0,return_agent1"
        assert len(rows) == 3  # header + 2 episodes

    def test_same_seed_byte_identical_rewards(self, tmp_path):
        out1 = run_train(tmp_path, "run1")
        out2 = run_train(tmp_path, "run2")
        assert (out1 / "rewards.csv").read_bytes() == (out2 / "rewards.csv").read_bytes()

    def test_config_echo_written_first_and_round_trips(self, tmp_path):
        out = run_train(tmp_path)
        echo = (out / "config.txt").read_text()
        assert "gamma = 0.95" in echo
        assert "episodes = 2" in echo

    def test_seed_override(self, tmp_path):
        out = run_train(tmp_path, "runs5", seed=5)
        echo = (out / "config.txt").read_text()
        assert "seed = 5" in echo

    def test_diagnostics_records_have_fields(self, tmp_path):
        out = run_train(tmp_path)
        lines = (out / "diagnostics.jsonl").read_text().strip().splitlines()
        assert lines
        rec = json.loads(lines[0])
        assert {"step", "episode", "agent", "variant", "critic_loss",
                "actor_grad_norm", "ally_cosine"} <= set(rec)

    def test_resume_continues_episode_counter(self, tmp_path):
        from f2ddpg.checkpoint import save_checkpoint

        out = run_train(tmp_path, "resume_run")
        ckpt = load_checkpoint(out / "checkpoint.bin")
        assert ckpt.episode == 2
        # raise the target episode count, then resume from the stored counter
        ckpt.config.train.episodes = 4
        extended = tmp_path / "extended.bin"
        save_checkpoint(extended, ckpt)
        out2 = tmp_path / "resumed"
        assert main(["train", "--resume", str(extended), "--out", str(out2)]) == 0
        rows = (out2 / "rewards.csv").read_text().strip().splitlines()
        assert [r.split(",")[0] for r in rows[1:]] == ["2", "3"]
        assert load_checkpoint(out2 / "checkpoint.bin").episode == 4

    def test_missing_config_file(self, tmp_path):
        assert main(["train", "--config", str(tmp_path / "nope.cfg"),
                     "--out", str(tmp_path / "x")]) == 1

    def test_invalid_config_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("gamma = 1.5\n", encoding="utf-8")
        assert main(["train", "--config", str(cfg), "--out", str(tmp_path / "y")]) == 1


class TestEval:
    def test_eval_reproduces_in_training_eval(self, tmp_path):
        out = run_train(tmp_path)
        ckpt = load_checkpoint(out / "checkpoint.bin")
        scenario = make_scenario(ckpt.config.scenario, agents=ckpt.config.agents,
                                 physics=ckpt.config.physics(),
                                 horizon=ckpt.config.train.horizon)
        eval_seed = ckpt.config.train.seed + 10 ** 6
        report = evaluate(ckpt.learners, scenario, 2, eval_seed)

        in_training = {}
        for line in (out / "eval.csv").read_text().strip().splitlines()[1:]:
            parts = line.split(",")
            if int(parts[0]) == 2:  # final eval point
                in_training[int(parts[1])] = [float(parts[2]), float(parts[3])]
        for e in range(2):
            assert np.allclose(in_training[e], report.returns[e], rtol=0, atol=0)

    def test_eval_writes_csv(self, tmp_path):
        out = run_train(tmp_path)
        eval_out = tmp_path / "evalout"
        assert main(["eval", "--checkpoint", str(out / "checkpoint.bin"),
                     "--episodes", "3", "--seed", "1",
                     "--out", str(eval_out)]) == 0
        rows = (eval_out / "eval.csv").read_text().strip().splitlines()
        assert rows[0] == "episode,return_agent0,return_agent1,green_captures"
        assert len(rows) == 4

    def test_trace_export(self, tmp_path):
        out = run_train(tmp_path)
        eval_out = tmp_path / "traceout"
        assert main(["eval", "--checkpoint", str(out / "checkpoint.bin"),
                     "--episodes", "1", "--seed", "1", "--out", str(eval_out),
                     "--trace"]) == 0
        lines = (eval_out / "trace.jsonl").read_text().strip().splitlines()
        assert len(lines) == 10  # horizon steps
        rec = json.loads(lines[0])
        assert "positions" in rec and "biases" in rec

    def test_corrupt_checkpoint_refused(self, tmp_path):
        bad = tmp_path / "bad.bin"
        bad.write_bytes(b"garbage data here")
        assert main(["eval", "--checkpoint", str(bad), "--out", str(tmp_path)]) == 1

    def test_missing_checkpoint(self, tmp_path):
        assert main(["eval", "--checkpoint", str(tmp_path / "none.bin"),
                     "--out", str(tmp_path)]) == 1


class TestInspect:
    def test_inspect_idempotent(self, tmp_path, capsys):
        out = run_train(tmp_path)
        capsys.readouterr()  # drop training output
        assert main(["inspect", "--checkpoint", str(out / "checkpoint.bin")]) == 0
        first = capsys.readouterr().out
        assert main(["inspect", "--checkpoint", str(out / "checkpoint.bin")]) == 0
        second = capsys.readouterr().out
        assert first == second
        assert "episode counter: 2" in first

    def test_parameter_count_printed(self, tmp_path, capsys):
        out = run_train(tmp_path)
        capsys.readouterr()  # drop training output
        main(["inspect", "--checkpoint", str(out / "checkpoint.bin")])
        text = capsys.readouterr().out
        # coop nav with 2 agents: obs 12, hidden (8,8), act 5
        expected = 12 * 8 + 8 + 8 * 8 + 8 + 8 * 5 + 5
        assert f"actor params {expected}" in text

    def test_missing_file_nonzero_exit(self, tmp_path):
        assert main(["inspect", "--checkpoint", str(tmp_path / "none.bin")]) == 1
