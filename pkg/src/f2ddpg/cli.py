"""Experiment front door: train / eval / inspect subcommands.

Every run directory is self-describing: the config echo is written before
anything else, rewards stream to CSV one row per episode, per-update
diagnostics to JSONL, and checkpoints are replaced atomically.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import marl, metrics
from .checkpoint import Checkpoint, CheckpointError, load_checkpoint, restore_rng, save_checkpoint
from .config import ConfigError, RunConfig, parse_config, serialize_config
from .scenarios import make_scenario


def _read_config(path) -> RunConfig:
    if path is None:
        return parse_config("")
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _bias_fn(cfg: RunConfig, learners, scenario):
    """Per-step bias vectors (biased minus actual actions) for trace export."""
    team = marl.TeamSpec.from_teams(scenario.teams(), scenario.n_agents)
    variants = marl.variants_for(scenario, cfg.variant, cfg.opponent_variant)
    rng = np.random.default_rng(0)

    def fn(obs_list, act_list):
        out = {}
        for i, variant in enumerate(variants):
            if variant is marl.BiasVariant.MADDPG:
                continue
            biased = marl.bias_joint_actions(learners[i].critic, obs_list, act_list,
                                             i, team, variant, cfg.bias, rng)
            out[str(i)] = [(b - a).tolist() for b, a in zip(biased, act_list)]
        return out

    return fn


def cmd_train(args) -> int:
    if args.resume is not None:
        ckpt = load_checkpoint(args.resume)
        cfg = ckpt.config
        learners = ckpt.learners
        start_episode = ckpt.episode
        rng = restore_rng(ckpt.rng_state)
    else:
        cfg = _read_config(args.config)
        if args.seed is not None:
            cfg.train.seed = args.seed
        learners = None
        start_episode = 0
        rng = None

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(serialize_config(cfg), encoding="utf-8")

    n_agents = make_scenario(cfg.scenario, agents=cfg.agents, predators=cfg.predators,
                             prey=cfg.prey, horizon=cfg.train.horizon).n_agents
    reward_cols = ",".join(f"return_agent{i}" for i in range(n_agents))
    mode = "a" if args.resume is not None and (out / "rewards.csv").exists() else "w"
    rewards_fh = open(out / "rewards.csv", mode, encoding="utf-8")
    if mode == "w":
        rewards_fh.write(f"episode,{reward_cols}\n")
    diag_fh = open(out / "diagnostics.jsonl", mode, encoding="utf-8")
    eval_fh = open(out / "eval.csv", mode, encoding="utf-8")
    if mode == "w":
        eval_fh.write(f"train_episode,eval_episode,{reward_cols},green_captures\n")

    def episode_sink(ep, returns):
        rewards_fh.write(f"{ep}," + ",".join(repr(float(r)) for r in returns) + "\n")

    def diag_sink(rec):
        diag_fh.write(json.dumps(rec) + "\n")

    def eval_sink(ep, report):
        for e in range(report.episodes):
            row = [str(ep), str(e)] + [repr(float(r)) for r in report.returns[e]]
            row.append(str(int(report.green_capture_counts[e])))
            eval_fh.write(",".join(row) + "\n")
        means = ", ".join(f"{m:.3f}" for m in report.mean_returns)
        print(f"[eval] episode {ep}: mean returns {means}")

    def checkpoint_sink(ep, lks, train_rng):
        save_checkpoint(out / "checkpoint.bin", Checkpoint(
            config=cfg, episode=ep, rng_state=train_rng.bit_generator.state,
            learners=lks))

    try:
        result = marl.train(cfg, learners=learners, start_episode=start_episode,
                            rng=rng, episode_sink=episode_sink, eval_sink=eval_sink,
                            checkpoint_sink=checkpoint_sink, diag_sink=diag_sink)
    finally:
        rewards_fh.close()
        diag_fh.close()
        eval_fh.close()

    _write_alignment(out)
    if cfg.trace_episodes > 0:
        records = metrics.rollout_trace(
            result.learners, result.scenario, cfg.trace_episodes,
            seed=cfg.train.seed + 2 * 10 ** 6,
            bias_fn=_bias_fn(cfg, result.learners, result.scenario))
        metrics.write_trace_jsonl(out / "trace.jsonl", records)
    print(f"trained {result.episodes_done} episodes; outputs in {out}")
    return 0


def _write_alignment(out: Path) -> None:
    """Windowed ally-cosine series from the streamed diagnostics."""
    pairs = []
    with open(out / "diagnostics.jsonl", encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            pairs.append((rec["step"], rec["ally_cosine"]
                          if rec["ally_cosine"] is not None else float("nan")))
    if pairs:
        metrics.write_alignment_csv(out / "alignment.csv",
                                    metrics.bias_alignment_series(pairs))


def cmd_eval(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    cfg = ckpt.config
    scenario = make_scenario(cfg.scenario, agents=cfg.agents, predators=cfg.predators,
                             prey=cfg.prey, physics=cfg.physics(),
                             horizon=cfg.train.horizon)
    report = metrics.evaluate(ckpt.learners, scenario, args.episodes, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    metrics.write_eval_csv(out / "eval.csv", report)
    means = ", ".join(f"{m:.3f}" for m in report.mean_returns)
    stds = ", ".join(f"{s:.3f}" for s in report.std_returns)
    print(f"scenario: {cfg.scenario}")
    print(f"episodes: {report.episodes} (seed {report.seed})")
    print(f"mean returns: {means}")
    print(f"std returns: {stds}")
    if cfg.scenario == "predator_prey":
        fractions = report.capture_fractions((1, 3))
        counts = report.green_capture_counts
        print(f"green captures: total {int(counts.sum())}, "
              f"episodes with >=1: {fractions[1]:.1f}%, >=3: {fractions[3]:.1f}%")
    if args.trace:
        records = metrics.rollout_trace(ckpt.learners, scenario, args.episodes,
                                        args.seed,
                                        bias_fn=_bias_fn(cfg, ckpt.learners, scenario))
        metrics.write_trace_jsonl(out / "trace.jsonl", records)
    return 0


def cmd_inspect(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    print(f"checkpoint: {args.checkpoint}")
    print(f"episode counter: {ckpt.episode}")
    print(f"agents: {len(ckpt.learners)}")
    for i, lk in enumerate(ckpt.learners):
        print(f"  agent {i}: actor params {lk.actor.num_params()} "
              f"(dims {'x'.join(str(d) for d in lk.actor.layer_dims())}), "
              f"critic params {lk.critic.num_params()} "
              f"(dims {'x'.join(str(d) for d in lk.critic.layer_dims())}), "
              f"adam steps actor={lk.actor_opt.step} critic={lk.critic_opt.step}, "
              f"noise {lk.noise_scale:.4f}")
    print("config echo:")
    for line in serialize_config(ckpt.config).rstrip("\n").splitlines():
        print(f"  {line}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="f2ddpg",
        description="Friend-or-foe multi-agent DDPG experiment harness.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run a training experiment")
    p_train.add_argument("--config", default=None, help="key=value config file "
                         "(omit for published defaults)")
    p_train.add_argument("--seed", type=int, default=None, help="override config seed")
    p_train.add_argument("--out", required=True, help="output directory")
    p_train.add_argument("--resume", default=None,
                         help="checkpoint to continue from (uses its config/seed)")
    p_train.set_defaults(fn=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint without noise")
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--episodes", type=int, default=100)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--out", default=".")
    p_eval.add_argument("--trace", action="store_true",
                        help="also export episode traces with bias vectors")
    p_eval.set_defaults(fn=cmd_eval)

    p_inspect = sub.add_parser("inspect", help="summarize a checkpoint")
    p_inspect.add_argument("--checkpoint", required=True)
    p_inspect.set_defaults(fn=cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
