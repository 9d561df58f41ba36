"""Predator-prey with heterogeneous trainers and capture statistics.

Predators learn with the friend-or-foe variant while the prey learn plain
MADDPG, mirroring the mixed cooperative-competitive setup. After a short
run, capture stats count episodes where the green prey was caught.

Run: python demos/05_predator_prey_eval.py   (about two minutes)
"""

import numpy as np

from f2ddpg.config import RunConfig
from f2ddpg.marl import BiasVariant, TrainConfig, train, variants_for
from f2ddpg.metrics import capture_stats, evaluate
from f2ddpg.scenarios import make_scenario

cfg = RunConfig()
cfg.scenario = "predator_prey"
cfg.predators = 3
cfg.prey = 1
cfg.variant = BiasVariant.F2DDPG
cfg.opponent_variant = BiasVariant.MADDPG
cfg.hidden_units = (32, 32)
cfg.buffer_capacity = 20_000
cfg.eval_every = 0
cfg.checkpoint_every = 0
cfg.train = TrainConfig(batch_size=32, episodes=500, horizon=25, seed=2,
                        noise_scale=0.3, noise_floor=0.05)

scenario = make_scenario(cfg.scenario, predators=cfg.predators, prey=cfg.prey)
assignment = variants_for(scenario, cfg.variant, cfg.opponent_variant)
print("trainer per agent:", {s.role: v.value for s, v in
                             zip(scenario.agent_specs, assignment)})

print(f"training {cfg.train.episodes} episodes of {cfg.predators} vs {cfg.prey} "
      "predator-prey...")
result = train(cfg)

report = evaluate(result.learners, result.scenario, 50, seed=10 ** 6)
counts = report.green_capture_counts
stats = capture_stats(counts.tolist(), thresholds=(1, 3))
print(f"\ngreedy evaluation over {report.episodes} episodes:")
print(f"  predator mean return: {report.mean_returns[0]:8.2f}")
print(f"  green prey mean return: {report.mean_returns[-1]:8.2f}")
print(f"  total green captures: {int(counts.sum())}")
print(f"  episodes with N_c >= 1: {stats[1]:.1f}%  (raw {int((counts >= 1).sum())}"
      f"/{report.episodes})")
print(f"  episodes with N_c >= 3: {stats[3]:.1f}%  (raw {int((counts >= 3).sum())}"
      f"/{report.episodes})")
