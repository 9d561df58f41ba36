"""Small cooperative-navigation training run through the library API.

Trains two agents for a few hundred episodes, then compares the greedy
policies against frozen (zero-weight) actors on the same evaluation seeds.

Run: python demos/04_smoke_training.py   (about a minute)
"""

import numpy as np

from f2ddpg.config import RunConfig
from f2ddpg.marl import BiasVariant, TrainConfig, make_learners, train
from f2ddpg.metrics import evaluate

cfg = RunConfig()
cfg.scenario = "cooperative_navigation"
cfg.agents = 2
cfg.variant = BiasVariant.F2DDPG
cfg.hidden_units = (32, 32)
cfg.buffer_capacity = 20_000
cfg.eval_every = 0
cfg.checkpoint_every = 0
cfg.train = TrainConfig(batch_size=32, episodes=400, horizon=25, seed=1,
                        noise_scale=0.3, noise_floor=0.05)

print(f"training {cfg.train.episodes} episodes of {cfg.scenario} "
      f"({cfg.agents} agents, variant {cfg.variant.value})...")
result = train(cfg)

window = 50
returns = result.episode_returns.mean(axis=1)
print("\nmean return per training window:")
for lo in range(0, len(returns), window):
    chunk = returns[lo: lo + window]
    print(f"  episodes {lo:4d}-{lo + len(chunk) - 1:4d}: {chunk.mean():8.2f}")

eval_seed = cfg.train.seed + 10 ** 6
report = evaluate(result.learners, result.scenario, 30, eval_seed)

frozen, _ = make_learners(result.scenario, cfg.hidden_units, np.random.default_rng(0))
for lk in frozen:
    for w in lk.actor.weights:
        w[:] = 0.0
    for b in lk.actor.biases:
        b[:] = 0.0
baseline = evaluate(frozen, result.scenario, 30, eval_seed)

print(f"\ngreedy evaluation over 30 episodes (seed {eval_seed}):")
print(f"  trained policies: {report.mean_returns.mean():8.2f}")
print(f"  frozen actors:    {baseline.mean_returns.mean():8.2f}")
