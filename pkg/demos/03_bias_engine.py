"""The friend-or-foe action bias: one normalized critic-gradient step.

For a target agent i, every other agent's action block a_k moves to
    a_k + sign * delta * ||a_k|| * g_k / ||g_k||,
where g_k is the critic's gradient over that block. Allies ascend (+),
enemies descend (-), and each variant is just a different sign rule.

Run: python demos/03_bias_engine.py
"""

import numpy as np

from f2ddpg.marl import BiasConfig, BiasVariant, TeamSpec, bias_joint_actions
from f2ddpg.nn import mlp_forward, xavier_uniform_init

rng = np.random.default_rng(3)

obs_dims, act_dims = [4, 4, 4], [5, 5, 5]
critic_in = sum(obs_dims) + sum(act_dims)
critic = xavier_uniform_init((critic_in, 32, 1), rng)
obs = [rng.normal(size=d) for d in obs_dims]
acts = [rng.uniform(-1, 1, size=d) for d in act_dims]
team = TeamSpec.from_teams([[0, 1], [2]], 3)  # agent 1 allied with 0, agent 2 hostile
cfg = BiasConfig(delta_ally=0.05, delta_enemy=0.05)


def q_value(actions):
    q, _ = mlp_forward(critic, np.concatenate(obs + list(actions)))
    return float(q[0])


q0 = q_value(acts)
print(f"critic value at the actual joint action: {q0:+.5f}\n")

print("=== variant sign rules (target agent 0) ===")
for variant in BiasVariant:
    biased = bias_joint_actions(critic, obs, acts, 0, team, variant, cfg,
                                np.random.default_rng(0))
    shifts = [np.linalg.norm(b - a) for b, a in zip(biased, acts)]
    q1 = q_value(biased)
    print(f"  {variant.value:12s} shift per agent {np.round(shifts, 4).tolist()} "
          f"-> Q moves {q1 - q0:+.2e}")

print("\n(own block never moves; f2ddpg raises Q through the ally and lowers "
      "it through the enemy)\n")

print("=== the norm trick pins the bias magnitude ===")
for delta in (1e-5, 1e-3, 1e-1):
    biased = bias_joint_actions(critic, obs, acts, 0, team, BiasVariant.F2DDPG,
                                BiasConfig(delta, delta))
    for k in (1, 2):
        got = np.linalg.norm(biased[k] - acts[k])
        want = delta * np.linalg.norm(acts[k])
        print(f"  delta={delta:g} agent {k}: ||shift||={got:.6g} "
              f"(= delta*||a_k||={want:.6g})")

print("\n=== first-order effect over random critics ===")
delta = 1e-4
up = down = trials = 0
for _ in range(500):
    c = xavier_uniform_init((critic_in, 16, 1), rng)
    o = [rng.normal(size=d) for d in obs_dims]
    a = [rng.uniform(-1, 1, size=d) for d in act_dims]
    base, _ = mlp_forward(c, np.concatenate(o + a))
    ally = bias_joint_actions(c, o, a, 0, TeamSpec.from_teams([[0, 1, 2]], 3),
                              BiasVariant.F2DDPG, BiasConfig(delta, delta))
    enemy = bias_joint_actions(c, o, a, 0, TeamSpec.from_teams([[0], [1, 2]], 3),
                               BiasVariant.F2DDPG, BiasConfig(delta, delta))
    qa, _ = mlp_forward(c, np.concatenate(o + ally))
    qe, _ = mlp_forward(c, np.concatenate(o + enemy))
    trials += 1
    up += qa[0] > base[0]
    down += qe[0] < base[0]
print(f"  ally bias raised Q in {100 * up / trials:.1f}% of {trials} trials, "
      f"enemy bias lowered it in {100 * down / trials:.1f}%")
