"""Roll random policies through all four particle-world scenarios.

Run: python demos/02_particle_worlds.py
"""

import numpy as np

from f2ddpg.env import EnvAction, observe, reset, step
from f2ddpg.scenarios import make_scenario

rng = np.random.default_rng(7)

for name, kwargs in (
    ("cooperative_navigation", {}),
    ("cooperative_communication", {}),
    ("predator_prey", {"predators": 3, "prey": 2}),
    ("covert_communication", {}),
):
    scenario = make_scenario(name, **kwargs)
    world = reset(scenario, rng)
    print(f"=== {name} ===")
    roles = [s.role for s in scenario.agent_specs]
    print(f"  agents: {roles}, landmarks: {scenario.n_landmarks}")
    print(f"  obs dims: {[scenario.obs_dim(i) for i in range(scenario.n_agents)]}, "
          f"act dims: {[scenario.act_dim(i) for i in range(scenario.n_agents)]}")

    totals = np.zeros(scenario.n_agents)
    while True:
        actions = []
        for spec in scenario.agent_specs:
            movement = rng.uniform(-1, 1, 5) if spec.move_dim else None
            comm = rng.uniform(-1, 1, spec.comm_dim) if spec.comm_dim else None
            actions.append(EnvAction(movement=movement, comm=comm))
        result = step(world, actions)
        totals += result.rewards
        world = result.world
        if result.terminal:
            break
    print(f"  random-policy returns over {scenario.horizon} steps: "
          f"{np.round(totals, 2).tolist()}")
    speeds = [f"{a.role}={np.linalg.norm(a.vel):.3f}" for a in world.agents if a.movable]
    if speeds:
        print(f"  final speeds (clamped per role): {', '.join(speeds)}")
    print(f"  sample observation (agent 0): {np.round(observe(world, 0)[:6], 3)} ...")
    print()
