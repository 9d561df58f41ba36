"""The four particle-world scenarios: rosters, observations, rewards, teams.

Agent ordering is fixed per scenario and documented here, because critic
input layouts and replay storage depend on it:

* cooperative_navigation: agents 0..n-1 (all peers), landmarks n..2n-1.
* cooperative_communication: 0 = speaker (comm-only), 1 = listener (mover).
* predator_prey: predators 0..m-1, then blue prey, green prey last.
* covert_communication: 0 = speaker, 1 = listener, 2 = adversary (all static).

Observations share a base layout — own velocity, own position, relative
landmark positions, then relative position and velocity of every other agent
in index order — followed by scenario extras appended at the end.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .env import EnvAction, Physics, WorldState, detect_collisions

Array = np.ndarray

# Exact prey advantages over the predators: green 3x speed, blue 1.3x.
GREEN_SPEED_FACTOR = 3.0
BLUE_SPEED_FACTOR = 1.3
GREEN_ACCEL_FACTOR = 3.0
BLUE_ACCEL_FACTOR = 4.0 / 3.0

BLUE_CAPTURE_REWARD = 10.0
GREEN_CAPTURE_REWARD = 100.0


@dataclass
class AgentSpec:
    role: str
    move_dim: int
    comm_dim: int
    radius: float
    max_speed: float
    accel_scale: float
    movable: bool

    @property
    def act_dim(self) -> int:
        return self.move_dim + self.comm_dim


@dataclass
class Scenario:
    """Shared scenario plumbing; subclasses fill in rewards/extras/payload."""

    name: str
    agent_specs: list[AgentSpec]
    n_landmarks: int
    physics: Physics
    horizon: int = 25

    @property
    def n_agents(self) -> int:
        return len(self.agent_specs)

    def act_dim(self, i: int) -> int:
        return self.agent_specs[i].act_dim

    def base_obs_dim(self) -> int:
        return 4 + 2 * self.n_landmarks + 4 * (self.n_agents - 1)

    def obs_dim(self, i: int) -> int:
        return self.base_obs_dim() + self.extra_obs_dim(i)

    def extra_obs_dim(self, i: int) -> int:
        return 0

    def sample_payload(self, rng: np.random.Generator):
        return None

    def observe(self, world: WorldState, i: int) -> Array:
        own = world.agents[i]
        parts = [own.vel, own.pos]
        for lm in world.landmarks:
            parts.append(lm.pos - own.pos)
        for j, other in enumerate(world.agents):
            if j == i:
                continue
            parts.append(other.pos - own.pos)
            parts.append(other.vel - own.vel)
        extra = self.extra_obs(world, i)
        if extra is not None:
            parts.append(extra)
        return np.concatenate(parts)

    def extra_obs(self, world: WorldState, i: int):
        return None

    def rewards(self, world: WorldState, collisions: list[tuple[int, int]]) -> Array:
        raise NotImplementedError

    def teams(self) -> list[list[int]]:
        """Index groups that cooperate; groups compete with each other."""
        raise NotImplementedError

    def action_from_flat(self, i: int, vec: Array) -> EnvAction:
        """Split a flat actor output into the agent's movement/comm fields."""
        spec = self.agent_specs[i]
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (spec.act_dim,):
            raise ValueError(f"agent {i}: action length {vec.shape} != {spec.act_dim}")
        movement = vec[: spec.move_dim] if spec.move_dim else None
        comm = vec[spec.move_dim:] if spec.comm_dim else None
        return EnvAction(movement=movement, comm=comm)


def _mover(role: str, phys: Physics, speed=None, accel=None) -> AgentSpec:
    return AgentSpec(role=role, move_dim=5, comm_dim=0, radius=phys.agent_radius,
                     max_speed=phys.base_speed if speed is None else speed,
                     accel_scale=phys.base_accel if accel is None else accel,
                     movable=True)


def _talker(role: str, comm_dim: int, phys: Physics) -> AgentSpec:
    return AgentSpec(role=role, move_dim=0, comm_dim=comm_dim, radius=phys.agent_radius,
                     max_speed=0.0, accel_scale=0.0, movable=False)


# ---------------------------------------------------------------------------
# Reward functions
# ---------------------------------------------------------------------------

def reward_cooperative_navigation(world: WorldState) -> Array:
    """Shared negative sum of nearest-agent distances, minus collision penalties."""
    agents = world.agents
    shared = 0.0
    for lm in world.landmarks:
        shared -= min(float(np.linalg.norm(a.pos - lm.pos)) for a in agents)
    rewards = np.full(len(agents), shared)
    for i, j in detect_collisions(world):
        rewards[i] -= 1.0
        rewards[j] -= 1.0
    return rewards


def reward_cooperative_communication(world: WorldState) -> Array:
    """Both agents get minus the squared listener-to-goal distance."""
    goal = world.landmarks[world.payload["goal"]]
    listener = world.agents[1]
    r = -float(np.sum((listener.pos - goal.pos) ** 2))
    return np.array([r, r])


def _boundary_penalty(pos: Array, coef: float) -> float:
    over = np.maximum(np.abs(pos) - 1.0, 0.0)
    return float(coef * np.sum(over ** 2))


def reward_predator_prey(world: WorldState, collisions: list[tuple[int, int]]) -> Array:
    """Captures reward all predators collectively and penalize the caught prey.

    A capture is a colliding (predator, prey) pair this step; green prey are
    worth 10x blue. Prey additionally pay a smooth penalty for leaving the
    [-1,1]^2 arena.
    """
    agents = world.agents
    rewards = np.zeros(len(agents))
    predators = [i for i, a in enumerate(agents) if a.role == "predator"]
    bounty = 0.0
    for i, j in collisions:
        for pred, prey in ((i, j), (j, i)):
            if agents[pred].role != "predator" or not agents[prey].role.startswith("prey"):
                continue
            value = GREEN_CAPTURE_REWARD if agents[prey].role == "prey_green" else BLUE_CAPTURE_REWARD
            bounty += value
            rewards[prey] -= value
    for p in predators:
        rewards[p] += bounty
    coef = world.scenario.physics.boundary_coef
    for i, a in enumerate(agents):
        if a.role.startswith("prey"):
            rewards[i] -= _boundary_penalty(a.pos, coef)
    return rewards


def green_captures(world: WorldState, collisions: list[tuple[int, int]]) -> int:
    """Number of (predator, green prey) colliding pairs this step."""
    agents = world.agents
    count = 0
    for i, j in collisions:
        roles = {agents[i].role, agents[j].role}
        if "predator" in roles and "prey_green" in roles:
            count += 1
    return count


def reward_covert_communication(world: WorldState) -> Array:
    """Listener reconstruction pays the team; adversary reconstruction costs it."""
    msg = world.payload["message"]
    listener_out = world.payload["comm"][1]
    adversary_out = world.payload["comm"][2]
    listener_err = float(np.sum((msg - listener_out) ** 2))
    adversary_err = float(np.sum((msg - adversary_out) ** 2))
    team = -listener_err + adversary_err
    return np.array([team, team, -adversary_err])


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------

@dataclass
class CooperativeNavigation(Scenario):
    def rewards(self, world, collisions):
        return reward_cooperative_navigation(world)

    def teams(self):
        return [list(range(self.n_agents))]


@dataclass
class CooperativeCommunication(Scenario):
    comm_dim: int = 3

    def sample_payload(self, rng):
        return {"goal": int(rng.integers(self.n_landmarks)),
                "comm": {0: np.zeros(self.comm_dim)}}

    def extra_obs_dim(self, i):
        if i == 0:  # speaker: goal color
            return self.n_landmarks
        return 3 * self.n_landmarks + self.comm_dim  # listener: colors + message

    def extra_obs(self, world, i):
        colors = np.eye(self.n_landmarks)
        if i == 0:
            return colors[world.payload["goal"]]
        return np.concatenate([colors.ravel(), world.payload["comm"][0]])

    def rewards(self, world, collisions):
        return reward_cooperative_communication(world)

    def teams(self):
        return [[0, 1]]


@dataclass
class PredatorPrey(Scenario):
    n_predators: int = 5
    n_prey: int = 3

    def rewards(self, world, collisions):
        return reward_predator_prey(world, collisions)

    def teams(self):
        return [list(range(self.n_predators)),
                list(range(self.n_predators, self.n_predators + self.n_prey))]


@dataclass
class CovertCommunication(Scenario):
    vec_dim: int = 4

    def sample_payload(self, rng):
        return {
            "message": rng.uniform(-1.0, 1.0, size=self.vec_dim),
            "key": rng.uniform(-1.0, 1.0, size=self.vec_dim),
            "comm": {i: np.zeros(self.vec_dim) for i in range(3)},
        }

    def extra_obs_dim(self, i):
        return 2 * self.vec_dim if i in (0, 1) else self.vec_dim

    def extra_obs(self, world, i):
        p = world.payload
        if i == 0:  # speaker: message + key
            return np.concatenate([p["message"], p["key"]])
        if i == 1:  # listener: key + broadcast
            return np.concatenate([p["key"], p["comm"][0]])
        return p["comm"][0]  # adversary: broadcast only

    def rewards(self, world, collisions):
        return reward_covert_communication(world)

    def teams(self):
        return [[0, 1], [2]]


SCENARIO_NAMES = (
    "cooperative_navigation",
    "cooperative_communication",
    "predator_prey",
    "covert_communication",
)


def make_scenario(name: str, agents: int = 3, predators: int = 5, prey: int = 3,
                  physics=None, horizon: int = 25) -> Scenario:
    """Build one of the four scenarios with its published roster."""
    phys = physics if physics is not None else Physics()
    if name == "cooperative_navigation":
        if agents < 1:
            raise ValueError(f"agents must be >= 1, got {agents}")
        specs = [_mover("agent", phys) for _ in range(agents)]
        return CooperativeNavigation(name, specs, n_landmarks=agents,
                                     physics=phys, horizon=horizon)
    if name == "cooperative_communication":
        specs = [_talker("speaker", 3, phys), _mover("listener", phys)]
        return CooperativeCommunication(name, specs, n_landmarks=3,
                                        physics=phys, horizon=horizon)
    if name == "predator_prey":
        if predators < 1 or prey < 1:
            raise ValueError(f"need >=1 predators and prey, got {predators} vs {prey}")
        specs = [_mover("predator", phys) for _ in range(predators)]
        for _ in range(prey - 1):
            specs.append(_mover("prey_blue", phys,
                                speed=BLUE_SPEED_FACTOR * phys.base_speed,
                                accel=BLUE_ACCEL_FACTOR * phys.base_accel))
        specs.append(_mover("prey_green", phys,
                            speed=GREEN_SPEED_FACTOR * phys.base_speed,
                            accel=GREEN_ACCEL_FACTOR * phys.base_accel))
        return PredatorPrey(name, specs, n_landmarks=0, physics=phys, horizon=horizon,
                            n_predators=predators, n_prey=prey)
    if name == "covert_communication":
        specs = [_talker("speaker", 4, phys), _talker("listener", 4, phys),
                 _talker("adversary", 4, phys)]
        return CovertCommunication(name, specs, n_landmarks=0, physics=phys, horizon=horizon)
    raise ValueError(f"unknown scenario '{name}', expected one of {SCENARIO_NAMES}")
