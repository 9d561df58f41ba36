"""2-D particle-world core: entities, double-integrator physics, collisions.

World state is a plain value; `reset`/`step`/`observe` are pure functions of
their inputs plus an explicit rng, so identical (seed, action sequence) pairs
reproduce trajectories bit for bit. Scenario-specific observation layouts,
rewards and payloads live in `scenarios`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

Array = np.ndarray


@dataclass
class Physics:
    """World constants; only the prey/predator speed ratios are fixed elsewhere."""

    dt: float = 0.1
    damping: float = 0.25
    agent_radius: float = 0.05
    landmark_radius: float = 0.05
    contact_stiffness: float = 100.0
    base_speed: float = 1.0
    base_accel: float = 3.0
    boundary_coef: float = 10.0


@dataclass
class EntityState:
    """One circular entity; positions/velocities are length-2 float arrays."""

    pos: Array
    vel: Array
    kind: str  # "agent" | "landmark"
    role: str  # e.g. "agent", "speaker", "listener", "predator", "prey_blue", ...
    radius: float
    max_speed: float = 0.0
    accel_scale: float = 0.0
    movable: bool = False

    def copy(self) -> "EntityState":
        return replace(self, pos=self.pos.copy(), vel=self.vel.copy())


@dataclass
class WorldState:
    """All entities (agents first, then landmarks) plus scenario payload."""

    scenario: object
    entities: list[EntityState]
    t: int = 0
    payload: Optional[dict] = None

    @property
    def n_agents(self) -> int:
        return len(self.scenario.agent_specs)

    @property
    def agents(self) -> list[EntityState]:
        return self.entities[: self.n_agents]

    @property
    def landmarks(self) -> list[EntityState]:
        return self.entities[self.n_agents:]

    def copy(self) -> "WorldState":
        payload = None
        if self.payload is not None:
            payload = {
                k: ({a: c.copy() for a, c in v.items()} if isinstance(v, dict)
                    else v.copy() if isinstance(v, np.ndarray) else v)
                for k, v in self.payload.items()
            }
        return WorldState(self.scenario, [e.copy() for e in self.entities], self.t, payload)


@dataclass
class EnvAction:
    """Movement 5-vector (hold, right, left, up, down) and/or communication vector."""

    movement: Optional[Array] = None
    comm: Optional[Array] = None

    def flat(self) -> Array:
        parts = [p for p in (self.movement, self.comm) if p is not None]
        if not parts:
            return np.zeros(0)
        return np.concatenate([np.asarray(p, dtype=np.float64) for p in parts])


@dataclass
class StepResult:
    world: WorldState
    rewards: Array
    observations: list[Array]
    terminal: bool


def decode_action(movement: Array, accel_scale: float = 1.0) -> Array:
    """Net 2-D acceleration from a (hold, right, left, up, down) vector.

    The hold component is ignored for dynamics; opposing components cancel.
    """
    m = np.asarray(movement, dtype=np.float64)
    if m.shape != (5,):
        raise ValueError(f"movement must have 5 entries, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise FloatingPointError("non-finite movement entries")
    return accel_scale * np.array([m[1] - m[2], m[3] - m[4]])


def detect_collisions(world: WorldState) -> list[tuple[int, int]]:
    """Agent pairs (i, j), i<j, whose circles strictly overlap."""
    agents = world.agents
    pairs = []
    for i in range(len(agents)):
        for j in range(i + 1, len(agents)):
            dist = float(np.linalg.norm(agents[i].pos - agents[j].pos))
            if dist < agents[i].radius + agents[j].radius:
                pairs.append((i, j))
    return pairs


def reset(scenario, rng: np.random.Generator) -> WorldState:
    """Fresh world: every position i.i.d. uniform over [-1,1]^2, zero velocities.

    Draw order is fixed (agents, then landmarks, then payload) so a seed pins
    the whole initial state.
    """
    phys: Physics = scenario.physics
    entities = []
    for spec in scenario.agent_specs:
        entities.append(EntityState(
            pos=rng.uniform(-1.0, 1.0, size=2), vel=np.zeros(2),
            kind="agent", role=spec.role, radius=spec.radius,
            max_speed=spec.max_speed, accel_scale=spec.accel_scale,
            movable=spec.movable,
        ))
    for _ in range(scenario.n_landmarks):
        entities.append(EntityState(
            pos=rng.uniform(-1.0, 1.0, size=2), vel=np.zeros(2),
            kind="landmark", role="landmark", radius=phys.landmark_radius,
        ))
    return WorldState(scenario, entities, t=0, payload=scenario.sample_payload(rng))


def observe(world: WorldState, agent_index: int) -> Array:
    """Fixed-layout observation vector for one agent (see scenarios)."""
    return world.scenario.observe(world, agent_index)


def _contact_accels(world: WorldState) -> list[Array]:
    """Soft spring forces between overlapping agent circles (unit mass)."""
    agents = world.agents
    k = world.scenario.physics.contact_stiffness
    acc = [np.zeros(2) for _ in agents]
    for i in range(len(agents)):
        for j in range(i + 1, len(agents)):
            delta = agents[i].pos - agents[j].pos
            dist = float(np.linalg.norm(delta))
            overlap = agents[i].radius + agents[j].radius - dist
            if overlap <= 0.0:
                continue
            direction = delta / dist if dist > 0.0 else np.array([1.0, 0.0])
            force = k * overlap * direction
            if agents[i].movable:
                acc[i] = acc[i] + force
            if agents[j].movable:
                acc[j] = acc[j] - force
    return acc


def step(world: WorldState, joint_actions: list[EnvAction]) -> StepResult:
    """Advance one timestep: integrate motion, store comms, score rewards.

    Semi-implicit Euler with damping and a per-entity speed clamp; rewards are
    computed on the post-move state; communication vectors become visible in
    the next step's observations.
    """
    scenario = world.scenario
    specs = scenario.agent_specs
    if world.t >= scenario.horizon:
        raise ValueError(f"episode is terminal at t={world.t}; reset before stepping")
    if len(joint_actions) != len(specs):
        raise ValueError(f"expected {len(specs)} actions, got {len(joint_actions)}")
    for idx, (spec, act) in enumerate(zip(specs, joint_actions)):
        if (spec.move_dim > 0) != (act.movement is not None):
            raise ValueError(f"agent {idx}: movement presence does not match role")
        if (spec.comm_dim > 0) != (act.comm is not None):
            raise ValueError(f"agent {idx}: communication presence does not match role")
        if act.comm is not None and len(act.comm) != spec.comm_dim:
            raise ValueError(f"agent {idx}: comm dim {len(act.comm)} != {spec.comm_dim}")

    nxt = world.copy()
    phys: Physics = scenario.physics
    contact = _contact_accels(world)
    for idx, (spec, act) in enumerate(zip(specs, joint_actions)):
        ent = nxt.agents[idx]
        if not ent.movable:
            continue
        accel = contact[idx]
        if act.movement is not None:
            accel = accel + decode_action(act.movement, ent.accel_scale)
        ent.vel = (1.0 - phys.damping) * ent.vel + accel * phys.dt
        speed = float(np.linalg.norm(ent.vel))
        if ent.max_speed > 0.0 and speed > ent.max_speed:
            ent.vel = ent.vel * (ent.max_speed / speed)
        ent.pos = ent.pos + ent.vel * phys.dt
    nxt.t = world.t + 1

    if nxt.payload is not None and "comm" in nxt.payload:
        for idx, act in enumerate(joint_actions):
            if act.comm is not None:
                nxt.payload["comm"][idx] = np.asarray(act.comm, dtype=np.float64).copy()

    collisions = detect_collisions(nxt)
    rewards = scenario.rewards(nxt, collisions)
    observations = [observe(nxt, i) for i in range(len(specs))]
    return StepResult(nxt, rewards, observations, terminal=nxt.t >= scenario.horizon)
