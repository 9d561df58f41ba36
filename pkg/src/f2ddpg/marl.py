"""Friend-or-foe biased multi-agent actor-critic: learners, bias engine, training loop.

Each agent owns a decentralized actor and a centralized critic over the joint
observation/action. Critic targets and policy gradients evaluate the critic at
*biased* versions of the other agents' actions: shifted one normalized gradient
step of the critic, up the gradient for allies and down for enemies. The step
is scaled so its magnitude equals delta times the magnitude of the actual
action block, which keeps the injected bias proportional and vanishing as the
gradient shrinks.

Variants differ only in the per-agent sign/step rule:

* maddpg      — no bias at all (actions used exactly as stored),
* m3ddpg      — every other agent treated as an enemy (descend),
* all_plus    — every other agent treated as an ally (ascend),
* random_sign — fresh uniform +/-1 per other agent per instance,
* f2ddpg      — allies ascend with delta_ally, enemies descend with delta_enemy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from . import env as environment
from . import metrics
from .nn import (AdamState, GradientBundle, MlpParams, _backward_raw, _forward_only,
                 _forward_raw, adam_step, mlp_backward, mlp_forward, soft_update,
                 xavier_uniform_init)
from .replay import Minibatch, ReplayBuffer
from .scenarios import Scenario, green_captures, make_scenario

Array = np.ndarray


class BiasVariant(str, Enum):
    MADDPG = "maddpg"
    M3DDPG = "m3ddpg"
    ALL_PLUS = "all_plus"
    RANDOM_SIGN = "random_sign"
    F2DDPG = "f2ddpg"


@dataclass
class BiasConfig:
    """Step sizes for the ally (ascent) and enemy (descent) action biases."""

    delta_ally: float = 1e-5
    delta_enemy: float = 1e-3

    def __post_init__(self):
        if self.delta_ally < 0 or self.delta_enemy < 0:
            raise ValueError("bias step sizes must be nonnegative")


@dataclass
class TeamSpec:
    """Per-agent partition of the other agents into allies and enemies."""

    allies: list[frozenset[int]]
    enemies: list[frozenset[int]]

    @classmethod
    def from_teams(cls, teams: list[list[int]], n_agents: int) -> "TeamSpec":
        team_of = {}
        for t, members in enumerate(teams):
            for m in members:
                if m in team_of:
                    raise ValueError(f"agent {m} appears in more than one team")
                team_of[m] = t
        if sorted(team_of) != list(range(n_agents)):
            raise ValueError("teams must cover every agent exactly once")
        allies = [frozenset(j for j in range(n_agents)
                            if j != i and team_of[j] == team_of[i])
                  for i in range(n_agents)]
        enemies = [frozenset(j for j in range(n_agents)
                             if j != i and team_of[j] != team_of[i])
                   for i in range(n_agents)]
        return cls(allies, enemies)

    def validate(self) -> None:
        n = len(self.allies)
        for i in range(n):
            others = set(range(n)) - {i}
            if self.allies[i] | self.enemies[i] != others or self.allies[i] & self.enemies[i]:
                raise ValueError(f"agent {i}: allies/enemies must partition the others")
        for i in range(n):
            for j in self.allies[i]:
                if i not in self.allies[j]:
                    raise ValueError(f"ally relation not symmetric for ({i}, {j})")


@dataclass
class TrainConfig:
    gamma: float = 0.95
    tau: float = 0.01
    actor_lr: float = 1e-2
    critic_lr: float = 1e-2
    batch_size: int = 1024
    episodes: int = 120_000
    horizon: int = 25
    noise_scale: float = 0.3
    noise_floor: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError(f"tau must be in (0, 1], got {self.tau}")


@dataclass
class JointLayout:
    """Offsets of each agent's slots inside the joint obs/action vectors."""

    obs_dims: list[int]
    act_dims: list[int]

    def __post_init__(self):
        self.obs_offsets = np.concatenate([[0], np.cumsum(self.obs_dims)]).tolist()
        self.act_offsets = np.concatenate([[0], np.cumsum(self.act_dims)]).tolist()
        self.total_obs = self.obs_offsets[-1]
        self.total_act = self.act_offsets[-1]

    def obs_block(self, i: int) -> slice:
        return slice(self.obs_offsets[i], self.obs_offsets[i + 1])

    def act_block(self, i: int) -> slice:
        """Slice within the action region (offset by total_obs in critic input)."""
        return slice(self.act_offsets[i], self.act_offsets[i + 1])


@dataclass
class AgentLearner:
    """One agent's networks, target copies, optimizer states, and noise level."""

    actor: MlpParams
    critic: MlpParams
    target_actor: MlpParams
    target_critic: MlpParams
    actor_opt: AdamState
    critic_opt: AdamState
    obs_dim: int
    act_dim: int
    noise_scale: float = 0.0


def make_learners(scenario: Scenario, hidden: tuple[int, ...],
                  rng: np.random.Generator) -> tuple[list[AgentLearner], JointLayout]:
    """Xavier-initialized learners for every agent; targets start as copies."""
    obs_dims = [scenario.obs_dim(i) for i in range(scenario.n_agents)]
    act_dims = [scenario.act_dim(i) for i in range(scenario.n_agents)]
    critic_in = sum(obs_dims) + sum(act_dims)
    learners = []
    for i in range(scenario.n_agents):
        actor = xavier_uniform_init((obs_dims[i], *hidden, act_dims[i]), rng)
        critic = xavier_uniform_init((critic_in, *hidden, 1), rng)
        learners.append(AgentLearner(
            actor=actor, critic=critic,
            target_actor=actor.copy(), target_critic=critic.copy(),
            actor_opt=AdamState.zeros_like(actor),
            critic_opt=AdamState.zeros_like(critic),
            obs_dim=obs_dims[i], act_dim=act_dims[i],
        ))
    return learners, JointLayout(obs_dims, act_dims)


def select_action(learner: AgentLearner, observation: Array,
                  noise_rng: Optional[np.random.Generator] = None,
                  explore: bool = False) -> Array:
    """Deterministic policy output squashed to [-1, 1]; Gaussian noise if exploring."""
    raw, _ = mlp_forward(learner.actor, observation)
    if explore:
        raw = raw + learner.noise_scale * noise_rng.standard_normal(raw.shape[0])
    return np.tanh(raw)


def critic_input(joint_obs: list[Array], joint_actions: list[Array]) -> Array:
    """Fixed-order concatenation: all observations, then all actions."""
    return np.concatenate(list(joint_obs) + list(joint_actions))


def _sign_and_delta(variant: BiasVariant, k: int, allies: frozenset[int],
                    cfg: BiasConfig, rng: Optional[np.random.Generator], batch: int):
    """Per-other-agent bias sign and step size; arrays for the random variant."""
    if variant is BiasVariant.F2DDPG:
        if k in allies:
            return 1.0, cfg.delta_ally
        return -1.0, cfg.delta_enemy
    if variant is BiasVariant.M3DDPG:
        return -1.0, cfg.delta_enemy
    if variant is BiasVariant.ALL_PLUS:
        return 1.0, cfg.delta_ally
    if variant is BiasVariant.RANDOM_SIGN:
        sign = rng.integers(0, 2, size=batch) * 2.0 - 1.0
        delta = np.where(sign > 0, cfg.delta_ally, cfg.delta_enemy)
        return sign, delta
    raise ValueError(f"variant {variant} does not bias actions")


def _bias_actions_batch(critic: MlpParams, obs: Array, actions: Array, i: int,
                        team: TeamSpec, variant: BiasVariant, cfg: BiasConfig,
                        rng: Optional[np.random.Generator], layout: JointLayout,
                        want_ally_cosine: bool = False):
    """Biased copies of the other agents' action blocks, batched over rows.

    One critic backward pass supplies the gradient over every action slot;
    each other agent's block moves delta * ||a_k|| along its normalized
    gradient, with the variant choosing sign and delta. Blocks with zero
    action or zero gradient are left untouched, as is agent i's own block.

    Returns (biased actions [B, total_act], mean ally cosine or nan).
    """
    if variant is BiasVariant.MADDPG:
        return actions, float("nan")
    x = np.concatenate([obs, actions], axis=1)
    out, pres, posts = _forward_raw(critic.weights, critic.biases, x)
    _, _, grad = _backward_raw(critic.weights, x, pres, posts, np.ones_like(out))
    g_act = grad[:, layout.total_obs:]
    biased = actions.copy()
    cos_sum, cos_count = 0.0, 0
    for k in range(len(layout.act_dims)):
        if k == i:
            continue
        block = layout.act_block(k)
        a_k = actions[:, block]
        g_k = g_act[:, block]
        a_norm = np.sqrt(np.einsum("bj,bj->b", a_k, a_k))
        g_norm = np.sqrt(np.einsum("bj,bj->b", g_k, g_k))
        sign, delta = _sign_and_delta(variant, k, team.allies[i], cfg, rng, a_k.shape[0])
        valid = (a_norm > 0.0) & (g_norm > 0.0)
        scale = np.where(valid, sign * delta * a_norm / np.where(valid, g_norm, 1.0), 0.0)
        biased[:, block] = a_k + scale[:, None] * g_k
        if want_ally_cosine and k in team.allies[i]:
            denom = a_norm * g_norm
            dots = np.einsum("bj,bj->b", a_k, g_k)
            ok = denom > 0.0
            if ok.any():
                cos_sum += float((dots[ok] / denom[ok]).sum())
                cos_count += int(ok.sum())
    ally_cos = cos_sum / cos_count if cos_count else float("nan")
    return biased, ally_cos


def bias_joint_actions(critic: MlpParams, joint_obs: list[Array],
                       joint_actions: list[Array], i: int, team: TeamSpec,
                       variant: BiasVariant, cfg: BiasConfig,
                       rng: Optional[np.random.Generator] = None) -> list[Array]:
    """Single-instance bias computation; agent i's own action is returned as-is."""
    layout = JointLayout([len(o) for o in joint_obs], [len(a) for a in joint_actions])
    obs_row = np.concatenate(joint_obs)[None, :]
    act_row = np.concatenate(joint_actions)[None, :]
    biased, _ = _bias_actions_batch(critic, obs_row, act_row, i, team, variant,
                                    cfg, rng, layout)
    if not np.isfinite(biased).all():
        raise FloatingPointError(f"non-finite biased action for target agent {i}")
    return [biased[0, layout.act_block(k)].copy() for k in range(len(joint_actions))]


def critic_target(batch: Minibatch, i: int, learners: list[AgentLearner],
                  team: TeamSpec, variant: BiasVariant, cfg: TrainConfig,
                  bias_cfg: BiasConfig, layout: JointLayout,
                  rng: Optional[np.random.Generator] = None) -> Array:
    """Bootstrapped targets y = r_i + gamma * Q'_i at biased next joint actions.

    Next actions come from every agent's target actor; the bias uses agent i's
    target critic. No gradient flows through the result.
    """
    next_acts = np.empty((batch.next_obs.shape[0], layout.total_act))
    for k, lk in enumerate(learners):
        raw = _forward_only(lk.target_actor.weights, lk.target_actor.biases,
                            batch.next_obs[:, layout.obs_block(k)])
        next_acts[:, layout.act_block(k)] = np.tanh(raw)
    biased, _ = _bias_actions_batch(learners[i].target_critic, batch.next_obs,
                                    next_acts, i, team, variant, bias_cfg, rng, layout)
    tc = learners[i].target_critic
    q = _forward_only(tc.weights, tc.biases,
                      np.concatenate([batch.next_obs, biased], axis=1))
    return batch.rewards[:, i] + cfg.gamma * q[:, 0]


def critic_update(batch: Minibatch, i: int, learners: list[AgentLearner],
                  targets: Array, cfg: TrainConfig, layout: JointLayout) -> float:
    """One Adam step on the mean squared error against precomputed targets.

    The critic is evaluated on the stored (unbiased) joint actions.
    """
    lk = learners[i]
    x = np.concatenate([batch.obs, batch.actions], axis=1)
    q, pres, posts = _forward_raw(lk.critic.weights, lk.critic.biases, x)
    err = q[:, 0] - targets
    loss = float(np.mean(err ** 2))
    if not np.isfinite(loss):
        raise FloatingPointError(f"non-finite critic loss for agent {i}")
    dq = (2.0 / err.shape[0]) * err[:, None]
    dw, db, _ = _backward_raw(lk.critic.weights, x, pres, posts, dq)
    adam_step(lk.critic, GradientBundle(dw, db, None), lk.critic_opt, cfg.critic_lr)
    return loss


def actor_update(batch: Minibatch, i: int, learners: list[AgentLearner],
                 team: TeamSpec, variant: BiasVariant, cfg: TrainConfig,
                 bias_cfg: BiasConfig, layout: JointLayout,
                 rng: Optional[np.random.Generator] = None) -> tuple[float, float]:
    """Ascend the critic through agent i's own action slot at biased joint actions.

    The other agents' stored actions are biased with the online critic (with
    agent i's stored action in the gradient evaluation); agent i's slot is then
    replaced by its differentiable policy output. Returns the policy-gradient
    norm and the mean ally cosine similarity between stored ally actions and
    the critic's ally gradient (nan when undefined).
    """
    lk = learners[i]
    biased, ally_cos = _bias_actions_batch(lk.critic, batch.obs, batch.actions, i,
                                           team, variant, bias_cfg, rng, layout,
                                           want_ally_cosine=True)
    obs_i = batch.obs[:, layout.obs_block(i)]
    raw, a_pres, a_posts = _forward_raw(lk.actor.weights, lk.actor.biases, obs_i)
    a_i = np.tanh(raw)
    joint = biased.copy()
    joint[:, layout.act_block(i)] = a_i
    x = np.concatenate([batch.obs, joint], axis=1)
    q, c_pres, c_posts = _forward_raw(lk.critic.weights, lk.critic.biases, x)
    upstream = np.full((q.shape[0], 1), 1.0 / q.shape[0])
    _, _, input_grad = _backward_raw(lk.critic.weights, x, c_pres, c_posts, upstream)
    off = layout.total_obs
    d_ai = input_grad[:, off + layout.act_offsets[i]: off + layout.act_offsets[i + 1]]
    d_raw = d_ai * (1.0 - a_i ** 2)
    dw, db, _ = _backward_raw(lk.actor.weights, obs_i, a_pres, a_posts, d_raw)
    norm_sq = sum(float(np.sum(g * g)) for g in dw)
    norm_sq += sum(float(np.sum(g * g)) for g in db)
    descent = GradientBundle([-g for g in dw], [-g for g in db], None)
    adam_step(lk.actor, descent, lk.actor_opt, cfg.actor_lr)
    return float(np.sqrt(norm_sq)), ally_cos


@dataclass
class EpisodeSummary:
    returns: Array
    critic_losses: Array
    actor_grad_norms: Array
    ally_cosines: Array
    updates: int
    green_captures: int


def _mean_or_nan(values: list[float]) -> float:
    finite = [v for v in values if np.isfinite(v)]
    return float(np.mean(finite)) if finite else float("nan")


def train_episode(scenario: Scenario, learners: list[AgentLearner],
                  buffer: ReplayBuffer, team: TeamSpec,
                  variants: list[BiasVariant], cfg: TrainConfig,
                  bias_cfg: BiasConfig, rng: np.random.Generator,
                  layout: Optional[JointLayout] = None,
                  diag_sink: Optional[Callable[[dict], None]] = None,
                  update_hook: Optional[Callable[[int, list[AgentLearner]], None]] = None,
                  episode_index: int = 0, update_offset: int = 0) -> EpisodeSummary:
    """One episode of the full training loop.

    Act with exploration noise, store the transition, then (once the buffer
    can fill a minibatch) run one critic and one actor update per agent and a
    single soft target update per environment step.
    """
    if layout is None:
        layout = JointLayout([lk.obs_dim for lk in learners],
                             [lk.act_dim for lk in learners])
    n = len(learners)
    world = environment.reset(scenario, rng)
    obs = [environment.observe(world, i) for i in range(n)]
    returns = np.zeros(n)
    losses: list[list[float]] = [[] for _ in range(n)]
    grad_norms: list[list[float]] = [[] for _ in range(n)]
    cosines: list[list[float]] = [[] for _ in range(n)]
    updates = 0
    captures = 0
    n_update_calls = update_offset

    for _ in range(cfg.horizon):
        flat_actions = []
        env_actions = []
        for i, lk in enumerate(learners):
            a = select_action(lk, obs[i], rng, explore=True)
            flat_actions.append(a)
            env_actions.append(scenario.action_from_flat(i, a))
        result = environment.step(world, env_actions)
        buffer.push_flat(np.concatenate(obs), np.concatenate(flat_actions),
                         result.rewards, np.concatenate(result.observations))
        returns += result.rewards
        captures += green_captures(result.world, environment.detect_collisions(result.world))
        world = result.world
        obs = result.observations

        if buffer.ready(cfg.batch_size):
            for i in range(n):
                mb = buffer.sample(cfg.batch_size, rng)
                y = critic_target(mb, i, learners, team, variants[i], cfg,
                                  bias_cfg, layout, rng)
                loss = critic_update(mb, i, learners, y, cfg, layout)
                gnorm, cos = actor_update(mb, i, learners, team, variants[i],
                                          cfg, bias_cfg, layout, rng)
                losses[i].append(loss)
                grad_norms[i].append(gnorm)
                cosines[i].append(cos)
                n_update_calls += 1
                if diag_sink is not None:
                    diag_sink({
                        "step": n_update_calls, "episode": episode_index,
                        "agent": i, "variant": variants[i].value,
                        "critic_loss": loss, "actor_grad_norm": gnorm,
                        "ally_cosine": cos,
                    })
                if update_hook is not None:
                    update_hook(i, learners)
            for lk in learners:
                soft_update(lk.target_actor, lk.actor, cfg.tau)
                soft_update(lk.target_critic, lk.critic, cfg.tau)
            updates += 1

    return EpisodeSummary(
        returns=returns,
        critic_losses=np.array([_mean_or_nan(l) for l in losses]),
        actor_grad_norms=np.array([_mean_or_nan(g) for g in grad_norms]),
        ally_cosines=np.array([_mean_or_nan(c) for c in cosines]),
        updates=updates,
        green_captures=captures,
    )


@dataclass
class TrainResult:
    learners: list[AgentLearner]
    layout: JointLayout
    team: TeamSpec
    scenario: Scenario
    episode_returns: Array          # [episodes, n_agents]
    eval_log: list[tuple[int, "metrics.EvalReport"]]
    diagnostics: list[dict]
    episodes_done: int
    rng: np.random.Generator


def variants_for(scenario: Scenario, variant: BiasVariant,
                 opponent_variant: BiasVariant) -> list[BiasVariant]:
    """Per-agent trainer assignment: first team learns `variant`, the rest
    (prey, adversary) learn `opponent_variant`."""
    teams = scenario.teams()
    assignment = [opponent_variant] * scenario.n_agents
    for m in teams[0]:
        assignment[m] = variant
    return assignment


def train(run_cfg, learners: Optional[list[AgentLearner]] = None,
          start_episode: int = 0, rng: Optional[np.random.Generator] = None,
          episode_sink: Optional[Callable[[int, Array], None]] = None,
          eval_sink: Optional[Callable[[int, "metrics.EvalReport"], None]] = None,
          checkpoint_sink: Optional[Callable[..., None]] = None,
          diag_sink: Optional[Callable[[dict], None]] = None,
          collect_diagnostics: bool = False,
          update_hook=None) -> TrainResult:
    """Run the configured number of episodes with periodic eval/checkpointing.

    `run_cfg` is a RunConfig (or anything with the same fields). Exploration
    noise decays multiplicatively from noise_scale to noise_floor over the
    first half of the configured episodes. Evaluation rollouts use the fixed
    seed `train seed + 10**6` so successive eval points are comparable.
    """
    cfg: TrainConfig = run_cfg.train
    scenario = make_scenario(run_cfg.scenario, agents=run_cfg.agents,
                             predators=run_cfg.predators, prey=run_cfg.prey,
                             physics=run_cfg.physics(), horizon=cfg.horizon)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if learners is None:
        learners, layout = make_learners(scenario, run_cfg.hidden_units, rng)
    else:
        layout = JointLayout([lk.obs_dim for lk in learners],
                             [lk.act_dim for lk in learners])
    team = TeamSpec.from_teams(scenario.teams(), scenario.n_agents)
    variants = variants_for(scenario, run_cfg.variant, run_cfg.opponent_variant)
    buffer = ReplayBuffer(run_cfg.buffer_capacity,
                          layout.obs_dims, layout.act_dims)

    half = max(1, cfg.episodes // 2)
    if cfg.noise_scale > 0 and cfg.noise_floor < cfg.noise_scale:
        decay = (cfg.noise_floor / cfg.noise_scale) ** (1.0 / half)
    else:
        decay = 1.0
    eval_seed = cfg.seed + 10 ** 6

    episode_returns = np.zeros((max(cfg.episodes - start_episode, 0), scenario.n_agents))
    eval_log: list[tuple[int, metrics.EvalReport]] = []
    diagnostics: list[dict] = []
    if collect_diagnostics:
        def sink(rec):
            diagnostics.append(rec)
            if diag_sink is not None:
                diag_sink(rec)
    else:
        sink = diag_sink

    update_count = 0
    for ep in range(start_episode, cfg.episodes):
        sigma = max(cfg.noise_floor, cfg.noise_scale * decay ** ep) \
            if cfg.noise_scale > 0 else 0.0
        for lk in learners:
            lk.noise_scale = sigma
        summary = train_episode(scenario, learners, buffer, team, variants, cfg,
                                run_cfg.bias, rng, layout, sink, update_hook,
                                episode_index=ep, update_offset=update_count)
        update_count += summary.updates * scenario.n_agents
        episode_returns[ep - start_episode] = summary.returns
        if episode_sink is not None and (ep + 1) % run_cfg.log_every == 0:
            episode_sink(ep, summary.returns)
        is_last = ep + 1 == cfg.episodes
        if run_cfg.eval_every > 0 and ((ep + 1) % run_cfg.eval_every == 0 or is_last):
            report = metrics.evaluate(learners, scenario, run_cfg.eval_episodes, eval_seed)
            eval_log.append((ep + 1, report))
            if eval_sink is not None:
                eval_sink(ep + 1, report)
        if checkpoint_sink is not None and (
                (run_cfg.checkpoint_every > 0 and (ep + 1) % run_cfg.checkpoint_every == 0)
                or is_last):
            checkpoint_sink(ep + 1, learners, rng)

    return TrainResult(learners, layout, team, scenario, episode_returns,
                       eval_log, diagnostics, cfg.episodes, rng)
