"""Evaluation rollouts and diagnostics: returns, capture stats, bias alignment.

Evaluation is always greedy (no exploration noise) and a pure function of
(parameters, scenario, seed), so reports are exactly reproducible. Capture
fractions mirror the predator-prey success notion: an episode succeeds at
threshold c when the green prey was captured at least c times.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import env as environment
from .nn import mlp_forward
from .scenarios import Scenario, green_captures

Array = np.ndarray


def cosine_similarity(u: Array, v: Array) -> float:
    """Inner product over the product of norms; nan flags the undefined case."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return float("nan")
    return float(np.dot(u, v) / (nu * nv))


@dataclass
class SimilaritySample:
    """One alignment measurement between ally actions and the critic gradient."""

    step: int
    cosine: float
    agent: Optional[int] = None
    action_block: Optional[Array] = None
    gradient_block: Optional[Array] = None

    @classmethod
    def from_blocks(cls, step: int, action_block: Array, gradient_block: Array,
                    agent: Optional[int] = None) -> "SimilaritySample":
        return cls(step=step, cosine=cosine_similarity(action_block, gradient_block),
                   agent=agent, action_block=np.asarray(action_block, dtype=np.float64),
                   gradient_block=np.asarray(gradient_block, dtype=np.float64))


def capture_stats(capture_counts: Sequence[int],
                  thresholds: Iterable[int] = (1, 3)) -> dict[int, float]:
    """Percent of episodes whose green-capture count reaches each threshold."""
    counts = list(capture_counts)
    if not counts:
        raise ValueError("capture_stats needs at least one episode log")
    return {int(t): 100.0 * sum(1 for c in counts if c >= t) / len(counts)
            for t in thresholds}


@dataclass
class EvalReport:
    """Per-agent return statistics over E greedy evaluation episodes."""

    scenario: str
    episodes: int
    seed: int
    returns: Array           # [episodes, n_agents]
    green_capture_counts: Array  # [episodes]

    @property
    def mean_returns(self) -> Array:
        return self.returns.mean(axis=0)

    @property
    def std_returns(self) -> Array:
        return self.returns.std(axis=0)

    def capture_fractions(self, thresholds: Iterable[int] = (1, 3)) -> dict[int, float]:
        return capture_stats(self.green_capture_counts.tolist(), thresholds)


def greedy_action(actor_params, observation: Array) -> Array:
    """Noise-free policy output squashed to [-1, 1]."""
    raw, _ = mlp_forward(actor_params, observation)
    return np.tanh(raw)


def evaluate(learners, scenario: Scenario, episodes: int, seed: int) -> EvalReport:
    """E greedy rollouts; aggregates undiscounted returns and capture counts."""
    if episodes < 1:
        raise ValueError(f"episodes must be >= 1, got {episodes}")
    rng = np.random.default_rng(seed)
    n = scenario.n_agents
    returns = np.zeros((episodes, n))
    captures = np.zeros(episodes, dtype=int)
    for e in range(episodes):
        world = environment.reset(scenario, rng)
        obs = [environment.observe(world, i) for i in range(n)]
        for _ in range(scenario.horizon):
            actions = [scenario.action_from_flat(i, greedy_action(learners[i].actor, obs[i]))
                       for i in range(n)]
            result = environment.step(world, actions)
            returns[e] += result.rewards
            captures[e] += green_captures(result.world,
                                          environment.detect_collisions(result.world))
            world = result.world
            obs = result.observations
    return EvalReport(scenario=scenario.name, episodes=episodes, seed=seed,
                      returns=returns, green_capture_counts=captures)


def bias_alignment_series(samples: Sequence, n_windows: int = 100) -> list[dict]:
    """Windowed mean cosine over an update-ordered similarity log.

    Splits the log into `n_windows` contiguous chunks (1% of updates each by
    default); nan samples are excluded, and an all-nan window yields a nan
    mean (a gap, not an error). Accepts SimilaritySamples or (step, cosine)
    pairs.
    """
    def fields(s):
        if hasattr(s, "step"):
            return int(s.step), float(s.cosine)
        return int(s[0]), float(s[1])

    ordered = [fields(s) for s in samples]
    if not ordered:
        return []
    size = max(1, int(np.ceil(len(ordered) / n_windows)))
    series = []
    for w, lo in enumerate(range(0, len(ordered), size)):
        chunk = ordered[lo: lo + size]
        values = [c for _, c in chunk if np.isfinite(c)]
        series.append({
            "window": w,
            "start_step": chunk[0][0],
            "end_step": chunk[-1][0],
            "mean_cosine": float(np.mean(values)) if values else float("nan"),
            "samples": len(values),
        })
    return series


def write_eval_csv(path, report: EvalReport) -> None:
    """One row per evaluation episode: returns per agent plus green captures."""
    n = report.returns.shape[1]
    header = ["episode"] + [f"return_agent{i}" for i in range(n)] + ["green_captures"]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for e in range(report.episodes):
            row = [str(e)] + [repr(float(r)) for r in report.returns[e]]
            row.append(str(int(report.green_capture_counts[e])))
            fh.write(",".join(row) + "\n")


def write_alignment_csv(path, series: list[dict]) -> None:
    """One row per window of the bias-alignment series."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("window,start_step,end_step,mean_cosine,samples\n")
        for row in series:
            fh.write(f"{row['window']},{row['start_step']},{row['end_step']},"
                     f"{row['mean_cosine']!r},{row['samples']}\n")


def rollout_trace(learners, scenario: Scenario, episodes: int, seed: int,
                  bias_fn: Optional[Callable] = None) -> list[dict]:
    """Greedy episode traces for trajectory-figure reproduction.

    One record per step with timestep, positions, velocities, flat actions and
    rewards; `bias_fn(obs_list, act_list)` may add per-agent bias vectors.
    """
    rng = np.random.default_rng(seed)
    n = scenario.n_agents
    records = []
    for e in range(episodes):
        world = environment.reset(scenario, rng)
        obs = [environment.observe(world, i) for i in range(n)]
        for _ in range(scenario.horizon):
            flat = [greedy_action(learners[i].actor, obs[i]) for i in range(n)]
            actions = [scenario.action_from_flat(i, flat[i]) for i in range(n)]
            result = environment.step(world, actions)
            rec = {
                "episode": e,
                "timestep": world.t,
                "positions": [a.pos.tolist() for a in result.world.agents],
                "velocities": [a.vel.tolist() for a in result.world.agents],
                "actions": [f.tolist() for f in flat],
                "rewards": result.rewards.tolist(),
            }
            if bias_fn is not None:
                rec["biases"] = bias_fn(obs, flat)
            records.append(rec)
            world = result.world
            obs = result.observations
    return records


def write_trace_jsonl(path, records: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
