"""Fixed-capacity FIFO experience store with uniform minibatch sampling.

Transitions are stored column-wise in flat float64 rings (joint observation,
joint action, per-agent rewards, next joint observation) so minibatch gathers
are single fancy-index reads. Sampling is uniform with replacement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Array = np.ndarray


@dataclass
class Transition:
    """One joint experience; per-agent vectors in fixed agent order."""

    obs: list[Array]
    actions: list[Array]
    rewards: Array
    next_obs: list[Array]


@dataclass
class Minibatch:
    """B transitions gathered column-wise, plus their source indices."""

    obs: Array       # [B, sum obs dims]
    actions: Array   # [B, sum act dims]
    rewards: Array   # [B, n_agents]
    next_obs: Array  # [B, sum obs dims]
    indices: Array   # [B]


class ReplayBuffer:
    def __init__(self, capacity: int, obs_dims: list[int], act_dims: list[int]):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = int(capacity)
        self.obs_dims = list(obs_dims)
        self.act_dims = list(act_dims)
        self.n_agents = len(obs_dims)
        total_obs = sum(obs_dims)
        total_act = sum(act_dims)
        self._obs = np.zeros((self.capacity, total_obs))
        self._act = np.zeros((self.capacity, total_act))
        self._rew = np.zeros((self.capacity, self.n_agents))
        self._next = np.zeros((self.capacity, total_obs))
        self._ptr = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def ready(self, batch_size: int) -> bool:
        return self._size >= batch_size

    def push(self, transition: Transition) -> None:
        """Append one transition, evicting the oldest when full."""
        obs = np.concatenate(transition.obs)
        act = np.concatenate(transition.actions)
        nxt = np.concatenate(transition.next_obs)
        rew = np.asarray(transition.rewards, dtype=np.float64)
        if obs.shape[0] != self._obs.shape[1] or act.shape[0] != self._act.shape[1] \
                or rew.shape != (self.n_agents,) or nxt.shape[0] != self._next.shape[1]:
            raise ValueError("transition layout does not match buffer layout")
        i = self._ptr
        self._obs[i] = obs
        self._act[i] = act
        self._rew[i] = rew
        self._next[i] = nxt
        self._ptr = (self._ptr + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def push_flat(self, obs: Array, act: Array, rew: Array, next_obs: Array) -> None:
        """Fast path for already-concatenated rows (training loop internal)."""
        i = self._ptr
        self._obs[i] = obs
        self._act[i] = act
        self._rew[i] = rew
        self._next[i] = next_obs
        self._ptr = (self._ptr + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> Minibatch:
        """Uniform sample with replacement over current occupancy."""
        if self._size < batch_size:
            raise ValueError(
                f"buffer holds {self._size} transitions, cannot sample {batch_size}")
        idx = rng.integers(0, self._size, size=batch_size)
        return Minibatch(
            obs=self._obs[idx], actions=self._act[idx],
            rewards=self._rew[idx], next_obs=self._next[idx], indices=idx,
        )

    def stored(self, index: int) -> tuple[Array, Array, Array, Array]:
        """Stored rows, oldest-first order (for round-trip checks)."""
        if not 0 <= index < self._size:
            raise IndexError(index)
        if self._size < self.capacity:
            i = index
        else:
            i = (self._ptr + index) % self.capacity
        return self._obs[i], self._act[i], self._rew[i], self._next[i]
