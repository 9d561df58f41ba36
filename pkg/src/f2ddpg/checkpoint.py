"""Versioned binary checkpoints: networks, optimizer moments, counters, rng.

All numerics are little-endian 64-bit floats/integers regardless of platform,
so files round-trip byte for byte. The replay buffer is deliberately not
checkpointed (it holds up to 1e6 transitions); resumed runs repopulate it, so
resumption is reproducible from episode boundaries with a fresh buffer.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass

import numpy as np

from .config import RunConfig, parse_config, serialize_config
from .marl import AdamState, AgentLearner, MlpParams

MAGIC = b"F2DDPGCP"
VERSION = 1


class CheckpointError(ValueError):
    """Unreadable, corrupt, or version-mismatched checkpoint."""


@dataclass
class Checkpoint:
    config: RunConfig
    episode: int
    rng_state: dict
    learners: list[AgentLearner]


def _pack_array(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def _pack_params(params: MlpParams) -> bytes:
    out = [struct.pack("<I", params.n_layers)]
    for w, b in zip(params.weights, params.biases):
        out.append(struct.pack("<II", w.shape[0], w.shape[1]))
        out.append(_pack_array(w))
        out.append(_pack_array(b))
    return b"".join(out)


def _pack_adam(state: AdamState) -> bytes:
    out = [struct.pack("<Qddd", state.step, state.beta1, state.beta2, state.eps),
           struct.pack("<I", len(state.m_weights))]
    for mw, vw, mb, vb in zip(state.m_weights, state.v_weights,
                              state.m_biases, state.v_biases):
        out.append(struct.pack("<II", mw.shape[0], mw.shape[1]))
        out.append(_pack_array(mw))
        out.append(_pack_array(vw))
        out.append(_pack_array(mb))
        out.append(_pack_array(vb))
    return b"".join(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointError("truncated checkpoint")
        chunk = self.data[self.pos: self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def array(self, shape) -> np.ndarray:
        n = int(np.prod(shape))
        return np.frombuffer(self.take(8 * n), dtype="<f8").astype(np.float64).reshape(shape)


def _read_params(r: _Reader) -> MlpParams:
    n_layers = r.u32()
    weights, biases = [], []
    for _ in range(n_layers):
        out_dim = r.u32()
        in_dim = r.u32()
        weights.append(r.array((out_dim, in_dim)))
        biases.append(r.array((out_dim,)))
    params = MlpParams.from_arrays(weights, biases)
    params.validate()
    return params


def _read_adam(r: _Reader) -> AdamState:
    step = r.u64()
    beta1, beta2, eps = r.f64(), r.f64(), r.f64()
    n_layers = r.u32()
    mw, vw, mb, vb = [], [], [], []
    for _ in range(n_layers):
        out_dim = r.u32()
        in_dim = r.u32()
        mw.append(r.array((out_dim, in_dim)))
        vw.append(r.array((out_dim, in_dim)))
        mb.append(r.array((out_dim,)))
        vb.append(r.array((out_dim,)))
    # .copy() repacks the layers as views into flat buffers
    return AdamState(mw, vw, mb, vb, step=step, beta1=beta1, beta2=beta2, eps=eps).copy()


def save_checkpoint(path, ckpt: Checkpoint) -> None:
    """Write atomically (temp file + rename)."""
    config_blob = serialize_config(ckpt.config).encode("utf-8")
    rng_blob = json.dumps(ckpt.rng_state, sort_keys=True).encode("utf-8")
    parts = [
        MAGIC, struct.pack("<I", VERSION),
        struct.pack("<I", len(config_blob)), config_blob,
        struct.pack("<Q", ckpt.episode),
        struct.pack("<I", len(rng_blob)), rng_blob,
        struct.pack("<I", len(ckpt.learners)),
    ]
    for lk in ckpt.learners:
        parts.append(struct.pack("<d", lk.noise_scale))
        for net in (lk.actor, lk.critic, lk.target_actor, lk.target_critic):
            parts.append(_pack_params(net))
        parts.append(_pack_adam(lk.actor_opt))
        parts.append(_pack_adam(lk.critic_opt))
    blob = b"".join(parts)
    tmp = str(path) + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(blob)
    os.replace(tmp, path)


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        data = fh.read()
    r = _Reader(data)
    if r.take(len(MAGIC)) != MAGIC:
        raise CheckpointError(f"{path}: missing magic string, not a checkpoint file")
    version = r.u32()
    if version != VERSION:
        raise CheckpointError(
            f"{path}: format version {version} unsupported (this build reads {VERSION})")
    config = parse_config(r.take(r.u32()).decode("utf-8"))
    episode = r.u64()
    rng_state = json.loads(r.take(r.u32()).decode("utf-8"))
    learners = []
    for _ in range(r.u32()):
        noise_scale = r.f64()
        actor = _read_params(r)
        critic = _read_params(r)
        target_actor = _read_params(r)
        target_critic = _read_params(r)
        actor_opt = _read_adam(r)
        critic_opt = _read_adam(r)
        learners.append(AgentLearner(
            actor=actor, critic=critic, target_actor=target_actor,
            target_critic=target_critic, actor_opt=actor_opt, critic_opt=critic_opt,
            obs_dim=actor.layer_dims()[0], act_dim=actor.layer_dims()[-1],
            noise_scale=noise_scale,
        ))
    if r.pos != len(data):
        raise CheckpointError(f"{path}: {len(data) - r.pos} trailing bytes")
    return Checkpoint(config=config, episode=episode, rng_state=rng_state,
                      learners=learners)


def restore_rng(state: dict) -> np.random.Generator:
    rng = np.random.default_rng()
    rng.bit_generator.state = state
    return rng
