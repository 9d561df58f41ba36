"""Minimal dense-network engine: forward, exact reverse-mode gradients, Adam, soft updates.

Everything is float64 numpy. Hidden layers are ReLU, the output layer is
linear; squashing of actor outputs happens downstream, not here. Gradients
are always computed for the parameters *and* the input vector, because the
bias engine needs the critic's input gradient on every update.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

Array = np.ndarray


def _flat_views(flat: Array, shapes: list[tuple[int, int]]):
    """Slice one contiguous buffer into per-layer (weight, bias) views."""
    weights, biases = [], []
    off = 0
    for out_dim, in_dim in shapes:
        weights.append(flat[off: off + out_dim * in_dim].reshape(out_dim, in_dim))
        off += out_dim * in_dim
        biases.append(flat[off: off + out_dim])
        off += out_dim
    return weights, biases


@dataclass
class MlpParams:
    """Weights ([out, in] per layer) and biases ([out] per layer).

    When built through `xavier_uniform_init`/`from_arrays` the layers are
    views into one contiguous `flat` buffer, which lets optimizer and target
    updates run as single vector operations; hand-built instances without
    `flat` behave identically through the per-layer fallbacks.
    """

    weights: list[Array]
    biases: list[Array]
    flat: Array = None

    @classmethod
    def from_arrays(cls, weights: list[Array], biases: list[Array]) -> "MlpParams":
        shapes = [w.shape for w in weights]
        flat = np.empty(sum(w.size + b.size for w, b in zip(weights, biases)))
        views_w, views_b = _flat_views(flat, shapes)
        for dst, src in zip(views_w + views_b, list(weights) + list(biases)):
            dst[...] = src
        return cls(views_w, views_b, flat)

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def layer_dims(self) -> tuple[int, ...]:
        """Dimension chain (in_0, out_0, out_1, ..., out_last)."""
        return (self.weights[0].shape[1],) + tuple(w.shape[0] for w in self.weights)

    def num_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self) -> "MlpParams":
        if self.flat is not None:
            flat = self.flat.copy()
            views_w, views_b = _flat_views(flat, [w.shape for w in self.weights])
            return MlpParams(views_w, views_b, flat)
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def validate(self) -> None:
        if not self.weights or len(self.weights) != len(self.biases):
            raise ValueError("weights and biases must be non-empty and aligned")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
                raise ValueError(f"layer {k}: weight {w.shape} and bias {b.shape} do not align")
            if k > 0 and w.shape[1] != self.weights[k - 1].shape[0]:
                raise ValueError(f"layer {k}: in-dim {w.shape[1]} does not chain from previous layer")
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise FloatingPointError(f"layer {k}: non-finite parameter entries")


@dataclass
class AdamState:
    """Per-parameter first/second moments plus the shared step counter."""

    m_weights: list[Array]
    v_weights: list[Array]
    m_biases: list[Array]
    v_biases: list[Array]
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m_flat: Array = None
    v_flat: Array = None

    @classmethod
    def zeros_like(cls, params: MlpParams, beta1: float = 0.9, beta2: float = 0.999,
                   eps: float = 1e-8) -> "AdamState":
        shapes = [w.shape for w in params.weights]
        m_flat = np.zeros(params.num_params())
        v_flat = np.zeros(params.num_params())
        mw, mb = _flat_views(m_flat, shapes)
        vw, vb = _flat_views(v_flat, shapes)
        return cls(m_weights=mw, v_weights=vw, m_biases=mb, v_biases=vb,
                   step=0, beta1=beta1, beta2=beta2, eps=eps,
                   m_flat=m_flat, v_flat=v_flat)

    def copy(self) -> "AdamState":
        other = AdamState.zeros_like(
            MlpParams(self.m_weights, self.m_biases),
            beta1=self.beta1, beta2=self.beta2, eps=self.eps)
        other.step = self.step
        other.m_flat[...] = np.concatenate(
            [a.ravel() for pair in zip(self.m_weights, self.m_biases) for a in pair])
        other.v_flat[...] = np.concatenate(
            [a.ravel() for pair in zip(self.v_weights, self.v_biases) for a in pair])
        return other


@dataclass
class ForwardTrace:
    """Per-layer pre/post activations retained from one forward pass.

    `inputs` and the activation entries are 1-D for a single sample or
    [B, dim] matrices for a batched pass; backward handles either.
    """

    inputs: Array
    pre_acts: list[Array] = field(default_factory=list)
    post_acts: list[Array] = field(default_factory=list)


@dataclass
class GradientBundle:
    """Parameter gradients shaped like the owning MlpParams, plus the input gradient."""

    d_weights: list[Array]
    d_biases: list[Array]
    d_input: Array


def xavier_uniform_init(layer_dims, rng: np.random.Generator) -> MlpParams:
    """Xavier-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases."""
    dims = [int(d) for d in layer_dims]
    if len(dims) < 2:
        raise ValueError(f"need at least two layer dims, got {dims}")
    if any(d <= 0 for d in dims):
        raise ValueError(f"layer dims must be positive, got {dims}")
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpParams.from_arrays(weights, biases)


def _forward_raw(weights, biases, x):
    """Unchecked forward over prevalidated arrays; shared by the hot loops."""
    pres = []
    posts = []
    h = x
    last = len(weights) - 1
    for k in range(last):
        z = h @ weights[k].T + biases[k]
        h = np.maximum(z, 0.0)
        pres.append(z)
        posts.append(h)
    z = h @ weights[last].T + biases[last]
    pres.append(z)
    posts.append(z)
    return z, pres, posts


def _forward_only(weights, biases, x):
    """Forward pass without retaining activations (no backward planned)."""
    h = x
    last = len(weights) - 1
    for k in range(last):
        h = np.maximum(h @ weights[k].T + biases[k], 0.0)
    return h @ weights[last].T + biases[last]


def _backward_raw(weights, x, pres, posts, d):
    """Unchecked reverse pass matching `_forward_raw`; returns (dWs, dbs, dx)."""
    n = len(weights)
    d_weights = [None] * n
    d_biases = [None] * n
    batched = x.ndim == 2
    for k in range(n - 1, -1, -1):
        h_prev = x if k == 0 else posts[k - 1]
        if batched:
            d_weights[k] = d.T @ h_prev
            d_biases[k] = d.sum(axis=0)
        else:
            d_weights[k] = np.outer(d, h_prev)
            d_biases[k] = d.copy()
        d = d @ weights[k]
        if k > 0:
            d = d * (pres[k - 1] > 0)
    return d_weights, d_biases, d


def mlp_forward(params: MlpParams, x: Array) -> tuple[Array, ForwardTrace]:
    """ReLU MLP forward pass; accepts one input vector or a [B, in] batch.

    Returns the linear output together with the trace needed for backward.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.weights[0].shape[1]:
        raise ValueError(
            f"input dim {x.shape[-1]} != first layer in-dim {params.weights[0].shape[1]}")
    out, pres, posts = _forward_raw(params.weights, params.biases, x)
    trace = ForwardTrace(inputs=x, pre_acts=pres, post_acts=posts)
    return out, trace


def mlp_backward(params: MlpParams, trace: ForwardTrace, output_grad: Array) -> GradientBundle:
    """Exact reverse-mode gradients w.r.t. parameters and the input.

    For a batched trace, parameter gradients are summed over the batch and
    `d_input` keeps the [B, in] shape. The trace must come from a matching
    forward call on the same params.
    """
    if len(trace.pre_acts) != params.n_layers:
        raise ValueError("trace layer count does not match params")
    d = np.asarray(output_grad, dtype=np.float64)
    if d.shape != trace.post_acts[-1].shape:
        raise ValueError(
            f"output_grad shape {d.shape} != output shape {trace.post_acts[-1].shape}")
    d_weights, d_biases, d_input = _backward_raw(
        params.weights, trace.inputs, trace.pre_acts, trace.post_acts, d)
    return GradientBundle(d_weights, d_biases, d_input)


def _raise_nonfinite_layer(grads: GradientBundle) -> None:
    for k, (gw, gb) in enumerate(zip(grads.d_weights, grads.d_biases)):
        if not (np.isfinite(gw).all() and np.isfinite(gb).all()):
            raise FloatingPointError(f"non-finite gradient at layer {k}")
    raise FloatingPointError("non-finite gradient")


def adam_step(params: MlpParams, grads: GradientBundle, state: AdamState,
              lr: float) -> tuple[MlpParams, AdamState]:
    """One Adam update with bias correction; mutates params/state in place."""
    if lr <= 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    b1, b2 = state.beta1, state.beta2
    if params.flat is not None and state.m_flat is not None:
        # layers are views into one buffer: update the whole network at once
        g = np.concatenate([a.ravel() for pair in
                            zip(grads.d_weights, grads.d_biases) for a in pair])
        if not np.isfinite(g).all():
            _raise_nonfinite_layer(grads)
        state.step += 1
        bc1 = 1.0 - b1 ** state.step
        bc2 = 1.0 - b2 ** state.step
        m, v = state.m_flat, state.v_flat
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        params.flat -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
        return params, state
    for k, (gw, gb) in enumerate(zip(grads.d_weights, grads.d_biases)):
        if not (np.isfinite(gw).all() and np.isfinite(gb).all()):
            raise FloatingPointError(f"non-finite gradient at layer {k}")
    state.step += 1
    bc1 = 1.0 - b1 ** state.step
    bc2 = 1.0 - b2 ** state.step
    for k in range(params.n_layers):
        for p, g, m, v in (
            (params.weights[k], grads.d_weights[k], state.m_weights[k], state.v_weights[k]),
            (params.biases[k], grads.d_biases[k], state.m_biases[k], state.v_biases[k]),
        ):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * (g * g)
            p -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return params, state


def soft_update(target: MlpParams, online: MlpParams, tau: float) -> MlpParams:
    """Blend target toward online: target <- tau*online + (1-tau)*target."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must be in [0, 1], got {tau}")
    for tw, ow in zip(target.weights, online.weights):
        if tw.shape != ow.shape:
            raise ValueError(f"shape mismatch {tw.shape} vs {ow.shape}")
    if target.flat is not None and online.flat is not None \
            and target.flat.shape == online.flat.shape:
        target.flat *= 1.0 - tau
        target.flat += tau * online.flat
        return target
    for tw, ow in zip(target.weights, online.weights):
        tw *= 1.0 - tau
        tw += tau * ow
    for tb, ob in zip(target.biases, online.biases):
        tb *= 1.0 - tau
        tb += tau * ob
    return target
