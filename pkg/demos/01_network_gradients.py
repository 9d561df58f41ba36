"""Tour of the dense-network engine: exact gradients and Adam.

Run: python demos/01_network_gradients.py
"""

import numpy as np

from f2ddpg.nn import (AdamState, adam_step, mlp_backward, mlp_forward,
                       soft_update, xavier_uniform_init)

rng = np.random.default_rng(0)

print("=== exact gradients vs central finite differences ===")
params = xavier_uniform_init((4, 12, 3), rng)
x = rng.normal(size=4)
out, trace = mlp_forward(params, x)
upstream = rng.normal(size=3)
grads = mlp_backward(params, trace, upstream)

h = 1e-6
worst = 0.0
for idx in np.ndindex(4):
    xp = x.copy()
    xp[idx] += h
    hi = float(np.dot(upstream, mlp_forward(params, xp)[0]))
    xp[idx] -= 2 * h
    lo = float(np.dot(upstream, mlp_forward(params, xp)[0]))
    fd = (hi - lo) / (2 * h)
    worst = max(worst, abs(fd - grads.d_input[idx]))
print(f"input-gradient worst abs error vs finite differences: {worst:.2e}")
print("(the same input gradient drives the action-bias engine downstream)\n")

print("=== Adam fits a toy regression ===")
# y = sin(3x) on [-1, 1], tiny MLP, full-batch gradient via loop over samples
X = np.linspace(-1, 1, 64)
Y = np.sin(3 * X)
net = xavier_uniform_init((1, 16, 1), rng)
state = AdamState.zeros_like(net)
for it in range(400):
    total = [np.zeros_like(w) for w in net.weights]
    total_b = [np.zeros_like(b) for b in net.biases]
    loss = 0.0
    for x_i, y_i in zip(X, Y):
        pred, trace = mlp_forward(net, np.array([x_i]))
        err = pred[0] - y_i
        loss += err ** 2 / len(X)
        g = mlp_backward(net, trace, np.array([2 * err / len(X)]))
        for k in range(net.n_layers):
            total[k] += g.d_weights[k]
            total_b[k] += g.d_biases[k]
    g.d_weights, g.d_biases = total, total_b
    adam_step(net, g, state, lr=0.01)
    if it % 100 == 0 or it == 399:
        print(f"  iter {it:3d}: mse {loss:.5f}")

print("\n=== soft target updates contract toward the online network ===")
target = xavier_uniform_init((1, 16, 1), np.random.default_rng(99))
tau = 0.05
dist0 = max(np.max(np.abs(t - o)) for t, o in zip(target.weights, net.weights))
for k in (1, 10, 50):
    target2 = target.copy()
    for _ in range(k):
        soft_update(target2, net, tau)
    dist = max(np.max(np.abs(t - o)) for t, o in zip(target2.weights, net.weights))
    print(f"  after {k:2d} updates: distance {dist:.5f} "
          f"(predicted {(1 - tau) ** k * dist0:.5f})")
