"""Minimal feed-forward network with explicit backprop, sized for this task.

Hidden layers use tanh; the output layer is linear for value heads or
tanh squashed onto per-dimension bounds for policy heads.  Networks are
tiny (default width 28, depth 4), so everything is plain numpy with no
autodiff.  backward() also returns the gradient with respect to the
input, which the deterministic policy gradient needs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, UsageError


@dataclass
class GradientSet:
    """Per-tensor gradients matching an Mlp plus the input gradient."""

    weights: list
    biases: list
    wrt_input: np.ndarray

    def scaled(self, factor: float) -> "GradientSet":
        return GradientSet(weights=[factor * w for w in self.weights],
                           biases=[factor * b for b in self.biases],
                           wrt_input=factor * self.wrt_input)


class Mlp:
    """Fully connected tanh network.

    widths lists every layer size including input and output, e.g.
    [8, 28, 28, 28, 28, 4].  Passing output_low/output_high turns the
    output layer into tanh heads scaled onto [low_i, high_i]; leaving
    them None keeps it linear.  final_layer_scale shrinks the output
    layer's initial weights, which keeps early policy/value outputs near
    zero and avoids saturating the squashed heads before training speaks.
    """

    def __init__(self, widths, output_low=None, output_high=None, rng=None,
                 final_layer_scale: float = 1.0):
        if len(widths) < 2 or any(w < 1 for w in widths):
            raise ContractViolation("widths must list >= 2 positive layer sizes")
        if (output_low is None) != (output_high is None):
            raise ContractViolation("output bounds must be given together")
        rng = np.random.default_rng(rng)
        self.widths = tuple(int(w) for w in widths)
        self.weights = []
        self.biases = []
        last = len(self.widths) - 2
        for i, (fan_in, fan_out) in enumerate(zip(self.widths[:-1], self.widths[1:])):
            bound = 1.0 / np.sqrt(fan_in)
            if i == last:
                bound *= final_layer_scale
            self.weights.append(rng.uniform(-bound, bound, (fan_in, fan_out)))
            self.biases.append(rng.uniform(-bound, bound, fan_out))
        if output_low is not None:
            self.output_low = np.broadcast_to(
                np.asarray(output_low, dtype=float), (self.widths[-1],)).copy()
            self.output_high = np.broadcast_to(
                np.asarray(output_high, dtype=float), (self.widths[-1],)).copy()
            if np.any(self.output_high < self.output_low):
                raise ContractViolation("output_high must be >= output_low")
        else:
            self.output_low = None
            self.output_high = None
        self._cache = None

    @property
    def bounded(self) -> bool:
        return self.output_low is not None

    @property
    def n_params(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)

    def forward(self, x) -> np.ndarray:
        """Evaluate the network, caching activations for backward()."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x2 = np.atleast_2d(x)
        if x2.shape[1] != self.widths[0]:
            raise ContractViolation(
                f"input width {x2.shape[1]} does not match declared {self.widths[0]}")
        activations = [x2]
        z = None
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = activations[-1] @ w + b
            if i < len(self.weights) - 1:
                activations.append(np.tanh(z))
        if self.bounded:
            squash = np.tanh(z)
            out = self.output_low + (self.output_high - self.output_low) * (squash + 1.0) / 2.0
        else:
            squash = None
            out = z
        self._cache = (activations, squash)
        return out[0] if single else out

    def backward(self, upstream) -> GradientSet:
        """Backpropagate an upstream dLoss/dOutput through the cached pass.

        Gradients are summed over the batch; scale the upstream (e.g. by
        1/batch) for means.
        """
        if self._cache is None:
            raise UsageError("backward() requires a preceding forward() call")
        activations, squash = self._cache
        g = np.atleast_2d(np.asarray(upstream, dtype=float))
        if g.shape != (activations[0].shape[0], self.widths[-1]):
            raise ContractViolation("upstream gradient shape does not match last forward")
        if self.bounded:
            g = g * (self.output_high - self.output_low) / 2.0 * (1.0 - squash ** 2)
        grad_w = [None] * len(self.weights)
        grad_b = [None] * len(self.biases)
        for i in range(len(self.weights) - 1, -1, -1):
            grad_w[i] = activations[i].T @ g
            grad_b[i] = g.sum(axis=0)
            g = g @ self.weights[i].T
            if i > 0:
                g = g * (1.0 - activations[i] ** 2)
        return GradientSet(weights=grad_w, biases=grad_b, wrt_input=g)

    def copy(self) -> "Mlp":
        clone = object.__new__(Mlp)
        clone.widths = self.widths
        clone.weights = [w.copy() for w in self.weights]
        clone.biases = [b.copy() for b in self.biases]
        clone.output_low = None if self.output_low is None else self.output_low.copy()
        clone.output_high = None if self.output_high is None else self.output_high.copy()
        clone._cache = None
        return clone

    def save(self, path) -> None:
        """Write parameters to an .npz checkpoint (layer order, row-major)."""
        payload = {"widths": np.asarray(self.widths)}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            payload[f"w{i}"] = w
            payload[f"b{i}"] = b
        if self.bounded:
            payload["low"] = self.output_low
            payload["high"] = self.output_high
        np.savez(path, **payload)

    @classmethod
    def load(cls, path) -> "Mlp":
        with np.load(path) as data:
            widths = [int(w) for w in data["widths"]]
            net = cls(widths,
                      output_low=data["low"] if "low" in data else None,
                      output_high=data["high"] if "high" in data else None)
            for i in range(len(net.weights)):
                net.weights[i] = data[f"w{i}"].copy()
                net.biases[i] = data[f"b{i}"].copy()
        return net


def _check_congruent(net: Mlp, grads: GradientSet) -> None:
    ok = (len(grads.weights) == len(net.weights)
          and all(g.shape == w.shape for g, w in zip(grads.weights, net.weights))
          and all(g.shape == b.shape for g, b in zip(grads.biases, net.biases)))
    if not ok:
        raise ContractViolation("gradient shapes do not match the network")


def sgd_update(net: Mlp, grads: GradientSet, lr: float) -> Mlp:
    """Plain in-place gradient descent step."""
    _check_congruent(net, grads)
    for w, gw in zip(net.weights, grads.weights):
        w -= lr * gw
    for b, gb in zip(net.biases, grads.biases):
        b -= lr * gb
    _assert_finite(net)
    return net


class AdamOptimizer:
    """Adam moments bound to one network's parameter tensors.

    weight_decay applies decoupled shrinkage (p *= 1 - lr * wd) each
    step; with squashed output heads it bounds the pre-activation scale
    so the heads cannot saturate beyond recovery.
    """

    def __init__(self, net: Mlp, lr: float = 1e-4, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8, weight_decay: float = 0.0):
        self.net = net
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0
        self._m = [np.zeros_like(p) for p in net.weights + net.biases]
        self._v = [np.zeros_like(p) for p in net.weights + net.biases]

    def step(self, grads: GradientSet) -> None:
        _check_congruent(self.net, grads)
        self.t += 1
        params = self.net.weights + self.net.biases
        gs = grads.weights + grads.biases
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        shrink = 1.0 - self.lr * self.weight_decay
        for p, g, m, v in zip(params, gs, self._m, self._v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            if self.weight_decay:
                p *= shrink
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
        _assert_finite(self.net)


def soft_update(target: Mlp, source: Mlp, tau: float) -> Mlp:
    """Polyak average the source into the target: t <- tau s + (1 - tau) t."""
    if not 0.0 <= tau <= 1.0:
        raise ContractViolation("tau must lie in [0, 1]")
    if target.widths != source.widths:
        raise ContractViolation("target and source networks differ in shape")
    for t, s in zip(target.weights + target.biases, source.weights + source.biases):
        t *= (1.0 - tau)
        t += tau * s
    return target


def _assert_finite(net: Mlp) -> None:
    for p in net.weights + net.biases:
        if not np.all(np.isfinite(p)):
            raise ContractViolation("network parameters became non-finite")
