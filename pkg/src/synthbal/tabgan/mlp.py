"""Minimal fully connected networks with hand-written backprop and Adam."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ..errors import ShapeMismatch

LEAKY_SLOPE = 0.2


@dataclass
class MlpParams:
    weights: list
    biases: list
    activations: list

    def __post_init__(self):
        if not (len(self.weights) == len(self.biases) == len(self.activations)):
            raise ShapeMismatch("weights, biases and activations must align")
        for a, b in zip(self.weights, self.weights[1:]):
            if a.shape[1] != b.shape[0]:
                raise ShapeMismatch(f"layer shapes do not chain: {a.shape} -> {b.shape}")

    @property
    def in_width(self) -> int:
        return self.weights[0].shape[0]

    @property
    def out_width(self) -> int:
        return self.weights[-1].shape[1]

    @property
    def hidden_widths(self) -> list:
        return [w.shape[1] for w in self.weights[:-1]]

    def arrays(self) -> list:
        """Flat parameter list in a fixed order (W0, b0, W1, b1, ...)."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def with_arrays(self, arrays) -> "MlpParams":
        return MlpParams(list(arrays[0::2]), list(arrays[1::2]), list(self.activations))

    def to_dict(self):
        return {
            "activations": list(self.activations),
            "shapes": [list(w.shape) for w in self.weights],
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            [np.asarray(w, dtype=float).reshape(s) for w, s in zip(d["weights"], d["shapes"])],
            [np.asarray(b, dtype=float) for b in d["biases"]],
            list(d["activations"]),
        )


def init_mlp(widths, hidden_activation, output_activation, rng) -> MlpParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialisation."""
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(rng.uniform(-bound, bound, size=fan_out))
    acts = [hidden_activation] * (len(widths) - 2) + [output_activation]
    return MlpParams(weights, biases, acts)


def _activate(kind, a):
    if kind == "relu":
        return np.maximum(a, 0.0)
    if kind == "leaky_relu":
        return np.where(a > 0, a, LEAKY_SLOPE * a)
    if kind == "linear":
        return a
    if kind == "sigmoid":
        return expit(a)
    raise ValueError(f"unknown activation {kind!r}")


def _activation_grad(kind, a, out):
    if kind == "relu":
        return (a > 0).astype(float)
    if kind == "leaky_relu":
        return np.where(a > 0, 1.0, LEAKY_SLOPE)
    if kind == "linear":
        return np.ones_like(a)
    if kind == "sigmoid":
        return out * (1.0 - out)
    raise ValueError(f"unknown activation {kind!r}")


def mlp_forward(p: MlpParams, batch: np.ndarray):
    """Run ``batch`` through the network.

    Returns ``(output, cache)`` where ``cache`` keeps each layer's input and
    pre-activation for :func:`mlp_backward`. ``cache["logits"]`` is the last
    pre-activation.
    """
    batch = np.asarray(batch, dtype=float)
    if batch.ndim != 2 or batch.shape[1] != p.in_width:
        raise ShapeMismatch(
            f"input width {batch.shape[-1] if batch.ndim else None} != {p.in_width}"
        )
    inputs, pre = [], []
    h = batch
    for w, b, act in zip(p.weights, p.biases, p.activations):
        inputs.append(h)
        a = h @ w + b
        pre.append(a)
        h = _activate(act, a)
    return h, {"inputs": inputs, "pre": pre, "output": h, "logits": pre[-1]}


def mlp_backward(p: MlpParams, cache, grad, wrt_logits: bool = False):
    """Backpropagate ``grad`` (d loss / d output) through the network.

    With ``wrt_logits=True`` the incoming gradient is taken with respect to
    the last pre-activation instead, which is how sigmoid + cross-entropy
    stays stable. Returns ``(param_grads, input_grad)`` with ``param_grads``
    in :meth:`MlpParams.arrays` order.
    """
    n_layers = len(p.weights)
    grads = [None] * (2 * n_layers)
    delta = np.asarray(grad, dtype=float)
    for i in reversed(range(n_layers)):
        if not (i == n_layers - 1 and wrt_logits):
            out = cache["output"] if i == n_layers - 1 else None
            delta = delta * _activation_grad(p.activations[i], cache["pre"][i], out)
        grads[2 * i] = cache["inputs"][i].T @ delta
        grads[2 * i + 1] = delta.sum(axis=0)
        delta = delta @ p.weights[i].T
    return grads, delta


@dataclass
class AdamState:
    m: list
    v: list
    step: int = 0
    beta1: float = 0.5
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, arrays, beta1=0.5, beta2=0.999, eps=1e-8):
        return cls(
            [np.zeros_like(a) for a in arrays],
            [np.zeros_like(a) for a in arrays],
            0,
            beta1,
            beta2,
            eps,
        )


def adam_step(params, grads, state: AdamState, lr: float):
    """One bias-corrected Adam update. Returns ``(new_params, new_state)``."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ShapeMismatch("params, grads and optimizer state must align")
    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    new_p, new_m, new_v = [], [], []
    for x, g, m, v in zip(params, grads, state.m, state.v):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        m_hat = m / (1 - b1**t)
        v_hat = v / (1 - b2**t)
        new_p.append(x - lr * m_hat / (np.sqrt(v_hat) + state.eps))
        new_m.append(m)
        new_v.append(v)
    return new_p, AdamState(new_m, new_v, t, b1, b2, state.eps)
