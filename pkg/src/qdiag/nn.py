"""Small dense softmax classifier with hand-rolled backprop and Adam.

The default topology is 5-10-3: ELU on the hidden layer, softmax on the
output, categorical cross-entropy loss.  Forward passes cache the
pre-activations so the backward pass can run analytically; the softmax and
cross-entropy gradients are fused into the usual (p - onehot) form.  The
backward pass also returns the gradient with respect to the network input,
which is what lets an upstream feature extractor train jointly.

All functions are pure: parameters in, parameters out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Probabilities are floored here before the log so a confident wrong
# prediction costs at most -ln(1e-12) instead of infinity.
PROB_FLOOR = 1e-12


@dataclass
class DenseLayer:
    """Affine map y = W x + b with W of shape (out_dim, in_dim)."""

    weights: np.ndarray
    biases: np.ndarray

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64)
        if self.weights.ndim != 2:
            raise ValueError(f"weights must be 2-D, got shape {self.weights.shape}")
        if self.biases.shape != (self.weights.shape[0],):
            raise ValueError(
                f"biases shape {self.biases.shape} does not match "
                f"{self.weights.shape[0]} output rows"
            )
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.biases))):
            raise ValueError("layer parameters must be finite")

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass
class MlpModel:
    """Stack of dense layers; every layer but the last is followed by ELU."""

    layers: list[DenseLayer]

    def __post_init__(self) -> None:
        if len(self.layers) < 1:
            raise ValueError("model needs at least one layer")
        for a, b in zip(self.layers, self.layers[1:]):
            if a.out_dim != b.in_dim:
                raise ValueError(
                    f"layer output dim {a.out_dim} feeds layer input dim {b.in_dim}"
                )

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim


def elu(x: np.ndarray) -> np.ndarray:
    """ELU with alpha = 1; expm1 keeps the negative branch accurate near 0."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x >= 0.0, x, np.expm1(np.minimum(x, 0.0)))


def elu_grad(x: np.ndarray) -> np.ndarray:
    """Derivative of elu; the kink at 0 takes the left/right-agreeing value 1."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x >= 0.0, 1.0, np.exp(np.minimum(x, 0.0)))


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shifted by the row max for stability."""
    logits = np.asarray(logits, dtype=np.float64)
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(probs: np.ndarray, label: int) -> float:
    """-ln P(correct class), with the probability floored at PROB_FLOOR."""
    probs = np.asarray(probs, dtype=np.float64)
    if not 0 <= label < probs.shape[-1]:
        raise ValueError(f"label {label} out of range for {probs.shape[-1]} classes")
    return float(-np.log(max(float(probs[label]), PROB_FLOOR)))


def init_mlp(shape: tuple[int, ...] = (5, 10, 3), seed: int = 0) -> MlpModel:
    """Glorot-uniform weights, zero biases, reproducible from the seed."""
    if len(shape) < 2 or any(d < 1 for d in shape):
        raise ValueError(f"shape must list at least two positive dims, got {shape}")
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out in zip(shape, shape[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        layers.append(DenseLayer(weights, np.zeros(fan_out)))
    return MlpModel(layers)


@dataclass
class ForwardCache:
    """Intermediates of one batched forward pass, consumed by the backward."""

    inputs: list[np.ndarray]  # input to each layer, shape (batch, in_dim)
    pre_acts: list[np.ndarray]  # W x + b per layer, shape (batch, out_dim)
    probs: np.ndarray  # softmax output, shape (batch, classes)


@dataclass
class MlpGradients:
    """Loss gradients for every layer plus the network input."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    inputs: np.ndarray


def _as_batch(x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return x[None, :], True
    if x.ndim == 2:
        return x, False
    raise ValueError(f"expected a vector or a batch of vectors, got shape {x.shape}")


def mlp_forward_batch(model: MlpModel, batch) -> tuple[np.ndarray, ForwardCache]:
    """Class probabilities for a (batch, input_dim) array."""
    batch, _ = _as_batch(batch)
    if batch.shape[1] != model.input_dim:
        raise ValueError(
            f"input width {batch.shape[1]} does not match model input "
            f"dim {model.input_dim}"
        )
    if not np.all(np.isfinite(batch)):
        raise ValueError("network input contains non-finite values")
    inputs, pre_acts = [], []
    a = batch
    for i, layer in enumerate(model.layers):
        inputs.append(a)
        z = a @ layer.weights.T + layer.biases
        pre_acts.append(z)
        a = z if i == len(model.layers) - 1 else elu(z)
    probs = softmax(a)
    return probs, ForwardCache(inputs, pre_acts, probs)


def mlp_forward(model: MlpModel, x) -> tuple[np.ndarray, ForwardCache]:
    """Single-sample wrapper around the batched forward."""
    x, was_vector = _as_batch(x)
    if not was_vector:
        raise ValueError("mlp_forward takes one sample; use mlp_forward_batch")
    probs, cache = mlp_forward_batch(model, x)
    return probs[0], cache


def mlp_backward_batch(model: MlpModel, cache: ForwardCache, labels) -> MlpGradients:
    """Gradients of the mean cross-entropy over the batch.

    Weight and bias gradients are averaged across the batch.  The input
    gradient keeps its per-sample rows (each already scaled by 1/batch) so
    a caller can chain it into whatever produced each sample.
    """
    labels = np.asarray(labels)
    probs = cache.probs
    n, classes = probs.shape
    if labels.shape != (n,):
        raise ValueError(f"expected {n} labels, got shape {labels.shape}")
    if np.any(labels < 0) or np.any(labels >= classes):
        raise ValueError("label out of range")
    onehot = np.zeros_like(probs)
    onehot[np.arange(n), labels] = 1.0
    # Fused softmax + cross-entropy gradient, averaged over the batch.
    delta = (probs - onehot) / n
    weight_grads: list[np.ndarray] = [None] * len(model.layers)  # type: ignore[list-item]
    bias_grads: list[np.ndarray] = [None] * len(model.layers)  # type: ignore[list-item]
    for i in reversed(range(len(model.layers))):
        weight_grads[i] = delta.T @ cache.inputs[i]
        bias_grads[i] = delta.sum(axis=0)
        delta = delta @ model.layers[i].weights
        if i > 0:
            delta = delta * elu_grad(cache.pre_acts[i - 1])
    return MlpGradients(weight_grads, bias_grads, delta)


def mlp_backward(model: MlpModel, cache: ForwardCache, label: int) -> MlpGradients:
    """Single-sample gradients; the input gradient comes back as a vector."""
    grads = mlp_backward_batch(model, cache, np.array([label]))
    return MlpGradients(grads.weights, grads.biases, grads.inputs[0])


@dataclass
class AdamState:
    """First/second moment accumulators plus the step counter."""

    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)


def adam_init(params: list[np.ndarray], lr: float = 0.01) -> AdamState:
    if not lr > 0.0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    return AdamState(
        lr=lr,
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
    )


def adam_step(
    params: list[np.ndarray], grads: list[np.ndarray], state: AdamState
) -> tuple[list[np.ndarray], AdamState]:
    """One bias-corrected Adam update; returns new params and new state."""
    if len(params) != len(state.m) or len(grads) != len(params):
        raise ValueError("params, grads and optimizer state must align")
    t = state.step_count + 1
    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * g * g
        m_hat = m / (1.0 - state.beta1**t)
        v_hat = v / (1.0 - state.beta2**t)
        new_params.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
        new_m.append(m)
        new_v.append(v)
    return new_params, AdamState(
        lr=state.lr,
        beta1=state.beta1,
        beta2=state.beta2,
        eps=state.eps,
        step_count=t,
        m=new_m,
        v=new_v,
    )
