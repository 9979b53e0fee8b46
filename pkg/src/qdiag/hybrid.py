"""Quantum-classical pipeline: normalize -> encode/circuit -> MLP -> softmax.

The model owns three frozen-shape pieces: min-max normalizer bounds, the
circuit angle table, and the dense network.  A forward pass normalizes the
five raw features into [0, 1], reads five z-expectations off the circuit,
and feeds them to the classifier.  Training updates circuit angles and
network parameters simultaneously with Adam; the gradient crosses the
quantum/classical boundary by chaining the network's input gradient through
the circuit's (block-diagonal) Jacobian.

Checkpoints are a small JSON document with floats printed at 17
significant digits, which round-trips IEEE doubles bit-exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .data import (
    LABELS,
    Dataset,
    NormalizerParams,
    apply_normalizer,
    fit_normalizer,
)
from .nn import (
    PROB_FLOOR,
    DenseLayer,
    MlpModel,
    adam_init,
    adam_step,
    init_mlp,
    mlp_backward_batch,
    mlp_forward_batch,
)
from .pqc import PqcParams, pqc_expectations_batch, pqc_jacobian_batch, random_pqc_params

CHECKPOINT_VERSION = 1
DEFAULT_HIDDEN_UNITS = 10


@dataclass
class HybridModel:
    """Normalizer bounds + circuit angles + dense classifier, dims chained."""

    normalizer: NormalizerParams
    pqc: PqcParams
    mlp: MlpModel

    def __post_init__(self) -> None:
        n = self.normalizer.num_features
        if self.pqc.num_qubits != n:
            raise ValueError(
                f"normalizer covers {n} features but the circuit has "
                f"{self.pqc.num_qubits} qubits"
            )
        if self.mlp.input_dim != self.pqc.num_qubits:
            raise ValueError(
                f"circuit emits {self.pqc.num_qubits} expectations but the "
                f"network expects {self.mlp.input_dim} inputs"
            )

    @property
    def num_classes(self) -> int:
        return self.mlp.output_dim


@dataclass
class TrainConfig:
    """Hyperparameters of one training protocol."""

    learning_rate: float = 0.01
    epochs: int = 150
    batch_size: int = 32
    num_runs: int = 25
    base_seed: int = 0
    gradient_method: str = "shift"  # "shift" (exact) or "fd" (central differences)
    fd_step: float = 1e-4
    hidden_units: int = DEFAULT_HIDDEN_UNITS
    train_fraction: float = 0.8

    def validate(self) -> None:
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        for name in ("epochs", "batch_size", "num_runs", "hidden_units"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1, got {getattr(self, name)}")
        if self.gradient_method not in ("shift", "fd"):
            raise ValueError(
                f"gradient_method must be 'shift' or 'fd', got {self.gradient_method!r}"
            )
        if not self.fd_step > 0:
            raise ValueError(f"fd_step must be positive, got {self.fd_step}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(
                f"train_fraction must be in (0, 1), got {self.train_fraction}"
            )


@dataclass
class RunMetrics:
    """Everything one training run reports.

    The epoch curves have epochs + 1 entries; entry 0 is the freshly
    initialized model before any update.  test_accuracy is computed as
    confusion trace over total, so the two always agree exactly.
    """

    seed: int
    epoch_train_accuracy: np.ndarray
    epoch_train_loss: np.ndarray
    final_train_accuracy: float
    final_train_loss: float
    test_accuracy: float
    test_loss: float
    confusion: np.ndarray  # (classes, classes) counts, rows = true class

    def confusion_row_percent(self) -> np.ndarray:
        return confusion_row_percent(self.confusion)


def confusion_row_percent(confusion: np.ndarray) -> np.ndarray:
    counts = np.asarray(confusion, dtype=np.float64)
    row_sums = counts.sum(axis=1, keepdims=True)
    return 100.0 * counts / np.where(row_sums > 0, row_sums, 1.0)


@dataclass
class SummaryReport:
    """Aggregate over several seeded runs: per-run metrics, the four
    mean/sample-std pairs, and the pooled confusion counts."""

    runs: list[RunMetrics]
    models: list[HybridModel]
    mean_train_accuracy: float
    std_train_accuracy: float
    mean_test_accuracy: float
    std_test_accuracy: float
    mean_train_loss: float
    std_train_loss: float
    mean_test_loss: float
    std_test_loss: float
    pooled_confusion: np.ndarray

    def best_run_index(self) -> int:
        return int(np.argmax([r.test_accuracy for r in self.runs]))


def new_hybrid_model(
    normalizer: NormalizerParams,
    seed: int = 0,
    hidden_units: int = DEFAULT_HIDDEN_UNITS,
    num_classes: int = len(LABELS),
) -> HybridModel:
    """Fresh model: circuit angles uniform in (-pi, pi), Glorot network."""
    rng = np.random.default_rng(seed)
    n = normalizer.num_features
    pqc = random_pqc_params(n, rng)
    mlp = init_mlp((n, hidden_units, num_classes), seed=int(rng.integers(2**31 - 1)))
    return HybridModel(normalizer, pqc, mlp)


def _as_feature_batch(model: HybridModel, features) -> np.ndarray:
    batch = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if batch.ndim != 2 or batch.shape[1] != model.normalizer.num_features:
        raise ValueError(
            f"expected rows of {model.normalizer.num_features} features, "
            f"got shape {np.asarray(features).shape}"
        )
    if not np.all(np.isfinite(batch)):
        raise ValueError("features contain non-finite values")
    return batch


def quantum_features(model: HybridModel, features) -> np.ndarray:
    """Normalized-and-measured circuit outputs for raw feature rows."""
    batch = _as_feature_batch(model, features)
    normed = apply_normalizer(model.normalizer, batch)
    return pqc_expectations_batch(normed, model.pqc)


def hybrid_forward_batch(model: HybridModel, features) -> np.ndarray:
    probs, _ = mlp_forward_batch(model.mlp, quantum_features(model, features))
    return probs


def hybrid_forward(model: HybridModel, features) -> np.ndarray:
    """Class probabilities for a single raw feature vector."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 1:
        raise ValueError("hybrid_forward takes one sample; use hybrid_forward_batch")
    return hybrid_forward_batch(model, features[None, :])[0]


def _mean_cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    picked = probs[np.arange(labels.size), labels]
    return float(np.mean(-np.log(np.maximum(picked, PROB_FLOOR))))


def model_parameters(model: HybridModel) -> list[np.ndarray]:
    """The trainable arrays in update order: angles, then W, b per layer."""
    params = [model.pqc.angles]
    for layer in model.mlp.layers:
        params.extend([layer.weights, layer.biases])
    return params


def with_parameters(model: HybridModel, params: list[np.ndarray]) -> HybridModel:
    """Same model shell around a new parameter list (normalizer untouched)."""
    expected = 1 + 2 * len(model.mlp.layers)
    if len(params) != expected:
        raise ValueError(f"expected {expected} parameter arrays, got {len(params)}")
    pqc = PqcParams(model.pqc.num_qubits, params[0])
    layers = [
        DenseLayer(params[1 + 2 * i], params[2 + 2 * i])
        for i in range(len(model.mlp.layers))
    ]
    return HybridModel(model.normalizer, pqc, MlpModel(layers))


def hybrid_gradients(
    model: HybridModel,
    features,
    labels,
    gradient_method: str = "shift",
    fd_step: float = 1e-4,
) -> tuple[list[np.ndarray], float]:
    """Mean-loss gradients for every trainable array, plus the loss itself.

    Network gradients are analytic.  Circuit gradients chain the network's
    per-sample input gradient through the circuit Jacobian (parameter-shift
    by default), then sum over the batch; the 1/batch factor already rides
    on the input gradient.
    """
    batch = _as_feature_batch(model, features)
    labels = np.asarray(labels)
    if labels.shape != (batch.shape[0],):
        raise ValueError(f"expected {batch.shape[0]} labels, got shape {labels.shape}")
    normed = apply_normalizer(model.normalizer, batch)
    expectations = pqc_expectations_batch(normed, model.pqc)
    probs, cache = mlp_forward_batch(model.mlp, expectations)
    loss = _mean_cross_entropy(probs, labels)
    mlp_grads = mlp_backward_batch(model.mlp, cache, labels)
    jac = pqc_jacobian_batch(normed, model.pqc, method=gradient_method, step=fd_step)
    angle_grads = np.einsum("bq,bqk->qk", mlp_grads.inputs, jac)
    grads = [angle_grads]
    for w, b in zip(mlp_grads.weights, mlp_grads.biases):
        grads.extend([w, b])
    return grads, loss


@dataclass
class EvalResult:
    accuracy: float
    loss: float
    confusion: np.ndarray


def evaluate(model: HybridModel, features, labels) -> EvalResult:
    """Accuracy (as confusion trace / total), mean loss, and counts."""
    labels = np.asarray(labels)
    probs = hybrid_forward_batch(model, features)
    predicted = np.argmax(probs, axis=1)
    classes = model.num_classes
    confusion = np.zeros((classes, classes), dtype=np.int64)
    np.add.at(confusion, (labels, predicted), 1)
    accuracy = float(np.trace(confusion) / confusion.sum())
    return EvalResult(accuracy, _mean_cross_entropy(probs, labels), confusion)


def _check_split_classes(labels: np.ndarray, side: str) -> None:
    present = set(np.unique(labels).tolist())
    missing = [name for i, name in enumerate(LABELS) if i not in present]
    if missing:
        raise ValueError(f"{side} split is missing class(es): {', '.join(missing)}")


def train_run(
    dataset: Dataset, config: TrainConfig, seed: int
) -> tuple[HybridModel, RunMetrics]:
    """One seeded run: fit the normalizer on the train split, train with
    mini-batch Adam, evaluate the test split once at the end."""
    config.validate()
    train_x, train_y = dataset.train
    test_x, test_y = dataset.test
    _check_split_classes(train_y, "train")
    _check_split_classes(test_y, "test")

    rng = np.random.default_rng(seed)
    normalizer = fit_normalizer(train_x)
    model = new_hybrid_model(
        normalizer, seed=int(rng.integers(2**31 - 1)), hidden_units=config.hidden_units
    )
    params = model_parameters(model)
    opt_state = adam_init(params, lr=config.learning_rate)

    n_train = train_x.shape[0]
    curve_acc = np.empty(config.epochs + 1)
    curve_loss = np.empty(config.epochs + 1)
    start_eval = evaluate(model, train_x, train_y)
    curve_acc[0], curve_loss[0] = start_eval.accuracy, start_eval.loss

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n_train)
        for lo in range(0, n_train, config.batch_size):
            pick = order[lo : lo + config.batch_size]
            grads, _ = hybrid_gradients(
                model,
                train_x[pick],
                train_y[pick],
                gradient_method=config.gradient_method,
                fd_step=config.fd_step,
            )
            params, opt_state = adam_step(params, grads, opt_state)
            model = with_parameters(model, params)
        epoch_eval = evaluate(model, train_x, train_y)
        curve_acc[epoch], curve_loss[epoch] = epoch_eval.accuracy, epoch_eval.loss

    test_eval = evaluate(model, test_x, test_y)
    metrics = RunMetrics(
        seed=seed,
        epoch_train_accuracy=curve_acc,
        epoch_train_loss=curve_loss,
        final_train_accuracy=float(curve_acc[-1]),
        final_train_loss=float(curve_loss[-1]),
        test_accuracy=test_eval.accuracy,
        test_loss=test_eval.loss,
        confusion=test_eval.confusion,
    )
    return model, metrics


def multi_seed_report(
    dataset: Dataset, config: TrainConfig, seeds: list[int] | None = None
) -> SummaryReport:
    """Repeat train_run over several seeds and aggregate Table-style stats.

    Seeds default to base_seed, base_seed + 1, ...; pass an explicit list
    to pin them.  Std is the sample standard deviation (ddof = 1).
    """
    config.validate()
    if seeds is None:
        seeds = [config.base_seed + i for i in range(config.num_runs)]
    if len(seeds) < 2:
        raise ValueError("aggregation needs at least 2 runs; call train_run for one")
    models, runs = [], []
    for seed in seeds:
        model, metrics = train_run(dataset, config, seed)
        models.append(model)
        runs.append(metrics)

    def stats(values: list[float]) -> tuple[float, float]:
        arr = np.array(values)
        return float(arr.mean()), float(arr.std(ddof=1))

    mean_tr_acc, std_tr_acc = stats([r.final_train_accuracy for r in runs])
    mean_te_acc, std_te_acc = stats([r.test_accuracy for r in runs])
    mean_tr_loss, std_tr_loss = stats([r.final_train_loss for r in runs])
    mean_te_loss, std_te_loss = stats([r.test_loss for r in runs])
    pooled = np.sum([r.confusion for r in runs], axis=0)
    return SummaryReport(
        runs=runs,
        models=models,
        mean_train_accuracy=mean_tr_acc,
        std_train_accuracy=std_tr_acc,
        mean_test_accuracy=mean_te_acc,
        std_test_accuracy=std_te_acc,
        mean_train_loss=mean_tr_loss,
        std_train_loss=std_tr_loss,
        mean_test_loss=mean_te_loss,
        std_test_loss=std_te_loss,
        pooled_confusion=pooled,
    )


# --- checkpoint serialization ----------------------------------------------


def _format_json(value, indent: int = 0) -> str:
    """JSON text with floats at 17 significant digits (bit-exact reload)."""
    pad = "  " * indent
    if isinstance(value, dict):
        body = ",\n".join(
            f"{pad}  {json.dumps(k)}: {_format_json(v, indent + 1)}"
            for k, v in value.items()
        )
        return "{\n" + body + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        parts = [_format_json(v, indent + 1) for v in value]
        if sum(len(p) for p in parts) <= 72 and not any("\n" in p for p in parts):
            return "[" + ", ".join(parts) + "]"
        body = ",\n".join(f"{pad}  {p}" for p in parts)
        return "[\n" + body + "\n" + pad + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise ValueError(f"cannot serialize non-finite number {value!r}")
        return f"{float(value):.17g}"
    if isinstance(value, str):
        return json.dumps(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def save_checkpoint(model: HybridModel, path) -> None:
    doc = {
        "version": CHECKPOINT_VERSION,
        "normalizer": {
            "min": model.normalizer.minimum.tolist(),
            "max": model.normalizer.maximum.tolist(),
        },
        "pqc": {
            "num_qubits": model.pqc.num_qubits,
            "angles": model.pqc.angles.tolist(),
        },
        "mlp": {
            "layers": [
                {
                    "rows": layer.out_dim,
                    "cols": layer.in_dim,
                    "weights": layer.weights.reshape(-1).tolist(),
                    "biases": layer.biases.tolist(),
                }
                for layer in model.mlp.layers
            ]
        },
    }
    with open(path, "w", encoding="ascii") as fh:
        fh.write(_format_json(doc) + "\n")


def _field(doc: dict, key: str, where: str):
    if not isinstance(doc, dict) or key not in doc:
        raise ValueError(f"checkpoint is missing field {where}.{key}")
    return doc[key]


def _float_list(values, expect: int, where: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (expect,):
        raise ValueError(f"checkpoint field {where} must hold {expect} numbers")
    return arr


def load_checkpoint(path) -> HybridModel:
    """Parse and validate a checkpoint; any defect raises ValueError."""
    with open(path, "r", encoding="ascii") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValueError(
                f"{path}: parse error at line {e.lineno}, column {e.colno}: {e.msg}"
            ) from None
    version = _field(doc, "version", "$")
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version!r}")

    norm_doc = _field(doc, "normalizer", "$")
    minimum = np.asarray(_field(norm_doc, "min", "normalizer"), dtype=np.float64)
    maximum = _float_list(
        _field(norm_doc, "max", "normalizer"), minimum.size, "normalizer.max"
    )
    if minimum.ndim != 1 or minimum.size == 0:
        raise ValueError("checkpoint field normalizer.min must be a flat number list")

    pqc_doc = _field(doc, "pqc", "$")
    num_qubits = _field(pqc_doc, "num_qubits", "pqc")
    if not isinstance(num_qubits, int):
        raise ValueError("checkpoint field pqc.num_qubits must be an integer")
    angles = np.asarray(_field(pqc_doc, "angles", "pqc"), dtype=np.float64)
    if angles.shape != (num_qubits, 3):
        raise ValueError(
            f"checkpoint field pqc.angles must be {num_qubits} rows of 3 angles, "
            f"got shape {angles.shape}"
        )

    mlp_doc = _field(doc, "mlp", "$")
    layer_docs = _field(mlp_doc, "layers", "mlp")
    if not isinstance(layer_docs, list) or not layer_docs:
        raise ValueError("checkpoint field mlp.layers must be a nonempty list")
    layers = []
    for i, layer_doc in enumerate(layer_docs):
        where = f"mlp.layers[{i}]"
        rows = _field(layer_doc, "rows", where)
        cols = _field(layer_doc, "cols", where)
        if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 1 or cols < 1:
            raise ValueError(f"checkpoint field {where} has invalid rows/cols")
        weights = _float_list(
            _field(layer_doc, "weights", where), rows * cols, f"{where}.weights"
        ).reshape(rows, cols)
        biases = _float_list(_field(layer_doc, "biases", where), rows, f"{where}.biases")
        layers.append(DenseLayer(weights, biases))

    try:
        return HybridModel(
            NormalizerParams(minimum, maximum),
            PqcParams(num_qubits, angles),
            MlpModel(layers),
        )
    except ValueError as e:
        raise ValueError(f"checkpoint is internally inconsistent: {e}") from None
