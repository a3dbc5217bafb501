"""Value functions over tabular models, plus dataset and game fixtures.

A model becomes a coalition game by masking: v(S) evaluates the model on an
input whose off-coalition features are replaced by a baseline (zeros by
default, or the training mean / a fixed vector).  Linear models additionally
get the O(d) closed form phi_i = w_i (x_i - baseline_i).  Synthetic games
(random tables, glove, majority, additive, unanimity) provide fixtures whose
exact Shapley values are known or cheap.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from shapx.core import (
    Attribution,
    CapacityError,
    CoalitionGame,
    ConfigError,
    RandomSource,
    bits_to_indicators,
    popcounts,
)
from shapx.amortized import decode_array, encode_array, load_container, save_container

TABLE_GAME_LIMIT = 20  # 2^20 value table tops out around 8 MB


class DataError(ValueError):
    """A dataset violates the input contract (missing values, bad labels...)."""


@dataclass
class Dataset:
    """Numeric feature matrix with one label vector."""

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple = ()
    label_name: str = "label"
    label_names: tuple = ()

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y)
        if self.X.ndim != 2:
            raise DataError(f"X must be 2-D, got shape {self.X.shape}")
        if self.y.shape != (self.X.shape[0],):
            raise DataError("y must have one entry per row of X")
        if not self.feature_names:
            self.feature_names = tuple(f"x{i}" for i in range(self.X.shape[1]))

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def is_classification(self) -> bool:
        return self.y.dtype.kind in "iu"


def load_csv_dataset(path, label_column: str = "label") -> Dataset:
    """CSV with a header row; one label column, all other columns numeric.

    Missing or non-numeric feature cells are rejected with row/column
    diagnostics.  Integer-like labels become class indices; other strings are
    mapped to sorted categorical indices; float labels stay continuous.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if label_column not in header:
            raise DataError(f"{path}: no column named {label_column!r} in header {header}")
        label_idx = header.index(label_column)
        feature_names = tuple(h for i, h in enumerate(header) if i != label_idx)
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(f"{path}: row {lineno} has {len(row)} cells, expected {len(header)}")
            feats = []
            for i, cell in enumerate(row):
                if i == label_idx:
                    labels.append(cell.strip())
                    continue
                cell = cell.strip()
                if cell == "":
                    raise DataError(f"{path}: row {lineno}, column {header[i]!r}: missing value")
                try:
                    feats.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}: row {lineno}, column {header[i]!r}: non-numeric value {cell!r}"
                    ) from None
            rows.append(feats)
    if not rows:
        raise DataError(f"{path}: no data rows")
    x_mat = np.array(rows, dtype=np.float64)
    y_arr, label_names = _parse_labels(labels, path, label_column)
    return Dataset(x_mat, y_arr, feature_names, label_column, label_names)


def _parse_labels(labels, path, column):
    missing = [k + 2 for k, cell in enumerate(labels) if cell == ""]
    if missing:
        raise DataError(f"{path}: row {missing[0]}, column {column!r}: missing value")
    try:
        ints = [int(cell) for cell in labels]
        return np.array(ints, dtype=np.int64), ()
    except ValueError:
        pass
    try:
        return np.array([float(c) for c in labels], dtype=np.float64), ()
    except ValueError:
        names = tuple(sorted(set(labels)))
        index = {name: k for k, name in enumerate(names)}
        return np.array([index[c] for c in labels], dtype=np.int64), names


def make_linear_dataset(
    n_features: int, n_rows: int, seed: int = 0, noise: float = 0.0
) -> tuple:
    """Gaussian design with a known linear response; returns (dataset, w, b).

    Labels are the (optionally noisy) responses y = X w + b, so fitting a
    linear model should recover w.
    """
    gen = RandomSource(seed).generator()
    w = gen.uniform(-2.0, 2.0, size=n_features)
    b = float(gen.uniform(-1.0, 1.0))
    x_mat = gen.normal(size=(n_rows, n_features))
    y = x_mat @ w + b
    if noise:
        y = y + noise * gen.normal(size=n_rows)
    return Dataset(x_mat, y), w, b


@dataclass(frozen=True)
class MaskingRule:
    """How off-coalition features are filled in: zeros, the model's training
    mean, or a fixed vector."""

    baseline: str = "zeros"
    vector: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.baseline not in ("zeros", "training_mean", "fixed"):
            raise ConfigError(f"unknown baseline {self.baseline!r}")
        if self.baseline == "fixed":
            if self.vector is None:
                raise ConfigError("fixed baseline needs a vector")
            object.__setattr__(self, "vector", np.asarray(self.vector, dtype=np.float64))

    def baseline_for(self, model: "TabularModel") -> np.ndarray:
        if self.baseline == "zeros":
            return np.zeros(model.n_features)
        if self.baseline == "fixed":
            if self.vector.shape != (model.n_features,):
                raise ConfigError(
                    f"baseline vector has shape {self.vector.shape}, model expects "
                    f"({model.n_features},)"
                )
            return self.vector
        if model.feature_means is None:
            raise ConfigError("model has no stored training mean; fit it first or use another baseline")
        return model.feature_means


@dataclass
class TabularModel:
    """Deterministic tabular predictor: affine, softmax-linear, or a small MLP.

    ``predict`` returns raw per-class scores (no softmax layer); class
    probabilities, when meaningful, come from ``predict_proba``.
    """

    kind: str
    weights: list
    biases: list
    n_features: int
    n_classes: int
    feature_means: Optional[np.ndarray] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("linear", "logistic", "mlp"):
            raise ConfigError(f"unknown model kind {self.kind!r}")

    def predict(self, x_mat: np.ndarray) -> np.ndarray:
        """(n, f) inputs -> (n, K) scores."""
        h = np.asarray(x_mat, dtype=np.float64)
        if h.ndim == 1:
            h = h[None, :]
        if h.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {h.shape[1]}")
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if k < last:
                h = np.where(h > 0, h, np.expm1(h))  # elu hidden layers
        return h

    def predict_proba(self, x_mat: np.ndarray) -> np.ndarray:
        scores = self.predict(x_mat)
        scores = scores - scores.max(axis=1, keepdims=True)
        e = np.exp(scores)
        return e / e.sum(axis=1, keepdims=True)

    def predict_class(self, x_mat: np.ndarray) -> np.ndarray:
        return self.predict(x_mat).argmax(axis=1)


@dataclass
class ClassifierConfig:
    """Training knobs for the built-in tabular models."""

    learning_rate: float = 5e-2
    epochs: int = 200
    batch_size: int = 256
    hidden: int = 64
    depth: int = 2
    seed: int = 0
    mask_augment: bool = False
    mask_rule: MaskingRule = field(default_factory=MaskingRule)

    def __post_init__(self):
        if self.learning_rate <= 0 or self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("learning_rate, epochs, batch_size must be positive")


def train_tabular_classifier(
    dataset: Dataset, kind: str = "logistic", config: Optional[ClassifierConfig] = None
) -> TabularModel:
    """Fit a built-in model; deterministic under the config seed.

    ``linear`` is a least-squares fit (one-hot targets for integer labels,
    the raw response otherwise).  ``logistic`` and ``mlp`` minimize softmax
    cross-entropy with Adam.  ``mask_augment`` trains on randomly masked rows
    (mask size uniform over 0..f) so the model doubles as a value function on
    masked inputs; the choice is recorded in model metadata.
    """
    config = config or ClassifierConfig()
    x_mat = dataset.X
    n, f = x_mat.shape
    means = x_mat.mean(axis=0)
    if dataset.is_classification:
        classes, counts = np.unique(dataset.y, return_counts=True)
        if classes.size < 2:
            raise DataError(f"need at least 2 classes, got {classes.size}")
        if counts.min() < 10:
            raise DataError(f"need >= 10 rows per class, smallest class has {counts.min()}")
        if not np.array_equal(classes, np.arange(classes.size)):
            raise DataError(f"class labels must be 0..K-1, got {classes}")
        k_out = classes.size
        onehot = np.zeros((n, k_out))
        onehot[np.arange(n), dataset.y] = 1.0
        targets = onehot
    else:
        if kind != "linear":
            raise DataError(f"continuous labels need kind='linear', got {kind!r}")
        k_out = 1
        targets = dataset.y[:, None]

    metadata = {
        "mask_augment": config.mask_augment,
        "mask_sizes": "uniform 0..f" if config.mask_augment else None,
        "seed": config.seed,
    }
    if kind == "linear":
        design = np.column_stack([x_mat, np.ones(n)])
        sol, *_ = np.linalg.lstsq(design, targets, rcond=None)
        model = TabularModel(
            kind, [sol[:-1]], [sol[-1]], f, k_out, feature_means=means, metadata=metadata
        )
        return model

    gen = RandomSource(config.seed).generator()
    if kind == "logistic":
        widths = (f, k_out)
    else:
        widths = (f,) + (config.hidden,) * config.depth + (k_out,)
    weights = [
        gen.uniform(-1 / np.sqrt(a), 1 / np.sqrt(a), size=(a, b))
        for a, b in zip(widths[:-1], widths[1:])
    ]
    biases = [np.zeros(b) for b in widths[1:]]
    model = TabularModel(kind, weights, biases, f, k_out, feature_means=means, metadata=metadata)
    baseline = config.mask_rule.baseline_for(model) if config.mask_augment else None

    m_slots = [np.zeros_like(w) for w in weights] + [np.zeros_like(b) for b in biases]
    v_slots = [np.zeros_like(p) for p in m_slots]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0
    for epoch in range(config.epochs):
        order = gen.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            xb = x_mat[idx]
            if config.mask_augment:
                sizes = gen.integers(0, f + 1, size=idx.size)
                keys = gen.random((idx.size, f))
                keep = keys.argsort(axis=1).argsort(axis=1) < sizes[:, None]
                xb = np.where(keep, xb, baseline)
            tb = targets[idx]
            # forward with cached pre-activations
            acts, pres = [xb], []
            h = xb
            for k in range(len(weights)):
                z = h @ weights[k] + biases[k]
                pres.append(z)
                h = np.where(z > 0, z, np.expm1(z)) if k < len(weights) - 1 else z
                acts.append(h)
            scores = h - h.max(axis=1, keepdims=True)
            e = np.exp(scores)
            probs = e / e.sum(axis=1, keepdims=True)
            delta = (probs - tb) / idx.size
            grads_w, grads_b = [None] * len(weights), [None] * len(weights)
            for k in range(len(weights) - 1, -1, -1):
                grads_w[k] = acts[k].T @ delta
                grads_b[k] = delta.sum(axis=0)
                if k > 0:
                    dz = np.where(pres[k - 1] > 0, 1.0, np.exp(pres[k - 1]))
                    delta = (delta @ weights[k].T) * dz
            step += 1
            params = weights + biases
            grads = grads_w + grads_b
            for j, (p, g) in enumerate(zip(params, grads)):
                m_slots[j] = beta1 * m_slots[j] + (1 - beta1) * g
                v_slots[j] = beta2 * v_slots[j] + (1 - beta2) * g * g
                mh = m_slots[j] / (1 - beta1**step)
                vh = v_slots[j] / (1 - beta2**step)
                p -= config.learning_rate * mh / (np.sqrt(vh) + eps)
    return model


def masked_game(
    model: TabularModel,
    x: np.ndarray,
    class_index: Optional[int] = None,
    rule: Optional[MaskingRule] = None,
) -> CoalitionGame:
    """Coalition game v(S) = model score of the target class on x masked to S.

    The class defaults to the model's prediction on the unmasked input.
    Evaluation is vectorized over subset batches.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.n_features,):
        raise ValueError(f"x must have shape ({model.n_features},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    rule = rule or MaskingRule()
    baseline = rule.baseline_for(model)
    if class_index is None:
        class_index = int(model.predict_class(x[None, :])[0])
    if not 0 <= class_index < model.n_classes:
        raise ValueError(f"class {class_index} out of range for {model.n_classes} classes")
    d = model.n_features

    def batch(bits: np.ndarray) -> np.ndarray:
        member = bits_to_indicators(bits, d)
        masked = member * x[None, :] + (1.0 - member) * baseline[None, :]
        return model.predict(masked)[:, class_index]

    def single(subset) -> float:
        return float(batch(np.array([subset.bits], dtype=np.uint64))[0])

    return CoalitionGame(single, d, batch_evaluate=batch)


def linear_model_shapley(
    weights: np.ndarray,
    bias: float,
    x: np.ndarray,
    baseline: Optional[np.ndarray] = None,
) -> Attribution:
    """Closed form for affine models: phi_i = w_i (x_i - baseline_i), O(d).

    The bias cancels in every marginal contribution and is accepted only to
    mirror the model signature.
    """
    del bias
    weights = np.asarray(weights, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if weights.shape != x.shape:
        raise ValueError(f"weights {weights.shape} and x {x.shape} must match")
    base = np.zeros_like(x) if baseline is None else np.asarray(baseline, dtype=np.float64)
    if base.shape != x.shape:
        raise ValueError(f"baseline {base.shape} and x {x.shape} must match")
    return Attribution(
        phi=weights * (x - base), method="linear_closed_form", samples_used=0, seed=0
    )


SYNTHETIC_KINDS = ("random_uniform", "glove", "majority", "additive", "unanimity")


def synthetic_game(
    kind: str,
    d: int,
    seed: int = 0,
    coalition: Sequence[int] = (0, 1),
    coefficients: Optional[np.ndarray] = None,
) -> CoalitionGame:
    """Deterministic fixture games.

    random_uniform: i.i.d. U(-1, 1) value table (d capped by table size).
    glove: v = 1 iff player 0 and at least one of the others are present.
    majority: v = 1 iff |S| > d/2.
    additive: v(S) = sum of per-player coefficients (seeded U(-1,1) default).
    unanimity: v = 1 iff the given coalition is contained in S.
    """
    if kind not in SYNTHETIC_KINDS:
        raise ConfigError(f"unknown synthetic game {kind!r}; choose from {SYNTHETIC_KINDS}")
    if kind == "random_uniform":
        if d > TABLE_GAME_LIMIT:
            raise CapacityError(f"random table game supports d <= {TABLE_GAME_LIMIT}, got {d}")
        table = RandomSource(seed).generator().uniform(-1.0, 1.0, size=1 << d)
        return CoalitionGame(None, d, table=table)
    if kind == "glove":
        if d < 2:
            raise ConfigError("glove game needs d >= 2")
        rest = np.uint64((1 << d) - 2)

        def glove_batch(bits):
            has_left = bits & np.uint64(1) > 0
            has_right = bits & rest > 0
            return (has_left & has_right).astype(np.float64)

        return CoalitionGame(None, d, batch_evaluate=glove_batch)
    if kind == "majority":

        def majority_batch(bits):
            return (popcounts(bits) > d / 2).astype(np.float64)

        return CoalitionGame(None, d, batch_evaluate=majority_batch)
    if kind == "additive":
        if coefficients is None:
            coefficients = RandomSource(seed).generator().uniform(-1.0, 1.0, size=d)
        coeffs = np.asarray(coefficients, dtype=np.float64)
        if coeffs.shape != (d,):
            raise ConfigError(f"need {d} coefficients, got shape {coeffs.shape}")

        def additive_batch(bits):
            return bits_to_indicators(bits, d) @ coeffs

        return CoalitionGame(None, d, batch_evaluate=additive_batch)
    # unanimity
    members = tuple(sorted(set(int(i) for i in coalition)))
    if not members or any(i < 0 or i >= d for i in members):
        raise ConfigError(f"coalition {coalition} out of range for d={d}")
    need = np.uint64(sum(1 << i for i in members))

    def unanimity_batch(bits):
        return ((bits & need) == need).astype(np.float64)

    return CoalitionGame(None, d, batch_evaluate=unanimity_batch)


def save_model(path, model: TabularModel):
    payload = {
        "model_kind": model.kind,
        "n_features": model.n_features,
        "n_classes": model.n_classes,
        "weights": [encode_array(w) for w in model.weights],
        "biases": [encode_array(b) for b in model.biases],
        "feature_means": None if model.feature_means is None else encode_array(model.feature_means),
        "metadata": model.metadata,
    }
    save_container(path, "tabular-model", payload)


def load_model(path) -> TabularModel:
    doc = load_container(path, expect_kind="tabular-model")
    return TabularModel(
        kind=doc["model_kind"],
        weights=[decode_array(w) for w in doc["weights"]],
        biases=[decode_array(b) for b in doc["biases"]],
        n_features=doc["n_features"],
        n_classes=doc["n_classes"],
        feature_means=None if doc["feature_means"] is None else decode_array(doc["feature_means"]),
        metadata=doc.get("metadata", {}),
    )
